#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gemmed {

// Class labels are +1/-1. Per-class quantities are stored in a two-slot array
// indexed by class_slot(label): slot 0 is -1, slot 1 is +1.
template <typename T>
using PerClass = std::array<T, 2>;

inline constexpr std::size_t class_slot(int label) { return label > 0 ? 1 : 0; }
inline constexpr int slot_label(std::size_t slot) { return slot == 1 ? +1 : -1; }

// Rows of `features` are samples. `labels` and `anomaly` are either empty
// (unlabeled / unknown) or hold one entry per sample.
struct LabeledDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<bool> anomaly;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  Eigen::Index dim() const { return features.cols(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_anomaly_flags() const { return !anomaly.empty(); }

  // Throws InputError on shape mismatch or labels outside {-1,+1}.
  void validate() const;
  // As validate(), additionally requiring labels and both classes present.
  void validate_two_class() const;

  std::vector<std::size_t> class_indices(int label) const;
  std::size_t class_count(int label) const;

  LabeledDataset subset(const std::vector<std::size_t>& rows) const;
};

// CSV layout: header with `y` (optional for unlabeled data), feature columns
// `x1..xd`, and an optional `is_anomaly` column of 0/1.
LabeledDataset read_csv(std::istream& in);
LabeledDataset read_csv_file(const std::string& path);

void write_csv(std::ostream& out, const LabeledDataset& data, bool with_anomaly_column);
void write_csv_file(const std::string& path, const LabeledDataset& data, bool with_anomaly_column);

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double value);

}  // namespace gemmed
