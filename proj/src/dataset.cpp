#include "gemmed/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gemmed/errors.hpp"

namespace gemmed {

void LabeledDataset::validate() const {
  if (!labels.empty() && labels.size() != size()) {
    throw InputError("dataset: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(size()) + " rows");
  }
  if (!anomaly.empty() && anomaly.size() != size()) {
    throw InputError("dataset: anomaly flag count does not match row count");
  }
  for (int y : labels) {
    if (y != 1 && y != -1) throw InputError("dataset: labels must be -1 or +1, got " + std::to_string(y));
  }
  if (!features.allFinite()) throw InputError("dataset: non-finite feature value");
}

void LabeledDataset::validate_two_class() const {
  validate();
  if (labels.empty()) throw InputError("dataset: labels required");
  if (class_count(+1) == 0 || class_count(-1) == 0) {
    throw InputError("dataset: both classes (-1 and +1) must be present");
  }
}

std::vector<std::size_t> LabeledDataset::class_indices(int label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) out.push_back(i);
  }
  return out;
}

std::size_t LabeledDataset::class_count(int label) const {
  std::size_t n = 0;
  for (int y : labels) n += (y == label);
  return n;
}

LabeledDataset LabeledDataset::subset(const std::vector<std::size_t>& rows) const {
  LabeledDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(rows[r]));
    if (!labels.empty()) out.labels.push_back(labels[rows[r]]);
    if (!anomaly.empty()) out.anomaly.push_back(anomaly[rows[r]]);
  }
  return out;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double(const std::string& cell, std::size_t line_no) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InputError("csv line " + std::to_string(line_no) + ": cannot parse number '" + cell + "'");
  }
  return v;
}

}  // namespace

LabeledDataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("csv: empty input");
  const auto header = split_row(line);
  int y_col = -1;
  int anomaly_col = -1;
  std::vector<int> x_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& h = header[c];
    if (h == "y") {
      y_col = static_cast<int>(c);
    } else if (h == "is_anomaly") {
      anomaly_col = static_cast<int>(c);
    } else if (h.size() > 1 && h[0] == 'x' &&
               h.find_first_not_of("0123456789", 1) == std::string::npos) {
      const std::size_t idx = std::stoul(h.substr(1));
      if (idx != x_cols.size() + 1) throw InputError("csv: feature columns must be x1..xd in order");
      x_cols.push_back(static_cast<int>(c));
    } else {
      throw InputError("csv: unexpected column '" + h + "'");
    }
  }
  if (x_cols.empty()) throw InputError("csv: no feature columns (x1..xd)");

  std::vector<std::vector<double>> rows;
  LabeledDataset data;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_row(line);
    if (cells.size() != header.size()) {
      throw InputError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    std::vector<double> x;
    for (int c : x_cols) x.push_back(parse_double(cells[static_cast<std::size_t>(c)], line_no));
    rows.push_back(std::move(x));
    if (y_col >= 0) data.labels.push_back(static_cast<int>(parse_double(cells[static_cast<std::size_t>(y_col)], line_no)));
    if (anomaly_col >= 0) {
      const double a = parse_double(cells[static_cast<std::size_t>(anomaly_col)], line_no);
      if (a != 0.0 && a != 1.0) throw InputError("csv line " + std::to_string(line_no) + ": is_anomaly must be 0 or 1");
      data.anomaly.push_back(a == 1.0);
    }
  }
  data.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(x_cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < x_cols.size(); ++c) {
      data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  data.validate();
  return data;
}

LabeledDataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "' for reading");
  return read_csv(in);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const LabeledDataset& data, bool with_anomaly_column) {
  const bool labeled = data.has_labels();
  bool first = true;
  auto sep = [&] {
    if (!first) out << ',';
    first = false;
  };
  if (labeled) { sep(); out << 'y'; }
  for (Eigen::Index c = 0; c < data.dim(); ++c) { sep(); out << 'x' << (c + 1); }
  if (with_anomaly_column) { sep(); out << "is_anomaly"; }
  out << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    first = true;
    if (labeled) { sep(); out << data.labels[r]; }
    for (Eigen::Index c = 0; c < data.dim(); ++c) {
      sep();
      out << format_double(data.features(static_cast<Eigen::Index>(r), c));
    }
    if (with_anomaly_column) {
      sep();
      out << (data.has_anomaly_flags() && data.anomaly[r] ? 1 : 0);
    }
    out << '\n';
  }
}

void write_csv_file(const std::string& path, const LabeledDataset& data, bool with_anomaly_column) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  write_csv(out, data, with_anomaly_column);
  if (!out) throw InputError("write to '" + path + "' failed");
}

}  // namespace gemmed
