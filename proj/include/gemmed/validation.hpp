#pragma once

// Randomized self-checks of the trainer against exact enumeration: dual
// gradient vs. finite differences, and Gibbs expectations vs. exact ones.

#include <cstdint>

#include "gemmed/oracle.hpp"
#include "gemmed/trainer.hpp"

namespace gemmed {

struct ValidationInstance {
  PosteriorModel model;
  DualState state;
  double lambda_cap = 0.0;
};

// n points uniform in [-2,2]^2, alternating labels, rbf gamma = 1, random
// distances, priors and interior dual values. Needs 2 <= n <= 16.
ValidationInstance random_validation_instance(std::size_t n, std::uint64_t seed);

// Largest |analytic - numeric| / max(|analytic|, |numeric|, 1) over all
// coordinates, with the numeric gradient from central differences of the
// exact dual (step h).
double gradient_check(const ValidationInstance& instance, double h = 1e-4);

struct SamplerCheck {
  double max_z = 0.0;          // largest |gibbs - exact| / standard error
  int statistics = 0;
  int within = 0;              // statistics with |z| <= 3
  bool all_within() const { return within == statistics; }
};

SamplerCheck sampler_check(const ValidationInstance& instance, const GibbsSettings& settings, std::uint64_t seed);

}  // namespace gemmed
