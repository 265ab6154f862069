#pragma once

// Convergence experiment: the per-reference SNE cost at the true latent
// coordinates against the closed-form D1 of the perplexity-calibrated
// pull-back metric, compared up to an affine map.

#include <cstdint>
#include <vector>

#include "alphadisc/geometry.hpp"

namespace alphadisc {

struct Theorem6Config {
  double radius = 3.0;
  double perplexity = 20.0;
  std::vector<std::size_t> n_list{128, 256, 512, 1024};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  /// Only reference points with |y| <= interior_fraction * radius enter the
  /// fit, so that neighbourhoods are not cut by the ball boundary.
  double interior_fraction = 0.5;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct Theorem6Row {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double residual = 0.0;           // RMS of the affine least-squares fit
  double closed_form_value = 0.0;  // mean D1 of J^T M J over fitted points
  double calibrated_closed_form_mean = 0.0;  // mean D1 of lambda_i J^T M J
  double sne_cost_mean = 0.0;
  double slope = 0.0;
  double offset = 0.0;
  std::size_t reference_count = 0;  // points used in the fit
};

/// One row per (n, seed), ordered by n then seed. The map must have an
/// analytic Jacobian. Throws DomainError for an empty or unsorted n_list.
std::vector<Theorem6Row> theorem6_experiment(const SmoothMap& f, const MetricField& metric,
                                             const Theorem6Config& cfg);

/// Median residual per n, in n_list order.
std::vector<double> median_residuals(const std::vector<Theorem6Row>& rows,
                                     const std::vector<std::size_t>& n_list);

}  // namespace alphadisc
