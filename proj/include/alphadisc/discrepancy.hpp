#pragma once

// Alpha-discrepancy of a smooth map: the expected, gamma-minimized
// alpha-divergence between the pull-back neighbourhood Gaussian p_{y0} and
// the latent similarity s_{y0}. Closed form through the pull-back metric,
// Monte Carlo estimators with reference distribution R = p or R = q, and the
// conformal variant with a per-point kernel scale.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "alphadisc/geometry.hpp"
#include "alphadisc/measures.hpp"

namespace alphadisc {

enum class EstimatorVariant { kClosedForm, kEmpiricalRp, kEmpiricalRq, kConformal };

std::string to_string(EstimatorVariant v);
/// Accepts "closed", "empirical-rp", "empirical-rq", "conformal".
EstimatorVariant parse_variant(const std::string& s);

struct DiscrepancyEstimate {
  double value = 0.0;
  double std_error = 0.0;  // sample sd over reference points / sqrt(count)
  std::size_t m = 0;
  std::size_t n = 0;  // neighbours per reference; 0 for closed forms
  double alpha = 0.0;
  EstimatorVariant variant = EstimatorVariant::kClosedForm;
  std::uint64_t seed = 0;
  std::size_t skipped_points = 0;
  std::vector<double> pointwise;  // per accepted reference point
};

/// Closed-form pointwise discrepancy for pull-back matrix A (d x d, SPD).
///
/// Gaussian kernel:
///   [1 - |A|^(a/2) / |a A + (1-a) I|^(1/2)] / (a (1-a)),
///   D0 = -log|A|/2 + tr(A)/2 - d/2,  D1 = log|A|/2 + tr(A^-1)/2 - d/2.
/// Scaled Gaussian exp(-l u / 2): the same with A / l.
/// Student kernel (alpha ~ 1 only):
///   log|A|/2 + tr(A^-1) - (d/2) log 2 - d/2, zero at A = 2I.
///
/// Throws IndefiniteCombinationError if a l_i + (1-a) <= 0 for an eigenvalue
/// l_i of A, UnsupportedLimitError for the Student kernel away from alpha = 1,
/// DomainError if A is not positive definite.
double pointwise_discrepancy_closed_form(const Matrix& a, const AlphaParam& alpha,
                                         const SimilarityKernel& kernel);

struct MonteCarloConfig {
  double alpha = 1.0;
  SimilarityKernel kernel = SimilarityKernel::gaussian();
  std::size_t m = 100;   // reference points
  std::size_t n = 2000;  // neighbours per reference
  std::uint64_t seed = 0;
  double limit_tolerance = AlphaParam::kDefaultLimitTolerance;
  unsigned threads = 0;  // 0 = hardware concurrency
};

/// Average of the closed-form pointwise discrepancy at m reference points
/// drawn from the prior (n is ignored). Deterministic given the seed.
DiscrepancyEstimate alpha_discrepancy(const SmoothMap& f, const MetricField& metric,
                                      const LatentPrior& prior, const MonteCarloConfig& cfg);

/// Monte Carlo estimate with neighbours drawn from p_{y0} itself and a
/// per-reference optimal gamma. Per-reference values are reported on the
/// D_a(p : q) scale of the closed form, which equals the gamma-minimized
/// value only at alpha = 1.
DiscrepancyEstimate empirical_alpha_discrepancy_rp(const SmoothMap& f, const MetricField& metric,
                                                   const LatentPrior& prior,
                                                   const MonteCarloConfig& cfg);

/// Monte Carlo estimate with neighbours y0 + eps drawn from the normalized
/// kernel q (Gaussian family only).
DiscrepancyEstimate empirical_alpha_discrepancy_rq(const SmoothMap& f, const MetricField& metric,
                                                   const LatentPrior& prior,
                                                   const MonteCarloConfig& cfg);

/// Sample-level pieces of the R = p estimator, exposed for inspection.
/// `log_s_hat` holds log(s(y_j) / p(y_j)) for neighbours y_j ~ p.
namespace sample_level {

/// argmin over gamma of h_alpha_rp. At alpha ~ 0 this is
/// exp(-sum s_hat log s_hat / sum s_hat); at alpha ~ 1, n / sum s_hat.
double optimal_gamma_rp(std::span<const double> log_s_hat, const AlphaParam& a);

/// H_a(y0) evaluated term by term for a given gamma, including the a = 0 and
/// a = 1 limit forms.
double h_alpha_rp(std::span<const double> log_s_hat, double gamma, const AlphaParam& a);

/// min over gamma of h_alpha_rp in closed form.
double min_h_alpha_rp(std::span<const double> log_s_hat, const AlphaParam& a);

/// H_a(y0) for R = q from log(p(y_j) / q(y_j)), y_j ~ q.
double h_alpha_rq(std::span<const double> log_ratio, const AlphaParam& a);

}  // namespace sample_level

enum class LambdaSearch { kAnalyticD1, kGoldenSection };

struct ConformalConfig {
  /// kAnalyticD1 uses lambda* = d / tr(A^-1) when alpha ~ 1 and golden-section
  /// search otherwise; kGoldenSection always searches.
  LambdaSearch search = LambdaSearch::kAnalyticD1;
  double bracket_lo = 1e-4;
  double bracket_hi = 1e4;
  double tolerance = 1e-8;  // relative, on lambda
};

struct PointwiseConformal {
  double value = 0.0;
  double lambda = 1.0;
};

/// min over gamma, lambda of D_a(p_{y0} : gamma exp(-lambda |y - y0|^2 / 2)).
PointwiseConformal pointwise_conformal_discrepancy(const Matrix& a, const AlphaParam& alpha,
                                                   const ConformalConfig& cfg);

struct ConformalEstimate {
  DiscrepancyEstimate estimate;
  std::vector<double> lambdas;  // optimized lambda per reference point
};

/// Conformal discrepancy averaged over m prior samples (kernel fixed to the
/// scaled Gaussian family; cfg.kernel and cfg.n are ignored).
ConformalEstimate conformal_alpha_discrepancy(const SmoothMap& f, const MetricField& metric,
                                              const LatentPrior& prior,
                                              const MonteCarloConfig& mc,
                                              const ConformalConfig& cfg);

}  // namespace alphadisc
