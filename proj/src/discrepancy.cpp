#include "alphadisc/discrepancy.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "alphadisc/errors.hpp"
#include "detail/numeric.hpp"
#include "detail/parallel.hpp"
#include "detail/references.hpp"

namespace alphadisc {

std::string to_string(EstimatorVariant v) {
  switch (v) {
    case EstimatorVariant::kClosedForm:
      return "closed";
    case EstimatorVariant::kEmpiricalRp:
      return "empirical-rp";
    case EstimatorVariant::kEmpiricalRq:
      return "empirical-rq";
    case EstimatorVariant::kConformal:
      return "conformal";
  }
  return "unknown";
}

EstimatorVariant parse_variant(const std::string& s) {
  for (auto v : {EstimatorVariant::kClosedForm, EstimatorVariant::kEmpiricalRp,
                 EstimatorVariant::kEmpiricalRq, EstimatorVariant::kConformal}) {
    if (to_string(v) == s) return v;
  }
  throw DomainError("unknown estimator variant '" + s + "'");
}

double pointwise_discrepancy_closed_form(const Matrix& a, const AlphaParam& alpha,
                                         const SimilarityKernel& kernel) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DomainError("pull-back matrix must be square");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  Vector ev = eig.eigenvalues();
  if (!ev.allFinite() || ev.minCoeff() <= 0.0) {
    throw DomainError("pull-back matrix is not positive definite");
  }
  const double d = static_cast<double>(ev.size());

  if (kernel.kind() == KernelKind::kStudent) {
    if (!alpha.is_kl()) {
      throw UnsupportedLimitError("the Student kernel has a closed form only at alpha = 1");
    }
    double sum = 0.0;
    for (double l : ev) sum += 0.5 * std::log(l) + 1.0 / l;
    return sum - 0.5 * d * std::log(2.0) - 0.5 * d;
  }

  ev /= kernel.lambda();
  if (alpha.is_kl()) {
    double sum = 0.0;
    for (double l : ev) sum += 0.5 * (std::log(l) + 1.0 / l - 1.0);
    return sum;
  }
  if (alpha.is_reverse_kl()) {
    double sum = 0.0;
    for (double l : ev) sum += 0.5 * (l - 1.0 - std::log(l));
    return sum;
  }
  const double al = alpha.alpha();
  double log_ratio = 0.0;
  for (double l : ev) {
    const double mixed = al * l + (1.0 - al);
    if (mixed <= 0.0) {
      throw IndefiniteCombinationError(
          "alpha A + (1 - alpha) I is not positive definite (eigenvalue " + std::to_string(l) +
              " of A gives " + std::to_string(mixed) + ")",
          l);
    }
    log_ratio += 0.5 * al * std::log(l) - 0.5 * std::log(mixed);
  }
  return -std::expm1(log_ratio) / (al * (1.0 - al));
}

namespace detail {

void check_reference_count(std::size_t m) {
  if (m < 2) throw DomainError("at least two reference points are required");
}

void summarize(DiscrepancyEstimate& est, std::vector<double> values) {
  const std::size_t count = values.size();
  if (count < 2) {
    throw NonFiniteError("fewer than two usable reference points remain (" +
                         std::to_string(est.skipped_points) + " skipped)");
  }
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(count);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(count - 1));
  est.value = mean;
  est.std_error = sd / std::sqrt(static_cast<double>(count));
  est.pointwise = std::move(values);
}

}  // namespace detail

DiscrepancyEstimate alpha_discrepancy(const SmoothMap& f, const MetricField& metric,
                                      const LatentPrior& prior, const MonteCarloConfig& cfg) {
  detail::check_reference_count(cfg.m);
  if (prior.dim() != f.dim_in()) throw DomainError("prior dimension does not match the map");
  const AlphaParam alpha(cfg.alpha, cfg.limit_tolerance);
  // Reject inadmissible kernel/alpha pairs before any sampling.
  if (cfg.kernel.kind() == KernelKind::kStudent && !alpha.is_kl()) {
    throw UnsupportedLimitError("the Student kernel has a closed form only at alpha = 1");
  }

  const Matrix refs = detail::draw_references(prior, cfg.m, cfg.seed);
  std::vector<double> values(cfg.m);
  detail::parallel_for(cfg.m, cfg.threads, [&](std::size_t i) {
    const Vector y0 = refs.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      const Matrix a = regularized(pullback_metric(f, metric, y0));
      values[i] = pointwise_discrepancy_closed_form(a, alpha, cfg.kernel);
    } catch (const Error&) {
      detail::rethrow_with_context("at reference point y0 = " + detail::format_vector(y0));
    }
  });

  DiscrepancyEstimate est;
  est.m = cfg.m;
  est.n = 0;
  est.alpha = cfg.alpha;
  est.variant = EstimatorVariant::kClosedForm;
  est.seed = cfg.seed;
  detail::summarize(est, std::move(values));
  return est;
}

}  // namespace alphadisc
