#include <cmath>

#include "alphadisc/discrepancy.hpp"
#include "alphadisc/errors.hpp"
#include "alphadisc/golden_section.hpp"
#include "detail/numeric.hpp"
#include "detail/parallel.hpp"
#include "detail/references.hpp"

namespace alphadisc {

PointwiseConformal pointwise_conformal_discrepancy(const Matrix& a, const AlphaParam& alpha,
                                                   const ConformalConfig& cfg) {
  if (!(cfg.bracket_lo > 0.0) || !(cfg.bracket_hi > cfg.bracket_lo)) {
    throw BracketError("lambda bracket must satisfy 0 < lo < hi");
  }
  if (cfg.search == LambdaSearch::kAnalyticD1 && alpha.is_kl()) {
    // d/dl of log|A|/2 - (d/2) log l + (l/2) tr(A^-1) vanishes at d / tr(A^-1).
    const Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) throw DomainError("pull-back matrix is not positive definite");
    const double trace_inv = llt.solve(Matrix::Identity(a.rows(), a.cols())).trace();
    const double lambda = static_cast<double>(a.rows()) / trace_inv;
    return {pointwise_discrepancy_closed_form(a, alpha, SimilarityKernel::scaled_gaussian(lambda)),
            lambda};
  }

  // Searched on log lambda, so the tolerance is relative on lambda.
  auto objective = [&](double log_lambda) {
    try {
      return pointwise_discrepancy_closed_form(
          a, alpha, SimilarityKernel::scaled_gaussian(std::exp(log_lambda)));
    } catch (const IndefiniteCombinationError&) {
      return detail::kInf;
    }
  };
  const auto best = golden_section_minimize(objective, std::log(cfg.bracket_lo),
                                            std::log(cfg.bracket_hi), cfg.tolerance);
  return {best.value, std::exp(best.argmin)};
}

ConformalEstimate conformal_alpha_discrepancy(const SmoothMap& f, const MetricField& metric,
                                              const LatentPrior& prior,
                                              const MonteCarloConfig& mc,
                                              const ConformalConfig& cfg) {
  detail::check_reference_count(mc.m);
  if (prior.dim() != f.dim_in()) throw DomainError("prior dimension does not match the map");
  const AlphaParam alpha(mc.alpha, mc.limit_tolerance);
  const Matrix refs = detail::draw_references(prior, mc.m, mc.seed);

  std::vector<double> values(mc.m);
  std::vector<double> lambdas(mc.m);
  detail::parallel_for(mc.m, mc.threads, [&](std::size_t i) {
    const Vector y0 = refs.row(static_cast<Eigen::Index>(i)).transpose();
    try {
      const Matrix a = regularized(pullback_metric(f, metric, y0));
      const auto best = pointwise_conformal_discrepancy(a, alpha, cfg);
      values[i] = best.value;
      lambdas[i] = best.lambda;
    } catch (const Error&) {
      detail::rethrow_with_context("at reference point y0 = " + detail::format_vector(y0));
    }
  });

  ConformalEstimate out;
  out.estimate.m = mc.m;
  out.estimate.alpha = mc.alpha;
  out.estimate.variant = EstimatorVariant::kConformal;
  out.estimate.seed = mc.seed;
  detail::summarize(out.estimate, std::move(values));
  out.lambdas = std::move(lambdas);
  return out;
}

}  // namespace alphadisc
