#include <cmath>
#include <numbers>
#include <optional>
#include <random>

#include "alphadisc/discrepancy.hpp"
#include "alphadisc/errors.hpp"
#include "detail/numeric.hpp"
#include "detail/parallel.hpp"
#include "detail/references.hpp"

namespace alphadisc {

namespace {

// Reference points whose neighbour densities all fall below this are skipped.
const double kLogUnderflow = std::log(1e-300);

// log gamma* for the R = p estimator.
double log_optimal_gamma_rp(std::span<const double> log_s_hat, const AlphaParam& a) {
  const double lse = detail::log_sum_exp(log_s_hat);
  if (a.is_kl()) return std::log(static_cast<double>(log_s_hat.size())) - lse;
  if (a.is_reverse_kl()) {
    // Stationarity of sum [-g s + g s log(g s)] in g: sum s log(g s) = 0.
    double weighted = 0.0;
    for (double x : log_s_hat) weighted += std::exp(x - lse) * x;
    return -weighted;
  }
  const double al = a.alpha();
  std::vector<double> scaled(log_s_hat.begin(), log_s_hat.end());
  for (double& x : scaled) x *= 1.0 - al;
  return (detail::log_sum_exp(scaled) - lse) / al;
}

// log(gamma* sum s_hat / n); the gamma-minimized value depends only on this.
double log_normalized_mass(std::span<const double> log_s_hat, const AlphaParam& a) {
  return log_optimal_gamma_rp(log_s_hat, a) + detail::log_sum_exp(log_s_hat) -
         std::log(static_cast<double>(log_s_hat.size()));
}

struct PreparedReference {
  Vector y0;
  Matrix lower;  // Cholesky factor of the regularized pull-back precision
  double half_logdet = 0.0;
};

PreparedReference prepare(const SmoothMap& f, const MetricField& metric, const Vector& y0) {
  PreparedReference ref;
  ref.y0 = y0;
  const Matrix a = regularized(pullback_metric(f, metric, y0));
  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) throw DomainError("pull-back metric is not positive definite");
  ref.lower = llt.matrixL();
  ref.half_logdet = ref.lower.diagonal().array().log().sum();
  return ref;
}

void check_config(const SmoothMap& f, const LatentPrior& prior, const MonteCarloConfig& cfg,
                  const AlphaParam& alpha) {
  detail::check_reference_count(cfg.m);
  if (cfg.n < 10) throw DomainError("at least ten neighbours per reference are required");
  if (prior.dim() != f.dim_in()) throw DomainError("prior dimension does not match the map");
  if (cfg.kernel.kind() == KernelKind::kStudent && !alpha.is_kl()) {
    throw UnsupportedLimitError("the Student kernel is supported only at alpha = 1");
  }
}

DiscrepancyEstimate collect(const MonteCarloConfig& cfg, EstimatorVariant variant,
                            const std::vector<std::optional<double>>& per_point) {
  DiscrepancyEstimate est;
  est.m = cfg.m;
  est.n = cfg.n;
  est.alpha = cfg.alpha;
  est.variant = variant;
  est.seed = cfg.seed;
  std::vector<double> values;
  values.reserve(per_point.size());
  for (const auto& v : per_point) {
    if (v) {
      values.push_back(*v);
    } else {
      ++est.skipped_points;
    }
  }
  detail::summarize(est, std::move(values));
  return est;
}

}  // namespace

namespace sample_level {

double optimal_gamma_rp(std::span<const double> log_s_hat, const AlphaParam& a) {
  return std::exp(log_optimal_gamma_rp(log_s_hat, a));
}

double h_alpha_rp(std::span<const double> log_s_hat, double gamma, const AlphaParam& a) {
  const double n = static_cast<double>(log_s_hat.size());
  const double log_gamma = std::log(gamma);
  double sum = 0.0;
  if (a.is_kl()) {
    for (double x : log_s_hat) sum += std::exp(log_gamma + x) - (log_gamma + x);
    return -1.0 + sum / n;
  }
  if (a.is_reverse_kl()) {
    for (double x : log_s_hat) {
      const double gs = std::exp(log_gamma + x);
      sum += -gs + gs * (log_gamma + x);
    }
    return 1.0 + sum / n;
  }
  const double al = a.alpha();
  for (double x : log_s_hat) {
    sum += std::exp(log_gamma + x) / al -
           std::exp((1.0 - al) * (log_gamma + x)) / (al * (1.0 - al));
  }
  return 1.0 / (1.0 - al) + sum / n;
}

double min_h_alpha_rp(std::span<const double> log_s_hat, const AlphaParam& a) {
  if (a.is_kl()) {
    // -1 + 1 + mean(-log(gamma* s_hat)).
    double sum = 0.0;
    for (double x : log_s_hat) sum -= x;
    return sum / static_cast<double>(log_s_hat.size()) - log_optimal_gamma_rp(log_s_hat, a);
  }
  const double log_mass = log_normalized_mass(log_s_hat, a);
  if (a.is_reverse_kl()) return -std::expm1(log_mass);
  return -std::expm1(log_mass) / (1.0 - a.alpha());
}

double h_alpha_rq(std::span<const double> log_ratio, const AlphaParam& a) {
  double sum = 0.0;
  if (a.is_kl()) {
    for (double lr : log_ratio) sum += std::exp(lr) * lr - std::expm1(lr);
  } else if (a.is_reverse_kl()) {
    for (double lr : log_ratio) sum += std::expm1(lr) - lr;
  } else {
    const double al = a.alpha();
    for (double lr : log_ratio) sum += al * std::expm1(lr) - std::expm1(al * lr);
    sum /= al * (1.0 - al);
  }
  return sum / static_cast<double>(log_ratio.size());
}

}  // namespace sample_level

DiscrepancyEstimate empirical_alpha_discrepancy_rp(const SmoothMap& f, const MetricField& metric,
                                                   const LatentPrior& prior,
                                                   const MonteCarloConfig& cfg) {
  const AlphaParam alpha(cfg.alpha, cfg.limit_tolerance);
  check_config(f, prior, cfg, alpha);
  const Matrix refs = detail::draw_references(prior, cfg.m, cfg.seed);
  const int d = f.dim_in();
  const double log_norm = 0.5 * d * std::log(2.0 * std::numbers::pi);

  std::vector<std::optional<double>> per_point(cfg.m);
  detail::parallel_for(cfg.m, cfg.threads, [&](std::size_t i) {
    const Vector y0 = refs.row(static_cast<Eigen::Index>(i)).transpose();
    PreparedReference ref;
    try {
      ref = prepare(f, metric, y0);
    } catch (const Error&) {
      detail::rethrow_with_context("at reference point y0 = " + detail::format_vector(y0));
    }
    auto rng = make_stream(cfg.seed, detail::kNeighborStream, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> log_s_hat(cfg.n);
    bool any_density = false;
    Vector z(d);
    for (std::size_t j = 0; j < cfg.n; ++j) {
      for (int k = 0; k < d; ++k) z[k] = normal(rng);
      // y - y0 = L^-T z has covariance A^-1 and (y - y0)^T A (y - y0) = |z|^2.
      const Vector delta = ref.lower.transpose().triangularView<Eigen::Upper>().solve(z);
      const double log_p = ref.half_logdet - log_norm - 0.5 * z.squaredNorm();
      any_density = any_density || log_p >= kLogUnderflow;
      log_s_hat[j] = cfg.kernel.log_of_squared_distance(delta.squaredNorm()) - log_p;
    }
    if (!any_density) return;

    if (alpha.is_kl()) {
      per_point[i] = sample_level::min_h_alpha_rp(log_s_hat, alpha);
    } else if (alpha.is_reverse_kl()) {
      // gamma* s_hat mass estimates exp(-KL(q : p)).
      per_point[i] = -log_normalized_mass(log_s_hat, alpha);
    } else {
      // gamma* s_hat mass estimates (Hellinger integral)^(1/alpha).
      const double al = alpha.alpha();
      per_point[i] = -std::expm1(al * log_normalized_mass(log_s_hat, alpha)) / (al * (1.0 - al));
    }
  });
  return collect(cfg, EstimatorVariant::kEmpiricalRp, per_point);
}

DiscrepancyEstimate empirical_alpha_discrepancy_rq(const SmoothMap& f, const MetricField& metric,
                                                   const LatentPrior& prior,
                                                   const MonteCarloConfig& cfg) {
  const AlphaParam alpha(cfg.alpha, cfg.limit_tolerance);
  check_config(f, prior, cfg, alpha);
  if (!cfg.kernel.is_gaussian_family()) {
    throw DomainError("R = q sampling needs a normalizable Gaussian-family kernel");
  }
  const Matrix refs = detail::draw_references(prior, cfg.m, cfg.seed);
  const int d = f.dim_in();
  const double log_norm = 0.5 * d * std::log(2.0 * std::numbers::pi);
  const double kernel_sd = 1.0 / std::sqrt(cfg.kernel.lambda());

  std::vector<std::optional<double>> per_point(cfg.m);
  detail::parallel_for(cfg.m, cfg.threads, [&](std::size_t i) {
    const Vector y0 = refs.row(static_cast<Eigen::Index>(i)).transpose();
    PreparedReference ref;
    try {
      ref = prepare(f, metric, y0);
    } catch (const Error&) {
      detail::rethrow_with_context("at reference point y0 = " + detail::format_vector(y0));
    }
    auto rng = make_stream(cfg.seed, detail::kNeighborStream, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> log_ratio(cfg.n);
    bool any_density = false;
    Vector y(d);
    for (std::size_t j = 0; j < cfg.n; ++j) {
      for (int k = 0; k < d; ++k) y[k] = y0[k] + kernel_sd * normal(rng);
      const Vector w = ref.lower.transpose() * (y - y0);
      const double log_p = ref.half_logdet - log_norm - 0.5 * w.squaredNorm();
      any_density = any_density || log_p >= kLogUnderflow;
      log_ratio[j] = log_p - cfg.kernel.normalized_log_density(y0, y);
    }
    if (!any_density) return;
    per_point[i] = sample_level::h_alpha_rq(log_ratio, alpha);
  });
  return collect(cfg, EstimatorVariant::kEmpiricalRq, per_point);
}

}  // namespace alphadisc
