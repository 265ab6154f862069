#include "alphadisc/theorem6.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "alphadisc/discrepancy.hpp"
#include "alphadisc/errors.hpp"
#include "alphadisc/neighbor_embedding.hpp"
#include "detail/parallel.hpp"

namespace alphadisc {

namespace {

constexpr std::uint64_t kTheorem6Stream = 0x54484d36ULL;

void check_config(const SmoothMap& f, const MetricField& metric, const Theorem6Config& cfg) {
  if (!f.has_analytic_jacobian()) throw DomainError("the experiment needs a map with an analytic Jacobian");
  if (metric.dimension() != f.dim_out()) throw DomainError("metric dimension does not match the map output");
  if (cfg.n_list.empty() || cfg.seeds.empty()) throw DomainError("n_list and seeds must be non-empty");
  if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end())) throw DomainError("n_list must be increasing");
  if (!(cfg.interior_fraction > 0.0 && cfg.interior_fraction <= 1.0)) {
    throw DomainError("interior_fraction must lie in (0, 1]");
  }
}

Theorem6Row run_one(const SmoothMap& f, const MetricField& metric, const Theorem6Config& cfg,
                    std::size_t n, std::uint64_t seed) {
  const int d = f.dim_in();
  auto mix = make_stream(seed, kTheorem6Stream, n);
  PriorSampler sampler(LatentPrior::uniform_ball(d, cfg.radius), mix());
  const Matrix y = sampler.draw(n);
  Matrix x(static_cast<Eigen::Index>(n), f.dim_out());
  for (Eigen::Index i = 0; i < y.rows(); ++i) x.row(i) = f(y.row(i).transpose()).transpose();

  const SimilarityMatrix p = input_similarities(x, cfg.perplexity);
  const std::vector<double> costs =
      embedding_row_costs(p, y, SimilarityKernel::gaussian(), EmbeddingObjective{});

  const AlphaParam kl(1.0);
  const auto gauss = SimilarityKernel::gaussian();
  const double interior = cfg.interior_fraction * cfg.radius;
  std::vector<double> c;
  std::vector<double> t;
  double raw_sum = 0.0;
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (y.row(i).norm() > interior) continue;
    const Matrix a = pullback_metric(f, metric, y.row(i).transpose());
    const double lambda = p.lambdas[static_cast<std::size_t>(i)];
    c.push_back(costs[static_cast<std::size_t>(i)]);
    t.push_back(pointwise_discrepancy_closed_form(lambda * a, kl, gauss));
    raw_sum += pointwise_discrepancy_closed_form(a, kl, gauss);
  }
  if (c.size() < 3) {
    throw DomainError("fewer than three interior reference points at n = " + std::to_string(n));
  }

  Theorem6Row row;
  row.n = n;
  row.seed = seed;
  row.reference_count = c.size();
  const double count = static_cast<double>(c.size());
  double mc = 0.0;
  double mt = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    mc += c[k];
    mt += t[k];
  }
  mc /= count;
  mt /= count;
  double stt = 0.0;
  double stc = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    stt += (t[k] - mt) * (t[k] - mt);
    stc += (t[k] - mt) * (c[k] - mc);
  }
  row.slope = stt > 1e-24 * count ? stc / stt : 0.0;
  row.offset = mc - row.slope * mt;
  double ss = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double r = c[k] - (row.slope * t[k] + row.offset);
    ss += r * r;
  }
  row.residual = std::sqrt(ss / count);
  row.closed_form_value = raw_sum / count;
  row.calibrated_closed_form_mean = mt;
  row.sne_cost_mean = mc;
  return row;
}

}  // namespace

std::vector<Theorem6Row> theorem6_experiment(const SmoothMap& f, const MetricField& metric,
                                             const Theorem6Config& cfg) {
  check_config(f, metric, cfg);
  const std::size_t seeds = cfg.seeds.size();
  std::vector<Theorem6Row> rows(cfg.n_list.size() * seeds);
  detail::parallel_for(rows.size(), cfg.threads, [&](std::size_t k) {
    rows[k] = run_one(f, metric, cfg, cfg.n_list[k / seeds], cfg.seeds[k % seeds]);
  });
  return rows;
}

std::vector<double> median_residuals(const std::vector<Theorem6Row>& rows,
                                     const std::vector<std::size_t>& n_list) {
  std::vector<double> out;
  for (std::size_t n : n_list) {
    std::vector<double> r;
    for (const auto& row : rows) {
      if (row.n == n) r.push_back(row.residual);
    }
    if (r.empty()) throw DomainError("no rows for n = " + std::to_string(n));
    std::sort(r.begin(), r.end());
    const std::size_t h = r.size() / 2;
    out.push_back(r.size() % 2 ? r[h] : 0.5 * (r[h - 1] + r[h]));
  }
  return out;
}

}  // namespace alphadisc
