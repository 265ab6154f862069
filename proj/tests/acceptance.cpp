// Acceptance suite: one PASS/FAIL line per criterion.
//
// Usage: acceptance [--only N[,N...]] [--expect-fail N[,N...]]
// Exit status is 0 when the set of failing criteria equals the expected set.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "alphadisc/discrepancy.hpp"
#include "alphadisc/maps.hpp"
#include "alphadisc/measures.hpp"
#include "alphadisc/neighbor_embedding.hpp"
#include "alphadisc/theorem6.hpp"
#include "cli.hpp"

using namespace alphadisc;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
  }
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

MonteCarloConfig mc(double alpha, std::size_t m, std::size_t n, std::uint64_t seed) {
  MonteCarloConfig cfg;
  cfg.alpha = alpha;
  cfg.m = m;
  cfg.n = n;
  cfg.seed = seed;
  return cfg;
}

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n01;
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n01(rng);
  return x;
}

Outcome closed_form_vs_quadrature() {
  Outcome o;
  const Grid grid = Grid::uniform(1, GridAxis{-12.0, 12.0, 8001});
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
  const Density q = [log_norm](const Vector& y) { return std::exp(-log_norm - 0.5 * y[0] * y[0]); };
  double worst = 0.0;
  for (double a : {0.5, 1.0, 2.0, 5.0}) {
    const Density p = [a, log_norm](const Vector& y) {
      return std::exp(0.5 * std::log(a) - log_norm - 0.5 * a * y[0] * y[0]);
    };
    for (double al : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double closed =
          pointwise_discrepancy_closed_form(Matrix::Constant(1, 1, a), AlphaParam(al), SimilarityKernel::gaussian());
      const double quad = alpha_divergence_quadrature(p, q, grid, AlphaParam(al)).value;
      worst = std::max(worst, std::abs(closed - quad));
    }
  }
  o.require(worst <= 1e-6, "max |closed - quadrature| over 20 cases = " + fmt(worst));
  const Matrix two = Matrix::Constant(1, 1, 2.0);
  const auto anchor = [&](double al) {
    return pointwise_discrepancy_closed_form(two, AlphaParam(al), SimilarityKernel::gaussian());
  };
  o.require(std::abs(anchor(1.0) - 0.096574) < 5e-7, "A = 2, alpha = 1: " + fmt(anchor(1.0)) + " (0.096574)");
  o.require(std::abs(anchor(0.0) - 0.153426) < 5e-7, "A = 2, alpha = 0: " + fmt(anchor(0.0)) + " (0.153426)");
  // The published six-digit anchor 0.116064 is 1.8e-6 away from the exact
  // value; the check is against the quadrature at the criterion tolerance.
  const Density p2 = [log_norm](const Vector& y) {
    return std::exp(0.5 * std::log(2.0) - log_norm - y[0] * y[0]);
  };
  const double quad_half = alpha_divergence_quadrature(p2, q, grid, AlphaParam(0.5)).value;
  o.require(std::abs(anchor(0.5) - quad_half) <= 1e-6,
            "A = 2, alpha = 0.5: " + fmt(anchor(0.5)) + " vs quadrature " + fmt(quad_half) + " (listed 0.116064)");
  return o;
}

Outcome isometry() {
  Outcome o;
  const double alphas[] = {0.0, 0.25, 0.5, 1.0, 1.5};
  double worst_mc = 0.0;
  for (const auto& info : builtin_map_catalog()) {
    if (!info.isometric) continue;
    const auto f = builtin_map(info.name);
    const auto metric = MetricField::euclidean(info.dim_out);
    const auto prior = LatentPrior::uniform_ball(info.dim_in);
    double worst = 0.0;
    for (double al : alphas) worst = std::max(worst, std::abs(alpha_discrepancy(f, metric, prior, mc(al, 64, 0, 1)).value));
    o.require(worst <= 1e-10, info.name + " closed form max |D| = " + fmt(worst));
    for (double al : {0.0, 0.5, 1.0}) {
      const auto rp = empirical_alpha_discrepancy_rp(f, metric, prior, mc(al, 50, 500, 2));
      const auto rq = empirical_alpha_discrepancy_rq(f, metric, prior, mc(al, 50, 500, 2));
      // Exact zeros in exact arithmetic; allow double-precision roundoff.
      const double floor = 64.0 * std::numeric_limits<double>::epsilon();
      const bool ok = std::abs(rp.value) <= 3.0 * rp.std_error + floor &&
                      std::abs(rq.value) <= 3.0 * rq.std_error + floor;
      worst_mc = std::max({worst_mc, std::abs(rp.value), std::abs(rq.value)});
      if (!ok) {
        o.require(false, info.name + " alpha = " + fmt(al) + " R=p " + fmt(rp.value) + " +- " + fmt(rp.std_error) +
                             ", R=q " + fmt(rq.value) + " +- " + fmt(rq.std_error));
      }
    }
  }
  o.require(true, "Monte Carlo at alpha in {0, 0.5, 1}, m = 50, n = 500: max |estimate| = " + fmt(worst_mc));
  return o;
}

Outcome invariance() {
  Outcome o;
  std::mt19937_64 rng(2024);
  const auto f = builtin_map("swiss-roll");
  const auto metric = MetricField::euclidean(3);
  const auto prior = LatentPrior::uniform_ball(2);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    Matrix phi = random_matrix(rng, 3, 3);
    while (std::abs(phi.determinant()) < 0.1) phi = random_matrix(rng, 3, 3);
    const auto g = f.composed_with_linear(phi, "phi");
    const auto mt = metric.transported(phi);
    const double al = 0.25 * (k % 5);
    const double base = alpha_discrepancy(f, metric, prior, mc(al, 30, 0, 7)).value;
    const double moved = alpha_discrepancy(g, mt, prior, mc(al, 30, 0, 7)).value;
    worst = std::max(worst, std::abs(base - moved));
  }
  o.require(worst <= 1e-8, "max change over 20 re-parametrizations = " + fmt(worst));
  return o;
}

Outcome optimal_gamma_lemma() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.05, 2.0);
  std::uniform_int_distribution<int> size(2, 12);
  double worst_gap = 0.0;
  double worst_reduced = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = size(rng);
    std::vector<double> pw(k);
    std::vector<double> sw(k);
    for (auto& w : pw) w = unif(rng);
    for (auto& w : sw) w = unif(rng);
    const PositiveMeasure p(pw);
    const PositiveMeasure s(sw);
    const AlphaParam a(unif(rng));
    const double g = optimal_gamma(p, s, a);
    const double at_opt = alpha_divergence_discrete(p, s.scaled(g), a);
    for (int j = 0; j < 10000; ++j) {
      const double gamma = g * std::pow(10.0, -4.0 + 8.0 * j / 9999.0);
      worst_gap = std::max(worst_gap, at_opt - alpha_divergence_discrete(p, s.scaled(gamma), a));
    }
    worst_reduced = std::max(worst_reduced, std::abs(reduced_divergence_after_normalization(p, s, a) - at_opt));
  }
  o.require(worst_gap <= 1e-12, "largest grid improvement over gamma* = " + fmt(worst_gap));
  o.require(worst_reduced <= 1e-10, "max |reduced form - D(p : gamma* s)| = " + fmt(worst_reduced));
  return o;
}

Outcome estimator_consistency() {
  Outcome o;
  {
    const auto f = builtin_map("scale2-1d");
    const auto metric = MetricField::euclidean(1);
    const auto prior = LatentPrior::uniform_ball(1);
    for (double al : {0.0, 0.5, 1.0}) {
      const double target = alpha_discrepancy(f, metric, prior, mc(al, 100, 0, 3)).value;
      const auto rp = empirical_alpha_discrepancy_rp(f, metric, prior, mc(al, 100, 2000, 3));
      const auto rq = empirical_alpha_discrepancy_rq(f, metric, prior, mc(al, 100, 2000, 3));
      o.require(std::abs(rp.value - target) <= 3.0 * rp.std_error,
                "scale2-1d alpha = " + fmt(al) + " R=p " + fmt(rp.value) + " +- " + fmt(rp.std_error) +
                    " vs " + fmt(target));
      o.require(std::abs(rq.value - target) <= 3.0 * rq.std_error,
                "scale2-1d alpha = " + fmt(al) + " R=q " + fmt(rq.value) + " +- " + fmt(rq.std_error) +
                    " vs " + fmt(target));
    }
  }
  const auto f = builtin_map("swiss-roll");
  const auto metric = MetricField::euclidean(3);
  const auto prior = LatentPrior::uniform_ball(2);
  for (double al : {0.0, 0.5, 1.0}) {
    const auto rp = empirical_alpha_discrepancy_rp(f, metric, prior, mc(al, 100, 2000, 3));
    const auto rq = empirical_alpha_discrepancy_rq(f, metric, prior, mc(al, 100, 2000, 3));
    const double closed = alpha_discrepancy(f, metric, prior, mc(al, 100, 0, 3)).value;
    const double combined = std::hypot(rp.std_error, rq.std_error);
    o.require(std::abs(rp.value - rq.value) <= 3.0 * combined,
              "swiss-roll alpha = " + fmt(al) + " R=p " + fmt(rp.value) + " vs R=q " + fmt(rq.value) +
                  " (3 sigma = " + fmt(3.0 * combined) + ", closed form " + fmt(closed) + ")");
  }
  return o;
}

Outcome sne_equivalence() {
  Outcome o;
  std::mt19937_64 rng(6);
  const auto p = input_similarities(random_matrix(rng, 20, 5), 5.0);
  const Matrix y0 = random_matrix(rng, 20, 2);
  const auto kernel = SimilarityKernel::student();
  const double base = sne_consistency_check(p, embedding_similarities(y0, kernel)).difference();
  double spread = 0.0;
  for (int k = 0; k < 10; ++k) {
    const Matrix y = y0 + 0.5 * random_matrix(rng, 20, 2);
    spread = std::max(spread, std::abs(sne_consistency_check(p, embedding_similarities(y, kernel)).difference() - base));
  }
  o.require(spread <= 1e-10, "max deviation of (cost - KL) across 10 perturbations = " + fmt(spread));
  return o;
}

Outcome gradient_checks() {
  Outcome o;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const auto p = input_similarities(random_matrix(rng, 8, 4), 3.0);
    const Matrix y = random_matrix(rng, 8, 2);
    for (const auto& kernel : {SimilarityKernel::gaussian(), SimilarityKernel::student()}) {
      for (double al : {0.0, 0.5, 1.0}) {
        EmbeddingObjective obj;
        obj.alpha = al;
        const Matrix g = embedding_cost_gradient(p, y, kernel, obj);
        Matrix fd(y.rows(), y.cols());
        const double h = 1e-5;
        for (Eigen::Index k = 0; k < y.size(); ++k) {
          Matrix plus = y;
          Matrix minus = y;
          plus.data()[k] += h;
          minus.data()[k] -= h;
          fd.data()[k] = (embedding_cost(p, plus, kernel, obj) - embedding_cost(p, minus, kernel, obj)) / (2.0 * h);
        }
        worst = std::max(worst, (g - fd).norm() / g.norm());
      }
    }
  }
  o.require(worst <= 1e-5, "max relative |analytic - central difference| = " + fmt(worst));
  return o;
}

Outcome convergence_trend() {
  Outcome o;
  const Theorem6Config cfg;
  for (const char* name : {"scale2-2d", "swiss-roll"}) {
    const auto f = builtin_map(name);
    const auto rows = theorem6_experiment(f, MetricField::euclidean(f.dim_out()), cfg);
    const auto med = median_residuals(rows, cfg.n_list);
    std::string trace;
    for (std::size_t k = 0; k < med.size(); ++k) trace += " " + std::to_string(cfg.n_list[k]) + ":" + fmt(med[k]);
    o.require(med.back() < med.front(), std::string(name) + " median residual" + trace);
  }
  return o;
}

Outcome student_optimum() {
  Outcome o;
  const double step = 3.5 / 80.0;
  double best_c = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 80; ++k) {
    const double c = 0.5 + step * k;
    const double v = pointwise_discrepancy_closed_form(c * Matrix::Identity(2, 2), AlphaParam(1.0),
                                                       SimilarityKernel::student());
    if (v < best) {
      best = v;
      best_c = c;
    }
  }
  o.require(std::abs(best_c - 2.0) <= step, "argmin c = " + fmt(best_c) + " (grid step " + fmt(step) + ")");
  return o;
}

Outcome conformal() {
  Outcome o;
  const double c = 3.0;
  const auto prior = LatentPrior::uniform_ball(2);
  for (auto search : {LambdaSearch::kAnalyticD1, LambdaSearch::kGoldenSection}) {
    ConformalConfig cfg;
    cfg.search = search;
    const auto est = conformal_alpha_discrepancy(builtin_map("conformal-3"), MetricField::euclidean(2), prior,
                                                 mc(1.0, 20, 0, 5), cfg);
    double lambda_err = 0.0;
    double variance_err = 0.0;
    for (double l : est.lambdas) {
      // Kernel precision d / tr(A^-1) = c^2; its reciprocal is the kernel variance 1/c^2.
      lambda_err = std::max(lambda_err, std::abs(l - c * c) / (c * c));
      variance_err = std::max(variance_err, std::abs(1.0 / l - 1.0 / (c * c)));
    }
    const std::string tag = search == LambdaSearch::kAnalyticD1 ? "analytic" : "golden";
    o.require(std::abs(est.estimate.value) <= 1e-8, tag + " value " + fmt(est.estimate.value));
    o.require(lambda_err <= 1e-6 && variance_err <= 1e-6,
              tag + " precision lambda* = c^2 rel. err " + fmt(lambda_err) + ", 1/lambda* vs 1/c^2 err " +
                  fmt(variance_err));
  }
  Matrix aniso(2, 2);
  aniso << 1.0, 0.0, 0.0, 16.0;
  for (double al : {0.5, 1.0}) {
    ConformalConfig cfg;
    cfg.search = LambdaSearch::kGoldenSection;
    const auto got = pointwise_conformal_discrepancy(aniso, AlphaParam(al), cfg);
    // Fine log-lambda grid, then parabolic refinement around the grid minimum.
    const auto value_at = [&](double log_l) {
      return pointwise_discrepancy_closed_form(aniso, AlphaParam(al), SimilarityKernel::scaled_gaussian(std::exp(log_l)));
    };
    const int points = 200001;
    double best = std::numeric_limits<double>::infinity();
    double best_x = 0.0;
    for (int k = 0; k < points; ++k) {
      const double x = -3.0 + 8.0 * k / (points - 1);
      const double v = value_at(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    o.require(std::abs(got.value - best) <= 1e-8, "diag(1,4) alpha = " + fmt(al) + ": search " + fmt(got.value) +
                                                      " vs grid " + fmt(best) + " at lambda " + fmt(std::exp(best_x)));
  }
  return o;
}

std::string run_cli(const std::vector<std::string>& args, int& code) {
  std::ostringstream out;
  std::ostringstream err;
  code = cli::run(args, out, err);
  return out.str();
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism() {
  Outcome o;
  const auto dir = std::filesystem::temp_directory_path() / "alphadisc_acceptance";
  std::filesystem::create_directories(dir);
  {
    std::ofstream data(dir / "clusters.csv");
    std::mt19937_64 rng(8);
    std::normal_distribution<double> n01(0.0, 0.2);
    data << "a,b,c\n";
    for (int i = 0; i < 30; ++i) {
      const double shift = i < 15 ? 0.0 : 4.0;
      data << shift + n01(rng) << ',' << n01(rng) << ',' << shift + n01(rng) << '\n';
    }
  }
  const std::vector<std::vector<std::string>> commands = {
      {"discrepancy", "--map", "swiss-roll", "--alpha", "0.5", "--variant", "empirical-rp", "--m", "40", "--n", "500",
       "--seed", "13"},
      {"discrepancy", "--map", "swiss-roll", "--alpha", "1", "--variant", "empirical-rq", "--m", "40", "--n", "500",
       "--seed", "13", "--threads", "2"},
      {"discrepancy", "--map", "polar", "--alpha", "0.25", "--variant", "closed", "--m", "40", "--seed", "13"},
      {"conformal", "--map", "anisotropic-1-4", "--alpha", "0.5", "--m", "10", "--search", "golden"},
      {"theorem6", "--map", "swiss-roll", "--n-list", "64,128", "--replicates", "2", "--perplexity", "10", "--seed",
       "13"},
      {"oracle"},
  };
  for (const auto& cmd : commands) {
    int c1 = 0;
    int c2 = 0;
    const std::string a = run_cli(cmd, c1);
    const std::string b = run_cli(cmd, c2);
    std::string label;
    for (const auto& part : cmd) label += (label.empty() ? "" : " ") + part;
    o.require(c1 == 0 && c2 == 0 && !a.empty() && a == b, label + ": report identical");
  }
  const std::vector<std::string> embed = {"embed",  "--input", (dir / "clusters.csv").string(), "--perplexity", "8",
                                          "--seed", "13",      "--iterations",                  "100"};
  std::string first_y;
  std::string first_trace;
  for (int rep = 0; rep < 2; ++rep) {
    auto args = embed;
    args.insert(args.end(), {"--output", (dir / ("y" + std::to_string(rep) + ".csv")).string(), "--trace",
                             (dir / ("t" + std::to_string(rep) + ".json")).string()});
    int code = 0;
    run_cli(args, code);
    o.require(code == 0, "embed run " + std::to_string(rep + 1) + " exit code " + std::to_string(code));
  }
  o.require(slurp(dir / "y0.csv") == slurp(dir / "y1.csv") && !slurp(dir / "y0.csv").empty(), "embed CSV identical");
  o.require(slurp(dir / "t0.json") == slurp(dir / "t1.json"), "embed trace identical");
  return o;
}

std::set<int> parse_set(const std::string& text) {
  std::set<int> out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if ((arg == "--only" || arg == "--expect-fail") && i + 1 < argc) {
      (arg == "--only" ? only : expected_failures) = parse_set(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--only N,...] [--expect-fail N,...]\n";
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed form matches 1-D quadrature", closed_form_vs_quadrature},
      {"isometric maps score zero", isometry},
      {"invariance under re-parametrization of X", invariance},
      {"optimal gamma beats a log grid; reduced form", optimal_gamma_lemma},
      {"Monte Carlo estimator consistency", estimator_consistency},
      {"SNE cost equals KL up to a constant", sne_equivalence},
      {"embedding gradients match finite differences", gradient_checks},
      {"SNE cost residual shrinks with n", convergence_trend},
      {"Student kernel optimum at JtJ = 2I", student_optimum},
      {"conformal discrepancy and lambda recovery", conformal},
      {"CLI determinism", determinism},
  };

  std::set<int> failed;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (const auto& note : outcome.notes) std::cout << "    " << note << '\n';
    std::printf("%s criterion %2d: %s (%.1fs)\n", outcome.pass ? "PASS" : "FAIL", id, criteria[k].first.c_str(), secs);
    std::fflush(stdout);
    if (!outcome.pass) failed.insert(id);
  }

  std::set<int> expected;
  for (int id : expected_failures) {
    if (only.empty() || only.count(id)) expected.insert(id);
  }
  std::cout << failed.size() << " failing criteria";
  if (!expected.empty()) {
    std::cout << " (expected:";
    for (int id : expected) std::cout << ' ' << id;
    std::cout << ')';
  }
  std::cout << '\n';
  return failed == expected ? 0 : 1;
}
