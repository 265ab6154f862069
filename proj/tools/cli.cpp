#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "alphadisc/csv.hpp"
#include "alphadisc/discrepancy.hpp"
#include "alphadisc/errors.hpp"
#include "alphadisc/maps.hpp"
#include "alphadisc/neighbor_embedding.hpp"
#include "alphadisc/report.hpp"
#include "alphadisc/theorem6.hpp"

namespace alphadisc::cli {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw UsageError(what + ": not a finite number: '" + text + "'");
  }
  return v;
}

SimilarityKernel parse_kernel(const std::string& spec) {
  if (spec == "gaussian") return SimilarityKernel::gaussian();
  if (spec == "student") return SimilarityKernel::student();
  const std::string prefix = "scaled-gaussian:";
  if (spec.starts_with(prefix)) {
    const double lambda = parse_double(spec.substr(prefix.size()), "kernel precision");
    if (!(lambda > 0.0)) throw UsageError("kernel precision must be positive");
    return SimilarityKernel::scaled_gaussian(lambda);
  }
  throw UsageError("unknown kernel '" + spec + "' (gaussian, student, scaled-gaussian:<lambda>)");
}

MetricField parse_metric(const std::string& spec, int dim) {
  if (spec == "euclidean") return MetricField::euclidean(dim);
  const std::string prefix = "scaled:";
  if (spec.starts_with(prefix)) {
    const double scale = parse_double(spec.substr(prefix.size()), "metric scale");
    if (!(scale > 0.0)) throw UsageError("metric scale must be positive");
    return MetricField::scaled_euclidean(dim, scale);
  }
  throw UsageError("unknown metric '" + spec + "' (euclidean, scaled:<s>)");
}

LatentPrior parse_prior(const std::string& spec, int dim, double radius) {
  if (spec == "uniform-ball") {
    if (!(radius > 0.0)) throw UsageError("radius must be positive");
    return LatentPrior::uniform_ball(dim, radius);
  }
  if (spec == "gaussian") return LatentPrior::gaussian(Vector::Zero(dim), Matrix::Identity(dim, dim));
  throw UsageError("unknown prior '" + spec + "' (uniform-ball, gaussian)");
}

SmoothMap load_map(const std::string& spec) {
  try {
    return resolve_map(spec);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T v{};
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw UsageError(what + ": bad entry '" + item + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(what + " is empty");
  return out;
}

// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw UsageError("cannot open " + path + " for writing");
  file << text;
  if (!file) throw UsageError("failed writing " + path);
}

struct CommonOptions {
  std::string map;
  std::string metric = "euclidean";
  std::string prior = "uniform-ball";
  double radius = 3.0;
  double alpha = 1.0;
  double limit_tolerance = AlphaParam::kDefaultLimitTolerance;
  std::size_t m = 100;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--map", o.map, "builtin map name or mlp:<weights file>")->required();
  app->add_option("--metric", o.metric, "observation metric: euclidean | scaled:<s>")->capture_default_str();
  app->add_option("--prior", o.prior, "reference prior: uniform-ball | gaussian")->capture_default_str();
  app->add_option("--radius", o.radius, "uniform-ball radius")->capture_default_str();
  app->add_option("--alpha", o.alpha, "alpha")->capture_default_str();
  app->add_option("--limit-tolerance", o.limit_tolerance, "KL / reverse-KL switch tolerance")->capture_default_str();
  app->add_option("--m", o.m, "reference points")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--seed", o.seed, "RNG seed");
  app->add_option("--threads", o.threads, "worker threads (0 = all cores); results do not depend on it");
  app->add_option("--out", o.out, "JSON report path (stdout if omitted)");
}

Json echo_common(const std::string& command, const CommonOptions& o, std::uint64_t seed) {
  Json c;
  c["command"] = command;
  c["map"] = o.map;
  c["metric"] = o.metric;
  c["prior"] = o.prior;
  c["radius"] = o.radius;
  c["alpha"] = o.alpha;
  c["limit_tolerance"] = o.limit_tolerance;
  c["m"] = o.m;
  c["seed"] = seed;
  return c;
}

std::ostream& summary_stream(const std::string& out_path, std::ostream& out, std::ostream& err) {
  return out_path.empty() ? err : out;
}

struct DiscrepancyOptions {
  CommonOptions common;
  std::string kernel = "gaussian";
  std::string variant = "closed";
  std::size_t n = 2000;
};

int cmd_discrepancy(const DiscrepancyOptions& o, std::ostream& out, std::ostream& err) {
  const auto variant = [&] {
    try {
      return parse_variant(o.variant);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
  }();
  if (variant == EstimatorVariant::kConformal) throw UsageError("use the conformal subcommand");
  const bool stochastic = variant != EstimatorVariant::kClosedForm;
  if (stochastic && !o.common.seed) throw UsageError("--seed is required for empirical variants");
  const std::uint64_t seed = o.common.seed.value_or(0);

  const SmoothMap f = load_map(o.common.map);
  const MetricField metric = parse_metric(o.common.metric, f.dim_out());
  const LatentPrior prior = parse_prior(o.common.prior, f.dim_in(), o.common.radius);
  const SimilarityKernel kernel = parse_kernel(o.kernel);

  MonteCarloConfig cfg;
  cfg.alpha = o.common.alpha;
  cfg.kernel = kernel;
  cfg.m = o.common.m;
  cfg.n = o.n;
  cfg.seed = seed;
  cfg.limit_tolerance = o.common.limit_tolerance;
  cfg.threads = o.common.threads;

  DiscrepancyEstimate est;
  switch (variant) {
    case EstimatorVariant::kEmpiricalRp:
      est = empirical_alpha_discrepancy_rp(f, metric, prior, cfg);
      break;
    case EstimatorVariant::kEmpiricalRq:
      est = empirical_alpha_discrepancy_rq(f, metric, prior, cfg);
      break;
    default:
      est = alpha_discrepancy(f, metric, prior, cfg);
      break;
  }

  Json report = to_json(est);
  Json config = echo_common("discrepancy", o.common, seed);
  config["kernel"] = kernel.name();
  config["variant"] = to_string(variant);
  config["n"] = stochastic ? o.n : 0;
  report["config"] = std::move(config);
  emit(o.common.out, dump(report), out);
  summary_stream(o.common.out, out, err)
      << "discrepancy " << to_string(variant) << " map=" << o.common.map << " alpha=" << o.common.alpha
      << " value=" << format_double(est.value) << " std_error=" << format_double(est.std_error) << '\n';
  return kExitOk;
}

struct ConformalOptions {
  CommonOptions common;
  std::string search = "analytic";
  double tolerance = 1e-8;
};

int cmd_conformal(const ConformalOptions& o, std::ostream& out, std::ostream& err) {
  const std::uint64_t seed = o.common.seed.value_or(0);
  const SmoothMap f = load_map(o.common.map);
  const MetricField metric = parse_metric(o.common.metric, f.dim_out());
  const LatentPrior prior = parse_prior(o.common.prior, f.dim_in(), o.common.radius);

  ConformalConfig cfg;
  if (o.search == "analytic") {
    cfg.search = LambdaSearch::kAnalyticD1;
  } else if (o.search == "golden") {
    cfg.search = LambdaSearch::kGoldenSection;
  } else {
    throw UsageError("unknown lambda search '" + o.search + "' (analytic, golden)");
  }
  cfg.tolerance = o.tolerance;

  MonteCarloConfig mc;
  mc.alpha = o.common.alpha;
  mc.m = o.common.m;
  mc.seed = seed;
  mc.limit_tolerance = o.common.limit_tolerance;
  mc.threads = o.common.threads;

  const ConformalEstimate est = conformal_alpha_discrepancy(f, metric, prior, mc, cfg);
  Json report = to_json(est.estimate);
  report["lambda"] = lambda_summary(est.lambdas);
  Json config = echo_common("conformal", o.common, seed);
  config["search"] = o.search;
  config["tolerance"] = o.tolerance;
  report["config"] = std::move(config);
  emit(o.common.out, dump(report), out);
  summary_stream(o.common.out, out, err)
      << "conformal map=" << o.common.map << " alpha=" << o.common.alpha
      << " value=" << format_double(est.estimate.value)
      << " median_lambda=" << format_double(report["lambda"]["median"].get<double>()) << '\n';
  return kExitOk;
}

struct EmbedOptions {
  std::string input;
  double perplexity = 0.0;
  int dim = 2;
  std::string kernel = "student";
  double alpha = 1.0;
  std::string gamma = "optimal";
  std::size_t iterations = 500;
  double step = 1.0;
  double momentum = 0.5;
  double init_scale = 1e-2;
  std::optional<std::uint64_t> seed;
  std::string output;
  std::string trace;
};

int cmd_embed(const EmbedOptions& o, std::ostream& out, std::ostream& err) {
  if (!o.seed) throw UsageError("--seed is required for embed");
  const SimilarityKernel kernel = parse_kernel(o.kernel);
  const GammaMode gamma = o.gamma == "optimal" ? GammaMode::optimal()
                                               : GammaMode::fixed(parse_double(o.gamma, "gamma"));
  const Matrix x = load_csv_matrix(o.input);
  const auto n = x.rows();
  if (n < 3) throw UsageError("embed needs at least three data rows");
  if (!(o.perplexity > 1.0 && o.perplexity <= static_cast<double>(n - 1))) {
    throw UsageError("perplexity must lie in (1, n - 1] = (1, " + std::to_string(n - 1) + "]");
  }

  const SimilarityMatrix p = input_similarities(x, o.perplexity);
  const Matrix init = random_initial_embedding(n, o.dim, *o.seed, o.init_scale);
  EmbeddingObjective objective;
  objective.alpha = o.alpha;
  objective.gamma = gamma;
  OptimizerConfig cfg;
  cfg.max_iterations = o.iterations;
  cfg.step = o.step;
  cfg.momentum = o.momentum;
  const EmbeddingState state = optimize_embedding(p, init, kernel, objective, cfg);

  std::ostringstream csv;
  std::vector<std::string> header;
  for (int k = 0; k < o.dim; ++k) header.push_back("y" + std::to_string(k + 1));
  write_csv_matrix(csv, state.y, header);
  emit(o.output, csv.str(), out);

  Json trace;
  Json config;
  config["command"] = "embed";
  config["input"] = o.input;
  config["perplexity"] = o.perplexity;
  config["dim"] = o.dim;
  config["kernel"] = kernel.name();
  config["alpha"] = o.alpha;
  config["gamma"] = o.gamma;
  config["iterations"] = o.iterations;
  config["step"] = o.step;
  config["momentum"] = o.momentum;
  config["init_scale"] = o.init_scale;
  config["seed"] = *o.seed;
  trace["config"] = std::move(config);
  trace["iterations"] = state.iterations;
  trace["rejected_steps"] = state.rejected_steps;
  trace["final_step"] = state.step;
  trace["final_cost"] = state.cost_trace.back();
  trace["cost_trace"] = to_json(state.cost_trace);
  if (!o.trace.empty()) emit(o.trace, dump(trace), out);

  std::ostream& summary = o.output.empty() ? err : out;
  summary << "embed n=" << n << " iterations=" << state.iterations
          << " final_cost=" << format_double(state.cost_trace.back()) << '\n';
  return kExitOk;
}

struct Theorem6Options {
  std::string map;
  std::string metric = "euclidean";
  double radius = 3.0;
  double perplexity = 20.0;
  std::string n_list = "128,256,512,1024";
  std::size_t replicates = 5;
  double interior_fraction = 0.5;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string out;
  std::string json;
};

int cmd_theorem6(const Theorem6Options& o, std::ostream& out, std::ostream& err) {
  if (!o.seed) throw UsageError("--seed is required for theorem6");
  const SmoothMap f = load_map(o.map);
  const MetricField metric = parse_metric(o.metric, f.dim_out());

  Theorem6Config cfg;
  cfg.radius = o.radius;
  cfg.perplexity = o.perplexity;
  cfg.n_list = parse_list<std::size_t>(o.n_list, "--n-list");
  if (!std::is_sorted(cfg.n_list.begin(), cfg.n_list.end())) throw UsageError("--n-list must be increasing");
  if (o.replicates == 0) throw UsageError("--replicates must be positive");
  cfg.seeds.clear();
  for (std::size_t k = 0; k < o.replicates; ++k) cfg.seeds.push_back(*o.seed + k);
  cfg.interior_fraction = o.interior_fraction;
  cfg.threads = o.threads;

  const auto rows = theorem6_experiment(f, metric, cfg);
  std::ostringstream csv;
  write_theorem6_csv(csv, rows);
  emit(o.out, csv.str(), out);

  const auto medians = median_residuals(rows, cfg.n_list);
  if (!o.json.empty()) {
    Json report;
    Json config;
    config["command"] = "theorem6";
    config["map"] = o.map;
    config["metric"] = o.metric;
    config["radius"] = o.radius;
    config["perplexity"] = o.perplexity;
    config["n_list"] = cfg.n_list;
    config["seeds"] = cfg.seeds;
    config["interior_fraction"] = o.interior_fraction;
    report["config"] = std::move(config);
    Json per_n = Json::array();
    for (std::size_t k = 0; k < cfg.n_list.size(); ++k) {
      Json entry;
      entry["n"] = cfg.n_list[k];
      entry["median_residual"] = medians[k];
      per_n.push_back(std::move(entry));
    }
    report["median_residuals"] = std::move(per_n);
    Json all = Json::array();
    for (const auto& r : rows) {
      Json entry;
      entry["n"] = r.n;
      entry["seed"] = r.seed;
      entry["sne_cost_fitted_residual"] = r.residual;
      entry["closed_form_value"] = r.closed_form_value;
      entry["slope"] = r.slope;
      entry["offset"] = r.offset;
      entry["calibrated_closed_form_mean"] = r.calibrated_closed_form_mean;
      entry["sne_cost_mean"] = r.sne_cost_mean;
      entry["reference_count"] = r.reference_count;
      all.push_back(std::move(entry));
    }
    report["rows"] = std::move(all);
    emit(o.json, dump(report), out);
  }

  std::ostream& summary = o.out.empty() ? err : out;
  summary << "theorem6 map=" << o.map << " median residuals:";
  for (std::size_t k = 0; k < medians.size(); ++k) {
    summary << ' ' << cfg.n_list[k] << '=' << format_double(medians[k]);
  }
  summary << '\n';
  return kExitOk;
}

struct OracleOptions {
  std::string a_values = "0.5,1,2,5";
  std::string alphas = "0,0.25,0.5,0.75,1";
  double lo = -12.0;
  double hi = 12.0;
  std::size_t points = 8001;
  double tolerance = 1e-6;
  std::string out;
};

// 1-D check: closed form of the pull-back precision a against trapezoid
// quadrature between N(0, 1/a) and the normalized Gaussian kernel.
int cmd_oracle(const OracleOptions& o, std::ostream& out, std::ostream& err) {
  const auto a_values = parse_list<double>(o.a_values, "--a-values");
  const auto alphas = parse_list<double>(o.alphas, "--alphas");
  if (!(o.hi > o.lo) || o.points < 3) throw UsageError("grid needs hi > lo and at least 3 points");
  const Grid grid = Grid::uniform(1, GridAxis{o.lo, o.hi, o.points});
  const double log_norm = 0.5 * std::log(2.0 * std::numbers::pi);
  const auto kernel = SimilarityKernel::gaussian();

  Json report;
  Json config;
  config["command"] = "oracle";
  config["a_values"] = a_values;
  config["alphas"] = alphas;
  config["grid"] = {{"lo", o.lo}, {"hi", o.hi}, {"points", o.points}};
  config["tolerance"] = o.tolerance;
  report["config"] = std::move(config);

  Json cases = Json::array();
  double worst = 0.0;
  for (double a : a_values) {
    if (!(a > 0.0)) throw UsageError("--a-values must be positive");
    const Density p = [a, log_norm](const Vector& y) {
      return std::exp(0.5 * std::log(a) - log_norm - 0.5 * a * y[0] * y[0]);
    };
    const Density q = [log_norm](const Vector& y) { return std::exp(-log_norm - 0.5 * y[0] * y[0]); };
    for (double al : alphas) {
      const AlphaParam alpha(al);
      const double closed = pointwise_discrepancy_closed_form(Matrix::Constant(1, 1, a), alpha, kernel);
      const QuadratureResult quad = alpha_divergence_quadrature(p, q, grid, alpha);
      const double diff = std::abs(closed - quad.value);
      worst = std::max(worst, diff);
      Json c;
      c["a"] = a;
      c["alpha"] = al;
      c["closed_form"] = closed;
      c["quadrature"] = quad.value;
      c["abs_difference"] = diff;
      c["normalization_warning"] = quad.normalization_warning;
      cases.push_back(std::move(c));
    }
  }
  report["cases"] = std::move(cases);
  report["max_abs_difference"] = worst;
  report["pass"] = worst <= o.tolerance;
  emit(o.out, dump(report), out);
  summary_stream(o.out, out, err) << "oracle max_abs_difference=" << format_double(worst)
                                  << (worst <= o.tolerance ? " PASS" : " FAIL") << '\n';
  return worst <= o.tolerance ? kExitOk : kExitNumerical;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"alpha-discrepancy estimators and neighbour embeddings", "alphadisc"};
  app.require_subcommand(1);

  DiscrepancyOptions disc;
  auto* disc_cmd = app.add_subcommand("discrepancy", "closed-form or Monte Carlo alpha-discrepancy");
  add_common(disc_cmd, disc.common);
  disc_cmd->add_option("--kernel", disc.kernel, "gaussian | student | scaled-gaussian:<lambda>")->capture_default_str();
  disc_cmd->add_option("--variant", disc.variant, "closed | empirical-rp | empirical-rq")->capture_default_str();
  disc_cmd->add_option("--n", disc.n, "neighbours per reference point")->capture_default_str();

  ConformalOptions conf;
  auto* conf_cmd = app.add_subcommand("conformal", "conformal alpha-discrepancy with per-point kernel scale");
  add_common(conf_cmd, conf.common);
  conf_cmd->add_option("--search", conf.search, "analytic | golden")->capture_default_str();
  conf_cmd->add_option("--tolerance", conf.tolerance, "relative lambda tolerance")->capture_default_str();

  EmbedOptions emb;
  auto* emb_cmd = app.add_subcommand("embed", "neighbour embedding of a CSV data matrix");
  emb_cmd->add_option("--input", emb.input, "data CSV")->required();
  emb_cmd->add_option("--perplexity", emb.perplexity, "target perplexity")->required();
  emb_cmd->add_option("--dim", emb.dim, "embedding dimension")->capture_default_str()->check(CLI::PositiveNumber);
  emb_cmd->add_option("--kernel", emb.kernel, "latent kernel")->capture_default_str();
  emb_cmd->add_option("--alpha", emb.alpha, "alpha")->capture_default_str();
  emb_cmd->add_option("--gamma", emb.gamma, "optimal | <fixed value>")->capture_default_str();
  emb_cmd->add_option("--iterations", emb.iterations, "maximum iterations")->capture_default_str();
  emb_cmd->add_option("--step", emb.step, "initial step size")->capture_default_str();
  emb_cmd->add_option("--momentum", emb.momentum, "momentum coefficient")->capture_default_str();
  emb_cmd->add_option("--init-scale", emb.init_scale, "sd of the random initialization")->capture_default_str();
  emb_cmd->add_option("--seed", emb.seed, "RNG seed");
  emb_cmd->add_option("--output", emb.output, "embedding CSV path (stdout if omitted)");
  emb_cmd->add_option("--trace", emb.trace, "cost trace JSON path");

  Theorem6Options t6;
  auto* t6_cmd = app.add_subcommand("theorem6", "SNE cost against closed-form D1 as n grows");
  t6_cmd->add_option("--map", t6.map, "builtin map name")->required();
  t6_cmd->add_option("--metric", t6.metric, "observation metric")->capture_default_str();
  t6_cmd->add_option("--radius", t6.radius, "uniform-ball radius")->capture_default_str();
  t6_cmd->add_option("--perplexity", t6.perplexity, "perplexity")->capture_default_str();
  t6_cmd->add_option("--n-list", t6.n_list, "comma-separated sample sizes")->capture_default_str();
  t6_cmd->add_option("--replicates", t6.replicates, "seeds seed, seed+1, ...")->capture_default_str();
  t6_cmd->add_option("--interior-fraction", t6.interior_fraction, "fit radius / ball radius")->capture_default_str();
  t6_cmd->add_option("--seed", t6.seed, "base RNG seed");
  t6_cmd->add_option("--threads", t6.threads, "worker threads (0 = all cores)");
  t6_cmd->add_option("--out", t6.out, "CSV report path (stdout if omitted)");
  t6_cmd->add_option("--json", t6.json, "JSON report path");

  OracleOptions orc;
  auto* orc_cmd = app.add_subcommand("oracle", "closed form against 1-D quadrature");
  orc_cmd->add_option("--a-values", orc.a_values, "comma-separated pull-back precisions")->capture_default_str();
  orc_cmd->add_option("--alphas", orc.alphas, "comma-separated alphas")->capture_default_str();
  orc_cmd->add_option("--grid-lo", orc.lo, "grid lower end")->capture_default_str();
  orc_cmd->add_option("--grid-hi", orc.hi, "grid upper end")->capture_default_str();
  orc_cmd->add_option("--points", orc.points, "grid points")->capture_default_str();
  orc_cmd->add_option("--tolerance", orc.tolerance, "pass threshold")->capture_default_str();
  orc_cmd->add_option("--out", orc.out, "JSON report path (stdout if omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (disc_cmd->parsed()) return cmd_discrepancy(disc, out, err);
    if (conf_cmd->parsed()) return cmd_conformal(conf, out, err);
    if (emb_cmd->parsed()) return cmd_embed(emb, out, err);
    if (t6_cmd->parsed()) return cmd_theorem6(t6, out, err);
    return cmd_oracle(orc, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedLimitError& e) {
    err << "unsupported configuration: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace alphadisc::cli
