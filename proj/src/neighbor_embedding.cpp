#include "alphadisc/neighbor_embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "alphadisc/errors.hpp"
#include "detail/numeric.hpp"

namespace alphadisc {

namespace {

using detail::kInf;

// Smallest stored input similarity; keeps every off-diagonal p_ij > 0.
constexpr double kSimilarityFloor = std::numeric_limits<double>::min();
constexpr int kMaxBracketSteps = 300;

void check_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) throw DomainError(std::string(what) + " must be square");
}

// Entropy (natural log) of the row-normalized exp(-lambda d / 2) for shifted
// distances d >= 0, and the normalized weights when `out` is given.
double row_entropy(const std::vector<double>& shifted, double lambda, std::vector<double>* out) {
  double z = 0.0;
  double weighted = 0.0;
  for (double d : shifted) {
    const double w = std::exp(-0.5 * lambda * d);
    z += w;
    weighted += w * d;
  }
  if (out) {
    out->resize(shifted.size());
    for (std::size_t j = 0; j < shifted.size(); ++j) (*out)[j] = std::exp(-0.5 * lambda * shifted[j]) / z;
  }
  return std::log(z) + 0.5 * lambda * weighted / z;
}

struct RowView {
  std::vector<double> p;
  std::vector<double> log_s;
  std::vector<double> log_p;
};

double log_gamma_for_row(const RowView& row, const AlphaParam& a, const GammaMode& mode) {
  if (!mode.is_optimal()) return std::log(mode.value());
  const double lse_s = detail::log_sum_exp(row.log_s);
  if (a.is_kl()) {
    double total = 0.0;
    for (double x : row.p) total += x;
    return std::log(total) - lse_s;
  }
  if (a.is_reverse_kl()) {
    // Stationarity of sum [g s log(g s / p) - g s + p]: sum s log(g s / p) = 0.
    double weighted = 0.0;
    for (std::size_t j = 0; j < row.p.size(); ++j) {
      const double w = std::exp(row.log_s[j] - lse_s);
      if (w > 0.0) weighted += w * (row.log_p[j] - row.log_s[j]);
    }
    return weighted;
  }
  const double al = a.alpha();
  std::vector<double> mixed(row.p.size());
  for (std::size_t j = 0; j < row.p.size(); ++j) {
    mixed[j] = al * row.log_p[j] + (1.0 - al) * row.log_s[j];
  }
  return (detail::log_sum_exp(mixed) - lse_s) / al;
}

// D_alpha for one atom pair (p, q = exp(log_q)).
double atom_cost(double p, double log_p, double log_q, const AlphaParam& a) {
  const double q = std::exp(log_q);
  if (a.is_kl()) {
    if (p == 0.0) return q;
    if (log_q == -kInf) return kInf;
    return p * (log_p - log_q) - p + q;
  }
  if (a.is_reverse_kl()) {
    if (log_q == -kInf) return p;
    if (p == 0.0) return kInf;
    return q * (log_q - log_p) - q + p;
  }
  const double al = a.alpha();
  const double scale = 1.0 / (al * (1.0 - al));
  if (log_q == -kInf) return al > 1.0 ? kInf : scale * al * p;
  if (p == 0.0) return al < 0.0 ? kInf : scale * (1.0 - al) * q;
  return scale * (al * (p - q) - q * std::expm1(al * (log_p - log_q)));
}

// d D / d log q for one atom; times d log s / du gives d D / du.
double atom_log_q_derivative(double p, double log_p, double log_q, const AlphaParam& a) {
  const double q = std::exp(log_q);
  if (a.is_kl()) return q - p;
  if (a.is_reverse_kl()) return q * (log_q - log_p);
  const double al = a.alpha();
  return (q - std::exp((1.0 - al) * log_q + al * log_p)) / al;
}

RowView make_row(const SimilarityMatrix& p, Eigen::Index i, const std::vector<double>& log_s_row) {
  RowView row;
  const Eigen::Index n = p.size();
  row.p.reserve(static_cast<std::size_t>(n - 1));
  row.log_p.reserve(static_cast<std::size_t>(n - 1));
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == i) continue;
    const double v = p.values(i, j);
    row.p.push_back(v);
    row.log_p.push_back(v > 0.0 ? std::log(v) : -kInf);
  }
  row.log_s = log_s_row;
  return row;
}

std::vector<double> log_kernel_row(const Matrix& y, Eigen::Index i, const SimilarityKernel& kernel) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(y.rows() - 1));
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    if (j == i) continue;
    out.push_back(kernel.log_of_squared_distance((y.row(i) - y.row(j)).squaredNorm()));
  }
  return out;
}

double row_cost(const RowView& row, const AlphaParam& a, const GammaMode& mode) {
  const double log_gamma = log_gamma_for_row(row, a, mode);
  double sum = 0.0;
  for (std::size_t j = 0; j < row.p.size(); ++j) {
    const double t = atom_cost(row.p[j], row.log_p[j], log_gamma + row.log_s[j], a);
    if (t == kInf) return kInf;
    sum += t;
  }
  return sum;
}

void check_pair(const SimilarityMatrix& p, Eigen::Index n) {
  check_square(p.values, "similarity matrix");
  if (p.size() != n) throw DomainError("similarity matrix size does not match the embedding");
  if (n < 2) throw DomainError("an embedding needs at least two points");
}

}  // namespace

Matrix squared_distances(const Matrix& points) {
  const Eigen::Index n = points.rows();
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = (points.row(i) - points.row(j)).squaredNorm();
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

Calibration calibrate_precisions(const Matrix& sq_distances, double perplexity, double tolerance,
                                 int max_iterations) {
  check_square(sq_distances, "squared distance matrix");
  const Eigen::Index n = sq_distances.rows();
  if (n < 3) throw DomainError("perplexity calibration needs at least three points");
  if (!(perplexity > 1.0 && perplexity <= static_cast<double>(n - 1))) {
    throw DomainError("perplexity must lie in (1, n - 1]");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (sq_distances(i, i) != 0.0) throw DomainError("squared distances need a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = sq_distances(i, j);
      if (!(v >= 0.0) || !std::isfinite(v) || v != sq_distances(j, i)) {
        throw DomainError("squared distances must be finite, nonnegative and symmetric");
      }
    }
  }

  const double target = std::log(perplexity);
  Calibration out;
  out.lambdas.resize(static_cast<std::size_t>(n));
  out.entropies.resize(static_cast<std::size_t>(n));
  out.rows = Matrix::Zero(n, n);

  std::vector<double> shifted(static_cast<std::size_t>(n - 1));
  std::vector<double> weights;
  for (Eigen::Index i = 0; i < n; ++i) {
    double lo_d = kInf;
    double hi_d = 0.0;
    for (Eigen::Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      shifted[static_cast<std::size_t>(k++)] = sq_distances(i, j);
      lo_d = std::min(lo_d, sq_distances(i, j));
      hi_d = std::max(hi_d, sq_distances(i, j));
    }
    for (double& d : shifted) d -= lo_d;
    const std::string row_name = "row " + std::to_string(i);

    double lambda = 1.0;
    double entropy = 0.0;
    if (hi_d - lo_d <= 1e-300) {
      entropy = row_entropy(shifted, lambda, &weights);
      if (std::abs(entropy - target) > tolerance) {
        throw DomainError(row_name + " has all distances equal; its entropy log(n - 1) cannot reach log(perplexity)");
      }
    } else {
      std::size_t ties = 0;
      for (double d : shifted) ties += d == 0.0 ? 1 : 0;
      if (std::log(static_cast<double>(ties)) > target + tolerance) {
        throw DomainError(row_name + " has " + std::to_string(ties) +
                          " nearest neighbours at equal distance; perplexity is unreachable");
      }
      // Entropy decreases in lambda; bracket in log lambda around 1/spread.
      double spread = 0.0;
      for (double d : shifted) spread += d;
      spread /= static_cast<double>(shifted.size());
      double log_lo = std::log(1.0 / spread);
      double log_hi = log_lo;
      const auto bracket_error = [&] {
        return ConvergenceError(row_name + " did not reach the target entropy (lambda bracket [" +
                                std::to_string(std::exp(log_lo)) + ", " + std::to_string(std::exp(log_hi)) + "])");
      };
      double h_lo = row_entropy(shifted, std::exp(log_lo), nullptr);
      for (int k = 0; h_lo < target - tolerance; ++k) {
        if (k == kMaxBracketSteps) throw bracket_error();
        log_lo -= 2.0;
        h_lo = row_entropy(shifted, std::exp(log_lo), nullptr);
      }
      double h_hi = row_entropy(shifted, std::exp(log_hi), nullptr);
      for (int k = 0; h_hi > target + tolerance; ++k) {
        if (k == kMaxBracketSteps) throw bracket_error();
        log_hi += 2.0;
        h_hi = row_entropy(shifted, std::exp(log_hi), nullptr);
      }

      bool converged = false;
      if (std::abs(h_lo - target) <= tolerance) {
        lambda = std::exp(log_lo);
        converged = true;
      } else if (std::abs(h_hi - target) <= tolerance) {
        lambda = std::exp(log_hi);
        converged = true;
      }
      for (int it = 0; !converged && it < max_iterations; ++it) {
        const double mid = 0.5 * (log_lo + log_hi);
        lambda = std::exp(mid);
        entropy = row_entropy(shifted, lambda, nullptr);
        if (std::abs(entropy - target) <= tolerance) {
          converged = true;
        } else if (entropy > target) {
          log_lo = mid;
        } else {
          log_hi = mid;
        }
      }
      if (!converged) {
        throw ConvergenceError(row_name + " did not reach the target entropy in " +
                               std::to_string(max_iterations) + " bisection steps (lambda bracket [" +
                               std::to_string(std::exp(log_lo)) + ", " + std::to_string(std::exp(log_hi)) + "])");
      }
      entropy = row_entropy(shifted, lambda, &weights);
    }

    out.lambdas[static_cast<std::size_t>(i)] = lambda;
    out.entropies[static_cast<std::size_t>(i)] = entropy;
    for (Eigen::Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      out.rows(i, j) = std::max(weights[static_cast<std::size_t>(k++)], kSimilarityFloor);
    }
  }
  return out;
}

SimilarityMatrix input_similarities(const Matrix& x, double perplexity) {
  if (x.rows() < 3) throw DomainError("input similarities need at least three points");
  auto cal = calibrate_precisions(squared_distances(x), perplexity);
  SimilarityMatrix out;
  out.values = std::move(cal.rows);
  out.normalization = Normalization::kRowNormalized;
  out.lambdas = std::move(cal.lambdas);
  out.entropies = std::move(cal.entropies);
  return out;
}

SimilarityMatrix embedding_similarities(const Matrix& y, const SimilarityKernel& kernel) {
  const Eigen::Index n = y.rows();
  SimilarityMatrix out;
  out.values = Matrix::Zero(n, n);
  out.normalization = Normalization::kNone;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) out.values(i, j) = kernel.of_squared_distance((y.row(i) - y.row(j)).squaredNorm());
    }
  }
  return out;
}

GammaMode GammaMode::fixed(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw DomainError("fixed gamma must be positive");
  return GammaMode(false, gamma);
}

double embedding_cost(const SimilarityMatrix& p, const SimilarityMatrix& s,
                      const EmbeddingObjective& objective) {
  check_pair(p, s.size());
  check_square(s.values, "similarity matrix");
  const AlphaParam a(objective.alpha, objective.limit_tolerance);
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    std::vector<double> log_s;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (j == i) continue;
      const double v = s.values(i, j);
      if (!(v >= 0.0)) throw DomainError("latent similarities must be nonnegative");
      log_s.push_back(v > 0.0 ? std::log(v) : -kInf);
    }
    const double c = row_cost(make_row(p, i, log_s), a, objective.gamma);
    if (c == kInf) return kInf;
    total += c;
  }
  return total;
}

std::vector<double> embedding_row_costs(const SimilarityMatrix& p, const Matrix& y,
                                        const SimilarityKernel& kernel,
                                        const EmbeddingObjective& objective) {
  check_pair(p, y.rows());
  const AlphaParam a(objective.alpha, objective.limit_tolerance);
  std::vector<double> out(static_cast<std::size_t>(y.rows()));
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = row_cost(make_row(p, i, log_kernel_row(y, i, kernel)), a, objective.gamma);
  }
  return out;
}

double embedding_cost(const SimilarityMatrix& p, const Matrix& y, const SimilarityKernel& kernel,
                      const EmbeddingObjective& objective) {
  double total = 0.0;
  for (double c : embedding_row_costs(p, y, kernel, objective)) total += c;
  return total;
}

Matrix embedding_cost_gradient(const SimilarityMatrix& p, const Matrix& y,
                               const SimilarityKernel& kernel,
                               const EmbeddingObjective& objective) {
  check_pair(p, y.rows());
  const AlphaParam a(objective.alpha, objective.limit_tolerance);
  const Eigen::Index n = y.rows();
  Matrix grad = Matrix::Zero(n, y.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const RowView row = make_row(p, i, log_kernel_row(y, i, kernel));
    // With the optimal gamma the cost is stationary in gamma, so gamma is
    // held fixed when differentiating.
    const double log_gamma = log_gamma_for_row(row, a, objective.gamma);
    for (Eigen::Index j = 0, k = 0; j < n; ++j) {
      if (j == i) continue;
      const auto kk = static_cast<std::size_t>(k++);
      const Eigen::RowVectorXd diff = y.row(i) - y.row(j);
      const double u = diff.squaredNorm();
      const double coeff = atom_log_q_derivative(row.p[kk], row.log_p[kk], log_gamma + row.log_s[kk], a) *
                           kernel.log_derivative(u);
      grad.row(i) += 2.0 * coeff * diff;
      grad.row(j) -= 2.0 * coeff * diff;
    }
  }
  return grad;
}

SneConsistency sne_consistency_check(const SimilarityMatrix& p, const SimilarityMatrix& s) {
  SneConsistency out;
  out.discrete_cost = embedding_cost(p, s, EmbeddingObjective{1.0, GammaMode::optimal()});
  double kl = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    double s_total = 0.0;
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (j != i) s_total += s.values(i, j);
    }
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (j == i) continue;
      const double pij = p.values(i, j);
      if (pij > 0.0) kl += pij * std::log(pij / (s.values(i, j) / s_total));
    }
  }
  out.kl_cost = kl;
  return out;
}

double background_repulsion(const SimilarityMatrix& s, double gamma) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      if (i != j) total += s.values(i, j);
    }
  }
  return gamma * total;
}

FixedGammaDecomposition decompose_fixed_gamma_cost(const SimilarityMatrix& p,
                                                   const SimilarityMatrix& s, double gamma) {
  check_pair(p, s.size());
  FixedGammaDecomposition out;
  out.repulsion = background_repulsion(s, gamma);
  double p_total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      if (i == j) continue;
      const double pij = p.values(i, j);
      if (pij == 0.0) continue;
      out.attraction -= pij * std::log(s.values(i, j));
      out.data_terms += pij * std::log(pij);
      p_total += pij;
    }
  }
  out.data_terms -= (1.0 + std::log(gamma)) * p_total;
  return out;
}

EmbeddingState optimize_embedding(const SimilarityMatrix& p, Matrix init,
                                  const SimilarityKernel& kernel,
                                  const EmbeddingObjective& objective,
                                  const OptimizerConfig& cfg) {
  if (!init.allFinite()) throw DomainError("initial embedding is not finite");
  if (!(cfg.step > 0.0)) throw DomainError("optimizer step must be positive");
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw DomainError("momentum must lie in [0, 1)");
  if (!(cfg.step_growth >= 1.0)) throw DomainError("step growth must be at least 1");

  EmbeddingState state;
  state.y = std::move(init);
  state.step = cfg.step;
  state.momentum = cfg.momentum;
  double cost = embedding_cost(p, state.y, kernel, objective);
  if (!std::isfinite(cost)) throw NonFiniteError("initial embedding cost is not finite");
  state.cost_trace.push_back(cost);

  Matrix velocity = Matrix::Zero(state.y.rows(), state.y.cols());
  for (; state.iterations < cfg.max_iterations; ++state.iterations) {
    const Matrix grad = embedding_cost_gradient(p, state.y, kernel, objective);
    if (!grad.allFinite()) {
      throw NonFiniteError("gradient is not finite at iteration " + std::to_string(state.iterations));
    }
    if (grad.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) break;

    bool accepted = false;
    while (!accepted && state.step >= cfg.min_step) {
      const Matrix next_velocity = state.momentum * velocity - state.step * grad;
      const Matrix candidate = state.y + next_velocity;
      const double next_cost = embedding_cost(p, candidate, kernel, objective);
      if (std::isnan(next_cost)) {
        throw NonFiniteError("cost is not finite at iteration " + std::to_string(state.iterations));
      }
      if (next_cost <= cost) {
        state.y = candidate;
        velocity = next_velocity;
        cost = next_cost;
        state.cost_trace.push_back(cost);
        state.step *= cfg.step_growth;
        accepted = true;
      } else {
        state.step *= 0.5;
        velocity.setZero();
        ++state.rejected_steps;
      }
    }
    if (!accepted) break;
  }
  return state;
}

Matrix random_initial_embedding(Eigen::Index n, Eigen::Index d, std::uint64_t seed, double scale) {
  auto rng = make_stream(seed, 0x494e4954ULL, 0);
  std::normal_distribution<double> normal(0.0, scale);
  Matrix y(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) y(i, k) = normal(rng);
  }
  return y;
}

}  // namespace alphadisc
