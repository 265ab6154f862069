#pragma once

// Neighbourhood embeddings as empirical alpha-discrepancies: perplexity
// calibrated input similarities P, latent similarities S, the per-row
// alpha-divergence cost between {p_ij}_j and {gamma_i s_ij}_j (SNE / t-SNE at
// alpha = 1 with optimal gamma, elastic embedding with fixed gamma), its
// gradient and a momentum gradient-descent optimizer.

#include <cstdint>
#include <vector>

#include "alphadisc/geometry.hpp"
#include "alphadisc/measures.hpp"

namespace alphadisc {

enum class Normalization { kNone, kRowNormalized };

/// Row i holds the similarities of every other point to reference i; the
/// diagonal is excluded by construction (stored as 0, never read).
struct SimilarityMatrix {
  Matrix values;
  Normalization normalization = Normalization::kNone;
  std::vector<double> lambdas;    // per-row kernel precision, when calibrated
  std::vector<double> entropies;  // achieved natural-log entropy per row

  Eigen::Index size() const noexcept { return values.rows(); }
};

struct Calibration {
  std::vector<double> lambdas;
  std::vector<double> entropies;
  Matrix rows;  // row-normalized exp(-lambda_i d_ij^2 / 2), zero diagonal
};

/// Per row, bisection on log lambda_i until the Shannon entropy of the
/// row-normalized exp(-lambda_i d_ij^2 / 2) equals log(perplexity) within
/// `tolerance`. Requires a symmetric zero-diagonal matrix of squared
/// distances and 1 < perplexity <= n - 1.
///
/// Throws ConvergenceError (listing the bracket) after max_iterations, and
/// DomainError for a degenerate row whose entropy cannot reach the target.
Calibration calibrate_precisions(const Matrix& sq_distances, double perplexity,
                                 double tolerance = 1e-10, int max_iterations = 200);

/// Row-normalized, perplexity-calibrated similarities of the rows of x.
SimilarityMatrix input_similarities(const Matrix& x, double perplexity);

Matrix squared_distances(const Matrix& points);

/// s_ij = kernel(y_i, y_j), unnormalized.
SimilarityMatrix embedding_similarities(const Matrix& y, const SimilarityKernel& kernel);

/// Optimal (discrete auto-normalizer per row) or a fixed, hand-set gamma.
class GammaMode {
 public:
  static GammaMode optimal() { return GammaMode(true, 0.0); }
  static GammaMode fixed(double gamma);

  bool is_optimal() const noexcept { return optimal_; }
  double value() const noexcept { return value_; }

 private:
  GammaMode(bool optimal, double value) : optimal_(optimal), value_(value) {}
  bool optimal_;
  double value_;
};

struct EmbeddingObjective {
  double alpha = 1.0;
  GammaMode gamma = GammaMode::optimal();
  double limit_tolerance = AlphaParam::kDefaultLimitTolerance;
};

/// Sum over rows of D_alpha({p_ij}_j : {gamma_i s_ij}_j). Returns +infinity
/// when some s_ij = 0 < p_ij at alpha >= 1.
double embedding_cost(const SimilarityMatrix& p, const SimilarityMatrix& s,
                      const EmbeddingObjective& objective);

/// Per-row costs with s computed in log space from coordinates, so far-apart
/// points never underflow.
std::vector<double> embedding_row_costs(const SimilarityMatrix& p, const Matrix& y,
                                        const SimilarityKernel& kernel,
                                        const EmbeddingObjective& objective);

double embedding_cost(const SimilarityMatrix& p, const Matrix& y, const SimilarityKernel& kernel,
                      const EmbeddingObjective& objective);

/// Analytic gradient of embedding_cost with respect to the rows of y.
Matrix embedding_cost_gradient(const SimilarityMatrix& p, const Matrix& y,
                               const SimilarityKernel& kernel,
                               const EmbeddingObjective& objective);

/// Both routes to the SNE cost at alpha = 1: the optimal-gamma discrete
/// divergence, and sum p_ij log(p_ij / (s_ij / sum_j s_ij)).
struct SneConsistency {
  double discrete_cost = 0.0;
  double kl_cost = 0.0;
  double difference() const { return discrete_cost - kl_cost; }
};
SneConsistency sne_consistency_check(const SimilarityMatrix& p, const SimilarityMatrix& s);

/// gamma sum_ij s_ij: the background repulsion of the fixed-gamma cost.
/// Depends on S alone.
double background_repulsion(const SimilarityMatrix& s, double gamma);

/// The alpha = 1 fixed-gamma cost split as
///   attraction   -sum p_ij log s_ij
///   repulsion    gamma sum s_ij
///   data_terms   sum p_ij log p_ij - (1 + log gamma) sum p_ij
struct FixedGammaDecomposition {
  double attraction = 0.0;
  double repulsion = 0.0;
  double data_terms = 0.0;
  double total() const { return attraction + repulsion + data_terms; }
};
FixedGammaDecomposition decompose_fixed_gamma_cost(const SimilarityMatrix& p,
                                                   const SimilarityMatrix& s, double gamma);

struct OptimizerConfig {
  std::size_t max_iterations = 500;
  double step = 1.0;
  double momentum = 0.5;
  double min_step = 1e-12;
  double step_growth = 1.1;  // applied after each accepted step
  double gradient_tolerance = 1e-10;  // stop when |grad|_inf falls below
};

struct EmbeddingState {
  Matrix y;
  std::size_t iterations = 0;
  double step = 0.0;
  double momentum = 0.0;
  std::vector<double> cost_trace;  // initial cost, then one entry per accepted step
  std::size_t rejected_steps = 0;
};

/// Gradient descent with momentum; a step that increases the cost is rejected,
/// the step size halved and the velocity reset, so the trace never increases.
/// Accepted steps grow the step size by step_growth.
/// Throws NonFiniteError naming the iteration if the cost stops being finite.
EmbeddingState optimize_embedding(const SimilarityMatrix& p, Matrix init,
                                  const SimilarityKernel& kernel,
                                  const EmbeddingObjective& objective,
                                  const OptimizerConfig& cfg);

/// n x d matrix of N(0, scale^2) coordinates from the given seed.
Matrix random_initial_embedding(Eigen::Index n, Eigen::Index d, std::uint64_t seed,
                                double scale = 1e-2);

}  // namespace alphadisc
