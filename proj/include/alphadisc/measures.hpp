#pragma once

// Alpha-divergence between positive measures, its KL limits, the
// auto-normalizer gamma* and the LogDet matrix divergence.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "alphadisc/types.hpp"

namespace alphadisc {

/// Discrete positive measure: nonnegative mass per atom. Atoms are labelled
/// so that two measures can be checked for a common support.
class PositiveMeasure {
 public:
  /// Atoms are labelled 0..weights.size()-1.
  explicit PositiveMeasure(std::vector<double> weights);
  PositiveMeasure(std::vector<double> weights, std::vector<std::size_t> atom_ids);

  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const std::size_t> atom_ids() const noexcept { return atom_ids_; }
  std::size_t size() const noexcept { return weights_.size(); }
  double total() const noexcept;

  PositiveMeasure scaled(double factor) const;
  bool same_support(const PositiveMeasure& other) const noexcept;

 private:
  std::vector<double> weights_;
  std::vector<std::size_t> atom_ids_;
};

/// alpha together with the distance from 0 or 1 below which the closed KL
/// limits replace the general formula.
class AlphaParam {
 public:
  static constexpr double kDefaultLimitTolerance = 1e-6;

  explicit AlphaParam(double alpha, double limit_tolerance = kDefaultLimitTolerance);

  double alpha() const noexcept { return alpha_; }
  double limit_tolerance() const noexcept { return limit_tolerance_; }

  bool is_reverse_kl() const noexcept;  // alpha ~ 0
  bool is_kl() const noexcept;          // alpha ~ 1

 private:
  double alpha_;
  double limit_tolerance_;
};

/// sum_i [a p_i + (1-a) q_i - p_i^a q_i^(1-a)] / (a (1-a)), or the KL /
/// reverse-KL limit. Returns +infinity when the divergence is unbounded
/// (q_i = 0 < p_i for alpha >= 1, p_i = 0 < q_i for alpha <= 0).
double alpha_divergence_discrete(const PositiveMeasure& p, const PositiveMeasure& q,
                                 const AlphaParam& a);

/// Unchecked kernel of alpha_divergence_discrete over raw weight spans.
double alpha_divergence_weights(std::span<const double> p, std::span<const double> q,
                                const AlphaParam& a);

/// One axis of a trapezoid grid: `points` equally spaced nodes on [lo, hi].
struct GridAxis {
  double lo = -8.0;
  double hi = 8.0;
  std::size_t points = 4001;
};

/// Tensor product of axes; dimension = axes.size().
struct Grid {
  std::vector<GridAxis> axes;

  static Grid uniform(std::size_t dim, GridAxis axis) {
    return Grid{std::vector<GridAxis>(dim, axis)};
  }
};

struct QuadratureResult {
  double value = 0.0;
  double p_mass = 0.0;
  double q_mass = 0.0;
  /// Set when either density does not integrate to 1 within 1e-6 on the
  /// grid; the value is still returned.
  bool normalization_warning = false;
};

using Density = std::function<double(const Vector&)>;

/// Trapezoid-rule alpha-divergence between two densities on a grid.
QuadratureResult alpha_divergence_quadrature(const Density& p, const Density& q,
                                             const Grid& grid, const AlphaParam& a);

/// Auto-normalizer: argmin over gamma > 0 of D_a(p : gamma s),
///   gamma* = (sum p^a s^(1-a) / sum s)^(1/a).
/// Throws UnsupportedLimitError for alpha ~ 0.
double optimal_gamma(const PositiveMeasure& p, const PositiveMeasure& s, const AlphaParam& a);

/// D_a(p : gamma* s) written through the normalized q = s / sum s:
///   (1 / (1-a)) [sum p - (sum p^a q^(1-a))^(1/a)],
/// which is (1 / (1-a)) [1 - (sum p^a q^(1-a))^(1/a)] for a probability p.
/// At alpha ~ 1 this is sum p log(p / (gamma* s)).
double reduced_divergence_after_normalization(const PositiveMeasure& p,
                                              const PositiveMeasure& s,
                                              const AlphaParam& a);

/// tr(A B^-1) - log|A B^-1| - d, for symmetric positive definite A, B.
double logdet_divergence(const Matrix& a, const Matrix& b);

}  // namespace alphadisc
