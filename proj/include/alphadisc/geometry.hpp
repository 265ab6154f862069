#pragma once

// Smooth maps between a latent space Y (dimension d) and an observation space
// X (dimension D >= d), metric fields on X, latent similarity kernels, latent
// priors and the pull-back metric J^T M(f(y)) J.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <variant>

#include "alphadisc/types.hpp"

namespace alphadisc {

enum class JacobianMode { kAnalytic, kFiniteDifference };

/// How a SmoothMap produces its Jacobian. A step of 0 selects the default
/// cbrt(machine epsilon) * (1 + |y|).
struct JacobianProvider {
  JacobianMode mode = JacobianMode::kAnalytic;
  double step = 0.0;
};

/// A smooth map f: R^d -> R^D with a Jacobian provider. Immutable value type;
/// copies share the underlying callables.
class SmoothMap {
 public:
  using Evaluate = std::function<Vector(const Vector&)>;
  using Jacobian = std::function<Matrix(const Vector&)>;

  /// Without an analytic Jacobian the provider falls back to finite
  /// differences. Throws DomainError if dim_out < dim_in.
  SmoothMap(std::string name, int dim_in, int dim_out, Evaluate evaluate,
            Jacobian analytic_jacobian = {});

  const std::string& name() const noexcept { return name_; }
  int dim_in() const noexcept { return dim_in_; }
  int dim_out() const noexcept { return dim_out_; }
  JacobianProvider provider() const noexcept { return provider_; }
  bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jacobian_); }

  Vector operator()(const Vector& y) const;

  /// D x d Jacobian at y using the configured provider.
  Matrix jacobian(const Vector& y) const;

  /// Throws DomainError if the map has none.
  Matrix analytic_jacobian(const Vector& y) const;

  /// Same map, Jacobian by central differences with the given step.
  SmoothMap with_finite_differences(double step = 0.0) const;

  /// phi o f for a linear map phi (square, invertible) on X.
  SmoothMap composed_with_linear(const Matrix& phi, std::string name) const;

 private:
  std::string name_;
  int dim_in_;
  int dim_out_;
  Evaluate evaluate_;
  Jacobian jacobian_;
  JacobianProvider provider_;
};

/// x -> symmetric positive (semi)definite D x D matrix.
class MetricField {
 public:
  using Evaluate = std::function<Matrix(const Vector&)>;

  MetricField(std::string name, int dimension, Evaluate evaluate);

  static MetricField euclidean(int dimension);
  static MetricField scaled_euclidean(int dimension, double scale);
  static MetricField constant(const Matrix& m);

  const std::string& name() const noexcept { return name_; }
  int dimension() const noexcept { return dimension_; }

  /// M(x), symmetrized as (M + M^T) / 2.
  Matrix operator()(const Vector& x) const;

  /// The field seen in coordinates x' = phi x:
  ///   M'(x') = phi^-T M(phi^-1 x') phi^-1.
  MetricField transported(const Matrix& phi) const;

 private:
  std::string name_;
  int dimension_;
  Evaluate evaluate_;
};

enum class KernelKind { kGaussian, kStudent, kScaledGaussian };

/// Isotropic latent similarity s_{y0}(y) as a function of u = |y - y0|^2:
///   Gaussian          exp(-u / 2)
///   Student           1 / (1 + u)
///   ScaledGaussian(l) exp(-l u / 2)
class SimilarityKernel {
 public:
  static SimilarityKernel gaussian() { return SimilarityKernel(KernelKind::kGaussian, 1.0); }
  static SimilarityKernel student() { return SimilarityKernel(KernelKind::kStudent, 1.0); }
  /// Throws DomainError unless lambda > 0.
  static SimilarityKernel scaled_gaussian(double lambda);

  KernelKind kind() const noexcept { return kind_; }
  double lambda() const noexcept { return lambda_; }
  bool is_gaussian_family() const noexcept { return kind_ != KernelKind::kStudent; }
  std::string name() const;

  double operator()(const Vector& y0, const Vector& y) const;
  double of_squared_distance(double u) const;
  double log_of_squared_distance(double u) const;
  /// d log s / du.
  double log_derivative(double u) const;

  /// log of s normalized to a probability density on R^d. Gaussian family
  /// only; throws DomainError for the Student kernel.
  double normalized_log_density(const Vector& y0, const Vector& y) const;

 private:
  SimilarityKernel(KernelKind kind, double lambda) : kind_(kind), lambda_(lambda) {}
  KernelKind kind_;
  double lambda_;
};

struct UniformBallPrior {
  int dim = 2;
  double radius = 3.0;
};
struct GaussianPrior {
  Vector mean;
  Matrix covariance;
};
struct EmpiricalPrior {
  Matrix points;  // one point per row
};

/// Distribution of reference points on the latent space.
class LatentPrior {
 public:
  using Spec = std::variant<UniformBallPrior, GaussianPrior, EmpiricalPrior>;

  static LatentPrior uniform_ball(int dim, double radius = 3.0);
  static LatentPrior gaussian(Vector mean, Matrix covariance);
  static LatentPrior empirical(Matrix points);

  const Spec& spec() const noexcept { return spec_; }
  int dim() const;
  std::string description() const;

 private:
  explicit LatentPrior(Spec spec) : spec_(std::move(spec)) {}
  Spec spec_;
};

/// Owns its RNG; one sampler per thread of execution.
class PriorSampler {
 public:
  PriorSampler(LatentPrior prior, std::uint64_t seed);

  Vector next();
  Matrix draw(std::size_t count);  // one sample per row

 private:
  LatentPrior prior_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  Matrix gaussian_factor_;
};

/// Independent RNG stream for task `index` of a run seeded with `seed`.
/// `stream` separates unrelated uses of the same seed.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Central differences, column i = (f(y + h e_i) - f(y - h e_i)) / (2h).
/// Throws NonFiniteError naming the coordinate when f is not finite.
Matrix finite_difference_jacobian(const SmoothMap& f, const Vector& y0, double h);

/// cbrt(machine epsilon) * (1 + |y0|).
double default_difference_step(const Vector& y0);

/// J^T M(f(y0)) J, symmetrized. Throws RankDeficiencyError when the smallest
/// singular value of J is below 1e-10 times the largest.
Matrix pullback_metric(const SmoothMap& f, const MetricField& m, const Vector& y0);

/// A + eps I with eps = 1e-10 tr(A) / d, ready for Cholesky.
Matrix regularized(const Matrix& a);

/// Normalized Gaussian density with the given precision at y:
///   |P|^(1/2) (2 pi)^(-d/2) exp(-(y - y0)^T P (y - y0) / 2).
double gaussian_neighborhood_density(const Vector& y0, const Matrix& precision, const Vector& y);
double gaussian_neighborhood_log_density(const Vector& y0, const Matrix& precision,
                                         const Vector& y);

}  // namespace alphadisc
