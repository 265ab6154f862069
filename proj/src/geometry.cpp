#include "alphadisc/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "alphadisc/errors.hpp"
#include "detail/numeric.hpp"

namespace alphadisc {

SmoothMap::SmoothMap(std::string name, int dim_in, int dim_out, Evaluate evaluate,
                     Jacobian analytic_jacobian)
    : name_(std::move(name)),
      dim_in_(dim_in),
      dim_out_(dim_out),
      evaluate_(std::move(evaluate)),
      jacobian_(std::move(analytic_jacobian)) {
  if (dim_in <= 0) throw DomainError("map '" + name_ + "' needs a positive latent dimension");
  if (dim_out < dim_in) {
    throw DomainError("map '" + name_ + "' has D < d; an immersion needs D >= d");
  }
  if (!jacobian_) provider_.mode = JacobianMode::kFiniteDifference;
}

Vector SmoothMap::operator()(const Vector& y) const {
  if (y.size() != dim_in_) throw DomainError("map '" + name_ + "' got a point of wrong dimension");
  return evaluate_(y);
}

Matrix SmoothMap::jacobian(const Vector& y) const {
  if (provider_.mode == JacobianMode::kAnalytic) return analytic_jacobian(y);
  const double h = provider_.step > 0.0 ? provider_.step : default_difference_step(y);
  return finite_difference_jacobian(*this, y, h);
}

Matrix SmoothMap::analytic_jacobian(const Vector& y) const {
  if (!jacobian_) throw DomainError("map '" + name_ + "' has no analytic Jacobian");
  if (y.size() != dim_in_) throw DomainError("map '" + name_ + "' got a point of wrong dimension");
  return jacobian_(y);
}

SmoothMap SmoothMap::with_finite_differences(double step) const {
  SmoothMap copy(*this);
  copy.provider_ = JacobianProvider{JacobianMode::kFiniteDifference, step};
  return copy;
}

SmoothMap SmoothMap::composed_with_linear(const Matrix& phi, std::string name) const {
  if (phi.rows() != dim_out_ || phi.cols() != dim_out_) {
    throw DomainError("re-parametrization must be a square matrix on X");
  }
  SmoothMap inner(*this);
  Jacobian jac;
  if (provider_.mode == JacobianMode::kAnalytic) {
    jac = [inner, phi](const Vector& y) -> Matrix { return phi * inner.analytic_jacobian(y); };
  }
  SmoothMap out(
      std::move(name), dim_in_, dim_out_,
      [inner, phi](const Vector& y) -> Vector { return phi * inner(y); }, std::move(jac));
  if (provider_.mode == JacobianMode::kFiniteDifference) out.provider_ = provider_;
  return out;
}

MetricField::MetricField(std::string name, int dimension, Evaluate evaluate)
    : name_(std::move(name)), dimension_(dimension), evaluate_(std::move(evaluate)) {
  if (dimension <= 0) throw DomainError("metric field needs a positive dimension");
}

MetricField MetricField::euclidean(int dimension) {
  return MetricField("euclidean", dimension,
                     [dimension](const Vector&) -> Matrix {
                       return Matrix::Identity(dimension, dimension);
                     });
}

MetricField MetricField::scaled_euclidean(int dimension, double scale) {
  if (!(scale > 0.0)) throw DomainError("metric scale must be positive");
  std::ostringstream os;
  os.precision(17);
  os << "scaled:" << scale;
  return MetricField(os.str(), dimension, [dimension, scale](const Vector&) -> Matrix {
    return scale * Matrix::Identity(dimension, dimension);
  });
}

MetricField MetricField::constant(const Matrix& m) {
  if (m.rows() != m.cols()) throw DomainError("metric must be square");
  return MetricField("constant", static_cast<int>(m.rows()),
                     [m](const Vector&) -> Matrix { return m; });
}

Matrix MetricField::operator()(const Vector& x) const {
  if (x.size() != dimension_) throw DomainError("metric '" + name_ + "' got a point of wrong dimension");
  const Matrix m = evaluate_(x);
  return 0.5 * (m + m.transpose());
}

MetricField MetricField::transported(const Matrix& phi) const {
  if (phi.rows() != dimension_ || phi.cols() != dimension_) {
    throw DomainError("re-parametrization must be a square matrix on X");
  }
  const Eigen::PartialPivLU<Matrix> lu(phi);
  const Matrix inv = lu.inverse();
  MetricField inner(*this);
  return MetricField(name_ + "-transported", dimension_,
                     [inner, inv](const Vector& xp) -> Matrix {
                       return inv.transpose() * inner(inv * xp) * inv;
                     });
}

SimilarityKernel SimilarityKernel::scaled_gaussian(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("kernel scale must be positive");
  return SimilarityKernel(KernelKind::kScaledGaussian, lambda);
}

std::string SimilarityKernel::name() const {
  switch (kind_) {
    case KernelKind::kGaussian:
      return "gaussian";
    case KernelKind::kStudent:
      return "student";
    case KernelKind::kScaledGaussian: {
      std::ostringstream os;
      os.precision(17);
      os << "scaled-gaussian:" << lambda_;
      return os.str();
    }
  }
  return "unknown";
}

double SimilarityKernel::operator()(const Vector& y0, const Vector& y) const {
  return of_squared_distance((y - y0).squaredNorm());
}

double SimilarityKernel::of_squared_distance(double u) const {
  return std::exp(log_of_squared_distance(u));
}

double SimilarityKernel::log_of_squared_distance(double u) const {
  if (kind_ == KernelKind::kStudent) return -std::log1p(u);
  return -0.5 * lambda_ * u;
}

double SimilarityKernel::log_derivative(double u) const {
  if (kind_ == KernelKind::kStudent) return -1.0 / (1.0 + u);
  return -0.5 * lambda_;
}

double SimilarityKernel::normalized_log_density(const Vector& y0, const Vector& y) const {
  if (kind_ == KernelKind::kStudent) {
    throw DomainError("the Student kernel has no samplable normalized density");
  }
  const double d = static_cast<double>(y.size());
  return 0.5 * d * std::log(lambda_ / (2.0 * std::numbers::pi)) +
         log_of_squared_distance((y - y0).squaredNorm());
}

LatentPrior LatentPrior::uniform_ball(int dim, double radius) {
  if (dim <= 0 || !(radius > 0.0)) throw DomainError("uniform ball needs dim > 0 and radius > 0");
  return LatentPrior(UniformBallPrior{dim, radius});
}

LatentPrior LatentPrior::gaussian(Vector mean, Matrix covariance) {
  if (covariance.rows() != mean.size() || covariance.cols() != mean.size()) {
    throw DomainError("Gaussian prior covariance does not match the mean");
  }
  if (Eigen::LLT<Matrix>(covariance).info() != Eigen::Success) {
    throw DomainError("Gaussian prior covariance is not positive definite");
  }
  return LatentPrior(GaussianPrior{std::move(mean), std::move(covariance)});
}

LatentPrior LatentPrior::empirical(Matrix points) {
  if (points.rows() == 0 || points.cols() == 0) throw DomainError("empirical prior needs points");
  return LatentPrior(EmpiricalPrior{std::move(points)});
}

int LatentPrior::dim() const {
  struct Visitor {
    int operator()(const UniformBallPrior& p) const { return p.dim; }
    int operator()(const GaussianPrior& p) const { return static_cast<int>(p.mean.size()); }
    int operator()(const EmpiricalPrior& p) const { return static_cast<int>(p.points.cols()); }
  };
  return std::visit(Visitor{}, spec_);
}

std::string LatentPrior::description() const {
  std::ostringstream os;
  os.precision(17);
  if (const auto* b = std::get_if<UniformBallPrior>(&spec_)) {
    os << "uniform-ball(d=" << b->dim << ", radius=" << b->radius << ")";
  } else if (const auto* g = std::get_if<GaussianPrior>(&spec_)) {
    os << "gaussian(d=" << g->mean.size() << ")";
  } else {
    os << "empirical(" << std::get<EmpiricalPrior>(spec_).points.rows() << " points)";
  }
  return os.str();
}

PriorSampler::PriorSampler(LatentPrior prior, std::uint64_t seed)
    : prior_(std::move(prior)), rng_(make_stream(seed, 0x5052494fULL, 0)) {
  if (const auto* g = std::get_if<GaussianPrior>(&prior_.spec())) {
    gaussian_factor_ = Eigen::LLT<Matrix>(g->covariance).matrixL();
  }
}

Vector PriorSampler::next() {
  if (const auto* b = std::get_if<UniformBallPrior>(&prior_.spec())) {
    std::uniform_real_distribution<double> cube(-b->radius, b->radius);
    Vector y(b->dim);
    do {
      for (Eigen::Index k = 0; k < y.size(); ++k) y[k] = cube(rng_);
    } while (y.squaredNorm() > b->radius * b->radius);
    return y;
  }
  if (const auto* g = std::get_if<GaussianPrior>(&prior_.spec())) {
    Vector z(g->mean.size());
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = normal_(rng_);
    return g->mean + gaussian_factor_ * z;
  }
  const auto& e = std::get<EmpiricalPrior>(prior_.spec());
  std::uniform_int_distribution<Eigen::Index> pick(0, e.points.rows() - 1);
  return e.points.row(pick(rng_)).transpose();
}

Matrix PriorSampler::draw(std::size_t count) {
  Matrix out(static_cast<Eigen::Index>(count), prior_.dim());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = next().transpose();
  return out;
}

std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double default_difference_step(const Vector& y0) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + y0.norm());
}

Matrix finite_difference_jacobian(const SmoothMap& f, const Vector& y0, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  Matrix jac(f.dim_out(), f.dim_in());
  Vector y = y0;
  for (int i = 0; i < f.dim_in(); ++i) {
    y[i] = y0[i] + h;
    const Vector plus = f(y);
    y[i] = y0[i] - h;
    const Vector minus = f(y);
    y[i] = y0[i];
    if (!plus.allFinite() || !minus.allFinite()) {
      throw NonFiniteError("map '" + f.name() + "' is not finite near latent coordinate " +
                           std::to_string(i) + " of " + detail::format_vector(y0));
    }
    jac.col(i) = (plus - minus) / (2.0 * h);
  }
  return jac;
}

Matrix pullback_metric(const SmoothMap& f, const MetricField& m, const Vector& y0) {
  if (m.dimension() != f.dim_out()) {
    throw DomainError("metric dimension does not match the observation space of '" + f.name() + "'");
  }
  const Matrix jac = f.jacobian(y0);
  if (!jac.allFinite()) {
    throw NonFiniteError("Jacobian of '" + f.name() + "' is not finite at " + detail::format_vector(y0));
  }
  const Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv.minCoeff() < 1e-10 * sv.maxCoeff() || sv.maxCoeff() == 0.0) {
    throw RankDeficiencyError("Jacobian of '" + f.name() + "' lost full column rank at " +
                              detail::format_vector(y0) +
                              " (the map must be an immersion with full-rank J)");
  }
  const Matrix a = jac.transpose() * m(f(y0)) * jac;
  return 0.5 * (a + a.transpose());
}

Matrix regularized(const Matrix& a) {
  const double d = static_cast<double>(a.rows());
  const double eps = 1e-10 * a.trace() / d;
  Matrix out = a;
  out.diagonal().array() += eps;
  return out;
}

double gaussian_neighborhood_log_density(const Vector& y0, const Matrix& precision,
                                         const Vector& y) {
  if (precision.rows() != y0.size() || precision.cols() != y0.size() || y.size() != y0.size()) {
    throw DomainError("precision matrix does not match the latent dimension");
  }
  const Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw DomainError("precision matrix is not positive definite");
  const Matrix lower = llt.matrixL();
  const double half_logdet = lower.diagonal().array().log().sum();
  const Vector w = lower.transpose() * (y - y0);
  const double d = static_cast<double>(y0.size());
  return half_logdet - 0.5 * d * std::log(2.0 * std::numbers::pi) - 0.5 * w.squaredNorm();
}

double gaussian_neighborhood_density(const Vector& y0, const Matrix& precision, const Vector& y) {
  return std::exp(gaussian_neighborhood_log_density(y0, precision, y));
}

}  // namespace alphadisc
