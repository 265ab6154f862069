#include "alphadisc/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "alphadisc/errors.hpp"
#include "detail/numeric.hpp"

namespace alphadisc {

namespace {

using detail::kInf;

void check_weights(std::span<const double> w) {
  bool any_positive = false;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) {
      throw DomainError("weight " + std::to_string(i) + " is negative or not finite");
    }
    any_positive = any_positive || w[i] > 0.0;
  }
  if (!any_positive) throw DomainError("positive measure has no positive weight");
}

void check_aligned(const PositiveMeasure& p, const PositiveMeasure& q) {
  if (!p.same_support(q)) {
    throw SupportMismatchError("measures are defined over different atoms");
  }
}

// Contribution of one atom before the 1/(a(1-a)) factor is applied; the KL
// limits are returned fully scaled.
double atom_term(double p, double q, const AlphaParam& a) {
  if (p == 0.0 && q == 0.0) return 0.0;
  if (a.is_kl()) {
    if (p == 0.0) return q;
    if (q == 0.0) return kInf;
    return p * std::log(p / q) - p + q;
  }
  if (a.is_reverse_kl()) {
    if (q == 0.0) return p;
    if (p == 0.0) return kInf;
    return q * std::log(q / p) - q + p;
  }
  const double al = a.alpha();
  const double scale = 1.0 / (al * (1.0 - al));
  if (q == 0.0) return al > 1.0 ? kInf : scale * al * p;
  if (p == 0.0) return al < 0.0 ? kInf : scale * (1.0 - al) * q;
  // q [a (r - 1) - expm1(a log r)] with r = p / q avoids cancellation when
  // p ~ q.
  const double r = p / q;
  return scale * q * (al * (r - 1.0) - std::expm1(al * std::log(r)));
}

}  // namespace

PositiveMeasure::PositiveMeasure(std::vector<double> weights)
    : weights_(std::move(weights)), atom_ids_(weights_.size()) {
  std::iota(atom_ids_.begin(), atom_ids_.end(), std::size_t{0});
  check_weights(weights_);
}

PositiveMeasure::PositiveMeasure(std::vector<double> weights, std::vector<std::size_t> atom_ids)
    : weights_(std::move(weights)), atom_ids_(std::move(atom_ids)) {
  if (weights_.size() != atom_ids_.size()) {
    throw SupportMismatchError("weights and atom ids differ in length");
  }
  std::vector<std::size_t> sorted(atom_ids_);
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("atom ids must be distinct");
  }
  check_weights(weights_);
}

double PositiveMeasure::total() const noexcept {
  return std::accumulate(weights_.begin(), weights_.end(), 0.0);
}

PositiveMeasure PositiveMeasure::scaled(double factor) const {
  std::vector<double> w(weights_);
  for (double& x : w) x *= factor;
  return PositiveMeasure(std::move(w), atom_ids_);
}

bool PositiveMeasure::same_support(const PositiveMeasure& other) const noexcept {
  return atom_ids_ == other.atom_ids_;
}

AlphaParam::AlphaParam(double alpha, double limit_tolerance)
    : alpha_(alpha), limit_tolerance_(limit_tolerance) {
  if (!std::isfinite(alpha)) throw DomainError("alpha must be finite");
  if (!(limit_tolerance > 0.0 && limit_tolerance < 0.01)) {
    throw DomainError("limit tolerance must lie in (0, 0.01)");
  }
}

bool AlphaParam::is_reverse_kl() const noexcept { return std::abs(alpha_) <= limit_tolerance_; }
bool AlphaParam::is_kl() const noexcept { return std::abs(1.0 - alpha_) <= limit_tolerance_; }

double alpha_divergence_weights(std::span<const double> p, std::span<const double> q,
                                const AlphaParam& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double t = atom_term(p[i], q[i], a);
    if (t == kInf) return kInf;
    sum += t;
  }
  return sum;
}

double alpha_divergence_discrete(const PositiveMeasure& p, const PositiveMeasure& q,
                                 const AlphaParam& a) {
  check_aligned(p, q);
  return alpha_divergence_weights(p.weights(), q.weights(), a);
}

QuadratureResult alpha_divergence_quadrature(const Density& p, const Density& q,
                                             const Grid& grid, const AlphaParam& a) {
  const std::size_t dim = grid.axes.size();
  if (dim == 0) throw DomainError("quadrature grid has no axes");
  std::vector<double> step(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    const GridAxis& ax = grid.axes[k];
    if (ax.points < 2 || !(ax.hi > ax.lo)) throw DomainError("degenerate grid axis");
    step[k] = (ax.hi - ax.lo) / static_cast<double>(ax.points - 1);
  }

  QuadratureResult out;
  std::vector<std::size_t> idx(dim, 0);
  Vector y(static_cast<Eigen::Index>(dim));
  for (;;) {
    double w = 1.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const GridAxis& ax = grid.axes[k];
      y[static_cast<Eigen::Index>(k)] = ax.lo + step[k] * static_cast<double>(idx[k]);
      const bool edge = idx[k] == 0 || idx[k] + 1 == ax.points;
      w *= edge ? 0.5 * step[k] : step[k];
    }
    const double pv = p(y);
    const double qv = q(y);
    if (!(pv >= 0.0) || !(qv >= 0.0)) throw DomainError("density is negative on the grid");
    out.p_mass += w * pv;
    out.q_mass += w * qv;
    out.value += w * atom_term(pv, qv, a);

    std::size_t k = 0;
    for (; k < dim; ++k) {
      if (++idx[k] < grid.axes[k].points) break;
      idx[k] = 0;
    }
    if (k == dim) break;
  }
  out.normalization_warning =
      std::abs(out.p_mass - 1.0) > 1e-6 || std::abs(out.q_mass - 1.0) > 1e-6;
  return out;
}

double optimal_gamma(const PositiveMeasure& p, const PositiveMeasure& s, const AlphaParam& a) {
  check_aligned(p, s);
  if (a.is_reverse_kl()) {
    throw UnsupportedLimitError("optimal gamma has no closed form at alpha = 0");
  }
  const double s_total = s.total();
  if (a.is_kl()) return p.total() / s_total;
  const double al = a.alpha();
  double hellinger = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p.weights()[i];
    const double si = s.weights()[i];
    if (pi > 0.0 && si > 0.0) hellinger += std::pow(pi, al) * std::pow(si, 1.0 - al);
  }
  return std::pow(hellinger / s_total, 1.0 / al);
}

double reduced_divergence_after_normalization(const PositiveMeasure& p,
                                              const PositiveMeasure& s,
                                              const AlphaParam& a) {
  check_aligned(p, s);
  if (a.is_reverse_kl()) {
    throw UnsupportedLimitError("reduced divergence has no closed form at alpha = 0");
  }
  const double s_total = s.total();
  const double p_total = p.total();
  if (a.is_kl()) {
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double pi = p.weights()[i];
      if (pi == 0.0) continue;
      const double qi = s.weights()[i] / s_total;
      if (qi == 0.0) return kInf;
      kl += pi * std::log(pi / (p_total * qi));
    }
    return kl;
  }
  const double al = a.alpha();
  double hellinger = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double pi = p.weights()[i];
    const double qi = s.weights()[i] / s_total;
    if (pi > 0.0 && qi > 0.0) hellinger += std::pow(pi, al) * std::pow(qi, 1.0 - al);
  }
  return (p_total - std::pow(hellinger, 1.0 / al)) / (1.0 - al);
}

double logdet_divergence(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DomainError("LogDet divergence needs square matrices of equal size");
  }
  const Eigen::LLT<Matrix> la(a);
  const Eigen::LLT<Matrix> lb(b);
  if (la.info() != Eigen::Success || lb.info() != Eigen::Success) {
    throw DomainError("LogDet divergence needs positive definite matrices");
  }
  const double logdet_a = 2.0 * la.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double logdet_b = 2.0 * lb.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double trace = lb.solve(a).trace();
  return trace - (logdet_a - logdet_b) - static_cast<double>(a.rows());
}

}  // namespace alphadisc
