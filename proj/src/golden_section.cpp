#include "alphadisc/golden_section.hpp"

#include <cmath>
#include <string>

#include "alphadisc/errors.hpp"

namespace alphadisc {

GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                            double hi, double tolerance, int max_iterations) {
  if (!(hi > lo)) throw BracketError("golden-section bracket must satisfy lo < hi");
  if (!(tolerance > 0.0)) throw BracketError("golden-section tolerance must be positive");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double lo0 = lo;
  const double hi0 = hi;

  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  for (; it < max_iterations && hi - lo > tolerance; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }
  if (hi - lo > tolerance) {
    throw ConvergenceError("golden-section search did not converge in " +
                           std::to_string(max_iterations) + " iterations");
  }
  const double x = 0.5 * (lo + hi);
  if (x - lo0 <= 2.0 * tolerance || hi0 - x <= 2.0 * tolerance) {
    throw BracketError("golden-section minimum lies on the edge of [" + std::to_string(lo0) + ", " +
                       std::to_string(hi0) + "]; the objective is monotone there, widen the bracket");
  }
  return {x, f(x), it};
}

}  // namespace alphadisc
