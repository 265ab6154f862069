#pragma once

#include <functional>

namespace alphadisc {

struct GoldenSectionResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
};

/// Minimizes a unimodal f on [lo, hi] until the bracket is narrower than
/// `tolerance`. Throws BracketError when the minimizer sits on either end of
/// the initial bracket (the objective is monotone there), and
/// ConvergenceError after `max_iterations`.
GoldenSectionResult golden_section_minimize(const std::function<double(double)>& f, double lo,
                                            double hi, double tolerance, int max_iterations = 1000);

}  // namespace alphadisc
