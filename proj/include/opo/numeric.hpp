#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

#include "opo/errors.hpp"

namespace opo::numeric {

/// Root of `f` inside [lo, hi]; the bracket must contain a sign change.
template <class F>
double find_root(F&& f, double lo, double hi, int bits = 52, std::uintmax_t max_iter = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw NumericalError("find_root: bracket does not contain a sign change");
  }
  boost::math::tools::eps_tolerance<double> tol(bits);
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, max_iter);
  // Return whichever end has the smaller residual.
  return std::abs(f(a)) <= std::abs(f(b)) ? a : b;
}

/// Golden-section minimization of a unimodal function on [a, b].
template <class F>
double golden_section_minimize(F&& f, double a, double b, double x_tol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iter && std::abs(b - a) > x_tol; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

/// Central finite difference with absolute step h.
template <class F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

struct NelderMeadOptions {
  int max_evaluations = 2000;
  double f_tol = 1e-14; ///< stop when the simplex spread in f falls below this
  double x_tol = 0.0;   ///< and (optionally) when every vertex lies within x_tol of the best, per axis
};

struct NelderMeadResult {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  int evaluations = 0;
};

/// Nelder-Mead simplex search. `step` sets the initial simplex edge per axis.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                             std::vector<double> x0, const std::vector<double>& step,
                             const NelderMeadOptions& options = {});

} // namespace opo::numeric
