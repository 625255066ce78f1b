#pragma once

// Adaptive Gauss-Kronrod (G7/K15) quadrature, used for the integral form
// of the Wendland kernel and as the backbone of the Hankel transforms.

#include <cmath>
#include <functional>
#include <stdexcept>

namespace gwmat {

class quadrature_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline constexpr double kK15Nodes[8] = {
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993944,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
};
inline constexpr double kK15Weights[8] = {
    0.2094821410847278, 0.2044329400752989, 0.1903505780647854,
    0.1690047266392679, 0.1406532597155259, 0.1047900103222502,
    0.0630920926299786, 0.0229353220105292,
};
// Gauss-7 weights for nodes 0, 2, 4, 6 of the Kronrod set.
inline constexpr double kG7Weights[4] = {
    0.4179591836734694,
    0.3818300505051189,
    0.2797053914892767,
    0.1294849661688697,
};

struct PanelResult {
  double value;
  double error;
};

template <class F>
PanelResult gk15(const F& f, double a, double b) {
  const double h = 0.5 * (b - a);
  const double m = 0.5 * (a + b);
  const double f0 = f(m);
  double kron = kK15Weights[0] * f0;
  double gauss = kG7Weights[0] * f0;
  for (int i = 1; i < 8; ++i) {
    const double dx = h * kK15Nodes[i];
    const double fs = f(m - dx) + f(m + dx);
    kron += kK15Weights[i] * fs;
    if (i % 2 == 0) gauss += kG7Weights[i / 2] * fs;
  }
  kron *= h;
  gauss *= h;
  const double diff = std::fabs(kron - gauss);
  return {kron, std::pow(200.0 * diff, 1.5)};
}

template <class F>
double adapt_rec(const F& f, double a, double b, double tol,
                 const PanelResult& whole, int depth) {
  if (whole.error <= tol || depth <= 0) return whole.value;
  const double m = 0.5 * (a + b);
  const auto left = gk15(f, a, m);
  const auto right = gk15(f, m, b);
  return adapt_rec(f, a, m, 0.5 * tol, left, depth - 1) +
         adapt_rec(f, m, b, 0.5 * tol, right, depth - 1);
}

}  // namespace detail

// Adaptive integration of f over [a, b]. `tol` is an absolute target;
// the K15-vs-G7 discrepancy drives refinement.
template <class F>
double integrate(const F& f, double a, double b, double tol = 1e-12,
                 int max_depth = 40) {
  if (a == b) return 0.0;
  const auto whole = detail::gk15(f, a, b);
  return detail::adapt_rec(f, a, b, tol, whole, max_depth);
}

// Integral over [0, hi] of an integrand whose mass may sit in a tiny
// neighborhood of 0 (e.g. (1-x)^mu-type factors with mu in the
// hundreds). Plain adaptive bisection can miss such spikes entirely, so
// the interval is pre-split into geometrically shrinking panels toward 0
// and each panel refined against a relative target.
template <class F>
double integrate_left_concentrated(const F& f, double hi,
                                   double rel_tol = 1e-12) {
  if (hi <= 0.0) return 0.0;
  constexpr int kPanels = 64;
  double value = 0.0, scale = 0.0;
  // coarse pass establishes the magnitude the tolerance is relative to
  double right = hi;
  for (int j = 0; j < kPanels; ++j) {
    const double left = (j + 1 == kPanels) ? 0.0 : 0.5 * right;
    scale += std::fabs(detail::gk15(f, left, right).value);
    right = left;
  }
  const double tol = rel_tol * std::max(scale, 1e-300) / kPanels;
  right = hi;
  for (int j = 0; j < kPanels; ++j) {
    const double left = (j + 1 == kPanels) ? 0.0 : 0.5 * right;
    value += integrate(f, left, right, tol);
    right = left;
  }
  return value;
}

// Single non-adaptive K15 panel (for per-oscillation panels).
template <class F>
double integrate_panel(const F& f, double a, double b) {
  return detail::gk15(f, a, b).value;
}

// Find x in (lo, hi) with g(x) = 0 by bisection; g(lo), g(hi) must bracket.
template <class G>
double bisect(const G& g, double lo, double hi, double rel_tol = 1e-8) {
  double flo = g(lo);
  double fhi = g(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw quadrature_error("bisect: endpoints do not bracket a root");
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = g(mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * std::max(std::fabs(lo), std::fabs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

// Golden-section maximization of f on [a, b].
template <class F>
double golden_max(const F& f, double a, double b, double xtol = 1e-10) {
  constexpr double invphi = 0.6180339887498949;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > xtol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace gwmat
