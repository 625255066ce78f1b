#pragma once

// Derivative-free Nelder-Mead simplex minimizer over unconstrained
// coordinates (callers transform bounded parameters beforehand).

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

namespace gwmat {

struct NelderMeadOptions {
  double initial_step = 0.25;
  double f_spread_tol = 1e-8;  // stop when max-min objective over simplex
  int max_iterations = 5000;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f;
  int iterations;
  bool converged;
};

inline NelderMeadResult nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x0, const NelderMeadOptions& opt = {}) {
  const std::size_t d = x0.size();
  if (d == 0) throw std::invalid_argument("nelder_mead: empty start point");
  if (opt.max_iterations <= 0) return {x0, f(x0), 0, true};  // evaluation only
  std::vector<std::vector<double>> simplex(d + 1, x0);
  for (std::size_t i = 0; i < d; ++i) simplex[i + 1][i] += opt.initial_step;
  std::vector<double> fv(d + 1);
  for (std::size_t i = 0; i <= d; ++i) fv[i] = f(simplex[i]);

  const double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;
  std::vector<std::size_t> order(d + 1);
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i <= d; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    const std::size_t best = order[0], worst = order[d], second = order[d - 1];
    if (fv[worst] - fv[best] < opt.f_spread_tol)
      return {simplex[best], fv[best], it, true};

    std::vector<double> centroid(d, 0.0);
    for (std::size_t i = 0; i <= d; ++i) {
      if (i == worst) continue;
      for (std::size_t k = 0; k < d; ++k) centroid[k] += simplex[i][k] / d;
    }
    const auto blend = [&](double t) {
      std::vector<double> p(d);
      for (std::size_t k = 0; k < d; ++k)
        p[k] = centroid[k] + t * (centroid[k] - simplex[worst][k]);
      return p;
    };
    const auto reflected = blend(alpha);
    const double fr = f(reflected);
    if (fr < fv[order[0]]) {
      const auto expanded = blend(alpha * gamma);
      const double fe = f(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        fv[worst] = fe;
      } else {
        simplex[worst] = reflected;
        fv[worst] = fr;
      }
      continue;
    }
    if (fr < fv[second]) {
      simplex[worst] = reflected;
      fv[worst] = fr;
      continue;
    }
    const bool outside = fr < fv[worst];
    const auto contracted = blend(outside ? rho * alpha : -rho);
    const double fc = f(contracted);
    if (fc < (outside ? fr : fv[worst])) {
      simplex[worst] = contracted;
      fv[worst] = fc;
      continue;
    }
    for (std::size_t i = 0; i <= d; ++i) {  // shrink toward the best vertex
      if (i == best) continue;
      for (std::size_t k = 0; k < d; ++k)
        simplex[i][k] =
            simplex[best][k] + shrink * (simplex[i][k] - simplex[best][k]);
      fv[i] = f(simplex[i]);
    }
  }
  for (std::size_t i = 0; i <= d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
  return {simplex[order[0]], fv[order[0]], it, false};
}

}  // namespace gwmat
