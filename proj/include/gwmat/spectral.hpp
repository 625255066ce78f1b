#pragma once

// Isotropic spectral densities for the Matern and generalized Wendland
// families, the Hankel-transform bridge between correlation and
// spectrum, the normalization identity of the spectral integral, and
// the sup-norm convergence diagnostics.

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>
#include <vector>

#include "gwmat/kernels.hpp"
#include "gwmat/quadrature.hpp"
#include "gwmat/specfun.hpp"

namespace gwmat {

struct SpectralQuery {
  double z;  // nonnegative frequency
  int dim;   // ambient dimension, 1..3
  void validate() const {
    if (!(z >= 0.0)) throw std::domain_error("SpectralQuery: z >= 0");
    if (dim < 1 || dim > 3)
      throw std::domain_error("SpectralQuery: dim in {1,2,3}");
  }
};

// Matern spectral density
//   Gamma(nu+d/2) / (pi^{d/2} Gamma(nu)) * beta^d / (1+beta^2 z^2)^{nu+d/2}.
inline double matern_spectral(const SpectralQuery& q, const MaternParams& p) {
  q.validate();
  p.validate();
  const double e = p.nu + 0.5 * q.dim;
  return std::exp(std::lgamma(e) - std::lgamma(p.nu) -
                  0.5 * q.dim * std::log(M_PI) + q.dim * std::log(p.beta) -
                  e * std::log1p(p.beta * p.beta * q.z * q.z));
}

// Forward Hankel transform of an isotropic correlation:
//   phihat(z) = (2 pi)^{-d/2} z^{1-d/2} \int_0^U u^{d/2} J_{d/2-1}(uz) rho(u) du,
// reduced per dimension to cosine / J0 / sine kernels. The integral is
// split into half-oscillation panels so the adaptive rule never
// straddles many sign changes.
template <class F>
double hankel_forward(const F& rho, double upper, const SpectralQuery& q,
                      double tol = 1e-10) {
  q.validate();
  if (!(upper > 0.0)) throw std::domain_error("hankel_forward: upper > 0");
  const int d = q.dim;
  const double z = q.z;
  if (z == 0.0) {
    const double moment = integrate_left_concentrated(
        [&](double u) { return std::pow(u, d - 1.0) * rho(u); }, upper, tol);
    return std::pow(2.0 * M_PI, -0.5 * d) * std::pow(2.0, 1.0 - 0.5 * d) /
           std::exp(std::lgamma(0.5 * d)) * moment;
  }
  std::function<double(double)> integrand;
  double prefactor;
  switch (d) {
    case 1:
      integrand = [&rho, z](double u) { return std::cos(u * z) * rho(u); };
      prefactor = 1.0 / M_PI;
      break;
    case 2:
      integrand = [&rho, z](double u) {
        return u * std::cyl_bessel_j(0.0, u * z) * rho(u);
      };
      prefactor = 1.0 / (2.0 * M_PI);
      break;
    default:
      integrand = [&rho, z](double u) { return u * std::sin(u * z) * rho(u); };
      prefactor = 1.0 / (2.0 * M_PI * M_PI * z);
      break;
  }
  const double h = M_PI / z;  // half-oscillation length
  double sum = 0.0;
  if (h >= upper) {
    sum = integrate(integrand, 0.0, upper, tol);
  } else {
    const int panels = static_cast<int>(std::ceil(upper / h));
    const double per_panel_tol = tol / panels;
    double a = 0.0;
    for (int k = 0; k < panels; ++k) {
      const double b = std::min(upper, (k + 1) * h);
      sum += integrate(integrand, a, b, per_panel_tol);
      a = b;
    }
  }
  return prefactor * sum;
}

namespace detail {

// log of the generalized Wendland spectral constant L(d, nu, mu), with
// the nu -> 0 convention Gamma(nu)/Gamma(2 nu) -> 2.
inline double gw_spectral_log_l(int d, double nu, double mu) {
  double log_nu_ratio =
      (nu == 0.0) ? std::log(2.0) : std::lgamma(nu) - std::lgamma(2.0 * nu);
  return -d * std::log(2.0) - 0.5 * d * std::log(M_PI) +
         std::lgamma(mu + 2.0 * nu + 1.0) + std::lgamma(2.0 * nu + d) -
         std::lgamma(nu + 0.5 * d) - std::lgamma(mu + 2.0 * nu + d + 1.0) +
         log_nu_ratio;
}

}  // namespace detail

// Generalized Wendland spectral density via the 1F2 series:
//   L * support^d * 1F2(lambda; lambda+mu/2, lambda+(mu+1)/2; -(z*support/2)^2),
// lambda = (d+1)/2 + nu. Throws precision_loss_error past the series cap
// (gw_spectral below falls back to the Hankel route).
inline double gw_spectral_series(const SpectralQuery& q,
                                 const GenWendlandParams& p) {
  q.validate();
  p.validate();
  if (p.dim != q.dim)
    throw std::domain_error("gw_spectral_series: dimension mismatch");
  const double s = p.support;
  const double lambda = lambda_pd(q.dim, p.nu);
  const double half = 0.5 * q.z * s;
  const double f = hyp1f2(lambda, lambda + 0.5 * p.mu,
                          lambda + 0.5 * (p.mu + 1.0), -half * half);
  const double v =
      std::exp(detail::gw_spectral_log_l(q.dim, p.nu, p.mu) +
               q.dim * std::log(s)) *
      f;
  return (v < 0.0) ? 0.0 : v;  // clamp sub-tolerance negative roundoff
}

// Spectral density of the generalized Wendland family; series where it
// is accurate, Hankel transform of the correlation beyond the cap.
inline double gw_spectral(const SpectralQuery& q, const GenWendlandParams& p) {
  try {
    return gw_spectral_series(q, p);
  } catch (const precision_loss_error&) {
    const double v = hankel_forward(
        [&](double u) { return gw(u, p); }, p.support, q, 1e-11);
    return (v < 0.0) ? 0.0 : v;
  }
}

inline double gw_spectral(const SpectralQuery& q, const PhiParams& p) {
  return gw_spectral(q, p.as_gw());
}

// Target of the spectral normalization identity:
//   \int_0^infty z^{d-1} phihat(z) dz = Gamma(d/2) / (2 pi^{d/2}).
inline double spectral_moment_target(int d) {
  return std::exp(std::lgamma(0.5 * d)) / (2.0 * std::pow(M_PI, 0.5 * d));
}

namespace detail {

// Exact z-antiderivative trick for \int_{z1}^{z2} z^{d-1} phihat(z) dz of
// a compactly supported correlation: using
//   d/dz [ z^{p} J_{p}(uz) ] = u z^{p} J_{p-1}(uz),  p = d/2,
// the double integral collapses to a single oscillatory u-integral
//   (2 pi)^{-d/2} \int_0^S u^{d/2-1} rho(u) [ z^{d/2} J_{d/2}(uz) ]_{z1}^{z2} du.
template <class F>
double spectral_band_moment(const F& rho, double support, int d, double z1,
                            double z2) {
  const auto bessel_jp = [d](double x) {
    // J_{d/2}(x) for d = 1, 2, 3
    if (x == 0.0) return 0.0;
    switch (d) {
      case 1:
        return std::sqrt(2.0 / (M_PI * x)) * std::sin(x);
      case 2:
        return std::cyl_bessel_j(1.0, x);
      default:
        return std::sqrt(2.0 / (M_PI * x)) * (std::sin(x) / x - std::cos(x));
    }
  };
  const auto single = [&](double zz) {
    const double pref = std::pow(2.0 * M_PI, -0.5 * d) * std::pow(zz, 0.5 * d);
    const auto f = [&](double u) {
      return std::pow(u, 0.5 * d - 1.0) * rho(u) * bessel_jp(u * zz);
    };
    const double h = M_PI / zz;
    double sum = 0.0;
    if (h >= support) return pref * integrate(f, 0.0, support, 1e-11);
    const int panels = static_cast<int>(std::ceil(support / h));
    double a = 0.0;
    for (int k = 0; k < panels; ++k) {
      const double b = std::min(support, (k + 1) * h);
      sum += integrate(f, a, b, 1e-11 / panels);
      a = b;
    }
    return pref * sum;
  };
  return single(z2) - single(z1);
}

// \int_Z^infty z^{d-1} matern_spectral dz via the 1/z substitution
// (integrand t^{2 nu - 1} (t^2 + beta^2)^{-nu-d/2}, smooth on [0, 1/Z]).
inline double matern_tail_moment(const MaternParams& p, int d, double zlo) {
  const double e = p.nu + 0.5 * d;
  const double c = std::exp(std::lgamma(e) - std::lgamma(p.nu) -
                            0.5 * d * std::log(M_PI) + d * std::log(p.beta));
  return c * integrate_left_concentrated(
                 [&](double t) {
                   return std::pow(t, 2.0 * p.nu - 1.0) *
                          std::pow(t * t + p.beta * p.beta, -e);
                 },
                 1.0 / zlo, 1e-12);
}

}  // namespace detail

// | \int_0^infty z^{d-1} phihat dz  -  Gamma(d/2)/(2 pi^{d/2}) |
// for the phi family (Matern-compatible parameterization).
inline double lemma1_residual(const PhiParams& p, int d) {
  PhiParams q = p;
  q.dim = d;
  q.validate();
  const double support = q.support();
  const auto rho = [&](double u) { return phi(u, q); };
  // region 1: series density up to the 1F2 cap
  const double z_cap = 2.0 * std::sqrt(kHyp1f2ArgCap) / support;
  const GenWendlandParams gwp = q.as_gw();
  const double part1 = integrate(
      [&](double z) {
        return std::pow(z, d - 1.0) * gw_spectral_series({z, d}, gwp);
      },
      0.0, z_cap, 1e-9);
  // region 2: exact-antiderivative band out to where the density has
  // collapsed onto its Matern-equivalent tail
  const double tail_factor = (p.nu < 0.5) ? 200.0 : (p.nu < 1.5 ? 60.0 : 30.0);
  const double z_tail = std::max(2.0 * z_cap, tail_factor / p.beta);
  const double part2 =
      detail::spectral_band_moment(rho, support, d, z_cap, z_tail);
  // region 3: Matern-shaped tail anchored by the measured density ratio
  const MaternParams limit{p.nu + 0.5, p.beta};
  const double ratio = hankel_forward(rho, support, {z_tail, d}, 1e-12) /
                       matern_spectral({z_tail, d}, limit);
  const double part3 = ratio * detail::matern_tail_moment(limit, d, z_tail);
  return std::fabs(part1 + part2 + part3 - spectral_moment_target(d));
}

inline double lemma1_residual(const MaternParams& p, int d) {
  p.validate();
  if (d < 1 || d > 3) throw std::domain_error("lemma1_residual: dim in {1,2,3}");
  const double split = 10.0 / p.beta;
  const double head = integrate(
      [&](double z) {
        return std::pow(z, d - 1.0) * matern_spectral({z, d}, p);
      },
      0.0, split, 1e-12);
  return std::fabs(head + detail::matern_tail_moment(p, d, split) -
                   spectral_moment_target(d));
}

// ---------------------------------------------------------------------
// Convergence diagnostics

struct ConvergenceCell {
  double nu;
  double mu;
  double max_abs_error;
  double argmax_r;
};

struct ConvergenceReport {
  std::vector<ConvergenceCell> cells;  // row-major: nu outer, mu inner
  std::vector<double> nu_list;
  std::vector<double> mu_list;
};

// Supremum over r of |phi(r; nu, mu, beta) - matern(r; nu+1/2, beta)|:
// 4096-point grid on [0, max(delta, 6 beta)] plus golden-section
// refinement around the grid argmax.
inline ConvergenceCell correlation_gap(double nu, double mu, double beta) {
  const PhiParams p{nu, mu, beta, 2};
  p.validate();
  const MaternParams m{nu + 0.5, beta};
  const double hi = std::max(p.support(), 6.0 * beta);
  constexpr int kGrid = 4096;
  const auto gap = [&](double r) { return std::fabs(phi(r, p) - matern(r, m)); };
  int best = 0;
  double best_val = 0.0;
  std::vector<double> vals(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i) {
    const double r = hi * i / kGrid;
    vals[i] = gap(r);
    if (vals[i] > best_val) {
      best_val = vals[i];
      best = i;
    }
  }
  const double lo_r = hi * std::max(0, best - 1) / kGrid;
  const double hi_r = hi * std::min(kGrid, best + 1) / kGrid;
  const double r_star = golden_max(gap, lo_r, hi_r, 1e-10 * hi);
  return {nu, mu, std::max(best_val, gap(r_star)), r_star};
}

inline ConvergenceReport convergence_table(const std::vector<double>& nu_list,
                                           const std::vector<double>& mu_list,
                                           double beta,
                                           unsigned threads = 0) {
  ConvergenceReport rep;
  rep.nu_list = nu_list;
  rep.mu_list = mu_list;
  rep.cells.resize(nu_list.size() * mu_list.size());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  std::size_t total = rep.cells.size();
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < total; i += threads) {
        const double nu = nu_list[i / mu_list.size()];
        const double mu = mu_list[i % mu_list.size()];
        rep.cells[i] = correlation_gap(nu, mu, beta);
      }
    });
  }
  for (auto& th : pool) th.join();
  return rep;
}

// Sup over a bounded z-grid of the spectral gap between the phi family
// and its Matern limit, per mu (Theorem 2-style diagnostic).
inline std::vector<double> spectral_convergence(double nu,
                                                const std::vector<double>& mu_list,
                                                double beta,
                                                const std::vector<double>& z_grid,
                                                int dim = 2) {
  std::vector<double> sup(mu_list.size(), 0.0);
  const MaternParams m{nu + 0.5, beta};
  for (std::size_t j = 0; j < mu_list.size(); ++j) {
    const PhiParams p{nu, mu_list[j], beta, dim};
    p.validate();
    for (double z : z_grid) {
      const double gap =
          std::fabs(gw_spectral({z, dim}, p) - matern_spectral({z, dim}, m));
      sup[j] = std::max(sup[j], gap);
    }
  }
  return sup;
}

}  // namespace gwmat
