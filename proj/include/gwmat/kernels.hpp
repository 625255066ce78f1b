#pragma once

// Correlation-function catalog: Matern, generalized Wendland in its
// original parameterization, and the rescaled phi family whose compact
// support is tied to a Matern-compatible scale.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>

#include "gwmat/quadrature.hpp"
#include "gwmat/specfun.hpp"

namespace gwmat {

// Positive-definiteness threshold: mu >= lambda_pd(d, nu).
inline double lambda_pd(int dim, double nu) { return 0.5 * (dim + 1) + nu; }

struct MaternParams {
  double nu;    // smoothness, > 0
  double beta;  // scale, > 0
  void validate() const {
    if (!(nu > 0.0) || !(beta > 0.0))
      throw std::domain_error("MaternParams: nu > 0 and beta > 0 required");
  }
};

struct GenWendlandParams {
  double nu;       // smoothness, >= 0
  double mu;       // shape
  double support;  // compact support, > 0
  int dim = 2;     // ambient dimension, 1..3
  void validate() const {
    if (!(nu >= 0.0)) throw std::domain_error("GenWendlandParams: nu >= 0");
    if (!(support > 0.0))
      throw std::domain_error("GenWendlandParams: support > 0");
    if (dim < 1 || dim > 3)
      throw std::domain_error("GenWendlandParams: dim in {1,2,3}");
    if (mu < lambda_pd(dim, nu))
      throw std::domain_error(
          "GenWendlandParams: mu >= (d+1)/2 + nu required for positive "
          "definiteness");
  }
};

// Compact support induced by (nu, mu, beta):
//   delta = beta * (Gamma(mu+2nu+1)/Gamma(mu))^(1/(1+2nu)),
// strictly increasing in each argument.
inline double delta_support(double nu, double mu, double beta) {
  if (!(nu >= 0.0) || !(mu > 0.0) || !(beta > 0.0))
    throw std::domain_error("delta_support: nu >= 0, mu > 0, beta > 0");
  return beta * std::exp((std::lgamma(mu + 2.0 * nu + 1.0) - std::lgamma(mu)) /
                         (1.0 + 2.0 * nu));
}

// Inverse of delta_support in beta: the scale giving compact support
// `target_delta`.
inline double beta_for_support(double nu, double mu, double target_delta) {
  if (!(target_delta > 0.0))
    throw std::domain_error("beta_for_support: target_delta > 0");
  return target_delta /
         std::exp((std::lgamma(mu + 2.0 * nu + 1.0) - std::lgamma(mu)) /
                  (1.0 + 2.0 * nu));
}

struct PhiParams {
  double nu;    // smoothness, >= 0
  double mu;    // shape
  double beta;  // Matern-compatible scale, > 0
  int dim = 2;
  double support() const { return delta_support(nu, mu, beta); }
  GenWendlandParams as_gw() const { return {nu, mu, support(), dim}; }
  void validate() const {
    if (!(beta > 0.0)) throw std::domain_error("PhiParams: beta > 0");
    as_gw().validate();
  }
};

struct CorrelationModel {
  std::variant<MaternParams, GenWendlandParams, PhiParams> family;
  double sigma2 = 1.0;  // variance
  double tau2 = 0.0;    // nugget fraction, in [0, 1)
  void validate() const {
    if (!(sigma2 > 0.0)) throw std::domain_error("CorrelationModel: sigma2 > 0");
    if (!(tau2 >= 0.0 && tau2 < 1.0))
      throw std::domain_error("CorrelationModel: tau2 in [0, 1)");
    std::visit([](const auto& p) { p.validate(); }, family);
  }
  // Compact support radius, or +inf for globally supported families.
  double support_radius() const {
    if (auto* gw = std::get_if<GenWendlandParams>(&family)) return gw->support;
    if (auto* ph = std::get_if<PhiParams>(&family)) return ph->support();
    return std::numeric_limits<double>::infinity();
  }
};

// ---------------------------------------------------------------------
// Matern

inline double matern(double r, const MaternParams& p) {
  if (r < 0.0) throw std::domain_error("matern: r >= 0");
  if (r == 0.0) return 1.0;
  const double x = r / p.beta;
  // half-integer closed forms
  if (p.nu == 0.5) return std::exp(-x);
  if (p.nu == 1.5) return std::exp(-x) * (1.0 + x);
  if (p.nu == 2.5) return std::exp(-x) * (1.0 + x + x * x / 3.0);
  if (p.nu == 3.5)
    return std::exp(-x) * (1.0 + x + 0.4 * x * x + x * x * x / 15.0);
  const double lg = (1.0 - p.nu) * std::log(2.0) - std::lgamma(p.nu) +
                    p.nu * std::log(x);
  const double k = bessel_k(p.nu, x);
  if (k == 0.0 || std::isinf(k)) {
    // fall back to fully logged product to dodge under/overflow
    return std::exp(lg + std::log(bessel_k(p.nu, x)));
  }
  return std::exp(lg) * k;
}

// ---------------------------------------------------------------------
// Generalized Wendland

// Askey case nu = 0: (1 - r/support)_+^mu.
inline double gw_askey(double r, const GenWendlandParams& p) {
  if (r < 0.0) throw std::domain_error("gw_askey: r >= 0");
  if (p.nu != 0.0) throw std::domain_error("gw_askey: requires nu = 0");
  if (r >= p.support) return 0.0;
  return std::pow(1.0 - r / p.support, p.mu);
}

namespace detail {

// Closed forms for integer nu = 1, 2, 3 (polynomial times Askey factor).
inline double gw_closed_form(double x, int nu, double mu) {
  const double base = 1.0 - x;
  switch (nu) {
    case 1:
      return std::pow(base, mu + 1.0) * (1.0 + x * (mu + 1.0));
    case 2:
      return std::pow(base, mu + 2.0) *
             (1.0 + x * (mu + 2.0) +
              x * x * (mu * mu + 4.0 * mu + 3.0) / 3.0);
    case 3:
      return std::pow(base, mu + 3.0) *
             (1.0 + x * (mu + 3.0) +
              x * x * (2.0 * mu * mu + 12.0 * mu + 15.0) / 5.0 +
              x * x * x * (mu * mu * mu + 9.0 * mu * mu + 23.0 * mu + 15.0) /
                  15.0);
    default:
      throw std::logic_error("gw_closed_form: nu must be 1, 2 or 3");
  }
}

inline bool is_small_integer(double x, int& out) {
  const double r = std::round(x);
  if (std::fabs(x - r) < 1e-12 && r >= 1.0 && r <= 3.0) {
    out = static_cast<int>(r);
    return true;
  }
  return false;
}

}  // namespace detail

// Hypergeometric representation (primary evaluation path for nu > 0):
//   K (1-x^2)^(nu+mu) 2F1(mu/2, (mu+1)/2; nu+mu+1; 1-x^2),  x = r/support.
inline double gw_hypergeometric(double r, const GenWendlandParams& p,
                                const SeriesControl& ctrl = {}) {
  if (r < 0.0) throw std::domain_error("gw_hypergeometric: r >= 0");
  if (!(p.nu > 0.0)) throw std::domain_error("gw_hypergeometric: nu > 0");
  if (r == 0.0) return 1.0;
  if (r >= p.support) return 0.0;
  const double x = r / p.support;
  int nu_int;
  if (detail::is_small_integer(p.nu, nu_int))
    return detail::gw_closed_form(x, nu_int, p.mu);
  const double nu = p.nu, mu = p.mu;
  const double log_k = std::lgamma(nu) + std::lgamma(2.0 * nu + mu + 1.0) -
                       std::lgamma(2.0 * nu) - std::lgamma(nu + mu + 1.0) -
                       (mu + 1.0) * std::log(2.0);
  const double w = 1.0 - x * x;
  const auto f = hyp2f1_log(0.5 * mu, 0.5 * (mu + 1.0), nu + mu + 1.0, w, ctrl);
  if (f.sign <= 0) return 0.0;  // roundoff at the support edge
  return std::exp(log_k + (nu + mu) * std::log(w) + f.log_abs);
}

// Integral representation (test oracle):
//   (1/B(2nu, mu+1)) \int_{r/b}^1 u (u^2 - (r/b)^2)^(nu-1) (1-u)^mu du.
inline double gw_integral(double r, const GenWendlandParams& p,
                          double tol = 1e-12) {
  if (r < 0.0) throw std::domain_error("gw_integral: r >= 0");
  if (!(p.nu > 0.0)) throw std::domain_error("gw_integral: nu > 0");
  if (r >= p.support) return 0.0;
  const double t = r / p.support;
  const double t2 = t * t;
  const double nu = p.nu, mu = p.mu;
  const double log_b =
      std::lgamma(2.0 * nu) + std::lgamma(mu + 1.0) -
      std::lgamma(2.0 * nu + mu + 1.0);  // ln B(2nu, mu+1)
  const double w_hi = 1.0 - t2;
  // factor out the integrand peak (1-t)^mu so the quadrature tolerance
  // acts relatively even when the kernel value underflows toward 1e-300
  const double log_peak = mu * std::log1p(-t);
  const auto ratio_pow = [&](double w) {
    // ((1 - sqrt(w + t^2)) / (1 - t))^mu, in [0, 1]
    return std::exp(mu * (std::log1p(-std::sqrt(w + t2)) - std::log1p(-t)));
  };
  // the integrand mass concentrates toward w = 0 when mu is large, so a
  // left-concentrated geometric-panel scheme is used with `tol` relative
  double integral;
  if (nu < 1.0) {
    // substitute w = u^2 - t^2 then w = s^(1/nu): removes the endpoint
    // singularity, leaving a bounded integrand on [0, w_hi^nu]
    integral = 0.5 / nu *
               integrate_left_concentrated(
                   [&](double s) { return ratio_pow(std::pow(s, 1.0 / nu)); },
                   std::pow(w_hi, nu), tol);
  } else {
    integral = 0.5 * integrate_left_concentrated(
                         [&](double w) {
                           return std::pow(w, nu - 1.0) * ratio_pow(w);
                         },
                         w_hi, tol);
  }
  if (integral <= 0.0) return 0.0;
  return std::exp(std::log(integral) + log_peak - log_b);
}

// Dispatching evaluator for the generalized Wendland family. A narrow
// parameter ring (huge mu with r barely inside the support) has no
// stable hypergeometric path; the integral form covers it.
inline double gw(double r, const GenWendlandParams& p) {
  if (p.nu == 0.0) return gw_askey(r, p);
  try {
    return gw_hypergeometric(r, p);
  } catch (const series_error&) {
    return gw_integral(r, p);
  }
}

// The reparameterized family: the Wendland kernel evaluated at the
// derived compact support delta(nu, mu, beta).
inline double phi(double r, const PhiParams& p) { return gw(r, p.as_gw()); }

// Plain correlation of any family.
inline double correlation(const CorrelationModel& m, double r) {
  return std::visit(
      [&](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MaternParams>) return matern(r, p);
        else if constexpr (std::is_same_v<T, GenWendlandParams>) return gw(r, p);
        else return phi(r, p);
      },
      m.family);
}

// Covariance with nugget: sigma^2 [(1-tau^2) rho(r) + tau^2 1{r=0}].
inline double apply_nugget_variance(double rho, double r,
                                    const CorrelationModel& m) {
  return m.sigma2 * ((1.0 - m.tau2) * rho + (r == 0.0 ? m.tau2 : 0.0));
}

inline double covariance(const CorrelationModel& m, double r) {
  return apply_nugget_variance(correlation(m, r), r, m);
}

// Distance at which the correlation drops to `threshold`.
inline double practical_range(const CorrelationModel& m,
                              double threshold = 0.05) {
  const auto rho = [&](double r) { return correlation(m, r); };
  double scale = std::visit(
      [](const auto& p) -> double {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, MaternParams>) return p.beta;
        else if constexpr (std::is_same_v<T, GenWendlandParams>)
          return p.support;
        else return p.support();
      },
      m.family);
  double hi = scale;
  const double cap = 1e6 * scale;
  while (rho(hi) >= threshold) {
    hi *= 2.0;
    if (hi > cap)
      throw std::runtime_error(
          "practical_range: correlation never drops below threshold");
  }
  return bisect([&](double r) { return rho(r) - threshold; }, 0.0, hi, 1e-9);
}

}  // namespace gwmat
