#pragma once

// Gaussian log-likelihood, maximum-likelihood fitting under the
// mu* = 1/mu reparameterization, Fisher-information standard errors,
// AIC, the microergodic parameter, and the fixed-domain equivalence
// predicate.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "gwmat/covmat.hpp"
#include "gwmat/kernels.hpp"
#include "gwmat/optimize.hpp"

namespace gwmat {

// Which correlation family is being fit; nu is always held fixed.
struct ModelSpec {
  bool matern = false;  // otherwise the compactly supported phi family
  double nu = 1.0;
  int dim = 2;
  double mu_star_upper() const { return 1.0 / lambda_pd(dim, nu); }
};

struct ParamVector {
  double sigma2 = 1.0;
  double beta = 1.0;
  double mu_star = 0.0;  // 1/mu; ignored for the Matern family
  double tau2 = 0.0;
  // free/fixed mask
  bool fit_sigma2 = true;
  bool fit_beta = true;
  bool fit_mu = false;
  bool fit_tau2 = false;

  int free_count(const ModelSpec& spec) const {
    return int(fit_sigma2) + int(fit_beta) +
           int(fit_mu && !spec.matern) + int(fit_tau2);
  }
  void validate(const ModelSpec& spec) const {
    if (!(sigma2 > 0.0)) throw std::domain_error("ParamVector: sigma2 > 0");
    if (!(beta > 0.0)) throw std::domain_error("ParamVector: beta > 0");
    if (!(tau2 >= 0.0 && tau2 < 1.0))
      throw std::domain_error("ParamVector: tau2 in [0, 1)");
    if (!spec.matern &&
        !(mu_star > 0.0 && mu_star <= spec.mu_star_upper() * (1.0 + 1e-12)))
      throw std::domain_error(
          "ParamVector: mu_star in (0, 1/lambda(d, nu)] required");
  }
};

inline CorrelationModel make_model(const ModelSpec& spec,
                                   const ParamVector& theta) {
  theta.validate(spec);
  CorrelationModel m;
  m.sigma2 = theta.sigma2;
  m.tau2 = theta.tau2;
  if (spec.matern)
    m.family = MaternParams{spec.nu, theta.beta};
  else
    m.family = PhiParams{spec.nu, 1.0 / theta.mu_star, theta.beta, spec.dim};
  return m;
}

// -1/2 [ n log(2 pi) + log|Sigma| + z' Sigma^{-1} z ], one factorization
inline double log_likelihood(const ModelSpec& spec, const ParamVector& theta,
                             const PointSet& ps, const std::vector<double>& z) {
  if (z.size() != ps.size())
    throw std::invalid_argument("log_likelihood: |z| must equal |points|");
  const auto f = cholesky(assemble(ps, make_model(spec, theta)));
  const auto w = solve(f, z);
  double quad = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) quad += z[i] * w[i];
  const double n = double(z.size());
  return -0.5 * (n * std::log(2.0 * M_PI) + f.logdet + quad);
}

// Profile maximum over sigma2 at fixed correlation structure:
// sigma2_hat = z' R^{-1} z / n with R the unit-variance covariance.
inline double profile_sigma2(const ModelSpec& spec, const ParamVector& theta,
                             const PointSet& ps, const std::vector<double>& z) {
  ParamVector unit = theta;
  unit.sigma2 = 1.0;
  const auto f = cholesky(assemble(ps, make_model(spec, unit)));
  const auto w = solve(f, z);
  double quad = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) quad += z[i] * w[i];
  return quad / double(z.size());
}

// sigma2 * beta^{-(1+2 nu)} * Gamma(mu+1) / Gamma(2 nu + mu + 1)
inline double microergodic(double sigma2, double beta, double nu, double mu) {
  if (!(sigma2 > 0.0) || !(beta > 0.0) || !(nu >= 0.0) || !(mu > 0.0))
    throw std::domain_error("microergodic: invalid parameters");
  return sigma2 * std::pow(beta, -(1.0 + 2.0 * nu)) *
         std::exp(std::lgamma(mu + 1.0) - std::lgamma(2.0 * nu + mu + 1.0));
}

inline double microergodic(const ModelSpec& spec, const ParamVector& theta) {
  if (spec.matern)
    throw std::domain_error("microergodic: phi-family parameter");
  return microergodic(theta.sigma2, theta.beta, spec.nu, 1.0 / theta.mu_star);
}

struct EquivalenceReport {
  bool equivalent;
  bool precondition_ok;  // mu_i > nu + d + 0.5 for both
  double lhs, rhs;       // the two microergodic values
};

// Gaussian-equivalence predicate: both measures define the same paths
// iff the microergodic parameters coincide (given mu_i > nu + d + 0.5).
inline EquivalenceReport equivalence_check(const ParamVector& theta0,
                                           const ParamVector& theta1,
                                           double nu, int d) {
  const double mu0 = 1.0 / theta0.mu_star;
  const double mu1 = 1.0 / theta1.mu_star;
  const bool pre = (mu0 > nu + d + 0.5) && (mu1 > nu + d + 0.5);
  const double c0 = microergodic(theta0.sigma2, theta0.beta, nu, mu0);
  const double c1 = microergodic(theta1.sigma2, theta1.beta, nu, mu1);
  const bool eq =
      pre && std::fabs(c0 - c1) / std::max(c0, c1) < 1e-12;
  return {eq, pre, c0, c1};
}

namespace detail {

inline std::vector<double> dense_view(const SymmetricMatrix& m) {
  const int n = m.n;
  if (!m.sparse) return m.dense;
  std::vector<double> a(std::size_t(n) * n, 0.0);
  for (int j = 0; j < n; ++j)
    for (int p = m.col_ptr[j]; p < m.col_ptr[j + 1]; ++p) {
      a[std::size_t(m.row_ind[p]) * n + j] = m.values[p];
      a[std::size_t(j) * n + m.row_ind[p]] = m.values[p];
    }
  return a;
}

// tiny dense inverse for the p x p Fisher matrix
inline std::vector<double> small_inverse(std::vector<double> a, int p) {
  std::vector<double> inv(std::size_t(p) * p, 0.0);
  for (int i = 0; i < p; ++i) inv[std::size_t(i) * p + i] = 1.0;
  for (int c = 0; c < p; ++c) {
    int piv = c;
    for (int r = c + 1; r < p; ++r)
      if (std::fabs(a[std::size_t(r) * p + c]) >
          std::fabs(a[std::size_t(piv) * p + c]))
        piv = r;
    if (a[std::size_t(piv) * p + c] == 0.0)
      throw std::runtime_error("fisher information is singular");
    for (int k = 0; k < p; ++k) {
      std::swap(a[std::size_t(c) * p + k], a[std::size_t(piv) * p + k]);
      std::swap(inv[std::size_t(c) * p + k], inv[std::size_t(piv) * p + k]);
    }
    const double d = a[std::size_t(c) * p + c];
    for (int k = 0; k < p; ++k) {
      a[std::size_t(c) * p + k] /= d;
      inv[std::size_t(c) * p + k] /= d;
    }
    for (int r = 0; r < p; ++r) {
      if (r == c) continue;
      const double f = a[std::size_t(r) * p + c];
      for (int k = 0; k < p; ++k) {
        a[std::size_t(r) * p + k] -= f * a[std::size_t(c) * p + k];
        inv[std::size_t(r) * p + k] -= f * inv[std::size_t(c) * p + k];
      }
    }
  }
  return inv;
}

enum class FreeParam { sigma2, beta, mu_star, tau2 };

inline std::vector<FreeParam> free_params(const ModelSpec& spec,
                                          const ParamVector& theta) {
  std::vector<FreeParam> out;
  if (theta.fit_sigma2) out.push_back(FreeParam::sigma2);
  if (theta.fit_beta) out.push_back(FreeParam::beta);
  if (theta.fit_mu && !spec.matern) out.push_back(FreeParam::mu_star);
  if (theta.fit_tau2) out.push_back(FreeParam::tau2);
  return out;
}

inline double get_param(const ParamVector& t, FreeParam w) {
  switch (w) {
    case FreeParam::sigma2: return t.sigma2;
    case FreeParam::beta: return t.beta;
    case FreeParam::mu_star: return t.mu_star;
    default: return t.tau2;
  }
}

inline void set_param(ParamVector& t, FreeParam w, double v) {
  switch (w) {
    case FreeParam::sigma2: t.sigma2 = v; break;
    case FreeParam::beta: t.beta = v; break;
    case FreeParam::mu_star: t.mu_star = v; break;
    default: t.tau2 = v; break;
  }
}

inline double logit(double x) { return std::log(x / (1.0 - x)); }
inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// map between natural parameters and unconstrained optimizer coordinates
inline double to_unconstrained(const ModelSpec& spec, FreeParam w, double v) {
  switch (w) {
    case FreeParam::sigma2:
    case FreeParam::beta:
      return std::log(v);
    case FreeParam::mu_star:
      return logit(std::min(v / spec.mu_star_upper(), 1.0 - 1e-12));
    default:
      return logit(std::min(std::max(v, 1e-12), 1.0 - 1e-12));
  }
}

inline double from_unconstrained(const ModelSpec& spec, FreeParam w, double t) {
  switch (w) {
    case FreeParam::sigma2:
    case FreeParam::beta:
      return std::exp(t);
    case FreeParam::mu_star:
      return spec.mu_star_upper() * sigmoid(t);
    default:
      return sigmoid(t);
  }
}

}  // namespace detail

// Fisher information for the free parameters (order: sigma2, beta,
// mu_star, tau2 restricted to the free mask):
//   F_ij = 1/2 tr( Sigma^{-1} dSigma/di Sigma^{-1} dSigma/dj ).
// dSigma/dsigma2 = Sigma / sigma2 analytically; the rest by central
// differences with h = 1e-5 max(|theta_i|, 1).
inline std::vector<double> fisher_information(const ModelSpec& spec,
                                              const ParamVector& theta,
                                              const PointSet& ps) {
  const auto params = detail::free_params(spec, theta);
  const int p = static_cast<int>(params.size());
  const int n = static_cast<int>(ps.size());
  const auto base = assemble(ps, make_model(spec, theta));
  const auto fact = cholesky(base);

  // W_i = Sigma^{-1} dSigma/dtheta_i, stored dense column-wise
  std::vector<std::vector<double>> w(p);
  for (int i = 0; i < p; ++i) {
    std::vector<double> d;
    if (params[i] == detail::FreeParam::sigma2) {
      d = detail::dense_view(base);
      for (auto& v : d) v /= theta.sigma2;
    } else {
      const double v0 = detail::get_param(theta, params[i]);
      const double h = 1e-5 * std::max(std::fabs(v0), 1.0);
      ParamVector hi = theta, lo = theta;
      detail::set_param(hi, params[i], v0 + h);
      detail::set_param(lo, params[i], std::max(v0 - h, 1e-14));
      const double span = detail::get_param(hi, params[i]) -
                          detail::get_param(lo, params[i]);
      const auto mh = detail::dense_view(assemble(ps, make_model(spec, hi)));
      const auto ml = detail::dense_view(assemble(ps, make_model(spec, lo)));
      d.resize(mh.size());
      for (std::size_t k = 0; k < d.size(); ++k) d[k] = (mh[k] - ml[k]) / span;
    }
    // solve column by column
    w[i].assign(std::size_t(n) * n, 0.0);
    std::vector<double> col(n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) col[r] = d[std::size_t(r) * n + c];
      const auto s = solve(fact, col);
      for (int r = 0; r < n; ++r) w[i][std::size_t(r) * n + c] = s[r];
    }
  }
  std::vector<double> fisher(std::size_t(p) * p, 0.0);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      double tr = 0.0;
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          tr += w[i][std::size_t(r) * n + c] * w[j][std::size_t(c) * n + r];
      fisher[std::size_t(i) * p + j] = 0.5 * tr;
      fisher[std::size_t(j) * p + i] = 0.5 * tr;
    }
  return fisher;
}

struct FitResult {
  ParamVector theta_hat;
  std::vector<double> std_errors;  // per free parameter
  std::vector<double> fisher;      // p x p, row-major
  double loglik_max = 0.0;
  double aic = 0.0;
  double microergodic_hat = 0.0;  // phi family only; 0 for Matern
  int iterations = 0;
  bool converged = false;
  bool boundary_mu_upper = false;  // mu* within 1e-6 of 1/lambda(d, nu)
  bool boundary_mu_lower = false;  // mu* within 1e-6 of 0 (Matern limit)
};

// Data-driven starting point: sample variance, scale from a
// practical-range heuristic (20% of the domain diameter), mid-interval
// mu*, small nugget.
inline ParamVector default_init(const ModelSpec& spec, const PointSet& ps,
                                const std::vector<double>& z,
                                const ParamVector& mask) {
  ParamVector init = mask;
  double mean = 0.0;
  for (double v : z) mean += v / z.size();
  double var = 0.0;
  for (double v : z) var += (v - mean) * (v - mean) / z.size();
  init.sigma2 = std::max(var, 1e-8);
  const double target = 0.2 * std::max(ps.diameter(), 1e-6);
  if (!spec.matern) {
    if (!(init.mu_star > 0.0)) init.mu_star = 0.5 * spec.mu_star_upper();
    init.beta = beta_for_support(spec.nu, 1.0 / init.mu_star, target);
  } else {
    CorrelationModel probe{MaternParams{spec.nu, 1.0}, 1.0, 0.0};
    init.beta = target / practical_range(probe);
  }
  init.tau2 = mask.fit_tau2 ? 0.05 : mask.tau2;
  return init;
}

// Nelder-Mead maximum likelihood in unconstrained transformed
// coordinates. Non-PD evaluations count as -inf so the simplex retreats;
// the sigma2-only case uses the exact profile closed form.
inline FitResult fit_ml(const ModelSpec& spec, const PointSet& ps,
                        const std::vector<double>& z, ParamVector init,
                        const NelderMeadOptions& opt = {}) {
  init.validate(spec);
  if (z.size() != ps.size())
    throw std::invalid_argument("fit_ml: |z| must equal |points|");
  const auto params = detail::free_params(spec, init);
  if (params.empty()) throw std::invalid_argument("fit_ml: no free parameters");

  FitResult res;
  if (params.size() == 1 && params[0] == detail::FreeParam::sigma2) {
    res.theta_hat = init;
    res.theta_hat.sigma2 = profile_sigma2(spec, init, ps, z);
    res.converged = true;
  } else {
    std::vector<double> x0(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      x0[i] = detail::to_unconstrained(spec, params[i],
                                       detail::get_param(init, params[i]));
    const auto unpack = [&](const std::vector<double>& x) {
      ParamVector t = init;
      for (std::size_t i = 0; i < params.size(); ++i)
        detail::set_param(t, params[i],
                          detail::from_unconstrained(spec, params[i], x[i]));
      return t;
    };
    const auto objective = [&](const std::vector<double>& x) {
      try {
        return -log_likelihood(spec, unpack(x), ps, z);
      } catch (const not_positive_definite_error&) {
        return std::numeric_limits<double>::infinity();
      } catch (const std::domain_error&) {
        return std::numeric_limits<double>::infinity();
      }
    };
    const auto nm = nelder_mead(objective, x0, opt);
    if (!nm.converged)
      throw std::runtime_error("fit_ml: no convergence after " +
                               std::to_string(opt.max_iterations) +
                               " iterations");
    res.theta_hat = unpack(nm.x);
    res.iterations = nm.iterations;
    res.converged = true;
  }
  res.loglik_max = log_likelihood(spec, res.theta_hat, ps, z);
  res.aic = 2.0 * res.theta_hat.free_count(spec) - 2.0 * res.loglik_max;
  res.fisher = fisher_information(spec, res.theta_hat, ps);
  const int p = static_cast<int>(params.size());
  const auto finv = detail::small_inverse(res.fisher, p);
  res.std_errors.resize(p);
  for (int i = 0; i < p; ++i)
    res.std_errors[i] = std::sqrt(std::max(finv[std::size_t(i) * p + i], 0.0));
  if (!spec.matern) {
    res.microergodic_hat = microergodic(spec, res.theta_hat);
    const double ub = spec.mu_star_upper();
    res.boundary_mu_upper = res.theta_hat.mu_star > ub - 1e-6;
    res.boundary_mu_lower = res.theta_hat.mu_star < 1e-6;
  }
  return res;
}

}  // namespace gwmat
