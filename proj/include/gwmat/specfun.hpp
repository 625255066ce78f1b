#pragma once

// Special-function layer: log-gamma, gamma ratios, modified Bessel K of
// fractional order, and the generalized hypergeometric series 2F1 / 1F2.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace gwmat {

struct SeriesControl {
  int max_terms = 10000;
  double rel_tol = 1e-14;
  double abs_tol = 1e-300;
};

class series_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when the 1F2 argument exceeds the precision cap; callers fall
// back to the Hankel-transform route.
class precision_loss_error : public series_error {
 public:
  using series_error::series_error;
};

inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
  return std::lgamma(x);
}

// exp(lnGamma(a) - lnGamma(b)); safe for arguments where Gamma itself
// would overflow.
inline double gamma_ratio(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("gamma_ratio: requires a, b > 0");
  return std::exp(std::lgamma(a) - std::lgamma(b));
}

namespace detail {

// ln|Gamma(x)| with sign, valid for non-integer negative arguments too.
inline double log_gamma_signed(double x, int& sign) {
  if (x > 0.0) {
    sign = 1;
    return std::lgamma(x);
  }
  if (x == std::floor(x)) throw std::domain_error("gamma pole");
  // reflection: Gamma(x)Gamma(1-x) = pi / sin(pi x)
  const double s = std::sin(M_PI * x);
  sign = (s > 0.0) ? 1 : -1;
  return std::log(M_PI / std::fabs(s)) - std::lgamma(1.0 - x);
}

// Taylor coefficients of 1/Gamma(1+x), |x| <= 1/2 (A&S 6.1.34 shifted).
inline constexpr double kInvGammaTaylor[] = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
    -0.0002152416741149,
    0.0001280502823882,
    -0.0000201348547807,
    -0.0000012504934821,
    0.0000011330272320,
    -0.0000002056338417,
    0.0000000061160950,
    0.0000000050020075,
    -0.0000000011812746,
    0.0000000001043427,
    0.0000000000077823,
    -0.0000000000036968,
    0.0000000000005100,
    -0.0000000000000206,
    -0.0000000000000054,
    0.0000000000000014,
};

// 1/Gamma(1+x) for |x| <= 1/2.
inline double inv_gamma1p(double x) {
  double p = 1.0, s = 0.0;
  for (double c : kInvGammaTaylor) {
    s += c * p;
    p *= x;
  }
  return s;
}

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), stable as mu -> 0.
inline double temme_gam1(double mu) {
  double s = 0.0, p = 1.0;
  const double mu2 = mu * mu;
  for (std::size_t k = 1; k < sizeof(kInvGammaTaylor) / sizeof(double);
       k += 2) {
    s -= kInvGammaTaylor[k] * p;
    p *= mu2;
  }
  return s;
}

// gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
inline double temme_gam2(double mu) {
  double s = 0.0, p = 1.0;
  const double mu2 = mu * mu;
  for (std::size_t k = 0; k < sizeof(kInvGammaTaylor) / sizeof(double);
       k += 2) {
    s += kInvGammaTaylor[k] * p;
    p *= mu2;
  }
  return s;
}

// Temme series for K_mu, K_{mu+1}, |mu| <= 1/2, x <= 2.
inline void bessel_k_temme(double mu, double x, double& kmu, double& kmu1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double x2 = 0.5 * x;
  const double pimu = M_PI * mu;
  const double fact = (std::fabs(pimu) < 1e-15) ? 1.0 : pimu / std::sin(pimu);
  double d = -std::log(x2);
  double e = mu * d;
  const double fact2 = (std::fabs(e) < 1e-15) ? 1.0 : std::sinh(e) / e;
  const double gam1 = temme_gam1(mu);
  const double gam2 = temme_gam2(mu);
  const double gampl = inv_gamma1p(mu);   // 1/Gamma(1+mu)
  const double gammi = inv_gamma1p(-mu);  // 1/Gamma(1-mu)
  double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
  double sum = ff;
  e = std::exp(e);
  double p = 0.5 * e / gampl;         // = 0.5 (x/2)^{-mu} Gamma(1+mu)
  double q = 0.5 / (e * gammi);       // = 0.5 (x/2)^{+mu} Gamma(1-mu)
  double c = 1.0;
  d = x2 * x2;
  double sum1 = p;
  for (int i = 1; i <= 30000; ++i) {
    ff = (i * ff + p + q) / (i * i - mu * mu);
    c *= d / i;
    p /= (i - mu);
    q /= (i + mu);
    const double del = c * ff;
    sum += del;
    const double del1 = c * (p - i * ff);
    sum1 += del1;
    if (std::fabs(del) < std::fabs(sum) * eps) {
      kmu = sum;
      kmu1 = sum1 * (2.0 / x);
      return;
    }
  }
  throw series_error("bessel_k: Temme series failed to converge");
}

// Temme's continued fraction (CF2) for K_mu, K_{mu+1}, |mu| <= 1/2, x > 2.
inline void bessel_k_cf2(double mu, double x, double& kmu, double& kmu1) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d, delh = d;
  double q1 = 0.0, q2 = 1.0;
  const double a1 = 0.25 - mu * mu;
  double q = a1, c = a1, a = -a1;
  double s = 1.0 + q * delh;
  for (int i = 2; i <= 30000; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::fabs(dels / s) < eps) {
      h = a1 * h;
      kmu = std::sqrt(M_PI / (2.0 * x)) * std::exp(-x) / s;
      kmu1 = kmu * (mu + x + 0.5 - h) / x;
      return;
    }
  }
  throw series_error("bessel_k: CF2 failed to converge");
}

}  // namespace detail

// Modified Bessel function of the second kind, fractional order >= 0.
inline double bessel_k(double order, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: requires x > 0");
  if (!(order >= 0.0)) throw std::domain_error("bessel_k: requires order >= 0");
  const int nl = static_cast<int>(order + 0.5);
  const double mu = order - nl;  // in [-1/2, 1/2]
  double kmu, kmu1;
  if (x <= 2.0)
    detail::bessel_k_temme(mu, x, kmu, kmu1);
  else
    detail::bessel_k_cf2(mu, x, kmu, kmu1);
  for (int i = 1; i <= nl; ++i) {
    const double knext = (mu + i) * (2.0 / x) * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = knext;
    if (std::isinf(kmu1)) break;  // saturate; caller handles x -> 0+
  }
  return kmu;
}

// Digamma function for x > 0 (recurrence into the asymptotic regime).
inline double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: requires x > 0");
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x, inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 -
                    inv2 * (1.0 / 120.0 -
                            inv2 * (1.0 / 252.0 -
                                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

namespace detail {

// Sign-and-log representation of a nonzero real.
struct SignedLog {
  double log_abs;
  int sign;
  double value() const { return sign * std::exp(log_abs); }
};

// 2F1(a,b;c;z) by direct series for 0 <= z <= 1/2 with all parameters
// such that the series converges. Quad-precision accumulation keeps the
// large-parameter regime (mu in the hundreds) accurate. Terms can have a
// huge dynamic range, hence the explicit rescaling.
inline SignedLog hyp2f1_series_log(double a, double b, double c, double z,
                                   const SeriesControl& ctrl) {
  if (z == 0.0) return {0.0, 1};
  __float128 term = 1, sum = 1;
  double log_scale = 0.0;
  int below = 0;
  for (int k = 0; k < ctrl.max_terms; ++k) {
    term *= (__float128)(a + k) * (__float128)(b + k) /
            ((__float128)(c + k) * (__float128)(k + 1)) * (__float128)z;
    sum += term;
    const double t = static_cast<double>(term >= 0 ? term : -term);
    const double s = static_cast<double>(sum >= 0 ? sum : -sum);
    if (t < ctrl.rel_tol * s + ctrl.abs_tol) {
      if (++below >= 2) {
        const int sign = (sum >= 0) ? 1 : -1;
        return {log_scale + std::log(s), sign};
      }
    } else {
      below = 0;
    }
    if (s > 1e280) {
      sum *= (__float128)1e-280;
      term *= (__float128)1e-280;
      log_scale += std::log(1e280);
    }
  }
  throw series_error("hyp2f1: series did not converge");
}

inline SignedLog signed_log_gamma(double x) {
  int s;
  const double l = log_gamma_signed(x, s);
  return {l, s};
}

// 2F1(a, b; a+b+m; 1-w) for nonnegative integer m and small w > 0, by the
// exact logarithmic connection formula (the case where the generic 1-z
// transformation degenerates). Requires a, b > 0.
inline SignedLog hyp2f1_log_near_one_integer(double a, double b, int m,
                                             double w,
                                             const SeriesControl& ctrl) {
  const double log_w = std::log(w);
  // infinite sum with the ln(w) / digamma bracket
  __float128 sigma2 = 0;
  {
    // p_k = (a+m)_k (b+m)_k w^k m! / (k! (k+m)!); the m! is divided back
    // out via the lgamma(m+1) term in l2 below
    __float128 p = 1;
    double bracket = log_w - digamma(1.0) - digamma(m + 1.0) +
                     digamma(a + m) + digamma(b + m);
    int below = 0;
    for (int k = 0;; ++k) {
      sigma2 += p * (__float128)bracket;
      const double t = std::fabs(static_cast<double>(p)) *
                       std::fabs(bracket);
      const double s = std::fabs(static_cast<double>(sigma2));
      if (t < ctrl.rel_tol * s + ctrl.abs_tol) {
        if (++below >= 2) break;
      } else {
        below = 0;
      }
      if (k + 1 >= ctrl.max_terms)
        throw series_error("hyp2f1: logarithmic series did not converge");
      p *= (__float128)(a + m + k) * (__float128)(b + m + k) /
           ((__float128)(k + 1) * (__float128)(k + m + 1)) * (__float128)w;
      bracket += -1.0 / (k + 1.0) - 1.0 / (k + m + 1.0) +
                 1.0 / (a + m + k) + 1.0 / (b + m + k);
    }
  }
  const double s2d = static_cast<double>(sigma2);
  // term2 = -(-1)^m Gamma(a+b+m)/(Gamma(a)Gamma(b)) w^m sigma2 / Gamma(m+1)
  // (the 1/m! was folded into p's k! (k+m)! start)
  const double lg_abm = std::lgamma(a + b + m);
  double l2 = -std::numeric_limits<double>::infinity();
  int sg2 = 1;
  if (s2d != 0.0) {
    l2 = lg_abm - std::lgamma(a) - std::lgamma(b) + m * log_w -
         std::lgamma(m + 1.0) + std::log(std::fabs(s2d));
    sg2 = ((m % 2 == 0) ? -1 : 1) * (s2d > 0 ? 1 : -1);
  }
  if (m == 0) return {l2, sg2};
  // finite sum
  double sigma1 = 0.0, q = 1.0;  // (a)_k (b)_k w^k / (k! (1-m)_k)
  for (int k = 0; k < m; ++k) {
    sigma1 += q;
    q *= (a + k) * (b + k) / ((k + 1.0) * (1.0 - m + k)) * w;
  }
  double l1 = -std::numeric_limits<double>::infinity();
  int sg1 = 1;
  if (sigma1 != 0.0) {
    l1 = std::lgamma(static_cast<double>(m)) + lg_abm - std::lgamma(a + m) -
         std::lgamma(b + m) + std::log(std::fabs(sigma1));
    sg1 = (sigma1 > 0) ? 1 : -1;
  }
  const double lm = std::max(l1, l2);
  if (!std::isfinite(lm)) return {-std::numeric_limits<double>::infinity(), 1};
  const long double combo = (long double)sg1 * std::exp(l1 - lm) +
                            (long double)sg2 * std::exp(l2 - lm);
  if (combo == 0.0L) return {-std::numeric_limits<double>::infinity(), 1};
  return {lm + std::log(static_cast<double>(std::fabs(combo))),
          combo > 0.0L ? 1 : -1};
}

}  // namespace detail

// Gauss hypergeometric function on z in [0,1], in sign-and-log form so
// that the mu-in-the-hundreds regime never leaves double range.
//
// Branch policy, driven by the kernel use case (a, b, c > 0):
//  - the direct series has positive terms for z >= 0, so it is free of
//    cancellation and is used whenever its term count is tolerable;
//  - the linear 1-z transformation is reserved for small w = 1-z
//    (a*b*w <= 40), where its two series decay immediately and the
//    cancellation between the connection terms stays mild. Outside that
//    window the transformed series pass through a growth phase of order
//    exp(2*sqrt(a*b*w)) that annihilates the result even in quad
//    precision.
// When c-a-b sits (numerically) on a nonnegative integer the generic
// transformation is degenerate (paired gamma poles); that case is routed
// to the exact logarithmic connection formula and flagged via
// `perturbed`.
inline detail::SignedLog hyp2f1_log(double a, double b, double c, double z,
                                    const SeriesControl& ctrl = {},
                                    bool* perturbed = nullptr) {
  if (!(c > 0.0)) throw std::domain_error("hyp2f1: requires c > 0");
  if (!(z >= 0.0 && z <= 1.0)) throw std::domain_error("hyp2f1: z in [0,1]");
  if (perturbed) *perturbed = false;
  if (z == 0.0) return {0.0, 1};
  const double s = c - a - b;
  if (z == 1.0) {
    // Gauss summation theorem
    if (!(s > 0.0)) throw std::domain_error("hyp2f1: needs c-a-b > 0 at z=1");
    return {std::lgamma(c) + std::lgamma(s) - std::lgamma(c - a) -
                std::lgamma(c - b),
            1};
  }
  if (z <= 0.5) return detail::hyp2f1_series_log(a, b, c, z, ctrl);

  const double w = 1.0 - z;
  // The connection formulas at 1-z cancel catastrophically once a*b*w
  // grows (loss ~ exp(2*sqrt(a*b*w))), so they are reserved for small w;
  // everywhere else the direct series (positive terms for positive
  // parameters) is used, with a term budget sized from the tail decay.
  if (!(a > 0.0 && b > 0.0) || a * b * w > 4.0) {
    const double est = std::sqrt(std::max(a * b, 0.0)) +
                       40.0 / std::max(w, 1e-12) + 500.0;
    if (est > 2e5)
      throw series_error(
          "hyp2f1: no numerically stable path (z too close to 1 for the "
          "series, parameters too large for the 1-z transformation)");
    SeriesControl ctrl2 = ctrl;
    ctrl2.max_terms = std::max(ctrl.max_terms, static_cast<int>(est));
    return detail::hyp2f1_series_log(a, b, c, z, ctrl2);
  }

  const double s_round = std::round(s);
  if (std::fabs(s - s_round) < 1e-8 && s_round >= 0.0) {
    // degenerate connection: exact logarithmic formula
    if (perturbed) *perturbed = true;
    return detail::hyp2f1_log_near_one_integer(
        a, b, static_cast<int>(s_round), w, ctrl);
  }

  // F = G1 * 2F1(a,b;1-s;w) + w^s * G2 * 2F1(c-a,c-b;1+s;w)
  const double s2 = s;
  const double cc = c;
  const auto g = [&](double x) { return detail::signed_log_gamma(x); };
  const auto t1g = g(s2), t2g = g(-s2);
  const auto lgc = g(cc);
  const auto t1a = g(cc - a), t1b = g(cc - b);
  const auto t2a = g(a), t2b = g(b);
  const auto f1 = detail::hyp2f1_series_log(a, b, 1.0 - s2, w, ctrl);
  const auto f2 = detail::hyp2f1_series_log(cc - a, cc - b, 1.0 + s2, w, ctrl);
  const double l1 =
      lgc.log_abs + t1g.log_abs - t1a.log_abs - t1b.log_abs + f1.log_abs;
  const int sg1 = lgc.sign * t1g.sign * t1a.sign * t1b.sign * f1.sign;
  const double l2 = lgc.log_abs + t2g.log_abs - t2a.log_abs - t2b.log_abs +
                    s2 * std::log(w) + f2.log_abs;
  const int sg2 = lgc.sign * t2g.sign * t2a.sign * t2b.sign * f2.sign;
  const double lm = std::max(l1, l2);
  const long double combo = (long double)sg1 * std::exp(l1 - lm) +
                            (long double)sg2 * std::exp(l2 - lm);
  if (combo == 0.0L) return {-std::numeric_limits<double>::infinity(), 1};
  const double mag = static_cast<double>(std::fabs(combo));
  return {lm + std::log(mag), combo > 0.0L ? 1 : -1};
}

inline double hyp2f1(double a, double b, double c, double z,
                     const SeriesControl& ctrl = {},
                     bool* perturbed = nullptr) {
  return hyp2f1_log(a, b, c, z, ctrl, perturbed).value();
}

// Precision cap for the alternating 1F2 series; beyond it even quad
// accumulation cannot deliver the promised digits.
inline constexpr double kHyp1f2ArgCap = 400.0;

// 1F2(a; b, c; x). The geostatistics use case has x <= 0 (alternating).
inline double hyp1f2(double a, double b, double c, double x,
                     const SeriesControl& ctrl = {}) {
  if (!(b > 0.0) || !(c > 0.0))
    throw std::domain_error("hyp1f2: requires b, c > 0");
  if (std::fabs(x) > kHyp1f2ArgCap)
    throw precision_loss_error("hyp1f2: |x| beyond precision cap");
  __float128 term = 1, sum = 1;
  int below = 0;
  for (int k = 0; k < ctrl.max_terms; ++k) {
    term *= (__float128)(a + k) /
            ((__float128)(b + k) * (__float128)(c + k) * (__float128)(k + 1)) *
            (__float128)x;
    sum += term;
    const double t = static_cast<double>(term >= 0 ? term : -term);
    const double s = static_cast<double>(sum >= 0 ? sum : -sum);
    if (t < ctrl.rel_tol * std::max(s, 1e-300) + ctrl.abs_tol) {
      if (++below >= 2) return static_cast<double>(sum);
    } else {
      below = 0;
    }
  }
  throw series_error("hyp1f2: series did not converge");
}

}  // namespace gwmat
