#pragma once

// Simple (zero-mean) kriging with prediction variance, Gaussian hold-out
// scoring (RMSE, log score, CRPS), one-pass leave-one-out
// cross-validation, and repeated random hold-out score aggregation.
//
// Nugget convention: the nugget is measurement noise. Cross-covariances
// use (1 - tau2) sigma2 rho(r); the prediction variance of a new
// observation carries the full marginal sigma2. A target that exactly
// coincides with a training site returns the training value with
// variance tau2 sigma2.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gwmat/covmat.hpp"
#include "gwmat/kernels.hpp"
#include "gwmat/rng.hpp"

namespace gwmat {

struct KrigingResult {
  std::vector<double> prediction;  // Y_hat at each target
  std::vector<double> sd;          // prediction standard deviation
};

struct PredictionScores {
  double rmse = 0.0;
  double logscore = 0.0;  // mean Gaussian negative log predictive density
  double crps = 0.0;
};

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// CRPS of a N(mean, sd^2) predictive at outcome y, closed form:
//   sd [ z (2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi) ],  z = (y - mean)/sd.
inline double crps_gaussian(double mean, double sd, double y) {
  if (!(sd > 0.0)) throw std::domain_error("crps_gaussian: sd > 0");
  const double z = (y - mean) / sd;
  return sd * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) -
               1.0 / std::sqrt(M_PI));
}

// Gaussian negative log predictive density (the log score):
//   1/2 log(2 pi sd^2) + 1/2 z^2.
inline double logscore_gaussian(double mean, double sd, double y) {
  if (!(sd > 0.0))
    throw std::domain_error("logscore_gaussian: undefined for sd = 0");
  const double z = (y - mean) / sd;
  return 0.5 * std::log(2.0 * M_PI * sd * sd) + 0.5 * z * z;
}

inline KrigingResult krige(const PointSet& train, const std::vector<double>& z,
                           const CorrelationModel& model,
                           const PointSet& targets) {
  if (z.size() != train.size())
    throw std::invalid_argument("krige: |z| must equal |train|");
  if (targets.dim != train.dim)
    throw std::invalid_argument("krige: dimension mismatch");
  model.validate();
  const std::size_t n = train.size();
  const auto fact = cholesky(assemble(train, model));
  const auto w = solve(fact, z);  // Sigma^{-1} z, one factorization

  const double smooth_scale = model.sigma2 * (1.0 - model.tau2);
  const double support = model.support_radius();
  KrigingResult out;
  out.prediction.resize(targets.size());
  out.sd.resize(targets.size());
  std::vector<double> c(n);
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double* s = targets.point(t);
    long coincident = -1;
    for (std::size_t i = 0; i < n; ++i) {
      const double* q = train.point(i);
      double d2 = 0.0;
      bool same = true;
      for (int k = 0; k < train.dim; ++k) {
        const double diff = s[k] - q[k];
        d2 += diff * diff;
        same = same && (diff == 0.0);
      }
      if (same) coincident = static_cast<long>(i);
      const double r = std::sqrt(d2);
      c[i] = (r < support) ? smooth_scale * correlation(model, r) : 0.0;
    }
    if (coincident >= 0) {
      out.prediction[t] = z[coincident];
      out.sd[t] = std::sqrt(model.tau2 * model.sigma2);
      continue;
    }
    double yhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) yhat += c[i] * w[i];
    const auto v = solve(fact, c);
    double reduction = 0.0;
    for (std::size_t i = 0; i < n; ++i) reduction += c[i] * v[i];
    out.prediction[t] = yhat;
    out.sd[t] = std::sqrt(std::max(model.sigma2 - reduction, 0.0));
  }
  return out;
}

inline PredictionScores score_holdout(const KrigingResult& result,
                                      const std::vector<double>& truth) {
  const std::size_t k = truth.size();
  if (result.prediction.size() != k)
    throw std::invalid_argument("score_holdout: length mismatch");
  if (k == 0) throw std::invalid_argument("score_holdout: empty hold-out");
  PredictionScores s;
  double sq = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = result.prediction[i] - truth[i];
    sq += e * e;
    s.logscore +=
        logscore_gaussian(result.prediction[i], result.sd[i], truth[i]) / k;
    s.crps += crps_gaussian(result.prediction[i], result.sd[i], truth[i]) / k;
  }
  s.rmse = std::sqrt(sq / k);
  return s;
}

// One-pass leave-one-out cross-validation from a single factorization:
//   e_i = (Sigma^{-1} z)_i / (Sigma^{-1})_{ii},  var_i = 1 / (Sigma^{-1})_{ii}.
inline PredictionScores loo_cv(const PointSet& ps, const std::vector<double>& z,
                               const CorrelationModel& model,
                               KrigingResult* detail_out = nullptr) {
  if (z.size() != ps.size())
    throw std::invalid_argument("loo_cv: |z| must equal |points|");
  const std::size_t n = ps.size();
  if (n < 2) throw std::invalid_argument("loo_cv: need n >= 2");
  const auto fact = cholesky(assemble(ps, model));
  const auto w = solve(fact, z);
  std::vector<double> unit(n, 0.0);
  KrigingResult loo;
  loo.prediction.resize(n);
  loo.sd.resize(n);
  PredictionScores s;
  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    unit[i] = 1.0;
    const double dinv = solve(fact, unit)[i];  // (Sigma^{-1})_{ii}
    unit[i] = 0.0;
    const double e = w[i] / dinv;
    const double var = 1.0 / dinv;
    loo.prediction[i] = z[i] - e;
    loo.sd[i] = std::sqrt(var);
    sq += e * e;
    s.logscore += logscore_gaussian(loo.prediction[i], loo.sd[i], z[i]) / n;
    s.crps += crps_gaussian(loo.prediction[i], loo.sd[i], z[i]) / n;
  }
  s.rmse = std::sqrt(sq / n);
  if (detail_out) *detail_out = std::move(loo);
  return s;
}

// Repeated random hold-out scoring: each repeat krige-predicts a held
// fraction from the rest; scores are averaged across repeats.
inline PredictionScores resample_scores(const PointSet& ps,
                                        const std::vector<double>& z,
                                        const CorrelationModel& model,
                                        double holdout_fraction, int repeats,
                                        std::uint64_t seed) {
  if (!(holdout_fraction > 0.0 && holdout_fraction < 1.0))
    throw std::invalid_argument("resample_scores: fraction in (0, 1)");
  if (repeats < 1) throw std::invalid_argument("resample_scores: repeats >= 1");
  const std::size_t n = ps.size();
  const std::size_t k =
      std::max<std::size_t>(1, static_cast<std::size_t>(holdout_fraction * n));
  if (k >= n) throw std::invalid_argument("resample_scores: hold-out too large");
  const Rng root(seed);
  PredictionScores acc;
  std::vector<std::size_t> idx(n);
  for (int rep = 0; rep < repeats; ++rep) {
    Rng rng = root.split(static_cast<std::uint64_t>(rep));
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {  // Fisher-Yates
      const std::size_t j = rng.next_u64() % (i + 1);
      std::swap(idx[i], idx[j]);
    }
    std::vector<double> tc, hc, tz, hz;
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = ps.point(idx[i]);
      auto& coords = (i < k) ? hc : tc;
      auto& vals = (i < k) ? hz : tz;
      coords.insert(coords.end(), p, p + ps.dim);
      vals.push_back(z[idx[i]]);
    }
    const PointSet train = build_pointset(std::move(tc), ps.dim);
    const PointSet hold = build_pointset(std::move(hc), ps.dim);
    const auto pred = krige(train, tz, model, hold);
    const auto sc = score_holdout(pred, hz);
    acc.rmse += sc.rmse / repeats;
    acc.logscore += sc.logscore / repeats;
    acc.crps += sc.crps / repeats;
  }
  return acc;
}

}  // namespace gwmat
