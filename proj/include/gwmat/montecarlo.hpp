#pragma once

// Gaussian random-field simulation via Cholesky and the replication
// harness producing standardized-estimate and microergodic-statistic
// summaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "gwmat/covmat.hpp"
#include "gwmat/inference.hpp"
#include "gwmat/rng.hpp"

namespace gwmat {

// z = L eps with LL^T = Sigma(perm, perm), mapped back through the
// permutation; bit-exact for a fixed seed.
inline std::vector<double> simulate_grf(const PointSet& ps,
                                        const CorrelationModel& model,
                                        std::uint64_t seed) {
  const auto f = cholesky(assemble(ps, model));
  Rng rng(seed);
  const auto eps = rng.normals(ps.size());
  const int n = f.n;
  std::vector<double> y(n, 0.0);
  if (!f.sparse) {
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = 0; k <= i; ++k) s += f.dense_l[std::size_t(i) * n + k] * eps[k];
      y[i] = s;
    }
  } else {
    for (int j = 0; j < n; ++j)
      for (int p = f.col_ptr[j]; p < f.col_ptr[j + 1]; ++p)
        y[f.row_ind[p]] += f.values[p] * eps[j];
  }
  std::vector<double> z(n);
  for (int i = 0; i < n; ++i) z[f.perm[i]] = y[i];
  return z;
}

// uniform points in [0, extent]^2 from the replicate's substream
inline PointSet uniform_points(std::size_t n, double extent, Rng& rng) {
  std::vector<double> c(2 * n);
  for (auto& x : c) x = extent * rng.uniform();
  return build_pointset(std::move(c), 2);
}

struct SimConfig {
  std::size_t n = 500;
  int replicates = 200;
  std::uint64_t seed = 1;
  double extent = 1.0;  // square domain side
  // model: phi family with fixed nu and mu; beta either explicit or
  // derived from the compact-support target
  double nu = 0.0;
  double mu = 4.5;
  double target_delta = 0.6;
  double beta = 0.0;  // > 0 overrides target_delta
  double sigma2 = 1.0;
  double tau2 = 0.0;
  int dim = 2;
  // fit setup
  bool fit_mu = false;
  bool fit_tau2 = false;
  double init_perturbation = 0.1;  // relative offset of the start point
  int max_iterations = 5000;
  unsigned threads = 0;

  void validate() const {
    if (n < 2) throw std::domain_error("SimConfig: n >= 2");
    if (replicates < 1) throw std::domain_error("SimConfig: replicates >= 1");
    if (!(beta > 0.0) && !(target_delta > 0.0))
      throw std::domain_error("SimConfig: need beta or target_delta");
  }
  double resolved_beta() const {
    return beta > 0.0 ? beta : beta_for_support(nu, mu, target_delta);
  }
  ModelSpec spec() const { return {false, nu, dim}; }
  ParamVector truth() const {
    ParamVector t;
    t.sigma2 = sigma2;
    t.beta = resolved_beta();
    t.mu_star = 1.0 / mu;
    t.tau2 = tau2;
    t.fit_sigma2 = true;
    t.fit_beta = true;
    t.fit_mu = fit_mu;
    t.fit_tau2 = fit_tau2;
    return t;
  }
};

struct MCRecord {
  int replicate = 0;
  bool ok = false;
  ParamVector theta_hat;
  std::vector<double> standardized;  // (theta_hat_i - theta_i) / sqrt(f_ii)
  double c_ratio = 0.0;              // c(theta_hat) / c(theta)
  double m_stat = 0.0;               // sqrt(n/2) (c_ratio - 1)
};

struct FiveNumber {
  double min, q1, median, q3, max;
  double iqr() const { return q3 - q1; }
};

inline double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * (v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - lo) * (v[hi] - v[lo]);
}

inline FiveNumber five_number(const std::vector<double>& v) {
  return {quantile(v, 0.0), quantile(v, 0.25), quantile(v, 0.5),
          quantile(v, 0.75), quantile(v, 1.0)};
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_variance: need n >= 2");
  double mean = 0.0;
  for (double x : v) mean += x / v.size();
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (v.size() - 1);
}

struct MCReport {
  SimConfig config;
  std::vector<MCRecord> records;  // one per replicate, in replicate order
  int failures = 0;

  std::vector<double> standardized_column(std::size_t j) const {
    std::vector<double> out;
    for (const auto& r : records)
      if (r.ok && j < r.standardized.size()) out.push_back(r.standardized[j]);
    return out;
  }
  std::vector<double> m_stats() const {
    std::vector<double> out;
    for (const auto& r : records)
      if (r.ok) out.push_back(r.m_stat);
    return out;
  }
  // sample variance of sqrt(n) (c_hat/c - 1); asymptotic target is 2
  double microergodic_variance() const {
    std::vector<double> v;
    for (const auto& r : records)
      if (r.ok) v.push_back(std::sqrt(double(config.n)) * (r.c_ratio - 1.0));
    return sample_variance(v);
  }
};

inline MCReport run_study(const SimConfig& cfg) {
  cfg.validate();
  const ModelSpec spec = cfg.spec();
  const ParamVector truth = cfg.truth();
  truth.validate(spec);
  const double c_true = microergodic(spec, truth);
  const auto free_list = detail::free_params(spec, truth);

  MCReport rep;
  rep.config = cfg;
  rep.records.resize(cfg.replicates);
  const Rng root(cfg.seed);

  const auto one = [&](int r) {
    MCRecord rec;
    rec.replicate = r;
    Rng stream = root.split(static_cast<std::uint64_t>(r));
    try {
      const PointSet ps = uniform_points(cfg.n, cfg.extent, stream);
      const auto z =
          simulate_grf(ps, make_model(spec, truth), stream.next_u64());
      ParamVector init = truth;
      const double p = cfg.init_perturbation;
      init.sigma2 *= 1.0 + p;
      init.beta *= 1.0 - p;
      if (cfg.fit_mu)
        init.mu_star = std::min(init.mu_star * (1.0 + p),
                                spec.mu_star_upper() * (1.0 - 1e-9));
      if (cfg.fit_tau2) init.tau2 = std::min(init.tau2 + p * 0.1, 0.99);
      NelderMeadOptions opt;
      opt.max_iterations = cfg.max_iterations;
      const auto fit = fit_ml(spec, ps, z, init, opt);
      rec.theta_hat = fit.theta_hat;
      rec.standardized.resize(free_list.size());
      for (std::size_t i = 0; i < free_list.size(); ++i) {
        const double diff = detail::get_param(fit.theta_hat, free_list[i]) -
                            detail::get_param(truth, free_list[i]);
        rec.standardized[i] = diff / fit.std_errors[i];
      }
      rec.c_ratio = microergodic(spec, fit.theta_hat) / c_true;
      rec.m_stat = std::sqrt(0.5 * double(cfg.n)) * (rec.c_ratio - 1.0);
      rec.ok = true;
    } catch (const std::exception&) {
      rec.ok = false;
    }
    rep.records[r] = rec;
  };

  unsigned threads = cfg.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || cfg.replicates == 1) {
    for (int r = 0; r < cfg.replicates; ++r) one(r);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t]() {
        for (int r = static_cast<int>(t); r < cfg.replicates;
             r += static_cast<int>(threads))
          one(r);
      });
    for (auto& th : pool) th.join();
  }
  for (const auto& r : rep.records)
    if (!r.ok) ++rep.failures;
  if (10 * rep.failures > cfg.replicates)
    throw std::runtime_error("run_study: more than 10% of fits failed (" +
                             std::to_string(rep.failures) + "/" +
                             std::to_string(cfg.replicates) + ")");
  return rep;
}

}  // namespace gwmat
