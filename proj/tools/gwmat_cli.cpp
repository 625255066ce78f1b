// gwmat command-line interface: kernel evaluation, convergence tables,
// ML fitting, simulation, Monte Carlo studies, prediction, and
// cross-validation over CSV data.
//
// Exit codes: 0 success, 2 invalid input, 3 numerical failure,
// 4 convergence-table monotonicity failure.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gwmat/csv.hpp"
#include "gwmat/inference.hpp"
#include "gwmat/kernels.hpp"
#include "gwmat/montecarlo.hpp"
#include "gwmat/predict.hpp"
#include "gwmat/spectral.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitCheckFailed = 4;

using KvList = std::vector<std::pair<std::string, std::string>>;

void write_repro_header(std::ostream& os, const KvList& kv) {
  os << "# gwmat " << kVersion << '\n';
  for (const auto& [k, v] : kv) os << "# " << k << '=' << v << '\n';
}

// ---------------------------------------------------------------------
// shared model flags

struct ModelFlags {
  std::string family = "phi";
  double nu = 1.0;
  double mu = 0.0;
  double beta = 0.0;
  double support = 0.0;
  double sigma2 = 1.0;
  double tau2 = 0.0;
  int dim = 2;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool need_family = true) {
  if (need_family)
    cmd->add_option("--family", f.family, "matern | gw | phi")
        ->check(CLI::IsMember({"matern", "gw", "phi"}));
  cmd->add_option("--nu", f.nu, "smoothness parameter");
  cmd->add_option("--mu", f.mu, "shape parameter (gw/phi)");
  cmd->add_option("--beta", f.beta, "scale parameter (matern/phi)");
  cmd->add_option("--support", f.support, "compact support (gw)");
  cmd->add_option("--sigma2", f.sigma2, "variance");
  cmd->add_option("--tau2", f.tau2, "nugget fraction in [0,1)");
  cmd->add_option("--dim", f.dim, "ambient dimension 1..3");
}

gwmat::CorrelationModel build_model(const ModelFlags& f) {
  gwmat::CorrelationModel m;
  m.sigma2 = f.sigma2;
  m.tau2 = f.tau2;
  if (f.family == "matern") {
    if (!(f.beta > 0.0)) throw std::domain_error("matern requires --beta > 0");
    m.family = gwmat::MaternParams{f.nu, f.beta};
  } else if (f.family == "gw") {
    if (!(f.support > 0.0)) throw std::domain_error("gw requires --support > 0");
    m.family = gwmat::GenWendlandParams{f.nu, f.mu, f.support, f.dim};
  } else {
    if (!(f.beta > 0.0)) throw std::domain_error("phi requires --beta > 0");
    m.family = gwmat::PhiParams{f.nu, f.mu, f.beta, f.dim};
  }
  m.validate();
  return m;
}

KvList model_kv(const ModelFlags& f) {
  KvList kv{{"family", f.family},
            {"nu", gwmat::csv_num(f.nu)},
            {"sigma2", gwmat::csv_num(f.sigma2)},
            {"tau2", gwmat::csv_num(f.tau2)},
            {"dim", std::to_string(f.dim)}};
  if (f.family != "matern") kv.push_back({"mu", gwmat::csv_num(f.mu)});
  if (f.family != "gw") kv.push_back({"beta", gwmat::csv_num(f.beta)});
  if (f.family == "gw") kv.push_back({"support", gwmat::csv_num(f.support)});
  return kv;
}

ModelFlags flags_from_kv(const std::map<std::string, std::string>& kv) {
  ModelFlags f;
  const auto get = [&](const char* k, double dflt, bool required = false) {
    const auto it = kv.find(k);
    if (it == kv.end()) {
      if (required) throw std::domain_error(std::string("parameter file: missing ") + k);
      return dflt;
    }
    return std::stod(it->second);
  };
  const auto fam = kv.find("family");
  if (fam == kv.end()) throw std::domain_error("parameter file: missing family");
  f.family = fam->second;
  f.nu = get("nu", 1.0, true);
  f.mu = get("mu", 0.0, f.family != "matern");
  f.beta = get("beta", 0.0, f.family != "gw");
  f.support = get("support", 0.0, f.family == "gw");
  f.sigma2 = get("sigma2", 1.0);
  f.tau2 = get("tau2", 0.0);
  f.dim = static_cast<int>(get("dim", 2.0));
  return f;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  if (out.empty()) throw std::domain_error("empty numeric list");
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::domain_error("cannot write " + path);
  return out;
}

// ---------------------------------------------------------------------
// subcommands

struct EvalArgs {
  ModelFlags model;
  double r_max = 0.0;
  int steps = 101;
  std::string out;
};

int cmd_eval(const EvalArgs& a) {
  const auto model = build_model(a.model);
  const double support = model.support_radius();
  double r_max = a.r_max;
  if (!(r_max > 0.0))
    r_max = std::isinf(support)
                ? 3.0 * gwmat::practical_range(model)
                : 1.25 * support;
  if (a.steps < 2) throw std::domain_error("--steps must be at least 2");

  KvList kv = model_kv(a.model);
  if (!std::isinf(support)) kv.push_back({"delta", gwmat::csv_num(support)});
  kv.push_back({"practical_range",
                gwmat::csv_num(gwmat::practical_range(model))});

  write_repro_header(std::cout, kv);
  std::cout << "         r          rho\n";
  std::vector<std::pair<double, double>> table(a.steps);
  for (int i = 0; i < a.steps; ++i) {
    const double r = r_max * i / (a.steps - 1);
    table[i] = {r, gwmat::correlation(model, r)};
    std::cout << gwmat::txt_num(r, 10) << ' ' << gwmat::txt_num(table[i].second)
              << '\n';
  }
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_repro_header(out, kv);
    out << "r,rho\n";
    for (const auto& [r, rho] : table)
      out << gwmat::csv_num(r) << ',' << gwmat::csv_num(rho) << '\n';
  }
  return kExitOk;
}

struct ConvergeArgs {
  std::string nu_list = "0,0.5,1,1.5,2,2.5";
  std::string mu_list = "5,10,20,40,80,160,320,640";
  double beta = 1.0;
  unsigned threads = 0;
  std::string out;
};

int cmd_converge(const ConvergeArgs& a) {
  const auto nus = parse_list(a.nu_list);
  const auto mus = parse_list(a.mu_list);
  if (!(a.beta > 0.0)) throw std::domain_error("--beta must be positive");

  // per-row grid: lambda(2, nu) first, then the shared mu list
  std::vector<std::vector<gwmat::ConvergenceCell>> rows;
  for (double nu : nus) {
    std::vector<double> row_mus{gwmat::lambda_pd(2, nu)};
    for (double mu : mus) {
      if (mu < gwmat::lambda_pd(2, nu))
        throw std::domain_error("mu below lambda(2, nu) for nu=" +
                                std::to_string(nu));
      row_mus.push_back(mu);
    }
    rows.push_back(
        gwmat::convergence_table({nu}, row_mus, a.beta, a.threads).cells);
  }

  KvList kv{{"beta", gwmat::csv_num(a.beta)},
            {"nu_list", a.nu_list},
            {"mu_list", std::string("lambda,") + a.mu_list}};
  write_repro_header(std::cout, kv);
  std::cout << "   nu \\ mu       lambda";
  for (double mu : mus) std::cout << ' ' << gwmat::txt_num(mu);
  std::cout << '\n';
  for (std::size_t i = 0; i < nus.size(); ++i) {
    std::cout << gwmat::txt_num(nus[i], 10) << "  ";
    for (const auto& cell : rows[i])
      std::cout << ' ' << gwmat::txt_num(cell.max_abs_error);
    std::cout << '\n';
  }
  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_repro_header(out, kv);
    out << "nu,mu,max_abs_error,argmax_r\n";
    for (const auto& row : rows)
      for (const auto& c : row)
        out << gwmat::csv_num(c.nu) << ',' << gwmat::csv_num(c.mu) << ','
            << gwmat::csv_num(c.max_abs_error) << ','
            << gwmat::csv_num(c.argmax_r) << '\n';
  }
  for (std::size_t i = 0; i < nus.size(); ++i)
    for (std::size_t j = 0; j + 1 < rows[i].size(); ++j)
      if (!(rows[i][j + 1].max_abs_error < rows[i][j].max_abs_error)) {
        std::cerr << "monotonicity violation at nu=" << nus[i]
                  << " between mu=" << rows[i][j].mu << " and mu="
                  << rows[i][j + 1].mu << '\n';
        return kExitCheckFailed;
      }
  return kExitOk;
}

struct FitArgs {
  std::string data;
  std::string family = "phi";
  double nu = 1.0;
  double mu = 0.0;
  bool fit_mu = false;
  double tau2 = 0.0;
  bool fit_tau2 = false;
  double init_sigma2 = 0.0;
  double init_beta = 0.0;
  std::string out;
};

int cmd_fit(const FitArgs& a) {
  const auto data = gwmat::read_points_csv(a.data);
  if (!data.has_values)
    throw std::domain_error(a.data + ": fit requires a value column");
  const bool matern = a.family == "matern";
  if (a.family == "gw")
    throw std::domain_error("fit supports --family phi or matern");
  const gwmat::ModelSpec spec{matern, a.nu, data.points.dim};

  gwmat::ParamVector mask;
  mask.fit_sigma2 = true;
  mask.fit_beta = true;
  mask.fit_mu = a.fit_mu && !matern;
  mask.fit_tau2 = a.fit_tau2;
  mask.tau2 = a.tau2;
  if (!matern) {
    if (!a.fit_mu && !(a.mu > 0.0))
      throw std::domain_error("phi fit requires --mu or --fit-mu");
    if (a.mu > 0.0) mask.mu_star = 1.0 / a.mu;
  }
  gwmat::ParamVector init =
      gwmat::default_init(spec, data.points, data.values, mask);
  if (a.init_sigma2 > 0.0) init.sigma2 = a.init_sigma2;
  if (a.init_beta > 0.0) init.beta = a.init_beta;

  const auto fit = gwmat::fit_ml(spec, data.points, data.values, init);
  const auto& t = fit.theta_hat;

  std::vector<std::string> names{"sigma2", "beta"};
  std::vector<double> values{t.sigma2, t.beta};
  if (mask.fit_mu) {
    names.push_back("mu_star");
    values.push_back(t.mu_star);
  }
  if (mask.fit_tau2) {
    names.push_back("tau2");
    values.push_back(t.tau2);
  }

  KvList kv{{"data", a.data},
            {"family", a.family},
            {"nu", gwmat::csv_num(a.nu)},
            {"n", std::to_string(data.points.size())}};
  write_repro_header(std::cout, kv);
  std::cout << "parameter      estimate    std_error\n";
  for (std::size_t i = 0; i < names.size(); ++i)
    std::cout << names[i] << std::string(10 - names[i].size(), ' ')
              << gwmat::txt_num(values[i]) << ' '
              << gwmat::txt_num(fit.std_errors[i]) << '\n';
  if (!matern && !mask.fit_mu)
    std::cout << "mu (fixed) " << gwmat::txt_num(a.mu) << '\n';
  std::cout << "loglik     " << gwmat::txt_num(fit.loglik_max) << '\n';
  std::cout << "aic        " << gwmat::txt_num(fit.aic) << '\n';
  if (!matern) {
    std::cout << "microergodic " << gwmat::txt_num(fit.microergodic_hat) << '\n';
    if (fit.boundary_mu_upper)
      std::cout << "note: mu_star at the upper (pd-threshold) boundary\n";
    if (fit.boundary_mu_lower)
      std::cout << "note: mu_star at the lower (Matern-limit) boundary\n";
  }

  if (!a.out.empty()) {
    KvList pf{{"family", a.family},
              {"nu", gwmat::csv_num(a.nu)},
              {"beta", gwmat::csv_num(t.beta)},
              {"sigma2", gwmat::csv_num(t.sigma2)},
              {"tau2", gwmat::csv_num(t.tau2)},
              {"dim", std::to_string(data.points.dim)},
              {"loglik", gwmat::csv_num(fit.loglik_max)},
              {"aic", gwmat::csv_num(fit.aic)}};
    if (!matern) {
      pf.push_back({"mu", gwmat::csv_num(1.0 / t.mu_star)});
      pf.push_back({"microergodic", gwmat::csv_num(fit.microergodic_hat)});
    }
    for (std::size_t i = 0; i < names.size(); ++i)
      pf.push_back({"se_" + names[i], gwmat::csv_num(fit.std_errors[i])});
    gwmat::write_kv(a.out, pf);
  }
  return kExitOk;
}

struct SimulateArgs {
  ModelFlags model;
  std::size_t n = 500;
  double extent = 1.0;
  std::uint64_t seed = 1;
  std::string locations;  // optional CSV of sites
  std::string out;
};

int cmd_simulate(const SimulateArgs& a) {
  const auto model = build_model(a.model);
  gwmat::Rng rng(a.seed);
  gwmat::PointSet ps =
      a.locations.empty()
          ? gwmat::uniform_points(a.n, a.extent, rng)
          : gwmat::read_points_csv(a.locations).points;
  const auto z = gwmat::simulate_grf(ps, model, rng.next_u64());

  KvList kv = model_kv(a.model);
  kv.push_back({"seed", std::to_string(a.seed)});
  kv.push_back({"n", std::to_string(ps.size())});
  auto out = open_out(a.out);
  write_repro_header(out, kv);
  out << (ps.dim == 3 ? "x,y,z,value\n" : "x,y,value\n");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double* p = ps.point(i);
    for (int k = 0; k < ps.dim; ++k) out << gwmat::csv_num(p[k]) << ',';
    out << gwmat::csv_num(z[i]) << '\n';
  }
  std::cout << "wrote " << ps.size() << " simulated values to " << a.out
            << '\n';
  return kExitOk;
}

struct StudyArgs {
  gwmat::SimConfig cfg;
  std::string out;
};

int cmd_study(const StudyArgs& a) {
  const auto rep = gwmat::run_study(a.cfg);
  const gwmat::ModelSpec spec = a.cfg.spec();
  const auto free_list = gwmat::detail::free_params(spec, a.cfg.truth());
  const auto pname = [](gwmat::detail::FreeParam p) {
    switch (p) {
      case gwmat::detail::FreeParam::sigma2: return "sigma2";
      case gwmat::detail::FreeParam::beta: return "beta";
      case gwmat::detail::FreeParam::mu_star: return "mu_star";
      default: return "tau2";
    }
  };

  KvList kv{{"n", std::to_string(a.cfg.n)},
            {"replicates", std::to_string(a.cfg.replicates)},
            {"seed", std::to_string(a.cfg.seed)},
            {"nu", gwmat::csv_num(a.cfg.nu)},
            {"mu", gwmat::csv_num(a.cfg.mu)},
            {"beta", gwmat::csv_num(a.cfg.resolved_beta())},
            {"sigma2", gwmat::csv_num(a.cfg.sigma2)},
            {"tau2", gwmat::csv_num(a.cfg.tau2)}};

  if (!a.out.empty()) {
    auto out = open_out(a.out);
    write_repro_header(out, kv);
    out << "replicate,parameter,standardized,m_stat,status\n";
    for (const auto& r : rep.records) {
      if (!r.ok) {
        out << r.replicate << ",,,," << "failed\n";
        continue;
      }
      for (std::size_t i = 0; i < free_list.size(); ++i)
        out << r.replicate << ',' << pname(free_list[i]) << ','
            << gwmat::csv_num(r.standardized[i]) << ','
            << gwmat::csv_num(r.m_stat) << ",ok\n";
    }
  }

  write_repro_header(std::cout, kv);
  std::cout << "failures " << rep.failures << "/" << a.cfg.replicates << '\n';
  std::cout << "statistic        min          q1      median          q3"
               "         max         iqr\n";
  for (std::size_t i = 0; i < free_list.size(); ++i) {
    const auto f = gwmat::five_number(rep.standardized_column(i));
    std::cout << pname(free_list[i])
              << std::string(9 - std::string(pname(free_list[i])).size(), ' ')
              << gwmat::txt_num(f.min) << ' ' << gwmat::txt_num(f.q1) << ' '
              << gwmat::txt_num(f.median) << ' ' << gwmat::txt_num(f.q3) << ' '
              << gwmat::txt_num(f.max) << ' ' << gwmat::txt_num(f.iqr())
              << '\n';
  }
  const auto fm = gwmat::five_number(rep.m_stats());
  std::cout << "m_stat   " << gwmat::txt_num(fm.min) << ' '
            << gwmat::txt_num(fm.q1) << ' ' << gwmat::txt_num(fm.median) << ' '
            << gwmat::txt_num(fm.q3) << ' ' << gwmat::txt_num(fm.max) << ' '
            << gwmat::txt_num(fm.iqr()) << '\n';
  std::cout << "microergodic variance of sqrt(n)(c_hat/c - 1): "
            << gwmat::txt_num(rep.microergodic_variance()) << '\n';
  return kExitOk;
}

struct PredictArgs {
  std::string train, targets, params, out;
};

int cmd_predict(const PredictArgs& a) {
  const auto train = gwmat::read_points_csv(a.train);
  if (!train.has_values)
    throw std::domain_error(a.train + ": training data needs a value column");
  const auto targets = gwmat::read_points_csv(a.targets);
  const ModelFlags mf = flags_from_kv(gwmat::read_kv(a.params));
  const auto model = build_model(mf);

  const auto res =
      gwmat::krige(train.points, train.values, model, targets.points);

  KvList kv = model_kv(mf);
  kv.push_back({"train", a.train});
  kv.push_back({"targets", a.targets});
  auto out = open_out(a.out);
  write_repro_header(out, kv);
  out << (targets.points.dim == 3 ? "x,y,z,yhat,sd\n" : "x,y,yhat,sd\n");
  for (std::size_t i = 0; i < targets.points.size(); ++i) {
    const double* p = targets.points.point(i);
    for (int k = 0; k < targets.points.dim; ++k)
      out << gwmat::csv_num(p[k]) << ',';
    out << gwmat::csv_num(res.prediction[i]) << ','
        << gwmat::csv_num(res.sd[i]) << '\n';
  }
  std::cout << "wrote " << targets.points.size() << " predictions to " << a.out
            << '\n';
  return kExitOk;
}

struct CvArgs {
  std::string data, params, out;
  ModelFlags model;
  bool model_from_flags = false;
  double holdout = 0.0;  // 0 = leave-one-out
  int repeats = 100;
  std::uint64_t seed = 1;
};

int cmd_cv(const CvArgs& a) {
  const auto data = gwmat::read_points_csv(a.data);
  if (!data.has_values)
    throw std::domain_error(a.data + ": cv requires a value column");
  const ModelFlags mf = a.params.empty()
                            ? a.model
                            : flags_from_kv(gwmat::read_kv(a.params));
  const auto model = build_model(mf);

  const auto matrix = gwmat::assemble(data.points, model);
  const auto stats = gwmat::sparsity_stats(matrix);

  gwmat::PredictionScores scores;
  std::string method;
  if (a.holdout > 0.0) {
    scores = gwmat::resample_scores(data.points, data.values, model, a.holdout,
                                    a.repeats, a.seed);
    method = "holdout";
  } else {
    scores = gwmat::loo_cv(data.points, data.values, model);
    method = "loo";
  }

  KvList kv = model_kv(mf);
  kv.push_back({"data", a.data});
  kv.push_back({"method", method});
  if (a.holdout > 0.0) {
    kv.push_back({"holdout", gwmat::csv_num(a.holdout)});
    kv.push_back({"repeats", std::to_string(a.repeats)});
    kv.push_back({"seed", std::to_string(a.seed)});
  }
  write_repro_header(std::cout, kv);
  std::cout << "storage " << (matrix.sparse ? "sparse" : "dense")
            << ", percent_zero " << gwmat::txt_num(stats.percent_zero, 8)
            << '\n';
  std::cout << "rmse     " << gwmat::txt_num(scores.rmse) << '\n';
  std::cout << "logscore " << gwmat::txt_num(scores.logscore) << '\n';
  std::cout << "crps     " << gwmat::txt_num(scores.crps) << '\n';
  if (!a.out.empty()) {
    KvList res = kv;
    res.push_back({"percent_zero", gwmat::csv_num(stats.percent_zero)});
    res.push_back({"rmse", gwmat::csv_num(scores.rmse)});
    res.push_back({"logscore", gwmat::csv_num(scores.logscore)});
    res.push_back({"crps", gwmat::csv_num(scores.crps)});
    gwmat::write_kv(a.out, res);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"generalized Wendland / Matern geostatistics toolkit"};
  app.require_subcommand(1);

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "evaluate a correlation function");
  add_model_flags(eval, eval_args.model);
  eval->add_option("--r-max", eval_args.r_max, "largest lag (default: auto)");
  eval->add_option("--steps", eval_args.steps, "grid size");
  eval->add_option("--out", eval_args.out, "CSV output path");

  ConvergeArgs conv_args;
  auto* conv = app.add_subcommand(
      "converge-table", "sup-norm gap between phi and its Matern limit");
  conv->add_option("--nu-list", conv_args.nu_list, "comma-separated nu values");
  conv->add_option("--mu-list", conv_args.mu_list, "comma-separated mu values");
  conv->add_option("--beta", conv_args.beta, "scale (gap is scale-invariant)");
  conv->add_option("--threads", conv_args.threads, "worker threads (0 = all)");
  conv->add_option("--out", conv_args.out, "CSV output path");

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "maximum-likelihood fit");
  fit->add_option("--data", fit_args.data, "CSV with x,y[,z],value")->required();
  fit->add_option("--family", fit_args.family, "phi | matern")
      ->check(CLI::IsMember({"phi", "matern"}));
  fit->add_option("--nu", fit_args.nu, "fixed smoothness")->required();
  fit->add_option("--mu", fit_args.mu, "fixed mu (phi)");
  fit->add_flag("--fit-mu", fit_args.fit_mu, "estimate mu via mu* = 1/mu");
  fit->add_option("--tau2", fit_args.tau2, "fixed nugget fraction");
  fit->add_flag("--fit-tau2", fit_args.fit_tau2, "estimate the nugget");
  fit->add_option("--init-sigma2", fit_args.init_sigma2, "starting variance");
  fit->add_option("--init-beta", fit_args.init_beta, "starting scale");
  fit->add_option("--out", fit_args.out, "parameter file output path");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "simulate a Gaussian field");
  add_model_flags(sim, sim_args.model);
  sim->add_option("--n", sim_args.n, "number of uniform sites");
  sim->add_option("--extent", sim_args.extent, "square domain side");
  sim->add_option("--seed", sim_args.seed, "RNG seed");
  sim->add_option("--locations", sim_args.locations, "CSV of sites (overrides --n)");
  sim->add_option("--out", sim_args.out, "CSV output path")->required();

  StudyArgs study_args;
  auto* study = app.add_subcommand("study", "Monte Carlo estimation study");
  study->add_option("--n", study_args.cfg.n, "sites per replicate");
  study->add_option("--replicates", study_args.cfg.replicates, "replicates");
  study->add_option("--seed", study_args.cfg.seed, "RNG seed");
  study->add_option("--nu", study_args.cfg.nu, "fixed smoothness");
  study->add_option("--mu", study_args.cfg.mu, "fixed mu");
  study->add_option("--delta", study_args.cfg.target_delta,
                    "compact-support target");
  study->add_option("--beta", study_args.cfg.beta,
                    "explicit scale (overrides --delta)");
  study->add_option("--sigma2", study_args.cfg.sigma2, "true variance");
  study->add_option("--tau2", study_args.cfg.tau2, "true nugget fraction");
  study->add_flag("--fit-mu", study_args.cfg.fit_mu, "also estimate mu");
  study->add_flag("--fit-tau2", study_args.cfg.fit_tau2, "also estimate tau2");
  study->add_option("--threads", study_args.cfg.threads, "worker threads");
  study->add_option("--out", study_args.out, "CSV output path");

  PredictArgs pred_args;
  auto* pred = app.add_subcommand("predict", "simple kriging prediction");
  pred->add_option("--train", pred_args.train, "training CSV")->required();
  pred->add_option("--targets", pred_args.targets, "target-site CSV")->required();
  pred->add_option("--params", pred_args.params, "parameter file from fit")
      ->required();
  pred->add_option("--out", pred_args.out, "predictions CSV path")->required();

  CvArgs cv_args;
  auto* cv = app.add_subcommand("cv", "cross-validation scores");
  cv->add_option("--data", cv_args.data, "CSV with x,y[,z],value")->required();
  cv->add_option("--params", cv_args.params, "parameter file from fit");
  add_model_flags(cv, cv_args.model);
  cv->add_option("--holdout", cv_args.holdout,
                 "hold-out fraction (default: leave-one-out)");
  cv->add_option("--repeats", cv_args.repeats, "hold-out repeats");
  cv->add_option("--seed", cv_args.seed, "hold-out RNG seed");
  cv->add_option("--out", cv_args.out, "score record output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (*eval) return cmd_eval(eval_args);
    if (*conv) return cmd_converge(conv_args);
    if (*fit) return cmd_fit(fit_args);
    if (*sim) return cmd_simulate(sim_args);
    if (*study) return cmd_study(study_args);
    if (*pred) return cmd_predict(pred_args);
    if (*cv) return cmd_cv(cv_args);
  } catch (const gwmat::not_positive_definite_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const gwmat::series_error& e) {  // also precision_loss_error
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalidInput;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    const std::string msg = e.what();
    return msg.find("convergence") != std::string::npos ? kExitNumerical
                                                        : kExitInvalidInput;
  }
  return kExitInvalidInput;
}
