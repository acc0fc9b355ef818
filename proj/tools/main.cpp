#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airybeta/edgecouple.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/gbe.hpp"
#include "airybeta/parallel.hpp"
#include "airybeta/riccati.hpp"
#include "airybeta/rng.hpp"
#include "airybeta/sae.hpp"
#include "airybeta/sai.hpp"
#include "airybeta/stats.hpp"
#include "airybeta/tridiag.hpp"
#include "airybeta/verify.hpp"
#include "airybeta/version.hpp"
#include "output.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace airybeta;
using cli::round_trip;

namespace {

constexpr int kUsageError = 2;

struct Common {
  std::uint64_t seed = 1;
  double beta = 2.0;
  long N = 1000;
  int M = 10;
  double dt = 1e-3;
  std::string out = ".";
  int workers = 1;
  bool embed_runtime = false;
};

void add_common(CLI::App* sub, Common& c, bool with_N) {
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--beta", c.beta, "inverse temperature")->check(CLI::PositiveNumber)->capture_default_str();
  if (with_N) sub->add_option("--N", c.N, "matrix size")->check(CLI::Range(2L, std::numeric_limits<long>::max()))->capture_default_str();
  sub->add_option("--M", c.M, "number of samples")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--dt", c.dt, "Brownian path mesh")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--workers", c.workers, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_flag("--embed-runtime", c.embed_runtime, "write the wall time into the outputs");
}

ordered_json common_echo(const Common& c, bool with_N) {
  ordered_json j;
  j["beta"] = c.beta;
  if (with_N) j["N"] = c.N;
  j["M"] = c.M;
  j["dt"] = c.dt;
  j["workers"] = c.workers;
  return j;
}

BrownianPath forward_path(Seed seed, double t_end, double dt, double beta) {
  return sample_brownian_path(seed, 0.0, dt, static_cast<int>(std::lround(t_end / dt)), beta);
}

std::vector<double> grid(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw DomainError("grid: need lo <= hi and a positive step");
  std::vector<double> g;
  for (long i = 0; lo + static_cast<double>(i) * step <= hi + 1e-9 * step; ++i) g.push_back(lo + static_cast<double>(i) * step);
  return g;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct Emitted {
  cli::CsvTable table;
  ordered_json results;
};

void emit(const std::string& command, const Common& c, ordered_json config, const Emitted& e, const Timer& timer) {
  cli::RunInfo info{command, c.seed, std::move(config), c.embed_runtime, timer.seconds()};
  const fs::path dir(c.out);
  fs::create_directories(dir);
  e.table.write(dir / (command + ".csv"), cli::csv_preamble(info));
  cli::write_summary(dir / (command + ".json"), info, e.results);
  std::cerr << command << ": " << info.runtime_seconds << " s\n";
}

// ---- gbe ----

struct GbeOpts {
  int top = 5;
};

int run_gbe(const Common& c, const GbeOpts& o) {
  Timer timer;
  const auto M = static_cast<std::size_t>(c.M);
  std::vector<std::vector<double>> top(M);
  std::vector<double> log_psi(M);
  const double scale = 2.0 * std::pow(static_cast<double>(c.N), 2.0 / 3.0);
  parallel_for(c.M, c.workers, [&](long i) {
    const JacobiEnsemble e = sample_jacobi(Seed{c.seed, static_cast<std::uint64_t>(i)}, c.N, c.beta);
    std::vector<double> d, off;
    scaled_matrix(e, d, off);
    auto& t = top[static_cast<std::size_t>(i)];
    for (int k = 1; k <= o.top && k <= c.N; ++k)
      t.push_back(scale * (tridiag_kth_largest(d, off, static_cast<std::size_t>(k), 1e-13) - 1.0));
    const Scaled<double> psi = rescaled_psi(e, 0.0, static_cast<double>(c.N));
    log_psi[static_cast<std::size_t>(i)] = std::log(std::fabs(psi.mantissa)) + psi.log_scale;
  });
  std::vector<std::string> cols{"sample", "log_abs_psi0"};
  for (int k = 1; k <= o.top; ++k) cols.push_back("lambda_" + std::to_string(k));
  Emitted e{cli::CsvTable(cols), {}};
  std::vector<double> first;
  for (std::size_t i = 0; i < M; ++i) {
    std::vector<std::string> row{std::to_string(i), round_trip(log_psi[i])};
    for (int k = 0; k < o.top; ++k)
      row.push_back(k < static_cast<int>(top[i].size()) ? round_trip(top[i][static_cast<std::size_t>(k)]) : "nan");
    e.table.add_row(std::move(row));
    first.push_back(top[i].front());
  }
  e.results["mean_log_abs_psi0"] = mean(log_psi);
  e.results["variance_log_abs_psi0"] = c.M > 1 ? variance(log_psi) : 0.0;
  e.results["mean_top_eigenvalue"] = mean(first);
  ordered_json cfg = common_echo(c, true);
  cfg["top"] = o.top;
  emit("gbe", c, cfg, e, timer);
  return 0;
}

// ---- sai ----

struct SaiOpts {
  double lambda = 0.0;
  double t_max = 8.0;
  double t_step = 0.25;
  double horizon = 12.0;
};

int run_sai(const Common& c, const SaiOpts& o) {
  Timer timer;
  const std::vector<double> ts = grid(0.0, o.t_max, o.t_step);
  if (o.t_max >= o.horizon) throw DomainError("sai: --t-max must be below --horizon");
  const auto M = static_cast<std::size_t>(c.M);
  std::vector<std::vector<std::pair<double, double>>> vals(M);
  std::vector<double> env(M);
  parallel_for(c.M, c.workers, [&](long i) {
    const double t_end = o.horizon + std::max(0.0, -o.lambda) + 1.0;
    const BrownianPath p = forward_path(Seed{c.seed, static_cast<std::uint64_t>(i)}, t_end, c.dt, c.beta);
    const GaussianFunctional gf = gaussian_functional(p, t_end);
    const SAiPath s = sai_backward(p, gf, o.lambda, o.horizon, 0.0);
    auto& v = vals[static_cast<std::size_t>(i)];
    for (double t : ts) v.emplace_back(s.value_at(t).real(), s.derivative_at(t).real());
    env[static_cast<std::size_t>(i)] = envelope_check(s, gf, std::min(o.t_max, o.horizon - 1.0), 0);
  });
  Emitted e{cli::CsvTable({"sample", "t", "sai", "sai_prime"}), {}};
  std::vector<double> at0;
  for (std::size_t i = 0; i < M; ++i) {
    for (std::size_t k = 0; k < ts.size(); ++k)
      e.table.add_row({std::to_string(i), round_trip(ts[k]), round_trip(vals[i][k].first), round_trip(vals[i][k].second)});
    at0.push_back(vals[i].front().first);
  }
  e.results["mean_sai_at_0"] = mean(at0);
  e.results["median_envelope_deviation"] = median(env);
  ordered_json cfg = common_echo(c, false);
  cfg["lambda"] = o.lambda;
  cfg["t_max"] = o.t_max;
  cfg["t_step"] = o.t_step;
  cfg["horizon"] = o.horizon;
  emit("sai", c, cfg, e, timer);
  return 0;
}

// ---- airy-beta ----

struct AiryBetaOpts {
  int top = 3;
  double lambda_min = -12.0;
  double lambda_max = 6.0;
  double t_max = 15.0;
};

int run_airy_beta(const Common& c, const AiryBetaOpts& o) {
  Timer timer;
  const auto M = static_cast<std::size_t>(c.M);
  std::vector<PointProcessSample> samples(M);
  parallel_for(c.M, c.workers, [&](long i) {
    const BrownianPath p = forward_path(Seed{c.seed, static_cast<std::uint64_t>(i)}, o.t_max, c.dt, c.beta);
    samples[static_cast<std::size_t>(i)] = sample_airy_beta(p, o.lambda_min, o.lambda_max, o.top, c.dt, o.t_max);
  });
  Emitted e{cli::CsvTable({"sample", "rank", "lambda"}), {}};
  std::vector<double> first;
  long incomplete = 0;
  for (std::size_t i = 0; i < M; ++i) {
    const auto& s = samples[i];
    for (std::size_t k = 0; k < s.eigenvalues.size(); ++k)
      e.table.add_row({std::to_string(i), std::to_string(k + 1), round_trip(s.eigenvalues[k])});
    if (!s.eigenvalues.empty()) first.push_back(s.eigenvalues.front());
    if (!s.complete) ++incomplete;
  }
  e.results["mean_top_point"] = first.empty() ? 0.0 : mean(first);
  e.results["incomplete_samples"] = incomplete;
  ordered_json cfg = common_echo(c, false);
  cfg["top"] = o.top;
  cfg["lambda_min"] = o.lambda_min;
  cfg["lambda_max"] = o.lambda_max;
  cfg["t_max"] = o.t_max;
  emit("airy-beta", c, cfg, e, timer);
  return 0;
}

// ---- couple ----

struct CoupleOpts {
  double t_max = 4.0;
  double t_step = 0.25;
  double lambda_lo = -2.0;
  double lambda_hi = 2.0;
  double lambda_step = 0.5;
  bool noise_free = false;
};

int run_couple(const Common& c, const CoupleOpts& o) {
  Timer timer;
  const std::vector<double> tg = grid(0.0, o.t_max, o.t_step), lg = grid(o.lambda_lo, o.lambda_hi, o.lambda_step);
  const auto M = static_cast<std::size_t>(c.M);
  std::vector<CouplingProfile> prof(M);
  std::vector<TopZeroPair> zeros(M);
  CoupledConfig cc;
  cc.N = c.N;
  cc.beta = c.beta;
  cc.dt = c.dt;
  cc.noise_free = o.noise_free;
  parallel_for(c.M, c.workers, [&](long i) {
    const CoupledRun run = make_coupled_run(Seed{c.seed, static_cast<std::uint64_t>(i)}, cc);
    prof[static_cast<std::size_t>(i)] = psi_vs_sai(run, tg, lg);
    zeros[static_cast<std::size_t>(i)] = top_zero_pair(run, -6.0, 4.0);
  });
  Emitted e{cli::CsvTable({"sample", "lambda", "t", "log_prefactor", "psi", "sai", "abs_diff"}), {}};
  std::vector<double> sup;
  ordered_json per_sample = ordered_json::array();
  for (std::size_t i = 0; i < M; ++i) {
    const auto& p = prof[i];
    for (std::size_t a = 0; a < p.lambda.size(); ++a)
      for (std::size_t b = 0; b < p.t.size(); ++b)
        e.table.add_row({std::to_string(i), round_trip(p.lambda[a]), round_trip(p.t[b]), round_trip(p.log_prefactor[a]),
                         round_trip(p.psi_at(a, b)), round_trip(p.sai_at(a, b)),
                         round_trip(std::fabs(p.psi_at(a, b) - p.sai_at(a, b)))});
    sup.push_back(p.sup_deviation);
    ordered_json s;
    s["sample"] = i;
    s["sup_deviation"] = p.sup_deviation;
    s["mean_deviation"] = p.mean_deviation;
    s["top_zero_found"] = zeros[i].found;
    s["top_zero_psi"] = zeros[i].psi;
    s["top_zero_sai"] = zeros[i].sai;
    per_sample.push_back(s);
  }
  e.results["median_sup_deviation"] = median(sup);
  e.results["samples"] = per_sample;
  ordered_json cfg = common_echo(c, true);
  cfg["t_max"] = o.t_max;
  cfg["t_step"] = o.t_step;
  cfg["lambda_lo"] = o.lambda_lo;
  cfg["lambda_hi"] = o.lambda_hi;
  cfg["lambda_step"] = o.lambda_step;
  cfg["noise_free"] = o.noise_free;
  emit("couple", c, cfg, e, timer);
  return 0;
}

// ---- verify ----

struct VerifyOpts {
  VerifyConfig v;
  std::string out = ".";
  bool embed_runtime = false;
};

int run_verify(VerifyOpts& o) {
  Timer timer;
  Common c;
  c.seed = o.v.seed;
  c.out = o.out;
  c.embed_runtime = o.embed_runtime;
  Emitted e{cli::CsvTable({"criterion", "title", "passed", "metric", "value"}), ordered_json::array()};
  bool all = true;
  const auto results = run_acceptance(o.v, [&](const CriterionResult& r) {
    std::cout << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.title << ": " << r.detail << std::endl;
  });
  for (const auto& r : results) {
    all = all && r.passed;
    ordered_json j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["passed"] = r.passed;
    j["detail"] = r.detail;
    ordered_json m;
    for (const auto& x : r.metrics) {
      m[x.name] = x.value;
      e.table.add_row({std::to_string(r.id), r.title, r.passed ? "1" : "0", x.name, round_trip(x.value)});
    }
    j["metrics"] = m;
    e.results.push_back(j);
  }
  ordered_json cfg;
  cfg["workers"] = o.v.workers;
  cfg["dt"] = o.v.dt;
  cfg["ephi_M"] = o.v.ephi_M;
  cfg["clt_N"] = o.v.clt_N;
  cfg["clt_M"] = o.v.clt_M;
  cfg["counting_M"] = o.v.counting_M;
  cfg["tw_N"] = o.v.tw_N;
  cfg["tw_M"] = o.v.tw_M;
  cfg["envelope_M"] = o.v.envelope_M;
  cfg["coupled_N"] = o.v.coupled_N;
  cfg["coupled_seeds"] = o.v.coupled_seeds;
  cfg["planar_N"] = o.v.planar_N;
  cfg["planar_M"] = o.v.planar_M;
  cfg["shift_M"] = o.v.shift_M;
  cfg["criteria"] = o.v.criteria;
  emit("verify", c, cfg, e, timer);
  std::cout << (all ? "verify: all criteria passed" : "verify: acceptance failure") << std::endl;
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Airy functions and Gaussian beta ensemble edge tools", "airybeta"};
  app.set_version_flag("--version", std::string(kVersion) + "+" + kContentVersion);
  app.set_config("--config", "", "key=value configuration file; command line flags win");
  app.require_subcommand(1);

  Common gc, sc, ac, cc;
  GbeOpts go;
  SaiOpts so;
  AiryBetaOpts ao;
  CoupleOpts co;
  VerifyOpts vo;
  sc.M = 10;
  cc.N = 100000;
  cc.M = 4;

  auto* gbe = app.add_subcommand("gbe", "sample tridiagonal ensembles: edge eigenvalues and log|Psi_N(0)|");
  add_common(gbe, gc, true);
  gbe->add_option("--top", go.top, "eigenvalues per sample")->check(CLI::PositiveNumber)->capture_default_str();

  auto* sai = app.add_subcommand("sai", "stochastic Airy function on a time grid");
  add_common(sai, sc, false);
  sai->add_option("--lambda", so.lambda, "spectral parameter")->capture_default_str();
  sai->add_option("--t-max", so.t_max, "last output time")->check(CLI::PositiveNumber)->capture_default_str();
  sai->add_option("--t-step", so.t_step, "output time step")->check(CLI::PositiveNumber)->capture_default_str();
  sai->add_option("--horizon", so.horizon, "seed time of the backward solve")->check(CLI::PositiveNumber)->capture_default_str();

  auto* ab = app.add_subcommand("airy-beta", "top points of the Airy-beta process by the Riccati route");
  add_common(ab, ac, false);
  ab->add_option("--top", ao.top, "points per sample")->check(CLI::PositiveNumber)->capture_default_str();
  ab->add_option("--lambda-min", ao.lambda_min, "search window lower end")->capture_default_str();
  ab->add_option("--lambda-max", ao.lambda_max, "search window upper end")->capture_default_str();
  ab->add_option("--t-max", ao.t_max, "Riccati horizon")->check(CLI::PositiveNumber)->capture_default_str();

  auto* cp = app.add_subcommand("couple", "rescaled polynomials against SAi on shared noise");
  add_common(cp, cc, true);
  cp->add_option("--t-max", co.t_max, "last time on the profile grid")->check(CLI::PositiveNumber)->capture_default_str();
  cp->add_option("--t-step", co.t_step, "profile time step")->check(CLI::PositiveNumber)->capture_default_str();
  cp->add_option("--lambda-lo", co.lambda_lo)->capture_default_str();
  cp->add_option("--lambda-hi", co.lambda_hi)->capture_default_str();
  cp->add_option("--lambda-step", co.lambda_step)->check(CLI::PositiveNumber)->capture_default_str();
  cp->add_flag("--noise-free", co.noise_free, "use the deterministic surrogate ensemble");

  auto* vf = app.add_subcommand("verify", "run the acceptance criteria; exit 1 if any fails");
  auto& v = vo.v;
  vf->add_option("--seed", v.seed)->capture_default_str();
  vf->add_option("--workers", v.workers)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--dt", v.dt)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--out", vo.out)->capture_default_str();
  vf->add_flag("--embed-runtime", vo.embed_runtime, "write the wall time into the outputs");
  vf->add_option("--criteria", v.criteria, "subset of criteria ids (default all)")->check(CLI::Range(1, kLibraryCriteria));
  vf->add_option("--ephi-M", v.ephi_M)->check(CLI::Range(2, 1 << 30))->capture_default_str();
  vf->add_option("--clt-N", v.clt_N)->check(CLI::Range(2L, 1L << 40))->capture_default_str();
  vf->add_option("--clt-M", v.clt_M)->check(CLI::Range(2, 1 << 30))->capture_default_str();
  vf->add_option("--counting-M", v.counting_M)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--tw-N", v.tw_N)->check(CLI::Range(2L, 1L << 40))->capture_default_str();
  vf->add_option("--tw-M", v.tw_M)->check(CLI::Range(2, 1 << 30))->capture_default_str();
  vf->add_option("--envelope-M", v.envelope_M)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--coupled-N", v.coupled_N)->check(CLI::Range(1000L, 1L << 40));
  vf->add_option("--coupled-seeds", v.coupled_seeds)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--planar-N", v.planar_N)->check(CLI::Range(2L, 1L << 40))->capture_default_str();
  vf->add_option("--planar-M", v.planar_M)->check(CLI::PositiveNumber)->capture_default_str();
  vf->add_option("--shift-M", v.shift_M)->check(CLI::Range(2, 1 << 30))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*gbe) return run_gbe(gc, go);
    if (*sai) return run_sai(sc, so);
    if (*ab) return run_airy_beta(ac, ao);
    if (*cp) return run_couple(cc, co);
    if (*vf) return run_verify(vo);
  } catch (const std::exception& e) {
    std::cerr << "airybeta: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
