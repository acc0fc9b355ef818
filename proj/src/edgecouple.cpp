#include "airybeta/edgecouple.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss.hpp>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/parallel.hpp"
#include "airybeta/stats.hpp"

namespace airybeta {

namespace {

using Gauss = boost::math::quadrature::gauss<double, 30>;

// Coefficients of dX and dY in the field at time u.
struct FieldWeights {
  cplx x;
  cplx y;
};

FieldWeights field_weights(cplx z, double u) {
  const cplx s = dominant_sqrt(z, u);
  const cplx J = std::sqrt(u) / (z + s);
  return {-0.5 / s, -0.5 * J / s};
}

// Accumulates |c_x|^2 + |c_y|^2 and c_x^2 + c_y^2 over [a, b] with 30-point
// Gauss-Legendre.
void gauss_piece(cplx z, double a, double b, double& abs2, cplx& sq) {
  if (!(b > a)) return;
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  const double c = 0.5 * (a + b), r = 0.5 * (b - a);
  auto add = [&](double u, double weight) {
    const FieldWeights f = field_weights(z, u);
    abs2 += weight * r * (std::norm(f.x) + std::norm(f.y));
    sq += weight * r * (f.x * f.x + f.y * f.y);
  };
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      add(c, w[i]);
    } else {
      add(c - r * x[i], w[i]);
      add(c + r * x[i], w[i]);
    }
  }
}

// Pieces grow geometrically away from the point of [0, t] nearest to the
// singularity u = z^2, so each piece sees a smooth integrand.
void field_moments(cplx z, double t, double& abs2, cplx& sq) {
  abs2 = 0.0;
  sq = 0.0;
  const cplx z2 = z * z;
  const double p = std::clamp(z2.real(), 0.0, t);
  const double d = std::max(std::abs(z2 - p), 1e-14 * std::max(1.0, t));
  std::vector<double> cuts{0.0, t, p};
  for (double r = d; r < t; r *= 2.0) {
    if (p - r > 0.0) cuts.push_back(p - r);
    if (p + r < t) cuts.push_back(p + r);
  }
  std::sort(cuts.begin(), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) gauss_piece(z, cuts[i], cuts[i + 1], abs2, sq);
}

void check_off_cut(double t, cplx z) {
  if (!(t >= 0.0) || !(t < 1.0 + 1e-12)) throw DomainError("gaf: t must lie in [0, 1]");
  if (std::fabs(z.imag()) < 1e-300 && std::fabs(z.real()) <= std::sqrt(t))
    throw DomainError("gaf: z lies on the cut [-sqrt t, sqrt t]");
}

// Largest index of a walk row covered by time t on the mesh 1/N.
long rows_up_to(double t, long N) {
  return static_cast<long>(std::floor(t * static_cast<double>(N) + 1e-9));
}

cplx log_airy_ai(cplx w, bool derivative) {
  if (w.imag() == 0.0) {
    const AiryValue a = airy(w.real());
    const double v = derivative ? a.ai_prime : a.ai;
    if (std::fabs(v) > 1e-280) return std::log(cplx(v));
  }
  const AiryLogValue a = airy_log_asymptotic(w);
  return derivative ? a.log_ai + std::log(a.ai_ratio) : a.log_ai;
}

// log of Psi_n as a complex number, from one stored recurrence entry.
cplx log_psi_entry(const PolySequence& seq, long n, long N, cplx z) {
  const auto i = static_cast<std::size_t>(n);
  return std::log(seq.values[i]) + seq.log_scale[i] + edge_normalizer(n, N, z);
}

// Imaginary parts of logs of real ratios land on a multiple of 2 pi.
cplx wrap_log(cplx L) {
  double im = std::remainder(L.imag(), 2.0 * M_PI);
  if (im <= -M_PI) im += 2.0 * M_PI;
  return {L.real(), im};
}

}  // namespace

cplx dominant_sqrt(cplx z, double u) {
  cplx s = std::sqrt(z * z - u);
  if (std::abs(z + s) < std::abs(z - s)) s = -s;
  return s;
}

cplx conformal_J(cplx z) { return z - dominant_sqrt(z, 1.0); }

GafSample gaf_moments(double t, cplx z) {
  check_off_cut(t, z);
  GafSample g;
  g.t = t;
  g.z = z;
  field_moments(z, t, g.variance, g.pseudo_variance);
  return g;
}

GafSample gaf_g(const JacobiEnsemble& ens, double t, cplx z) {
  GafSample g = gaf_moments(t, z);
  const long K = rows_up_to(t, ens.N);
  if (K > ens.rows()) throw RangeError("gaf: t beyond the sampled rows");
  const double Nd = static_cast<double>(ens.N);
  cplx sum = 0.0;
  for (long k = 1; k <= K; ++k) {
    const FieldWeights f = field_weights(z, static_cast<double>(k - 1) / Nd);
    sum += f.x * ens.X[k - 1] + f.y * ens.Y[k - 1];
  }
  g.value = sum / std::sqrt(Nd);
  return g;
}

std::vector<PlanarRecord> planar_ratio_check(const JacobiEnsemble& ens,
                                             const std::vector<cplx>& z_list, bool noise_free) {
  const double a = std::sqrt(2.0 / ens.beta);
  std::vector<PlanarRecord> out;
  out.reserve(z_list.size());
  for (const cplx z : z_list) {
    if (std::fabs(z.imag()) < 1e-300 && std::fabs(z.real()) <= 1.0)
      throw DomainError("planar_ratio_check: z must lie off [-1, 1]");
    const Scaled<cplx> phi = transfer_value(ens, z, ens.N);
    const PolySequence pi = hermite_recurrence(ens.N, z, ens.N);
    const auto iN = static_cast<std::size_t>(ens.N);
    cplx expo = phi.log_scale - pi.log_scale[iN];
    if (!noise_free) {
      const GafSample g = gaf_g(ens, 1.0, z);
      expo += 0.5 * a * a * g.pseudo_variance - a * g.value;
    }
    PlanarRecord r;
    r.z = z;
    r.ratio = phi.mantissa / pi.values[iN] * std::exp(expo);
    r.deviation = std::abs(r.ratio - 1.0);
    out.push_back(r);
  }
  return out;
}

cplx CoupledRun::point(cplx lambda) const {
  return config.z0 + lambda * config.z0 / (2.0 * std::pow(static_cast<double>(N_p), 2.0 / 3.0));
}

double CoupledRun::sai_beta() const {
  return config.noise_free ? std::numeric_limits<double>::infinity() : config.beta;
}

CoupledRun make_coupled_run(Seed seed, const CoupledConfig& config) {
  if (config.N < 8) throw DomainError("coupled run: N must be at least 8");
  if (!(config.beta > 0.0)) throw DomainError("coupled run: beta must be positive");
  if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) throw DomainError("coupled run: epsilon must lie in (0, 1)");
  if (!(std::fabs(config.z0) <= 1.0) || config.z0 == 0.0) throw DomainError("coupled run: z0 must lie in [-1, 1] \\ {0}");
  if (config.t_min > 0.0) throw DomainError("coupled run: t_min must be <= 0");
  CoupledRun run;
  run.config = config;
  const double Nd = static_cast<double>(config.N);
  run.N_p = static_cast<long>(std::floor(Nd * config.z0 * config.z0));
  if (run.N_p < 8) throw DomainError("coupled run: N z0^2 is too small");
  run.T = std::pow(std::log(Nd), 1.0 - config.epsilon);
  const double c = std::cbrt(static_cast<double>(run.N_p));
  run.N_H = run.N_p - static_cast<long>(std::ceil(c * run.T));
  run.t_H = static_cast<double>(run.N_H) / Nd;

  const double h = run.h();
  const double t_hi = std::max(run.T, config.sai_horizon + std::max(0.0, -config.lambda_floor)) + 3.0 * h;
  const double t_lo = config.t_min;
  const long j_max = static_cast<long>(std::ceil(t_hi / h)) + 1;
  const long j_min = static_cast<long>(std::floor(t_lo / h)) - 1;
  const long row_lo = run.N_p - j_max;
  const long row_hi = run.N_p - j_min;
  if (row_lo < 2 || run.N_H < 2) throw DomainError("coupled run: N too small for the requested horizon");
  const long extra = std::max(0L, row_hi - config.N) + 1;

  if (config.noise_free) {
    run.ens = make_noise_free(config.N, config.beta, extra);
  } else {
    JacobiOptions opts;
    opts.extra = extra;
    opts.couple_lo = row_lo;
    opts.couple_hi = row_hi;
    run.ens = sample_jacobi(seed, config.N, config.beta, opts);
  }
  const WalkSums w = walk_sums(run.ens, row_lo, row_hi);
  run.edge_path = edge_brownian_from_walk(w.xhat, w.yhat, w.offset, run.N_p, config.beta, config.dt,
                                          t_lo, t_hi, seed, config.z0 > 0.0 ? 1.0 : -1.0,
                                          config.noise_free ? FillIn::linear : FillIn::bridge);
  run.edge_path.beta = run.sai_beta();
  run.gf = gaussian_functional(run.edge_path, run.edge_path.t_end() - run.edge_path.dt);
  return run;
}

Scaled<cplx> coupled_psi(const CoupledRun& run, cplx lambda, long n) {
  if (n < 0 || n > run.ens.rows()) throw RangeError("coupled_psi: index outside the sampled rows");
  const cplx z = run.point(lambda);
  const Scaled<cplx> phi = transfer_value(run.ens, z, n);
  const cplx lw = edge_normalizer(n, run.ens.N, z);
  return {phi.mantissa * std::exp(cplx(0.0, lw.imag())), phi.log_scale + lw.real()};
}

HyperbolicGaussian hyperbolic_gaussian(const CoupledRun& run, cplx lambda) {
  if (run.config.noise_free) return {0.0, 0.0};
  const double a2 = 2.0 / run.config.beta;
  const GafSample g = gaf_g(run.ens, run.t_H, run.point(lambda));
  return {std::sqrt(a2) * g.value, 0.5 * a2 * g.pseudo_variance};
}

std::vector<UpsilonRecord> upsilon_diagnostic(const CoupledRun& run,
                                              const std::vector<cplx>& lambda_grid) {
  std::vector<UpsilonRecord> out;
  out.reserve(lambda_grid.size());
  const long n1 = run.N_H - 1, n0 = run.N_H;
  const double log_c = std::log(static_cast<double>(run.N_p)) / 3.0;
  for (const cplx lambda : lambda_grid) {
    const cplx z = run.point(lambda);
    const PolySequence seq = transfer_recurrence(run.ens, z, n0);
    const HyperbolicGaussian hg = hyperbolic_gaussian(run, lambda);
    const cplx gauss = hg.log_mean_exp - hg.q;
    const cplx L1 = log_psi_entry(seq, n1, run.ens.N, z);
    const cplx L0 = log_psi_entry(seq, n0, run.ens.N, z);
    // log(Psi_{n1} - Psi_{n0}) without leaving log space.
    const cplx Ldiff = L1 + std::log(1.0 - std::exp(L0 - L1));
    const cplx w = lambda + run.T;
    UpsilonRecord r;
    r.lambda = lambda;
    r.q = hg.q;
    r.upsilon1 = wrap_log(L1 - log_airy_ai(w, false) + gauss);
    r.upsilon2 = wrap_log(Ldiff + log_c - log_airy_ai(w, true) + gauss);
    out.push_back(r);
  }
  return out;
}

CouplingProfile psi_vs_sai(const CoupledRun& run, const std::vector<double>& t_grid,
                           const std::vector<double>& lambda_grid) {
  if (t_grid.empty() || lambda_grid.empty()) throw DomainError("psi_vs_sai: empty grid");
  const double h = run.h();
  std::vector<long> j(t_grid.size());
  CouplingProfile p;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    j[i] = std::lround(t_grid[i] / h);
    p.t.push_back(static_cast<double>(j[i]) * h);
  }
  const long j_lo = *std::min_element(j.begin(), j.end());
  const long n_max = run.N_p - j_lo;
  if (n_max > run.ens.rows()) throw RangeError("psi_vs_sai: time grid below the sampled rows");
  const double t_min = static_cast<double>(j_lo) * h;
  if (t_min < run.edge_path.t0 - 1e-12) throw RangeError("psi_vs_sai: time grid below the edge path");
  for (const double tt : p.t)
    if (tt > run.T + 1e-12) throw DomainError("psi_vs_sai: times must not exceed T");

  const double int_X = run.gf.int_X_at(run.T);
  const double var_int_X = 2.0 * mean_correction_integral(run.sai_beta(), run.T);
  p.lambda = lambda_grid;
  const std::size_t nt = p.t.size();
  p.psi_normalized.resize(lambda_grid.size() * nt);
  p.sai.resize(lambda_grid.size() * nt);
  double total = 0.0;
  for (std::size_t il = 0; il < lambda_grid.size(); ++il) {
    const double lambda = lambda_grid[il];
    const HyperbolicGaussian hg = hyperbolic_gaussian(run, lambda);
    const double log_pref = int_X + hg.q.real() - 0.5 * var_int_X - hg.log_mean_exp.real();
    p.log_prefactor.push_back(log_pref);
    const cplx z = run.point(lambda);
    const PolySequence seq = transfer_recurrence(run.ens, z, n_max);
    const SAiPath sai = sai_backward(run.edge_path, run.gf, lambda, run.config.sai_horizon, t_min);
    for (std::size_t it = 0; it < nt; ++it) {
      const long n = run.N_p - j[it];
      const auto in = static_cast<std::size_t>(n);
      const double lw = edge_normalizer(n, run.ens.N, z.real());
      const double psi = seq.values[in].real() * std::exp(seq.log_scale[in] + lw - log_pref);
      const double s = sai.value_at(p.t[it]).real();
      p.psi_normalized[il * nt + it] = psi;
      p.sai[il * nt + it] = s;
      const double d = std::fabs(psi - s);
      p.sup_deviation = std::max(p.sup_deviation, d);
      total += d;
    }
  }
  p.mean_deviation = total / static_cast<double>(p.sai.size());
  return p;
}

TopZeroPair top_zero_pair(const CoupledRun& run, double lambda_lo, double lambda_hi) {
  if (!(lambda_hi > lambda_lo)) throw DomainError("top_zero_pair: empty window");
  if (lambda_lo < run.config.lambda_floor) throw DomainError("top_zero_pair: window below the path horizon");
  auto f = [&](double lam) {
    return transfer_value(run.ens, run.point(cplx(lam, 0.0)).real(), run.N_p).mantissa;
  };
  TopZeroPair out;
  const double step = 0.05;
  double hi = lambda_hi, f_hi = f(hi);
  bool have_psi = false;
  while (hi > lambda_lo && !have_psi) {
    const double lo = std::max(lambda_lo, hi - step);
    const double f_lo = f(lo);
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      out.psi = bisect(f, lo, hi, 1e-9);
      have_psi = true;
    }
    hi = lo;
    f_hi = f_lo;
  }
  const PointProcessSample s =
      sai_zero_scan(run.edge_path, lambda_lo, lambda_hi, run.edge_path.dt, 1, run.config.sai_horizon);
  out.found = have_psi && !s.eigenvalues.empty();
  if (!s.eigenvalues.empty()) out.sai = s.eigenvalues.front();
  return out;
}

CltResult clt_statistic(std::uint64_t seed, long N, double beta, int M, int workers) {
  if (M < 2) throw DomainError("clt_statistic: M must be at least 2");
  CltResult r;
  r.N = N;
  r.beta = beta;
  r.log_abs_psi.resize(static_cast<std::size_t>(M));
  parallel_for(M, workers, [&](long i) {
    const JacobiEnsemble ens = sample_jacobi(Seed{seed, static_cast<std::uint64_t>(i)}, N, beta);
    const Scaled<double> psi = rescaled_psi(ens, 0.0, static_cast<double>(N));
    r.log_abs_psi[static_cast<std::size_t>(i)] = std::log(std::fabs(psi.mantissa)) + psi.log_scale;
  });
  const double logN = std::log(static_cast<double>(N));
  r.predicted_variance = 2.0 / (3.0 * beta) * logN;
  const double shift = logN / (3.0 * beta), scale = std::sqrt(r.predicted_variance);
  r.standardized.reserve(r.log_abs_psi.size());
  for (const double v : r.log_abs_psi) r.standardized.push_back((v + shift) / scale);
  r.ks = ks_one_sample(r.standardized, normal_cdf);
  const double m = mean(r.log_abs_psi);
  r.variance = variance(r.log_abs_psi);
  double m4 = 0.0;
  std::vector<double> stud;
  stud.reserve(r.log_abs_psi.size());
  for (const double v : r.log_abs_psi) {
    m4 += std::pow(v - m, 4);
    stud.push_back((v - m) / std::sqrt(r.variance));
  }
  m4 /= static_cast<double>(M);
  r.variance_se = std::sqrt(std::max(0.0, m4 - r.variance * r.variance) / static_cast<double>(M));
  r.ks_studentized = ks_one_sample(stud, normal_cdf);
  return r;
}

}  // namespace airybeta
