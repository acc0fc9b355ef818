#include "airybeta/sai.hpp"

#include <algorithm>
#include <cmath>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/parallel.hpp"
#include "airybeta/stats.hpp"

namespace airybeta {

namespace {

constexpr double kTableStep = 1e-3;
constexpr double kTableEnd = 256.0;

// Right-hand side of V' = 1 - 4 sqrt(t) V, m' = V - 2 sqrt(t) m, I' = m.
struct State {
  double V, m, I;
};

State rhs(double t, const State& y) {
  const double r = std::sqrt(t);
  return {1.0 - 4.0 * r * y.V, y.V - 2.0 * r * y.m, y.m};
}

State rk4(double t, const State& y, double h) {
  auto axpy = [](const State& a, double c, const State& b) {
    return State{a.V + c * b.V, a.m + c * b.m, a.I + c * b.I};
  };
  const State k1 = rhs(t, y);
  const State k2 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k1));
  const State k3 = rhs(t + 0.5 * h, axpy(y, 0.5 * h, k2));
  const State k4 = rhs(t + h, axpy(y, h, k3));
  return {y.V + h / 6.0 * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V),
          y.m + h / 6.0 * (k1.m + 2.0 * k2.m + 2.0 * k3.m + k4.m),
          y.I + h / 6.0 * (k1.I + 2.0 * k2.I + 2.0 * k3.I + k4.I)};
}

CovarianceTable build_table() {
  CovarianceTable tab;
  tab.h = kTableStep;
  const auto n = static_cast<std::size_t>(std::lround(kTableEnd / kTableStep));
  tab.t_max = kTableStep * static_cast<double>(n);
  tab.V.resize(n + 1);
  tab.m.resize(n + 1);
  tab.I.resize(n + 1);
  State y{0.0, 0.0, 0.0};
  tab.V[0] = tab.m[0] = tab.I[0] = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = kTableStep * static_cast<double>(k);
    // The sqrt at the origin spoils RK4 order; substep hard near zero.
    const int sub = t < 0.05 ? 256 : 8;
    const double h = kTableStep / sub;
    for (int j = 0; j < sub; ++j) y = rk4(t + h * j, y, h);
    tab.V[k + 1] = y.V;
    tab.m[k + 1] = y.m;
    tab.I[k + 1] = y.I;
  }
  return tab;
}

double hermite(double y0, double y1, double d0, double d1, double h, double s) {
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * d0 + (-2 * s3 + 3 * s2) * y1 +
         (s3 - s2) * h * d1;
}

std::size_t path_index(const BrownianPath& path, double t, const char* who) {
  const double x = (t - path.t0) / path.dt;
  const double k = std::round(x);
  if (std::fabs(x - k) > 1e-6 || k < 0.0 || k > static_cast<double>(path.size() - 1))
    throw DomainError(std::string(who) + ": time is not a node of the Brownian path");
  return static_cast<std::size_t>(k);
}

// Gauss-Legendre nodes and weights on [0, 1].
constexpr double kGLx[3] = {0.1127016653792583, 0.5, 0.8872983346207417};
constexpr double kGLw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

double interp(const std::vector<double>& v, double dt, double t) {
  const double x = t / dt;
  const double last = static_cast<double>(v.size() - 1);
  if (x < -1e-9 || x > last + 1e-6) throw RangeError("gaussian functional: time outside the mesh");
  const double xc = std::clamp(x, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(xc), v.size() - 2);
  const double w = xc - static_cast<double>(k);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

}  // namespace

double CovarianceTable::m_at(double t) const {
  if (t < 0.0) throw DomainError("covariance table: negative time");
  if (t >= t_max) {
    // Large-t expansion m = 1/(8t) + 5/(64 t^{5/2}) + ..., anchored to the table end.
    const double lead = 1.0 / (8.0 * t) + 5.0 / (64.0 * std::pow(t, 2.5));
    const double at_end = 1.0 / (8.0 * t_max) + 5.0 / (64.0 * std::pow(t_max, 2.5));
    return lead + (m.back() - at_end) * std::pow(t_max / t, 3.5);
  }
  const double x = t / h;
  const auto k = std::min(static_cast<std::size_t>(x), m.size() - 2);
  const double s = x - static_cast<double>(k);
  const double t0 = h * static_cast<double>(k), t1 = t0 + h;
  const double d0 = V[k] - 2.0 * std::sqrt(t0) * m[k];
  const double d1 = V[k + 1] - 2.0 * std::sqrt(t1) * m[k + 1];
  return hermite(m[k], m[k + 1], d0, d1, h, s);
}

double CovarianceTable::I_at(double t) const {
  if (t < 0.0) throw DomainError("covariance table: negative time");
  if (t >= t_max) {
    return I.back() + std::log(t / t_max) / 8.0 +
           (5.0 / 96.0) * (std::pow(t_max, -1.5) - std::pow(t, -1.5));
  }
  const double x = t / h;
  const auto k = std::min(static_cast<std::size_t>(x), I.size() - 2);
  const double s = x - static_cast<double>(k);
  return hermite(I[k], I[k + 1], m[k], m[k + 1], h, s);
}

const CovarianceTable& covariance_table() {
  static const CovarianceTable table = build_table();
  return table;
}

double mean_correction(double beta, double t) {
  if (!(beta > 0.0)) throw DomainError("mean_correction: beta must be positive");
  return 4.0 / beta * covariance_table().m_at(t);
}

double mean_correction_integral(double beta, double t) {
  if (!(beta > 0.0)) throw DomainError("mean_correction: beta must be positive");
  return 4.0 / beta * covariance_table().I_at(t);
}

std::vector<double> compute_X(const BrownianPath& path, double t_max) {
  if (t_max < 0.0) throw DomainError("compute_X: t_max must be non-negative");
  const std::size_t k0 = path_index(path, 0.0, "compute_X");
  const double dt = path.dt;
  const auto n = static_cast<std::size_t>(std::lround(t_max / dt));
  if (k0 + n > path.size() - 1) throw RangeError("compute_X: t_max beyond the Brownian path");
  // Decay factors and bridge weights depend only on (dt, k); every path on the
  // same mesh reuses them.
  thread_local double cached_dt = 0.0;
  thread_local std::vector<double> decay, weight;
  if (cached_dt != dt) {
    cached_dt = dt;
    decay.clear();
    weight.clear();
  }
  for (std::size_t k = decay.size(); k < n; ++k) {
    const double u = dt * static_cast<double>(k), v = u + dt;
    const double v32 = v * std::sqrt(v);
    double w = 0.0;
    for (int q = 0; q < 3; ++q) {
      const double tq = u + dt * kGLx[q];
      w += kGLw[q] * std::exp((4.0 / 3.0) * (tq * std::sqrt(tq) - v32));
    }
    decay.push_back(std::exp(-(4.0 / 3.0) * (v32 - u * std::sqrt(u))));
    weight.push_back(w);
  }
  std::vector<double> X(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double dB = path.values[k0 + k + 1] - path.values[k0 + k];
    X[k + 1] = decay[k] * X[k] + weight[k] * dB;
  }
  return X;
}

double GaussianFunctional::X_at(double t) const { return interp(X, dt, t); }

double GaussianFunctional::int_X_at(double t) const {
  const double x = t / dt;
  const double last = static_cast<double>(X.size() - 1);
  if (x < -1e-9 || x > last + 1e-6) throw RangeError("gaussian functional: time outside the mesh");
  const double xc = std::clamp(x, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(xc), X.size() - 2);
  const double tau = (xc - static_cast<double>(k)) * dt;
  return int_X[k] + 0.5 * tau * (X[k] + X_at(t));
}

GaussianFunctional gaussian_functional(const BrownianPath& path, double t_max) {
  GaussianFunctional gf;
  gf.dt = path.dt;
  gf.X = compute_X(path, t_max);
  if (gf.X.size() < 2) throw DomainError("gaussian_functional: need at least one step");
  gf.int_X.assign(gf.X.size(), 0.0);
  for (std::size_t k = 1; k < gf.X.size(); ++k)
    gf.int_X[k] = gf.int_X[k - 1] + 0.5 * gf.dt * (gf.X[k - 1] + gf.X[k]);
  return gf;
}

cplx theta(cplx lambda, double t, double X_value, double beta) {
  if (!(t > 0.0)) throw DomainError("theta: t must be positive");
  const double r = std::sqrt(t);
  return r + lambda / (2.0 * r) - 1.0 / (4.0 * (t + 1.0)) + X_value - mean_correction(beta, t);
}

cplx ThetaProcess::int_theta(std::size_t k) const {
  const double t = time(k);
  return (2.0 / 3.0) * t * std::sqrt(t) + lambda * std::sqrt(t) - 0.25 * std::log1p(t) + int_X[k] -
         int_mean_correction[k];
}

ThetaProcess theta_process(const BrownianPath& path, cplx lambda, double t_max) {
  const GaussianFunctional gf = gaussian_functional(path, t_max);
  ThetaProcess th;
  th.lambda = lambda;
  th.beta = path.beta;
  th.dt = gf.dt;
  th.X = gf.X;
  th.int_X = gf.int_X;
  const std::size_t n = th.X.size();
  th.mean_correction.resize(n);
  th.int_mean_correction.resize(n);
  th.theta.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = th.time(k);
    th.mean_correction[k] = mean_correction(th.beta, t);
    th.int_mean_correction[k] = mean_correction_integral(th.beta, t);
    th.theta[k] = k == 0 ? cplx(std::nan(""), 0.0) : theta(lambda, t, th.X[k], th.beta);
  }
  return th;
}

double cstar_integrand(double t, double s, double u) {
  return std::exp(-(4.0 / 3.0) * (t * std::sqrt(t) - u * std::sqrt(u)) -
                  (4.0 / 3.0) * (s * std::sqrt(s) - u * std::sqrt(u)));
}

double cstar_partial(double T) {
  if (!(T > 0.0)) throw DomainError("cstar_partial: T must be positive");
  return 2.0 * covariance_table().I_at(T) - std::log(T) / 4.0;
}

CStarEstimate c_star(double T_cut, double tol) {
  if (T_cut < 20.0) throw DomainError("c_star: T_cut must be at least 20");
  if (4.0 * T_cut > covariance_table().t_max) throw DomainError("c_star: T_cut beyond the table");
  // cstar_partial(T) = c + a T^{-3/2} + b T^{-3} + ..., eliminated in two passes.
  const double f1 = cstar_partial(T_cut), f2 = cstar_partial(2.0 * T_cut),
               f3 = cstar_partial(4.0 * T_cut);
  const double r1 = std::pow(2.0, 1.5), r2 = 8.0;
  const double g1 = (r1 * f2 - f1) / (r1 - 1.0), g2 = (r1 * f3 - f2) / (r1 - 1.0);
  CStarEstimate e;
  e.value = (r2 * g2 - g1) / (r2 - 1.0);
  e.error = std::fabs(e.value - g2);
  e.T_cut = T_cut;
  e.converged = e.error < tol;
  return e;
}

cplx SAiPath::value(std::size_t k) const { return sai.at(k) * std::exp(log_scale); }
cplx SAiPath::derivative(std::size_t k) const { return sai_prime.at(k) * std::exp(log_scale); }

cplx SAiPath::value_at(double t) const {
  const double x = (t - t_min) / dt;
  const double last = static_cast<double>(sai.size() - 1);
  if (x < -1e-9 || x > last + 1e-9) throw RangeError("SAiPath: time outside the mesh");
  const double xc = std::clamp(x, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(xc), sai.size() - 2);
  const double w = xc - static_cast<double>(k);
  return ((1.0 - w) * sai[k] + w * sai[k + 1]) * std::exp(log_scale);
}

cplx SAiPath::derivative_at(double t) const {
  const double x = (t - t_min) / dt;
  const double last = static_cast<double>(sai.size() - 1);
  if (x < -1e-9 || x > last + 1e-9) throw RangeError("SAiPath: time outside the mesh");
  const double xc = std::clamp(x, 0.0, last);
  const auto k = std::min(static_cast<std::size_t>(xc), sai.size() - 2);
  const double w = xc - static_cast<double>(k);
  return ((1.0 - w) * sai_prime[k] + w * sai_prime[k + 1]) * std::exp(log_scale);
}

double sai_seed_time(const BrownianPath& path, cplx lambda, double T) {
  if (!(T >= 8.0)) throw DomainError("sai_backward: seed time must be at least 8");
  const double target = T + std::max(0.0, -lambda.real());
  return path.dt * std::ceil(target / path.dt - 1e-9);
}

SAiPath sai_backward(const BrownianPath& path, cplx lambda, double T, double t_min, double dt) {
  const double Te = sai_seed_time(path, lambda, T);
  return sai_backward(path, gaussian_functional(path, Te), lambda, T, t_min, dt);
}

SAiPath sai_backward(const BrownianPath& path, const GaussianFunctional& gf, cplx lambda, double T,
                     double t_min, double dt) {
  if (dt <= 0.0) dt = path.dt;
  const double ratio = path.dt / dt;
  if (std::fabs(ratio - std::round(ratio)) > 1e-9 * ratio)
    throw DomainError("sai_backward: dt must divide the path step");
  path_index(path, t_min, "sai_backward");
  const double Te = sai_seed_time(path, lambda, T);
  if (Te > gf.t_max() + 1e-9 * path.dt) throw RangeError("sai_backward: noise functional too short");
  if (t_min >= Te) throw DomainError("sai_backward: t_min must lie below the seed time");

  const AiryLogValue a = airy_log_asymptotic(Te + lambda);
  const double Xt = gf.X_at(Te);
  const cplx D = a.bi_ratio - a.ai_ratio;
  const cplx L = a.log_ai - gf.int_X_at(Te) + mean_correction_integral(path.beta, Te) - Xt / D;
  const cplx c1 = std::exp(cplx(0.0, L.imag()));
  const SolutionPath sol = solve_ivp(path, lambda, Te, c1, c1 * a.ai_ratio, t_min, Te, dt);

  SAiPath out;
  out.lambda = lambda;
  out.beta = path.beta;
  out.t_min = t_min;
  out.dt = dt;
  out.seed_time = Te;
  out.construction = SAiConstruction::backward_seeded;
  out.sai = sol.phi;
  out.sai_prime = sol.phi_prime;
  out.log_scale = L.real();
  return out;
}

ForwardLimit sai_forward_limit(const BrownianPath& path, cplx lambda, double s,
                               const std::vector<double>& T_list, double dt) {
  if (T_list.empty()) throw DomainError("sai_forward_limit: empty T list");
  if (!std::is_sorted(T_list.begin(), T_list.end()))
    throw DomainError("sai_forward_limit: T list must be increasing");
  if (dt <= 0.0) dt = path.dt;
  const double T_last = T_list.back();
  if (T_last > 14.0 + 1e-12) throw DomainError("sai_forward_limit: T must not exceed 14");
  if (T_list.front() <= s) throw DomainError("sai_forward_limit: T must exceed s");
  const GaussianFunctional gf = gaussian_functional(path, T_last);
  const SolutionPath f = solve_ivp(path, lambda, s, 1.0, 0.0, s, T_last, dt);
  ForwardLimit out;
  for (double T : T_list) {
    const AiryLogValue a = airy_log_asymptotic(T + lambda);
    // Everything but f(T) in log space: f can sit near e^{35}.
    const cplx logw = -gf.int_X_at(T) + mean_correction_integral(path.beta, T) - a.log_bi -
                      0.5 * std::log(M_PI);
    out.T.push_back(T);
    out.values.push_back(f.value(T) * std::exp(logw));
  }
  return out;
}

double envelope_check(const SAiPath& sai, const GaussianFunctional& gf, double T_from, int ell,
                      double c) {
  if (T_from < 4.0) throw DomainError("envelope_check: T_from must be at least 4");
  if (ell != 0 && ell != 1) throw DomainError("envelope_check: ell must be 0 or 1");
  const double sign = ell == 0 ? 1.0 : -1.0;
  const double p = (sign - 2.0 / sai.beta) / 4.0;
  const double target = sign / std::sqrt(4.0 * M_PI);
  double sup = 0.0;
  for (std::size_t k = 0; k < sai.size(); ++k) {
    const double t = sai.time(k);
    if (t < T_from - 1e-12) continue;
    const cplx m = ell == 0 ? sai.sai[k] : sai.sai_prime[k];
    const cplx expo = p * std::log(t) + (2.0 / 3.0) * std::pow(t + sai.lambda, 1.5) + gf.int_X_at(t) -
                      2.0 * c / sai.beta + sai.log_scale;
    sup = std::max(sup, std::abs(m * std::exp(expo) - target));
  }
  return sup;
}

L2Record l2_check(const SAiPath& sai, const GaussianFunctional& gf, double c) {
  const double p = (1.0 - 2.0 / sai.beta) / 4.0;
  L2Record r;
  double prev_s = 0.0, prev_e = 0.0;
  bool first = true;
  for (std::size_t k = 0; k < sai.size(); ++k) {
    const double t = sai.time(k);
    if (t < -1e-12) continue;
    const double s2 = std::norm(sai.value(k));
    double e2 = 0.0;
    if (t > 0.0) {
      const cplx expo = -p * std::log(t) - (2.0 / 3.0) * std::pow(t + sai.lambda, 1.5) - gf.int_X_at(t) +
                        2.0 * c / sai.beta;
      e2 = std::norm(std::exp(expo)) / (4.0 * M_PI);
    }
    if (!first) {
      r.integral += 0.5 * sai.dt * (prev_s + s2);
      r.envelope_integral += 0.5 * sai.dt * (prev_e + e2);
    }
    first = false;
    prev_s = s2;
    prev_e = e2;
  }
  return r;
}

PointProcessSample sai_zero_scan(const BrownianPath& path, double lambda_min, double lambda_max,
                                 double dt, int k_max, double T, double tol) {
  if (!(lambda_max > lambda_min)) throw DomainError("sai_zero_scan: empty lambda window");
  if (k_max < 1) throw DomainError("sai_zero_scan: k_max must be positive");
  if (!(tol > 0.0)) throw DomainError("sai_zero_scan: tol must be positive");
  const GaussianFunctional gf = gaussian_functional(path, sai_seed_time(path, lambda_min, T));
  PointProcessSample out;
  out.lambda_min = lambda_min;
  out.lambda_max = lambda_max;
  out.method = "sai-zeros";
  out.beta = path.beta;
  out.t_horizon = T;
  auto f = [&](double lam) {
    ++out.evaluations;
    const SAiPath p = sai_backward(path, gf, lam, T, 0.0, dt);
    return p.sai.front().real();
  };
  constexpr double kStep = 0.05;
  double hi = lambda_max, f_hi = f(hi);
  while (static_cast<int>(out.eigenvalues.size()) < k_max && hi > lambda_min) {
    const double lo = std::max(lambda_min, hi - kStep);
    const double f_lo = f(lo);
    if ((f_lo < 0.0) != (f_hi < 0.0)) {
      out.eigenvalues.push_back(bisect(f, lo, hi, tol));
    }
    hi = lo;
    f_hi = f_lo;
  }
  out.complete = static_cast<int>(out.eigenvalues.size()) == k_max;
  return out;
}

ShiftInvarianceResult shift_invariance_test(std::uint64_t seed_a, std::uint64_t seed_b, double sigma,
                                            double t, double lambda, int M, double beta, double dt,
                                            double T, int workers) {
  if (M < 1) throw DomainError("shift_invariance_test: M must be positive");
  if (!(dt > 0.0)) throw DomainError("shift_invariance_test: dt must be positive");
  ShiftInvarianceResult r;
  r.sample_a.resize(static_cast<std::size_t>(M));
  r.sample_b.resize(static_cast<std::size_t>(M));
  auto one = [&](std::uint64_t seed, std::uint64_t i, double lam, double time) {
    const double t0 = dt * std::floor(std::min(0.0, time) / dt + 1e-9);
    const double top = T + std::max(0.0, -lam) + 2.0 * dt;
    const int steps = static_cast<int>(std::ceil((top - t0) / dt));
    const BrownianPath p = sample_brownian_path(Seed{seed, i}, t0, dt, steps, beta);
    const SAiPath s = sai_backward(p, lam, T, t0);
    return s.value_at(time).real();
  };
  parallel_for(M, workers, [&](long i) {
    const auto idx = static_cast<std::uint64_t>(i);
    r.sample_a[static_cast<std::size_t>(i)] = one(seed_a, idx, lambda, t);
    r.sample_b[static_cast<std::size_t>(i)] = one(seed_b, idx, lambda - sigma, t + sigma);
  });
  r.ks = ks_two_sample(r.sample_a, r.sample_b);
  r.critical = ks_two_sample_critical(r.sample_a.size(), r.sample_b.size());
  auto neg = [](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x < 0.0; })) /
           static_cast<double>(v.size());
  };
  r.negative_fraction_a = neg(r.sample_a);
  r.negative_fraction_b = neg(r.sample_b);
  const double m = static_cast<double>(M);
  r.fraction_se = std::sqrt(r.negative_fraction_a * (1.0 - r.negative_fraction_a) / m +
                            r.negative_fraction_b * (1.0 - r.negative_fraction_b) / m);
  return r;
}

}  // namespace airybeta
