#include "airybeta/sae.hpp"

#include <algorithm>
#include <cmath>

#include "airybeta/errors.hpp"

namespace airybeta {

namespace {

// U(b, a) on the piecewise linear path.
cplx increment(const BrownianPath& path, cplx lambda, double a, double b) {
  return 0.5 * (b - a) * (b + a) + (path(b) - path(a)) + lambda * (b - a);
}

struct Mesh {
  double t_min;
  double dt;
  long base;
  long size;
};

Mesh make_mesh(double s, double t_min, double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("sae: dt must be positive");
  if (!(t_max > t_min)) throw DomainError("sae: degenerate time range");
  if (s < t_min || s > t_max) throw DomainError("sae: base point outside the time range");
  const double span = t_max - t_min;
  const double lo = (s - t_min) / dt;
  const double hi = (t_max - s) / dt;
  const double n_lo = std::round(lo);
  const double n_hi = std::round(hi);
  const double tol = 1e-9 * std::max(1.0, span / dt);
  if (std::fabs(lo - n_lo) > tol || std::fabs(hi - n_hi) > tol) {
    throw DomainError("sae: dt must divide both sides of the range around s");
  }
  Mesh m;
  m.base = static_cast<long>(n_lo);
  m.size = static_cast<long>(n_lo + n_hi) + 1;
  m.dt = dt;
  m.t_min = s - static_cast<double>(m.base) * dt;
  return m;
}

double node_time(double s, long base, double dt, long k) {
  return s + static_cast<double>(k - base) * dt;
}

void step(const BrownianPath& path, cplx lambda, Scheme scheme, double t, double t1, cplx& phi,
          cplx& dphi) {
  const double h = t1 - t;
  if (scheme == Scheme::verlet) {
    const double th = 0.5 * (t + t1);
    dphi += increment(path, lambda, t, th) * phi;
    phi += h * dphi;
    dphi += increment(path, lambda, th, t1) * phi;
  } else {
    const cplx next = dphi + increment(path, lambda, t, t1) * phi;
    phi += 0.5 * h * (dphi + next);
    dphi = next;
  }
}

cplx interpolate(const std::vector<cplx>& v, double t_min, double dt, double t) {
  const double x = (t - t_min) / dt;
  const double last = static_cast<double>(v.size() - 1);
  const double slack = 1e-9;
  if (x < -slack || x > last + slack) throw RangeError("sae: time outside the solution mesh");
  const double nearest = std::round(x);
  if (std::fabs(x - nearest) < slack) return v[static_cast<std::size_t>(std::clamp(nearest, 0.0, last))];
  const auto k = static_cast<std::size_t>(x);
  const double w = x - static_cast<double>(k);
  return (1.0 - w) * v[k] + w * v[k + 1];
}

// Trapezoid cumulative integral outwards from the base node, signed.
std::vector<cplx> cumulative_from_base(const std::vector<cplx>& f, long base, double dt) {
  std::vector<cplx> out(f.size(), cplx(0.0));
  const long n = static_cast<long>(f.size());
  for (long k = base + 1; k < n; ++k) out[k] = out[k - 1] + 0.5 * dt * (f[k - 1] + f[k]);
  for (long k = base - 1; k >= 0; --k) out[k] = out[k + 1] - 0.5 * dt * (f[k + 1] + f[k]);
  return out;
}

void check_shared(const SolutionPath& f, const SolutionPath& g) {
  if (f.path != g.path || f.lambda != g.lambda || f.t_min != g.t_min || f.dt != g.dt ||
      f.size() != g.size() || f.base_s != g.base_s) {
    throw ContractError("sae: solutions do not share path, lambda and mesh");
  }
}

}  // namespace

cplx kernel_U(const BrownianPath& path, cplx lambda, double t, double u) {
  return 0.5 * (t * t - u * u) + (path(t) - path(u)) + lambda * (t - u);
}

cplx SolutionPath::value(double t) const { return interpolate(phi, t_min, dt, t); }
cplx SolutionPath::derivative(double t) const { return interpolate(phi_prime, t_min, dt, t); }

SolutionPath solve_ivp(const BrownianPath& path, cplx lambda, double s, cplx c1, cplx c2,
                       double t_min, double t_max, double dt, Scheme scheme) {
  const Mesh m = make_mesh(s, t_min, t_max, dt);
  if (!path.contains(node_time(s, m.base, dt, 0)) || !path.contains(node_time(s, m.base, dt, m.size - 1))) {
    throw RangeError("solve_ivp: time range exceeds the Brownian path");
  }
  SolutionPath sol;
  sol.lambda = lambda;
  sol.base_s = s;
  sol.c1 = c1;
  sol.c2 = c2;
  sol.t_min = m.t_min;
  sol.dt = dt;
  sol.base_index = m.base;
  sol.path = &path;
  sol.scheme = scheme;
  sol.phi.assign(static_cast<std::size_t>(m.size), cplx(0.0));
  sol.phi_prime.assign(static_cast<std::size_t>(m.size), cplx(0.0));
  sol.phi[m.base] = c1;
  sol.phi_prime[m.base] = c2;

  cplx phi = c1, dphi = c2;
  for (long k = m.base; k + 1 < m.size; ++k) {
    step(path, lambda, scheme, node_time(s, m.base, dt, k), node_time(s, m.base, dt, k + 1), phi, dphi);
    sol.phi[k + 1] = phi;
    sol.phi_prime[k + 1] = dphi;
  }
  phi = c1;
  dphi = c2;
  for (long k = m.base; k > 0; --k) {
    step(path, lambda, scheme, node_time(s, m.base, dt, k), node_time(s, m.base, dt, k - 1), phi, dphi);
    sol.phi[k - 1] = phi;
    sol.phi_prime[k - 1] = dphi;
  }
  return sol;
}

FundamentalPair dirichlet_neumann(const BrownianPath& path, cplx lambda, double s, double t_min,
                                  double t_max, double dt, Scheme scheme) {
  return {solve_ivp(path, lambda, s, 1.0, 0.0, t_min, t_max, dt, scheme),
          solve_ivp(path, lambda, s, 0.0, 1.0, t_min, t_max, dt, scheme)};
}

cplx wronskian(const SolutionPath& f, const SolutionPath& g, double t) {
  check_shared(f, g);
  return f.value(t) * g.derivative(t) - f.derivative(t) * g.value(t);
}

cplx sa_kernel(const BrownianPath& path, cplx lambda, double t, double u, KernelVariant variant,
               double dt) {
  if (!(dt > 0.0)) throw DomainError("sa_kernel: dt must be positive");
  if (t == u) {
    switch (variant) {
      case KernelVariant::value: return 0.0;
      case KernelVariant::du: return 1.0;
      case KernelVariant::dt: return -1.0;
      case KernelVariant::dtdu: return 0.0;
    }
  }
  const double span = std::fabs(t - u);
  const double n = std::max(1.0, std::round(span / dt));
  const FundamentalPair p = dirichlet_neumann(path, lambda, u, std::min(t, u), std::max(t, u), span / n);
  const std::size_t k = t > u ? p.f.size() - 1 : 0;
  switch (variant) {
    case KernelVariant::value: return -p.g.phi[k];
    case KernelVariant::du: return p.f.phi[k];
    case KernelVariant::dt: return -p.g.phi_prime[k];
    case KernelVariant::dtdu: return p.f.phi_prime[k];
  }
  return 0.0;
}

cplx sa_kernel_from_pair(const FundamentalPair& pair, double t, double u, KernelVariant variant) {
  check_shared(pair.f, pair.g);
  const bool dt_ = variant == KernelVariant::dt || variant == KernelVariant::dtdu;
  const bool du_ = variant == KernelVariant::du || variant == KernelVariant::dtdu;
  const cplx ft = dt_ ? pair.f.derivative(t) : pair.f.value(t);
  const cplx gt = dt_ ? pair.g.derivative(t) : pair.g.value(t);
  const cplx fu = du_ ? pair.f.derivative(u) : pair.f.value(u);
  const cplx gu = du_ ? pair.g.derivative(u) : pair.g.value(u);
  return ft * gu - fu * gt;
}

ForcedSolution solve_forced(const FundamentalPair& pair, const std::vector<cplx>& zeta) {
  const SolutionPath& f = pair.f;
  const SolutionPath& g = pair.g;
  check_shared(f, g);
  if (zeta.size() != f.size()) throw ContractError("solve_forced: forcing must be sampled on the mesh");
  const long base = f.base_index;
  if (std::abs(zeta[base]) > 1e-14) throw ContractError("solve_forced: forcing must vanish at the base point");

  // Stieltjes form h(t) = g'(t) int_s^t f dzeta - f'(t) int_s^t g dzeta with
  // trapezoid weights. Only increments of zeta enter, so rough forcing costs
  // nothing beyond the mesh error of the pair.
  const std::size_t n = f.size();
  std::vector<cplx> If(n, cplx(0.0)), Ig(n, cplx(0.0));
  for (std::size_t k = base + 1; k < n; ++k) {
    const cplx dz = zeta[k] - zeta[k - 1];
    If[k] = If[k - 1] + 0.5 * (f.phi[k - 1] + f.phi[k]) * dz;
    Ig[k] = Ig[k - 1] + 0.5 * (g.phi[k - 1] + g.phi[k]) * dz;
  }
  for (long k = base - 1; k >= 0; --k) {
    const cplx dz = zeta[k] - zeta[k + 1];
    If[k] = If[k + 1] + 0.5 * (f.phi[k + 1] + f.phi[k]) * dz;
    Ig[k] = Ig[k + 1] + 0.5 * (g.phi[k + 1] + g.phi[k]) * dz;
  }

  ForcedSolution out;
  out.t_min = f.t_min;
  out.dt = f.dt;
  out.base_index = base;
  out.h.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.h[k] = g.phi_prime[k] * If[k] - f.phi_prime[k] * Ig[k];
  out.residual = volterra_residual(*f.path, f.lambda, f.base_s, f.dt, base, out.h, zeta);
  return out;
}

double volterra_residual(const BrownianPath& path, cplx lambda, double s, double dt,
                         long base_index, const std::vector<cplx>& h,
                         const std::vector<cplx>& zeta, long stride) {
  if (h.size() != zeta.size()) throw ContractError("volterra_residual: size mismatch");
  if (stride < 1) throw DomainError("volterra_residual: stride must be >= 1");
  // Subsample outwards from the base so the base stays a node.
  const long n = static_cast<long>(h.size());
  const long lo = base_index % stride;
  std::vector<long> idx;
  for (long k = lo; k < n; k += stride) idx.push_back(k);
  const double step_dt = dt * static_cast<double>(stride);
  const long base = (base_index - lo) / stride;
  std::vector<cplx> hs(idx.size()), Vh(idx.size()), V(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const double t = node_time(s, base_index, dt, idx[i]);
    V[i] = kernel_U(path, lambda, t, s);
    hs[i] = h[idx[i]];
    Vh[i] = V[i] * hs[i];
  }
  const std::vector<cplx> I1 = cumulative_from_base(hs, base, step_dt);
  const std::vector<cplx> I2 = cumulative_from_base(Vh, base, step_dt);
  double worst = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    // U(t,v) = U(t,s) - U(v,s).
    const cplx integral = V[i] * I1[i] - I2[i];
    worst = std::max(worst, std::abs(hs[i] - integral - zeta[idx[i]]));
  }
  return worst;
}

double sa2_residual(const SolutionPath& sol, long stride) {
  std::vector<cplx> zeta(sol.size());
  for (std::size_t k = 0; k < sol.size(); ++k) {
    const double t = node_time(sol.base_s, sol.base_index, sol.dt, static_cast<long>(k));
    zeta[k] = sol.c2 + sol.c1 * kernel_U(*sol.path, sol.lambda, t, sol.base_s);
  }
  return volterra_residual(*sol.path, sol.lambda, sol.base_s, sol.dt, sol.base_index,
                           sol.phi_prime, zeta, stride);
}

PicardResult picard_kernel(const BrownianPath& path, cplx lambda, double s, double t, int m_max,
                           int n_quad, double tol) {
  if (std::fabs(t - s) > 3.0) throw DomainError("picard_kernel: |t - s| must be at most 3");
  if (m_max < 1 || m_max > 40) throw DomainError("picard_kernel: m_max must lie in [1, 40]");
  if (n_quad < 0) throw DomainError("picard_kernel: n_quad must be non-negative");
  // Default: eight panels per path step, so path kinks sit on nodes and the
  // O(h * quadratic variation) quadrature error is well below the series tail.
  if (n_quad == 0) n_quad = 8 * std::max(1, static_cast<int>(std::lround(std::fabs(t - s) / path.dt)));
  PicardResult out;
  if (t == s) {
    out.value = 0.0;
    out.terms.assign(1, cplx(0.0));
    out.converged = true;
    return out;
  }
  const double h = (t - s) / n_quad;
  const std::size_t n = static_cast<std::size_t>(n_quad) + 1;
  std::vector<cplx> V(n);
  for (std::size_t i = 0; i < n; ++i) V[i] = kernel_U(path, lambda, s + h * static_cast<double>(i), s);
  for (std::size_t i = 0; i < n; ++i) out.sup_U = std::max(out.sup_U, std::abs(V[n - 1] - V[i]));

  std::vector<cplx> K = V, next(n);
  out.terms.push_back(K[n - 1]);
  out.value = K[n - 1];
  for (int m = 2; m <= m_max; ++m) {
    cplx c1 = 0.0, c2 = 0.0;
    next[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
      c1 += 0.5 * h * (K[i - 1] + K[i]);
      c2 += 0.5 * h * (V[i - 1] * K[i - 1] + V[i] * K[i]);
      next[i] = V[i] * c1 - c2;
    }
    K.swap(next);
    out.terms.push_back(K[n - 1]);
    out.value += K[n - 1];
    if (std::abs(K[n - 1]) <= tol * std::abs(out.value)) {
      out.converged = true;
      break;
    }
  }
  return out;
}

double growth_envelope(cplx lambda, double t, double s) {
  const double re = lambda.real();
  auto p = [](double x) { return x > 0.0 ? std::pow(x, 1.5) : 0.0; };
  return std::exp(2.0 / 3.0 * (p(re + std::max(s, t)) - p(re + std::min(s, t))));
}

namespace {

std::vector<cplx> solve_perturbed(const BrownianPath& path, cplx lambda, double s, cplx c1, cplx c2,
                                  const KernelPerturbation& d1, const FunctionPerturbation& d2,
                                  const Mesh& m, double& sup_d1) {
  const long n = m.size;
  std::vector<double> t(n);
  std::vector<cplx> V(n), F(n), h(n);
  for (long k = 0; k < n; ++k) {
    t[k] = node_time(s, m.base, m.dt, k);
    V[k] = kernel_U(path, lambda, t[k], s);
    F[k] = c2 + c1 * V[k] + (d2 ? d2(t[k]) : cplx(0.0));
  }
  h[m.base] = F[m.base];
  for (int dir : {1, -1}) {
    const double sdt = dir * m.dt;
    cplx A = 0.0, Bs = 0.0;
    long prev = m.base;
    for (long k = m.base + dir; k >= 0 && k < n; k += dir) {
      const double w_prev = (prev == m.base ? 0.5 : 1.0) * sdt;
      A += w_prev * h[prev];
      Bs += w_prev * V[prev] * h[prev];
      cplx rhs = F[k] + V[k] * A - Bs;
      cplx diag = 0.0;
      if (d1) {
        for (long j = m.base; j != k; j += dir) {
          const cplx v = d1(t[k], t[j]);
          sup_d1 = std::max(sup_d1, std::abs(v));
          rhs += (j == m.base ? 0.5 : 1.0) * sdt * v * h[j];
        }
        const cplx v = d1(t[k], t[k]);
        sup_d1 = std::max(sup_d1, std::abs(v));
        diag = 0.5 * sdt * v;
      }
      h[k] = rhs / (1.0 - diag);
      prev = k;
    }
  }
  return h;
}

}  // namespace

StabilityRecord stability_probe(const BrownianPath& path, cplx lambda, double s, cplx c1, cplx c2,
                                const KernelPerturbation& delta1,
                                const FunctionPerturbation& delta2, double t_min, double t_max,
                                double dt) {
  const Mesh m = make_mesh(s, t_min, t_max, dt);
  StabilityRecord rec;
  rec.t_min = m.t_min;
  rec.dt = dt;
  double unused = 0.0;
  const std::vector<cplx> phi = solve_perturbed(path, lambda, s, c1, c2, {}, {}, m, unused);
  const std::vector<cplx> h = solve_perturbed(path, lambda, s, c1, c2, delta1, delta2, m, rec.sup_delta1);
  rec.weighted_deviation.resize(h.size());
  for (long k = 0; k < m.size; ++k) {
    const double t = node_time(s, m.base, dt, k);
    const double E = growth_envelope(lambda, t, s);
    rec.weighted_deviation[k] = std::abs(h[k] - phi[k]) / E;
    rec.sup_weighted = std::max(rec.sup_weighted, rec.weighted_deviation[k]);
    if (delta2) rec.sup_delta2_weighted = std::max(rec.sup_delta2_weighted, std::abs(delta2(t)) / E);
  }
  return rec;
}

}  // namespace airybeta
