#include "airybeta/riccati.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "airybeta/errors.hpp"

namespace airybeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Node values of B on the mesh s + k dt, by direct indexing when the mesh
// sits on the path grid.
class NodeSampler {
 public:
  NodeSampler(const BrownianPath& path, double s, double dt) : path_(path), s_(s), dt_(dt) {
    const double i0 = (s - path.t0) / path.dt;
    const double m = dt / path.dt;
    aligned_ = std::fabs(i0 - std::round(i0)) < 1e-7 && std::fabs(m - std::round(m)) < 1e-7 &&
               std::round(m) >= 1.0;
    i0_ = static_cast<long>(std::round(i0));
    m_ = static_cast<long>(std::round(m));
  }
  double operator()(long k) const {
    if (aligned_) {
      const long i = i0_ + k * m_;
      if (i < 0 || i >= static_cast<long>(path_.values.size())) throw RangeError("riccati: mesh exceeds the Brownian path");
      return path_.values[static_cast<std::size_t>(i)];
    }
    return path_(s_ + dt_ * static_cast<double>(k));
  }

 private:
  const BrownianPath& path_;
  double s_, dt_;
  bool aligned_ = false;
  long i0_ = 0, m_ = 1;
};

struct State {
  bool inverse = false;
  double v = 0.0;  // rho or x
};

class Integrator {
 public:
  Integrator(const BrownianPath& path, double lambda, const RiccatiOptions& opts)
      : path_(path), lambda_(lambda), opts_(opts), c3_(opts.ito_correction ? 4.0 / path.beta : 0.0) {}

  // Advance over [t, t + h] with path values Bt, Bh at the ends.
  void advance(State& st, double t, double h, double Bt, double Bh, std::uint64_t step, int depth,
               std::uint64_t pos) {
    const double dB = Bh - Bt;
    const double q = t + lambda_;
    double next;
    double change;
    if (st.inverse) {
      const double x = st.v;
      next = x + (1.0 - q * x * x + c3_ * x * x * x) * h - x * x * dB;
      change = std::fabs(next - x);
      if (change > 0.05 && depth < opts_.max_depth) {
        split(st, t, h, Bt, Bh, step, depth, pos);
        return;
      }
    } else {
      const double r = st.v;
      next = r + (q - r * r) * h + dB;
      change = std::fabs(next - r);
      if (change > 1.0 && depth < opts_.max_depth) {
        split(st, t, h, Bt, Bh, step, depth, pos);
        return;
      }
    }
    settle(st, next, t, h);
  }

  std::vector<double> blowdowns;
  long substeps = 0;

 private:
  void split(State& st, double t, double h, double Bt, double Bh, std::uint64_t step, int depth,
             std::uint64_t pos) {
    ++substeps;
    const std::uint64_t level = (static_cast<std::uint64_t>(depth + 1) << 32) | pos;
    const double Bm = bridge_midpoint(path_, t, Bt, t + h, Bh, step, level);
    advance(st, t, 0.5 * h, Bt, Bm, step, depth + 1, 2 * pos);
    advance(st, t + 0.5 * h, 0.5 * h, Bm, Bh, step, depth + 1, 2 * pos + 1);
  }

  void settle(State& st, double next, double t, double h) {
    if (st.inverse) {
      const double x = st.v;
      if (x < 0.0 && next >= 0.0) blowdowns.push_back(t + h * (-x) / (next - x));
      st.v = next;
      if (std::fabs(next) > opts_.x_back) {
        st.inverse = false;
        st.v = 1.0 / next;
      }
    } else {
      st.v = next;
      if (!std::isfinite(next) || std::fabs(next) > opts_.m_switch) {
        st.inverse = true;
        st.v = std::isfinite(next) ? 1.0 / next : -0.0;
      }
    }
  }

  const BrownianPath& path_;
  double lambda_;
  RiccatiOptions opts_;
  double c3_;
};

long mesh_steps(double s, double t_end, double dt) {
  if (!(dt > 0.0)) throw DomainError("riccati: dt must be positive");
  if (!(t_end > s)) throw DomainError("riccati: t_end must exceed s");
  const double n = (t_end - s) / dt;
  const double r = std::round(n);
  if (std::fabs(n - r) > 1e-7 * std::max(1.0, n)) throw DomainError("riccati: dt must divide t_end - s");
  return static_cast<long>(r);
}

}  // namespace

double RiccatiTrajectory::rho(std::size_t k) const {
  if (!inverse[k]) return value[k];
  return value[k] == 0.0 ? kInf : 1.0 / value[k];
}

double RiccatiTrajectory::x(std::size_t k) const {
  if (inverse[k]) return value[k];
  return 1.0 / value[k];
}

RiccatiTrajectory evolve_riccati(const BrownianPath& path, double lambda, double s, double omega,
                                 double t_end, double dt, const RiccatiOptions& opts) {
  if (std::isnan(omega) || omega == -kInf) throw DomainError("evolve_riccati: omega must lie in (-inf, +inf]");
  const long n = mesh_steps(s, t_end, dt);
  const NodeSampler B(path, s, dt);

  RiccatiTrajectory tr;
  tr.lambda = lambda;
  tr.beta = path.beta;
  tr.s = s;
  tr.omega = omega;
  tr.dt = dt;
  tr.t_end = t_end;

  State st;
  if (omega == kInf) {
    st.inverse = true;
    st.v = 0.0;
  } else if (std::fabs(omega) > opts.m_switch) {
    st.inverse = true;
    st.v = 1.0 / omega;
  } else {
    st.v = omega;
  }
  if (opts.store) {
    tr.value.reserve(static_cast<std::size_t>(n) + 1);
    tr.inverse.reserve(static_cast<std::size_t>(n) + 1);
    tr.dU.reserve(static_cast<std::size_t>(n));
    tr.value.push_back(st.v);
    tr.inverse.push_back(st.inverse);
  }

  auto record = [&](double v, bool inv, double du) {
    tr.value.push_back(v);
    tr.inverse.push_back(inv);
    tr.dU.push_back(du);
  };
  auto stop = [&](std::size_t count) {
    return opts.stop_after >= 0 && static_cast<long>(count) >= opts.stop_after;
  };

  if (opts.scheme == RiccatiScheme::projective) {
    double phi = omega == kInf ? 0.0 : 1.0;
    double dphi = omega == kInf ? 1.0 : omega;
    double last_sign = omega == kInf ? 0.0 : 1.0;
    double Bt = B(0);
    for (long k = 0; k < n; ++k) {
      const double t = s + dt * static_cast<double>(k);
      const double t1 = s + dt * static_cast<double>(k + 1);
      const double th = 0.5 * (t + t1);
      const double Bh = B(k + 1);
      const double Bm = 0.5 * (Bt + Bh);
      const double phi0 = phi;
      dphi += (0.5 * (th - t) * (th + t) + lambda * (th - t) + (Bm - Bt)) * phi;
      phi += (t1 - t) * dphi;
      dphi += (0.5 * (t1 - th) * (t1 + th) + lambda * (t1 - th) + (Bh - Bm)) * phi;
      if (phi != 0.0) {
        const double sign = phi > 0.0 ? 1.0 : -1.0;
        if (last_sign != 0.0 && sign != last_sign) {
          // Linear interpolation of phi; phi0 is zero only at a Dirichlet start.
          tr.blowdowns.push_back(phi0 == 0.0 ? t : t + (t1 - t) * phi0 / (phi0 - phi));
        }
        last_sign = sign;
      }
      const double scale = std::max(std::fabs(phi), std::fabs(dphi));
      if (scale > 1e150 || scale < 1e-150) {
        phi /= scale;
        dphi /= scale;
      }
      if (opts.store) {
        const double r = dphi / phi;
        const bool inv = !(std::fabs(r) <= opts.m_switch);
        record(inv ? phi / dphi : r, inv, 0.5 * (t1 - t) * (t1 + t) + lambda * (t1 - t) + (Bh - Bt));
      }
      Bt = Bh;
      if (stop(tr.blowdowns.size())) {
        tr.stopped_early = true;
        tr.t_end = t1;
        break;
      }
    }
    return tr;
  }

  Integrator integ(path, lambda, opts);
  double Bt = B(0);
  for (long k = 0; k < n; ++k) {
    const double t = s + dt * static_cast<double>(k);
    const double t1 = s + dt * static_cast<double>(k + 1);
    const double Bh = B(k + 1);
    integ.advance(st, t, t1 - t, Bt, Bh, static_cast<std::uint64_t>(k), 0, 0);
    if (opts.store) record(st.v, st.inverse, 0.5 * (t1 - t) * (t1 + t) + lambda * (t1 - t) + (Bh - Bt));
    Bt = Bh;
    if (stop(integ.blowdowns.size())) {
      tr.stopped_early = true;
      tr.t_end = t1;
      break;
    }
  }
  tr.blowdowns = std::move(integ.blowdowns);
  tr.substeps = integ.substeps;
  return tr;
}

long count_zeros(const RiccatiTrajectory& traj, double s, double t) {
  return static_cast<long>(std::count_if(traj.blowdowns.begin(), traj.blowdowns.end(),
                                         [&](double z) { return z >= s && z < t; }));
}

PvResult pv_reconstruct(const RiccatiTrajectory& traj, double c1, double s, double t, double eps) {
  if (c1 == 0.0) throw DomainError("pv_reconstruct: c1 must be non-zero");
  if (traj.value.empty()) throw ContractError("pv_reconstruct: trajectory was not stored");
  if (!(eps > 0.0)) throw DomainError("pv_reconstruct: eps must be positive");
  const double dt = traj.dt;
  auto node = [&](double u) {
    const double x = (u - traj.s) / dt;
    const double r = std::round(x);
    if (std::fabs(x - r) > 1e-7 * std::max(1.0, x) || r < 0.0 || r > static_cast<double>(traj.value.size() - 1)) {
      throw DomainError("pv_reconstruct: s and t must be mesh nodes within the trajectory");
    }
    return static_cast<long>(r);
  };
  const long ks = node(s), kt = node(t);
  if (kt < ks) throw DomainError("pv_reconstruct: t must not precede s");

  PvResult out;
  std::vector<double> zs;
  for (double z : traj.blowdowns) {
    if (z >= s && z < t) zs.push_back(z);
  }
  out.sign_flips = static_cast<long>(zs.size());
  double e = eps;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    e = std::min({e, zs[i] - s, t - zs[i]});
    if (i > 0) e = std::min(e, 0.5 * (zs[i] - zs[i - 1]));
  }
  out.eps_used = e;
  if (!std::isfinite(traj.rho(static_cast<std::size_t>(ks)))) out.degenerate = true;
  if (!zs.empty() && e < 2.0 * dt) out.degenerate = true;

  // Windows as node ranges [a, b] around each blow-down.
  std::vector<std::pair<long, long>> win;
  for (double z : zs) {
    long a = static_cast<long>(std::floor((z - e - traj.s) / dt));
    long b = static_cast<long>(std::ceil((z + e - traj.s) / dt));
    a = std::max(a, ks);
    b = std::min(b, kt);
    win.emplace_back(a, b);
  }

  double acc = std::log(std::fabs(c1));
  const double c2 = 2.0 / traj.beta;
  long k = ks;
  std::size_t w = 0;
  while (k < kt) {
    if (w < win.size() && k == win[w].first) {
      const long a = win[w].first, b = win[w].second;
      double part = std::log(std::fabs(traj.x(static_cast<std::size_t>(b)) / traj.x(static_cast<std::size_t>(a))));
      for (long j = a; j < b; ++j) {
        const double xj = traj.x(static_cast<std::size_t>(j));
        part += xj * traj.dU[static_cast<std::size_t>(j)] - c2 * xj * xj * dt;
      }
      acc += part;
      k = b;
      ++w;
      continue;
    }
    const double r0 = traj.rho(static_cast<std::size_t>(k));
    const double r1 = traj.rho(static_cast<std::size_t>(k + 1));
    acc += 0.5 * dt * (r0 + r1);
    ++k;
  }
  out.log_abs_phi = acc;
  if (!std::isfinite(acc)) out.degenerate = true;
  return out;
}

long airy_beta_counting(const BrownianPath& path, double lambda, double t_max, double dt, long stop_after) {
  RiccatiOptions opts;
  opts.store = false;
  opts.stop_after = stop_after;
  const RiccatiTrajectory tr = evolve_riccati(path, lambda, 0.0, kInf, t_max, dt, opts);
  return static_cast<long>(tr.blowdowns.size());
}

PointProcessSample sample_airy_beta(const BrownianPath& path, double lambda_min, double lambda_max,
                                    int k_max, double dt, double t_max, double tol) {
  if (!(lambda_max > lambda_min)) throw DomainError("sample_airy_beta: empty lambda window");
  if (k_max < 1) throw DomainError("sample_airy_beta: k_max must be positive");
  if (!(tol > 0.0)) throw DomainError("sample_airy_beta: tol must be positive");
  PointProcessSample out;
  out.lambda_min = lambda_min;
  out.lambda_max = lambda_max;
  out.method = "riccati-counting";
  out.beta = path.beta;
  out.t_horizon = t_max;

  // Cached counts: value and whether it was capped by early stopping.
  struct Entry {
    long count;
    bool capped;
  };
  std::map<double, Entry> cache;
  auto at_least = [&](double lam, long i) {
    auto it = cache.find(lam);
    if (it != cache.end() && (it->second.count >= i || !it->second.capped)) return it->second.count >= i;
    const long c = airy_beta_counting(path, lam, t_max, dt, i);
    ++out.evaluations;
    cache[lam] = Entry{c, c >= i};
    return c >= i;
  };

  if (at_least(lambda_max, 1)) out.complete = false;
  for (long i = 1; i <= k_max; ++i) {
    // Bracket from cached evaluations: lo has >= i points above, hi fewer.
    double lo = lambda_min, hi = lambda_max;
    for (const auto& [lam, e] : cache) {
      if (e.count >= i) lo = std::max(lo, lam);
      else if (!e.capped) hi = std::min(hi, lam);
    }
    if (!at_least(lo, i)) {
      out.complete = false;
      break;
    }
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      (at_least(mid, i) ? lo : hi) = mid;
    }
    out.eigenvalues.push_back(0.5 * (lo + hi));
  }
  return out;
}

}  // namespace airybeta
