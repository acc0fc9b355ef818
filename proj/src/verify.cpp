#include "airybeta/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "airybeta/airy.hpp"
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

namespace airybeta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Seed family(const VerifyConfig& c, int id, std::uint64_t index) {
  return Seed{c.seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(id), index};
}

BrownianPath forward_path(Seed seed, double t_end, double dt, double beta = 2.0) {
  return sample_brownian_path(seed, 0.0, dt, static_cast<int>(std::lround(t_end / dt)), beta);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(4);
  os << x;
  return os.str();
}

struct Builder {
  CriterionResult r;
  explicit Builder(int id) {
    r.id = id;
    r.title = criterion_title(id);
  }
  void metric(const std::string& name, double v) { r.metrics.push_back({name, v}); }
};

// Backward solve of the noise-free equation from T = 8 against Ai on [-5, 8].
CriterionResult deterministic_reduction(const VerifyConfig&) {
  Builder b(1);
  const double dt = 1e-4;
  const BrownianPath zero = zero_path(-5.0, dt, 130000, 2.0);
  const AiryValue a8 = airy(8.0);
  const SolutionPath sol = solve_ivp(zero, 0.0, 8.0, a8.ai, a8.ai_prime, -5.0, 8.0, dt);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.size(); ++k)
    worst = std::max(worst, std::abs(sol.phi[k] - airy_ai(sol.time(k))));
  b.metric("sup_error", worst);
  b.r.passed = worst < 1e-3;
  b.r.detail = "sup |phi - Ai| = " + fmt(worst) + " (gate 1e-3)";
  return b.r;
}

CriterionResult wronskian_kernel(const VerifyConfig& c) {
  Builder b(2);
  const double dt = 1e-4;
  double w_worst = 0.0, base_worst = 0.0, deriv_worst = 0.0;
  Stream s(family(c, 2, 1u << 20), Tag::generic);
  for (int i = 0; i < 20; ++i) {
    const double beta = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 2.0 : 4.0);
    const BrownianPath p = sample_brownian_path(family(c, 2, static_cast<std::uint64_t>(i)), -4.0, dt, 80000, beta);
    const cplx lam(4.0 * s.uniform() - 2.0, i % 2 == 0 ? 0.0 : s.uniform());
    const FundamentalPair p0 = dirichlet_neumann(p, lam, 0.0, -3.0, 3.0, dt);
    const FundamentalPair p1 = dirichlet_neumann(p, lam, 1.0, -3.0, 3.0, dt);
    for (double t = -3.0; t <= 3.0 + 1e-12; t += 0.01)
      w_worst = std::max(w_worst, std::abs(wronskian(p0.f, p0.g, t) - 1.0));
    for (const auto v : {KernelVariant::value, KernelVariant::du, KernelVariant::dt, KernelVariant::dtdu}) {
      for (auto [t, u] : {std::pair{-2.5, 1.7}, std::pair{0.4, -1.1}, std::pair{2.2, 2.9}}) {
        const cplx a0 = sa_kernel_from_pair(p0, t, u, v);
        const cplx a1 = sa_kernel_from_pair(p1, t, u, v);
        base_worst = std::max(base_worst, std::abs(a0 - a1) / std::max(1.0, std::abs(a0)));
      }
    }
    // Antisymmetry of A and of its mixed derivative, and A_u(t, t) = 1.
    for (auto [t, u] : {std::pair{-2.0, 1.3}, std::pair{0.9, 2.4}}) {
      const cplx a = sa_kernel_from_pair(p0, t, u, KernelVariant::value);
      const cplx a_swap = sa_kernel_from_pair(p0, u, t, KernelVariant::value);
      deriv_worst = std::max(deriv_worst, std::abs(a + a_swap) / std::max(1.0, std::abs(a)));
      const cplx x = sa_kernel_from_pair(p0, t, u, KernelVariant::dtdu);
      const cplx y = sa_kernel_from_pair(p0, u, t, KernelVariant::dtdu);
      deriv_worst = std::max(deriv_worst, std::abs(x + y) / std::max(1.0, std::abs(x)));
      const cplx direct = sa_kernel(p, lam, t, u, KernelVariant::dt, dt);
      const cplx via_pair = sa_kernel_from_pair(p0, t, u, KernelVariant::dt);
      deriv_worst = std::max(deriv_worst, std::abs(direct - via_pair) / std::max(1.0, std::abs(via_pair)));
    }
    deriv_worst = std::max(deriv_worst, std::abs(sa_kernel_from_pair(p0, 0.5, 0.5, KernelVariant::du) - 1.0));
  }
  b.metric("wronskian_sup_over_dt", w_worst / dt);
  b.metric("base_point_rel", base_worst);
  b.metric("derivative_identity_rel", deriv_worst);
  b.r.passed = w_worst < 10.0 * dt && base_worst < 1e-6 && deriv_worst < 1e-6;
  b.r.detail = "|W-1|/dt = " + fmt(w_worst / dt) + " (gate 10), base-point " + fmt(base_worst) +
               ", derivative identities " + fmt(deriv_worst) + " (gate 1e-6)";
  return b.r;
}

cplx dense_det(const JacobiEnsemble& ens, cplx z, long n) {
  const double s = 1.0 / std::sqrt(4.0 * static_cast<double>(ens.N) * ens.beta);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (long i = 0; i < n; ++i) {
    m(i, i) = z - s * ens.b[i];
    if (i + 1 < n) {
      m(i, i + 1) = -s * ens.a[i];
      m(i + 1, i) = -s * ens.a[i];
    }
  }
  return m.determinant();
}

CriterionResult recurrence_determinant(const VerifyConfig& c) {
  Builder b(3);
  double det_worst = 0.0;
  Stream s(family(c, 3, 1u << 20), Tag::generic);
  for (int i = 0; i < 40; ++i) {
    const long N = 2 + i % 7;
    const double beta = 0.5 + 0.25 * (i % 5);
    const JacobiEnsemble e = sample_jacobi(family(c, 3, static_cast<std::uint64_t>(i)), N, beta);
    const cplx z(0.7 * s.normal(), 0.7 * s.normal());
    const PolySequence seq = transfer_recurrence(e, z);
    for (long n = 1; n <= N; ++n) {
      const cplx ref = dense_det(e, z, n);
      det_worst = std::max(det_worst, std::abs(seq.at(n) - ref) / std::abs(ref));
    }
  }
  const long N = 2000;
  const JacobiEnsemble e = sample_jacobi(family(c, 3, 1000), N, 2.0);
  std::vector<double> d, off;
  scaled_matrix(e, d, off);
  const std::vector<double> ev = tridiag_eigenvalues(d, off);
  const double scale = 2.0 * std::pow(static_cast<double>(N), 2.0 / 3.0);
  const std::vector<double> zeros = psi_zeros(e, -8.0, 3.0);
  std::vector<double> expected;
  for (auto it = ev.rbegin(); it != ev.rend() && scale * (*it - 1.0) >= -8.0; ++it)
    expected.push_back(scale * (*it - 1.0));
  double zero_worst = zeros.size() == expected.size() ? 0.0 : kInf;
  for (std::size_t i = 0; i < std::min(zeros.size(), expected.size()); ++i)
    zero_worst = std::max(zero_worst, std::fabs(zeros[i] - expected[i]));
  b.metric("determinant_rel", det_worst);
  b.metric("zeros_compared", static_cast<double>(expected.size()));
  b.metric("zero_abs", zero_worst);
  b.r.passed = det_worst < 1e-10 && zero_worst < 1e-8 && expected.size() >= 3;
  b.r.detail = "determinant rel " + fmt(det_worst) + " (gate 1e-10), " + std::to_string(expected.size()) +
               " zeros vs eigenvalues max " + fmt(zero_worst) + " (gate 1e-8)";
  return b.r;
}

CriterionResult plancherel_rotach(const VerifyConfig&) {
  Builder b(4);
  const long N = 4000;
  const JacobiEnsemble nf = make_noise_free(N, 2.0);
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double lam = -2.0 + 0.02 * i;
    worst = std::max(worst, std::fabs(rescaled_psi(nf, lam, static_cast<double>(N)).value() - airy_ai(lam)));
  }
  b.metric("sup_abs_error", worst);
  b.r.passed = worst < 0.02;
  b.r.detail = "sup |w_N pi_N - Ai| on [-2, 2] = " + fmt(worst) + " (gate 0.02)";
  return b.r;
}

CriterionResult mean_polynomial(const VerifyConfig& c) {
  Builder b(5);
  const std::vector<std::pair<long, double>> cases{{100, 0.5}, {200, 1.2}, {1000, 1.0}};
  bool ok = true;
  std::string detail;
  int k = 0;
  for (auto [N, z] : cases) {
    const Scaled<double> ref = hermite_value(N, z, N);
    std::vector<double> ratio(static_cast<std::size_t>(c.ephi_M));
    parallel_for(c.ephi_M, c.workers, [&](long i) {
      const JacobiEnsemble e = sample_jacobi(family(c, 5, static_cast<std::uint64_t>(k) << 40 | static_cast<std::uint64_t>(i)), N, 2.0);
      const Scaled<double> v = transfer_value(e, z, N);
      ratio[static_cast<std::size_t>(i)] = v.mantissa / ref.mantissa * std::exp(v.log_scale - ref.log_scale);
    });
    const MomentBand band = moment_band(ratio, 1);
    const double zscore = (band.estimate - 1.0) / band.standard_error;
    b.metric("N" + std::to_string(N) + "_z" + fmt(z) + "_mean_ratio", band.estimate);
    b.metric("N" + std::to_string(N) + "_z" + fmt(z) + "_zscore", zscore);
    ok = ok && std::fabs(zscore) < 3.0;
    detail += (k ? ", " : "") + std::string("(") + std::to_string(N) + ", " + fmt(z) + "): " + fmt(zscore) + " se";
    ++k;
  }
  b.r.passed = ok;
  b.r.detail = "E Phi / pi - 1 in standard errors " + detail + " (gate 3)";
  return b.r;
}

CriterionResult edge_clt(const VerifyConfig& c) {
  Builder b(6);
  const CltResult r2 = clt_statistic(family(c, 6, 0).value, c.clt_N, 2.0, c.clt_M, c.workers);
  const CltResult r1 = clt_statistic(family(c, 6, 1).value, c.clt_N, 1.0, c.clt_M, c.workers);
  const double predicted = std::log(static_cast<double>(c.clt_N)) / 3.0;
  const double rel = r2.variance / predicted - 1.0;
  const double ratio = r1.variance / r2.variance;
  b.metric("ks_beta2", r2.ks);
  b.metric("ks_studentized_beta2", r2.ks_studentized);
  b.metric("variance_beta2", r2.variance);
  b.metric("variance_se_beta2", r2.variance_se);
  b.metric("predicted_variance", predicted);
  b.metric("standardized_mean_beta2", mean(r2.standardized));
  b.metric("variance_beta1", r1.variance);
  b.metric("variance_ratio", ratio);
  b.r.passed = r2.ks < 0.05 && std::fabs(rel) < 0.15 && ratio >= 1.7 && ratio <= 2.3;
  b.r.detail = "KS " + fmt(r2.ks) + " (gate 0.05; after empirical centering " + fmt(r2.ks_studentized) +
               "), variance " + fmt(r2.variance) + " vs " + fmt(predicted) + " (15%), beta ratio " + fmt(ratio) +
               " in [1.7, 2.3]";
  return b.r;
}

CriterionResult counting_equivalence(const VerifyConfig& c) {
  Builder b(7);
  const int M = c.counting_M;
  std::vector<double> worst(static_cast<std::size_t>(M));
  std::vector<int> violations(static_cast<std::size_t>(M));
  parallel_for(M, c.workers, [&](long i) {
    const BrownianPath p = forward_path(family(c, 7, static_cast<std::uint64_t>(i)), 25.0, c.dt);
    const PointProcessSample z = sai_zero_scan(p, -12.0, 6.0, c.dt, 3);
    const PointProcessSample r = sample_airy_beta(p, -12.0, 6.0, 3, c.dt);
    double w = 0.0;
    int v = 0;
    if (z.eigenvalues.size() != 3 || r.eigenvalues.size() != 3) {
      w = kInf;
    } else {
      long prev = -1;
      for (std::size_t k = 0; k < 3; ++k) {
        w = std::max(w, std::fabs(z.eigenvalues[k] - r.eigenvalues[k]));
        const long above = airy_beta_counting(p, r.eigenvalues[k] + 1e-3, 15.0, c.dt);
        const long below = airy_beta_counting(p, r.eigenvalues[k] - 1e-3, 15.0, c.dt);
        if (above != static_cast<long>(k) || below != static_cast<long>(k + 1)) ++v;
        if (above < prev) ++v;
        prev = below;
        if (k > 0 && !(z.eigenvalues[k] < z.eigenvalues[k - 1])) ++v;
      }
    }
    worst[static_cast<std::size_t>(i)] = w;
    violations[static_cast<std::size_t>(i)] = v;
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  int total_v = 0;
  for (int v : violations) total_v += v;
  b.metric("max_abs_difference", w);
  b.metric("interlacing_violations", total_v);
  b.r.passed = w < 1e-2 && total_v == 0;
  b.r.detail = "top-3 max difference " + fmt(w) + " over " + std::to_string(M) + " paths (gate 1e-2), " +
               std::to_string(total_v) + " interlacing violations";
  return b.r;
}

CriterionResult tracy_widom(const VerifyConfig& c) {
  Builder b(8);
  std::vector<double> riccati(static_cast<std::size_t>(c.tw_M)), gue(static_cast<std::size_t>(c.tw_M));
  parallel_for(c.tw_M, c.workers, [&](long i) {
    const BrownianPath p = forward_path(family(c, 8, static_cast<std::uint64_t>(i)), 15.0, c.dt);
    const PointProcessSample s = sample_airy_beta(p, -10.0, 6.0, 1, c.dt);
    riccati[static_cast<std::size_t>(i)] = s.eigenvalues.empty() ? -kInf : s.eigenvalues.front();
  });
  const double scale = 2.0 * std::pow(static_cast<double>(c.tw_N), 2.0 / 3.0);
  parallel_for(c.tw_M, c.workers, [&](long i) {
    const JacobiEnsemble e = sample_jacobi(family(c, 8, (1ull << 40) | static_cast<std::uint64_t>(i)), c.tw_N, 2.0);
    std::vector<double> d, off;
    scaled_matrix(e, d, off);
    gue[static_cast<std::size_t>(i)] = scale * (tridiag_kth_largest(d, off, 1, 1e-12) - 1.0);
  });
  const double ks = ks_two_sample(riccati, gue);
  b.metric("ks", ks);
  b.metric("mean_riccati", mean(riccati));
  b.metric("mean_tridiagonal", mean(gue));
  b.r.passed = ks < 0.03;
  b.r.detail = "two-sample KS " + fmt(ks) + " (gate 0.03); means " + fmt(mean(riccati)) + " vs " + fmt(mean(gue));
  return b.r;
}

CriterionResult envelope(const VerifyConfig& c) {
  Builder b(9);
  const int M = c.envelope_M;
  std::vector<double> d6(static_cast<std::size_t>(M)), d8(static_cast<std::size_t>(M)), d10(static_cast<std::size_t>(M));
  parallel_for(M, c.workers, [&](long i) {
    const BrownianPath p = forward_path(family(c, 9, static_cast<std::uint64_t>(i)), 13.0, c.dt);
    const GaussianFunctional gf = gaussian_functional(p, 13.0);
    const SAiPath s = sai_backward(p, gf, 0.0, 12.0, 6.0);
    const auto k = static_cast<std::size_t>(i);
    d6[k] = envelope_check(s, gf, 6.0, 0);
    d8[k] = envelope_check(s, gf, 8.0, 0);
    d10[k] = envelope_check(s, gf, 10.0, 0);
  });
  const double band = 1.0 / std::sqrt(8.0);
  const auto inside = std::count_if(d8.begin(), d8.end(), [&](double d) { return d < band; });
  const double frac = static_cast<double>(inside) / M;
  b.metric("fraction_inside_band", frac);
  b.metric("median_deviation_T6", median(d6));
  b.metric("median_deviation_T10", median(d10));
  b.r.passed = frac >= 0.99 && median(d10) < median(d6);
  b.r.detail = "inside 8^(-1/2) band on " + fmt(100.0 * frac) + "% (gate 99%), medians T=6 " + fmt(median(d6)) +
               " > T=10 " + fmt(median(d10));
  return b.r;
}

std::vector<double> uniform_grid(double lo, double hi, double step) {
  std::vector<double> g;
  for (int i = 0; lo + i * step <= hi + 1e-12; ++i) g.push_back(lo + i * step);
  return g;
}

CriterionResult coupled_trend(const VerifyConfig& c) {
  Builder b(10);
  const std::vector<double> tg = uniform_grid(0.0, 4.0, 0.25), lg = uniform_grid(-2.0, 2.0, 0.5);
  CoupledConfig nf;
  nf.N = 100000;
  nf.noise_free = true;
  const double floor_dev =
      psi_vs_sai(make_coupled_run(Seed{0, 0}, nf), tg, uniform_grid(-2.0, 2.0, 0.2)).sup_deviation;
  b.metric("noise_free_sup", floor_dev);
  std::vector<double> medians;
  std::string detail;
  for (std::size_t k = 0; k < c.coupled_N.size(); ++k) {
    CoupledConfig cc;
    cc.N = c.coupled_N[k];
    std::vector<double> sup(static_cast<std::size_t>(c.coupled_seeds));
    parallel_for(c.coupled_seeds, c.workers, [&](long i) {
      const CoupledRun run = make_coupled_run(family(c, 10, static_cast<std::uint64_t>(k) << 40 | static_cast<std::uint64_t>(i)), cc);
      sup[static_cast<std::size_t>(i)] = psi_vs_sai(run, tg, lg).sup_deviation;
    });
    medians.push_back(median(sup));
    b.metric("median_sup_N" + std::to_string(cc.N), medians.back());
    detail += (k ? " > " : "") + fmt(medians.back());
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < medians.size(); ++k) decreasing = decreasing && medians[k] < medians[k - 1];
  b.r.passed = decreasing && floor_dev < 0.02;
  b.r.detail = "median sup deviation " + detail + " (strictly decreasing required), noise-free " + fmt(floor_dev) +
               " (gate 0.02)";
  return b.r;
}

CriterionResult planar(const VerifyConfig& c) {
  Builder b(11);
  auto run = [&](long N, std::uint64_t tag) {
    std::vector<double> d(static_cast<std::size_t>(c.planar_M));
    parallel_for(c.planar_M, c.workers, [&](long i) {
      const JacobiEnsemble e = sample_jacobi(family(c, 11, tag << 40 | static_cast<std::uint64_t>(i)), N, 2.0);
      d[static_cast<std::size_t>(i)] = planar_ratio_check(e, {cplx(1.5, 0.0)})[0].deviation;
    });
    return median(d);
  };
  const double m1 = run(c.planar_N, 0), m2 = run(2 * c.planar_N, 1);
  b.metric("median_deviation_N", m1);
  b.metric("median_deviation_2N", m2);
  b.r.passed = m1 < 0.1 && m2 < m1;
  b.r.detail = "median |ratio - 1| " + fmt(m1) + " (gate 0.1), doubled N " + fmt(m2);
  return b.r;
}

CriterionResult shift(const VerifyConfig& c) {
  Builder b(12);
  const ShiftInvarianceResult r =
      shift_invariance_test(family(c, 12, 0).value, family(c, 12, 1).value, 1.0, 0.0, 0.0, c.shift_M, 2.0, c.dt,
                            12.0, c.workers);
  b.metric("ks", r.ks);
  b.metric("critical", r.critical);
  b.metric("negative_fraction_a", r.negative_fraction_a);
  b.metric("negative_fraction_b", r.negative_fraction_b);
  b.r.passed = r.ks < r.critical;
  b.r.detail = "KS " + fmt(r.ks) + " vs 1% critical " + fmt(r.critical) + "; sign frequencies " +
               fmt(r.negative_fraction_a) + " / " + fmt(r.negative_fraction_b);
  return b.r;
}

}  // namespace

std::string criterion_title(int id) {
  switch (id) {
    case 1: return "deterministic Airy reduction";
    case 2: return "Wronskian and kernel identities";
    case 3: return "recurrence-determinant equivalence";
    case 4: return "Plancherel-Rotach edge limit";
    case 5: return "mean characteristic polynomial";
    case 6: return "edge CLT";
    case 7: return "counting equivalence";
    case 8: return "Tracy-Widom cross-check";
    case 9: return "envelope asymptotics";
    case 10: return "coupled convergence trend";
    case 11: return "planar ratio";
    case 12: return "shift invariance";
    case 13: return "reproducibility";
    default: return "unknown";
  }
}

CriterionResult run_criterion(int id, const VerifyConfig& config) {
  switch (id) {
    case 1: return deterministic_reduction(config);
    case 2: return wronskian_kernel(config);
    case 3: return recurrence_determinant(config);
    case 4: return plancherel_rotach(config);
    case 5: return mean_polynomial(config);
    case 6: return edge_clt(config);
    case 7: return counting_equivalence(config);
    case 8: return tracy_widom(config);
    case 9: return envelope(config);
    case 10: return coupled_trend(config);
    case 11: return planar(config);
    case 12: return shift(config);
    default: throw DomainError("run_criterion: no library criterion " + std::to_string(id));
  }
}

std::vector<CriterionResult> run_acceptance(const VerifyConfig& config,
                                            const std::function<void(const CriterionResult&)>& on_result) {
  std::vector<int> ids = config.criteria;
  if (ids.empty())
    for (int i = 1; i <= kLibraryCriteria; ++i) ids.push_back(i);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<CriterionResult> out;
  for (int id : ids) {
    out.push_back(run_criterion(id, config));
    if (on_result) on_result(out.back());
  }
  return out;
}

}  // namespace airybeta
