#include <doctest.h>

#include <cmath>
#include <vector>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/rng.hpp"
#include "airybeta/sae.hpp"
#include "airybeta/stats.hpp"

using namespace airybeta;

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

BrownianPath path_on(double L, double dt, std::uint64_t seed, double beta = 2.0) {
  return sample_brownian_path(Seed{seed, 0}, -L, dt, static_cast<int>(std::lround(2.0 * L / dt)), beta);
}

double sup_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("kernel U") {
  const BrownianPath zero = zero_path(-5.0, 1e-3, 10000, 2.0);
  CHECK(kernel_U(zero, 0.0, 2.0, 1.0) == cplx(1.5));
  CHECK(kernel_U(zero, 0.0, 0.7, 0.7) == cplx(0.0));

  const BrownianPath p = path_on(5.0, 1e-3, 1);
  Stream s(Seed{2, 0});
  for (int i = 0; i < 100; ++i) {
    const double t = -5.0 + 10.0 * s.uniform(), u = -5.0 + 10.0 * s.uniform(), v = -5.0 + 10.0 * s.uniform();
    const cplx lam(2.0 * s.uniform() - 1.0, s.uniform());
    CHECK(kernel_U(p, lam, t, u) + kernel_U(p, lam, u, t) == cplx(0.0));
    CHECK(kernel_U(p, lam, t, t) == cplx(0.0));
    CHECK(std::abs(kernel_U(p, lam, t, v) - kernel_U(p, lam, t, u) - kernel_U(p, lam, u, v)) < 1e-12);
  }
  CHECK_THROWS_AS(kernel_U(p, 0.0, 6.0, 0.0), RangeError);
}

TEST_CASE("noise-free solver reproduces Ai") {
  const BrownianPath zero = zero_path(-9.0, 1e-4, 180000, 2.0);
  const AiryValue a8 = airy(8.0);
  const SolutionPath sol = solve_ivp(zero, 0.0, 8.0, a8.ai, a8.ai_prime, -5.0, 8.0, 1e-4);
  double worst = 0.0;
  for (std::size_t k = 0; k < sol.size(); k += 10) worst = std::max(worst, std::abs(sol.phi[k] - airy_ai(sol.time(k))));
  CHECK(worst < 1e-3);

  // Classical fundamental system at s = 0 over |t| <= 8.
  const FundamentalPair fp = dirichlet_neumann(zero, 0.0, 0.0, -8.0, 8.0, 1e-4);
  const AiryValue o = airy(0.0);
  double rel = 0.0;
  for (std::size_t k = 0; k < fp.f.size(); k += 50) {
    const AiryValue v = airy(fp.f.time(k));
    const double f = kPi * (o.bi_prime * v.ai - o.ai_prime * v.bi);
    const double g = kPi * (o.ai * v.bi - o.bi * v.ai);
    const double scale = std::max(1.0, std::fabs(v.bi));
    rel = std::max(rel, std::abs(fp.f.phi[k] - f) / scale);
    rel = std::max(rel, std::abs(fp.g.phi[k] - g) / scale);
  }
  CHECK(rel < 1e-3);
  const AiryValue v1 = airy(1.0);
  CHECK(std::abs(fp.g.value(1.0) - kPi * (o.ai * v1.bi - o.bi * v1.ai)) < 1e-3);
  CHECK(std::abs(fp.g.value(1.0) - 1.0853) < 1e-3);
}

TEST_CASE("solver contracts and linearity") {
  const BrownianPath p = path_on(4.0, 1e-4, 3);
  CHECK_THROWS_AS(solve_ivp(p, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(solve_ivp(p, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1e-3), DomainError);
  CHECK_THROWS_AS(solve_ivp(p, 0.0, 0.0, 1.0, 0.0, -1.0, 1.0, 0.3), DomainError);
  CHECK_THROWS_AS(solve_ivp(p, 0.0, 0.0, 1.0, 0.0, -5.0, 1.0, 1e-3), RangeError);

  const cplx lam(-0.4, 0.2);
  const SolutionPath z = solve_ivp(p, lam, 0.5, 0.0, 0.0, -3.0, 3.0, 1e-4);
  for (const cplx& v : z.phi) CHECK(v == cplx(0.0));

  const SolutionPath a = solve_ivp(p, lam, 0.5, cplx(1.0, 0.5), cplx(-0.3), -3.0, 3.0, 1e-4);
  const SolutionPath b = solve_ivp(p, lam, 0.5, cplx(0.2), cplx(2.0, -1.0), -3.0, 3.0, 1e-4);
  const SolutionPath c = solve_ivp(p, lam, 0.5, cplx(1.2, 0.5), cplx(1.7, -1.0), -3.0, 3.0, 1e-4);
  CHECK(a.phi[a.base_index] == cplx(1.0, 0.5));
  CHECK(a.phi_prime[a.base_index] == cplx(-0.3));
  double scale = 0.0;
  for (const cplx& v : c.phi) scale = std::max(scale, std::abs(v));
  std::vector<cplx> sum(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) sum[k] = a.phi[k] + b.phi[k];
  CHECK(sup_abs_diff(sum, c.phi) < 1e-12 * scale);
}

TEST_CASE("integral-form residual is small") {
  const BrownianPath p = path_on(3.0, 1e-4, 4);
  const SolutionPath sol = solve_ivp(p, cplx(0.3), 0.0, 1.0, -0.5, -2.0, 2.0, 1e-4);
  CHECK(sa2_residual(sol) < 10.0 * 1e-4);
  CHECK(sa2_residual(sol, 10) < 10.0 * 1e-3);

  // phi is the integral of phi' up to the step's quadrature error.
  double worst = 0.0;
  for (std::size_t k = 1; k < sol.size(); ++k) {
    const cplx trap = 0.5 * sol.dt * (sol.phi_prime[k - 1] + sol.phi_prime[k]);
    worst = std::max(worst, std::abs(sol.phi[k] - sol.phi[k - 1] - trap));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("Dirichlet and Neumann solutions") {
  const BrownianPath p = path_on(4.0, 1e-4, 5);
  const cplx lam(0.7, -0.1);
  const FundamentalPair fp = dirichlet_neumann(p, lam, 0.3, -3.0, 3.0, 1e-4);
  CHECK(fp.f.value(0.3) == cplx(1.0));
  CHECK(fp.f.derivative(0.3) == cplx(0.0));
  CHECK(fp.g.value(0.3) == cplx(0.0));
  CHECK(fp.g.derivative(0.3) == cplx(1.0));

  // Decomposition of an arbitrary solution based elsewhere.
  const SolutionPath phi = solve_ivp(p, lam, -1.0, cplx(0.4, 0.1), cplx(-1.3), -3.0, 3.0, 1e-4);
  const cplx c1 = phi.value(0.3), c2 = phi.derivative(0.3);
  for (std::size_t k = 0; k < phi.size(); k += 97) {
    const cplx rebuilt = c1 * fp.f.phi[k] + c2 * fp.g.phi[k];
    CHECK(std::abs(rebuilt - phi.phi[k]) <= 1e-8 * std::max(1.0, std::abs(phi.phi[k])));
  }
}

TEST_CASE("Wronskian") {
  Stream s(Seed{6, 0});
  for (int i = 0; i < 20; ++i) {
    const double beta = i % 3 == 0 ? 1.0 : (i % 3 == 1 ? 2.0 : 4.0);
    const BrownianPath p = path_on(4.0, 1e-4, 100 + i, beta);
    const cplx lam(4.0 * s.uniform() - 2.0, i % 2 == 0 ? 0.0 : s.uniform());
    const FundamentalPair fp = dirichlet_neumann(p, lam, 0.0, -3.0, 3.0, 1e-4);
    CHECK(wronskian(fp.f, fp.g, 0.0) == cplx(1.0));
    double worst = 0.0;
    for (double t = -3.0; t <= 3.0; t += 0.01) worst = std::max(worst, std::abs(wronskian(fp.f, fp.g, t) - 1.0));
    CHECK(worst < 10.0 * 1e-4);
  }

  // The explicit scheme drifts at first order: halving dt halves the drift.
  const BrownianPath p = path_on(4.0, 5e-5, 7);
  auto drift = [&](double dt) {
    const FundamentalPair fp = dirichlet_neumann(p, 0.5, 0.0, -3.0, 3.0, dt, Scheme::euler_trapezoid);
    double worst = 0.0;
    for (double t = -3.0; t <= 3.0; t += 0.01) worst = std::max(worst, std::abs(wronskian(fp.f, fp.g, t) - 1.0));
    return worst;
  };
  const double ratio = drift(1e-4) / drift(2e-4);
  CHECK(ratio >= 0.4);
  CHECK(ratio <= 0.6);

  const BrownianPath q = path_on(4.0, 1e-4, 8);
  const FundamentalPair a = dirichlet_neumann(p, 0.5, 0.0, -1.0, 1.0, 1e-4);
  const FundamentalPair b = dirichlet_neumann(q, 0.5, 0.0, -1.0, 1.0, 1e-4);
  CHECK_THROWS_AS(wronskian(a.f, b.g, 0.0), ContractError);
}

TEST_CASE("zero-free solutions for complex spectral parameter") {
  const BrownianPath p = path_on(6.0, 1e-4, 9);
  const cplx lam(-3.0, 0.25);
  const SolutionPath sol = solve_ivp(p, lam, 0.0, 1.0, -0.7, -5.0, 5.0, 1e-4);
  double min_abs = 1e300;
  bool monotone = true;
  double prev = std::imag(sol.phi_prime[0] * std::conj(sol.phi[0]));
  for (std::size_t k = 0; k < sol.size(); ++k) {
    min_abs = std::min(min_abs, std::abs(sol.phi[k]));
    const double I = std::imag(sol.phi_prime[k] * std::conj(sol.phi[k]));
    if (k > 0 && I < prev - 1e-12) monotone = false;
    prev = I;
  }
  CHECK(monotone);
  CHECK(min_abs > 0.0);
}

TEST_CASE("stochastic Airy kernel") {
  const BrownianPath p = path_on(4.0, 1e-4, 10);
  const cplx lam(0.2, 0.0);
  const FundamentalPair base0 = dirichlet_neumann(p, lam, 0.0, -3.0, 3.0, 1e-4);
  const FundamentalPair base1 = dirichlet_neumann(p, lam, 1.0, -3.0, 3.0, 1e-4);

  for (const auto variant : {KernelVariant::value, KernelVariant::du, KernelVariant::dt, KernelVariant::dtdu}) {
    for (auto [t, u] : {std::pair{-2.5, 1.7}, std::pair{0.4, -1.1}, std::pair{2.2, 2.9}}) {
      const cplx a0 = sa_kernel_from_pair(base0, t, u, variant);
      const cplx a1 = sa_kernel_from_pair(base1, t, u, variant);
      CHECK(std::abs(a0 - a1) <= 1e-6 * std::max(1.0, std::abs(a0)));
      const cplx direct = sa_kernel(p, lam, t, u, variant, 1e-4);
      CHECK(std::abs(direct - a0) <= 1e-6 * std::max(1.0, std::abs(a0)));
    }
  }
  CHECK(sa_kernel(p, lam, 0.5, 0.5, KernelVariant::value) == cplx(0.0));
  CHECK(sa_kernel(p, lam, 0.5, 0.5, KernelVariant::du) == cplx(1.0));
  CHECK(std::abs(sa_kernel_from_pair(base0, 0.5, 0.5, KernelVariant::du) - 1.0) < 1e-12);
  CHECK(sa_kernel_from_pair(base0, 0.5, 0.5, KernelVariant::value) == cplx(0.0));

  // Antisymmetry and the mixed-derivative identity f'_u(t) = -f'_t(u).
  for (auto [t, u] : {std::pair{-2.0, 1.3}, std::pair{0.9, 2.4}}) {
    CHECK(std::abs(sa_kernel_from_pair(base0, t, u, KernelVariant::value) +
                   sa_kernel_from_pair(base0, u, t, KernelVariant::value)) < 1e-12);
    const cplx x = sa_kernel(p, lam, t, u, KernelVariant::dtdu);
    const cplx y = sa_kernel(p, lam, u, t, KernelVariant::dtdu);
    CHECK(std::abs(x + y) <= 1e-6 * std::max(1.0, std::abs(x)));
  }
}

TEST_CASE("forced equation") {
  const BrownianPath p = path_on(4.0, 1e-4, 11);
  const cplx lam(-0.5, 0.0);
  const double s = 0.5;
  const FundamentalPair fp = dirichlet_neumann(p, lam, s, -2.5, 3.5, 1e-4);
  const std::size_t n = fp.f.size();

  std::vector<cplx> zeta(n, cplx(0.0));
  const ForcedSolution zero = solve_forced(fp, zeta);
  for (const cplx& v : zero.h) CHECK(v == cplx(0.0));

  // Forcing by U(t,s) reproduces the derivative of the Dirichlet solution.
  for (std::size_t k = 0; k < n; ++k) zeta[k] = kernel_U(p, lam, fp.f.time(k), s);
  zeta[fp.f.base_index] = 0.0;
  const ForcedSolution dir = solve_forced(fp, zeta);
  double scale = 0.0;
  for (const cplx& v : fp.f.phi_prime) scale = std::max(scale, std::abs(v));
  CHECK(sup_abs_diff(dir.h, fp.f.phi_prime) < 1e-6 * std::max(1.0, scale));

  // Smooth forcing: residual of the integral equation.
  for (std::size_t k = 0; k < n; ++k) {
    const double t = fp.f.time(k) - s;
    zeta[k] = std::sin(1.3 * t) + 0.4 * t * t - cplx(0.0, 0.2) * t;
  }
  zeta[fp.f.base_index] = 0.0;
  const ForcedSolution smooth = solve_forced(fp, zeta);
  CHECK(smooth.residual < 10.0 * 1e-4);

  zeta[fp.f.base_index] = 0.1;
  CHECK_THROWS_AS(solve_forced(fp, zeta), ContractError);
}

TEST_CASE("Picard series") {
  const BrownianPath p = path_on(4.0, 1e-4, 12);
  const cplx lam(0.3, 0.1);
  const PicardResult one = picard_kernel(p, lam, 0.0, 1.0, 1);
  CHECK(one.value == kernel_U(p, lam, 1.0, 0.0));

  for (auto [s, t] : {std::pair{0.0, 1.0}, std::pair{-1.0, -2.0}, std::pair{0.5, 1.5}}) {
    const PicardResult r = picard_kernel(p, lam, s, t, 40);
    CHECK(r.converged);
    // Reference below the path mesh: both sides carry O(h) errors from the
    // path's quadratic variation.
    const SolutionPath f = solve_ivp(p, lam, s, 1.0, 0.0, std::min(s, t), std::max(s, t), 1e-5);
    const cplx ref = f.derivative(t);
    CHECK(std::abs(r.value - ref) < 1e-4 * std::abs(ref));
    // Factorial decay of the iterated kernels.
    double fact = 1.0;
    for (int m = 2; m <= 10; ++m) {
      fact *= (m - 1);
      CHECK(std::abs(r.terms[m - 1]) <= r.sup_U * std::pow(std::fabs(t - s), m - 1) / fact);
    }
  }
  CHECK_THROWS_AS(picard_kernel(p, lam, 0.0, 3.5, 10), DomainError);
  CHECK_THROWS_AS(picard_kernel(p, lam, 0.0, 1.0, 41), DomainError);
}

TEST_CASE("stability under perturbation") {
  const BrownianPath p = path_on(5.0, 1e-3, 13);
  const cplx lam(0.0);
  const double s = 0.0;
  const StabilityRecord none = stability_probe(p, lam, s, 1.0, 0.0, {}, {}, -4.0, 4.0, 1e-3);
  CHECK(none.sup_weighted == 0.0);

  auto run = [&](double eps) {
    return stability_probe(p, lam, s, 1.0, 0.0, {},
                           [&](double t) { return cplx(eps * growth_envelope(lam, t, s)); }, -4.0, 4.0, 1e-3);
  };
  const StabilityRecord r4 = run(1e-4);
  CHECK(r4.sup_weighted / 1e-4 < 100.0);
  CHECK(r4.sup_delta2_weighted == doctest::Approx(1e-4));
  const double d5 = run(1e-5).sup_weighted, d3 = run(1e-3).sup_weighted;
  CHECK(std::fabs(r4.sup_weighted / d5 - 10.0) <= 1.0);
  CHECK(std::fabs(d3 / r4.sup_weighted - 10.0) <= 1.0);

  // A small kernel perturbation moves the solution by a comparable amount.
  const StabilityRecord k = stability_probe(p, lam, s, 1.0, 0.0, [](double, double) { return cplx(1e-4); }, {},
                                            -2.0, 2.0, 1e-3);
  CHECK(k.sup_delta1 == doctest::Approx(1e-4));
  CHECK(k.sup_weighted > 0.0);
  CHECK(k.sup_weighted < 100.0 * 1e-4);
}

TEST_CASE("shift invariance in law") {
  // f_{lambda - c, c}(1 + c) and f_{lambda, 0}(1) over independent paths.
  const int M = 10000;
  const double lam = 0.3, c = 1.5;
  std::vector<double> a(M), b(M);
  for (int i = 0; i < M; ++i) {
    const BrownianPath p = sample_brownian_path(Seed{500, static_cast<std::uint64_t>(i)}, 0.0, 1e-3, 3000, 2.0);
    a[i] = solve_ivp(p, lam, 0.0, 1.0, 0.0, 0.0, 1.0, 1e-3).phi.back().real();
    b[i] = solve_ivp(p, lam - c, c, 1.0, 0.0, c, 1.0 + c, 1e-3).phi.back().real();
  }
  CHECK(ks_two_sample(a, b) < ks_two_sample_critical(M, M));
}
