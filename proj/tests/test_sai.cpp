#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/riccati.hpp"
#include "airybeta/rng.hpp"
#include "airybeta/sae.hpp"
#include "airybeta/sai.hpp"
#include "airybeta/stats.hpp"

using namespace airybeta;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

BrownianPath path_from(std::uint64_t seed, double t0, double t1, double dt, double beta = 2.0) {
  return sample_brownian_path(Seed{seed, 0}, t0, dt, static_cast<int>(std::lround((t1 - t0) / dt)), beta);
}

// Direct nested adaptive quadrature of the double integral m(t), with the
// exponent taken literally from the triple integrand.
double m_oracle(double t) {
  using boost::math::quadrature::gauss_kronrod;
  auto middle = [&](double s) {
    auto inner = [&](double u) { return cstar_integrand(t, s, u); };
    return gauss_kronrod<double, 31>::integrate(inner, 0.0, s, 12, 1e-13);
  };
  return gauss_kronrod<double, 31>::integrate(middle, 0.0, t, 12, 1e-13);
}

double cstar_partial_oracle(double T) {
  using boost::math::quadrature::gauss_kronrod;
  auto outer = [](double t) {
    auto middle = [&](double s) {
      auto inner = [&](double u) { return cstar_integrand(t, s, u); };
      return gauss_kronrod<double, 15>::integrate(inner, 0.0, s, 6, 1e-11);
    };
    return gauss_kronrod<double, 15>::integrate(middle, 0.0, t, 6, 1e-11);
  };
  return 2.0 * gauss_kronrod<double, 15>::integrate(outer, 0.0, T, 6, 1e-10) - std::log(T) / 4.0;
}

// Re-express a stretch of an SAi path as a solution based at s, so the
// generic Volterra residual applies.
SolutionPath as_solution(const SAiPath& sai, const BrownianPath& path, double s, double lo, double hi) {
  const auto k_lo = static_cast<std::size_t>(std::lround((lo - sai.t_min) / sai.dt));
  const auto k_hi = static_cast<std::size_t>(std::lround((hi - sai.t_min) / sai.dt));
  SolutionPath sol;
  sol.lambda = sai.lambda;
  sol.base_s = s;
  sol.t_min = lo;
  sol.dt = sai.dt;
  sol.base_index = std::lround((s - lo) / sai.dt);
  sol.path = &path;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    sol.phi.push_back(sai.value(k));
    sol.phi_prime.push_back(sai.derivative(k));
  }
  sol.c1 = sol.phi[static_cast<std::size_t>(sol.base_index)];
  sol.c2 = sol.phi_prime[static_cast<std::size_t>(sol.base_index)];
  return sol;
}

}  // namespace

TEST_CASE("covariance table against direct quadrature") {
  for (double t : {0.3, 1.0, 2.5, 6.0}) {
    CHECK(std::fabs(covariance_table().m_at(t) - m_oracle(t)) < 1e-10);
  }
  CHECK(std::fabs(covariance_table().m_at(1.2345) - m_oracle(1.2345)) < 1e-10);
  // (4/beta) m(t) -> 1/(2 beta t).
  CHECK(std::fabs(mean_correction(2.0, 50.0) / 0.005 - 1.0) < 0.1);
  CHECK(std::fabs(mean_correction(2.0, 50.0) * 200.0 - 1.0) < 2e-3);
  CHECK(mean_correction(kInf, 3.0) == 0.0);
  CHECK_THROWS_AS(mean_correction(2.0, -1.0), DomainError);
}

TEST_CASE("theta definitional identity") {
  const BrownianPath p = path_from(11, 0.0, 10.0, 1e-3);
  const ThetaProcess th = theta_process(p, cplx(0.5, 0.25), 10.0);
  CHECK(th.X[0] == 0.0);
  double worst = 0.0;
  for (std::size_t k = 1; k < th.X.size(); k += 37) {
    const double t = th.time(k);
    const cplx lhs = th.theta[k] - std::sqrt(t) - th.lambda / (2.0 * std::sqrt(t)) + 1.0 / (4.0 * (t + 1.0)) - th.X[k];
    worst = std::max(worst, std::abs(lhs + th.mean_correction[k]));
  }
  CHECK(worst < 1e-10);
  // Without noise the correction drops out in the beta -> infinity limit.
  for (double t : {0.5, 3.0, 9.0})
    CHECK(std::abs(theta(0.0, t, 0.0, kInf) - (std::sqrt(t) - 1.0 / (4.0 * (t + 1.0)))) < 1e-15);
  CHECK_THROWS_AS(theta(0.0, 0.0, 0.0, 2.0), DomainError);
  // int theta agrees with a trapezoid sum of theta away from the origin.
  const std::size_t a = 1000, b = 9000;
  cplx sum = 0.0;
  for (std::size_t k = a; k < b; ++k) sum += 0.5 * th.dt * (th.theta[k] + th.theta[k + 1]);
  CHECK(std::abs(th.int_theta(b) - th.int_theta(a) - sum) < 1e-5);
}

TEST_CASE("Gaussian process X") {
  const BrownianPath p = path_from(3, 0.0, 1.0, 1e-3);
  CHECK(compute_X(p, 1.0)[0] == 0.0);
  // Small t: Var X(0.01) ~ (4/beta) 0.01.
  {
    std::vector<double> x;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      const BrownianPath q = sample_brownian_path(Seed{21, i}, 0.0, 1e-4, 100, 2.0);
      x.push_back(compute_X(q, 0.01).back());
    }
    CHECK(std::fabs(moment_band(x, 2).estimate / 0.02 - 1.0) < 0.05);
  }
  // Large t: Var X(25) ~ 1/(beta sqrt t) = 0.1 at beta = 2.
  {
    std::vector<double> x;
    for (std::uint64_t i = 0; i < 100000; ++i) {
      const BrownianPath q = sample_brownian_path(Seed{22, i}, 0.0, 1e-2, 2500, 2.0);
      x.push_back(compute_X(q, 25.0).back());
    }
    CHECK(std::fabs(moment_band(x, 2).estimate / 0.1 - 1.0) < 0.05);
  }
  // The mean correction is the log-Laplace compensator of int X.
  {
    std::vector<double> w;
    const double T = 4.0;
    for (std::uint64_t i = 0; i < 10000; ++i) {
      const BrownianPath q = sample_brownian_path(Seed{23, i}, 0.0, 1e-3, 4000, 2.0);
      const ThetaProcess th = theta_process(q, 0.0, T);
      const std::size_t k = th.X.size() - 1;
      // int_0^T (theta_0 - sqrt t + 1/(4(t+1))) = int X - (4/beta) I(T).
      w.push_back(std::exp(th.int_X[k] - th.int_mean_correction[k]));
    }
    const MomentBand band = moment_band(w, 1);
    MESSAGE("E exp(int X - (4/beta) I) = " << band.estimate << " +- " << band.standard_error);
    CHECK(std::fabs(band.estimate - 1.0) < 3.0 * band.standard_error);
  }
  CHECK_THROWS_AS(compute_X(p, 2.0), RangeError);
  CHECK_THROWS_AS(compute_X(path_from(3, 0.0005, 1.0, 1e-3), 0.5), DomainError);
}

TEST_CASE("the constant c*") {
  CHECK(cstar_integrand(0.0, 0.0, 0.0) == 1.0);
  // Partial sums from the table match literal triple quadrature.
  CHECK(std::fabs(cstar_partial(6.0) - cstar_partial_oracle(6.0)) < 1e-9);
  const CStarEstimate e20 = c_star(20.0), e40 = c_star(40.0);
  CHECK(std::fabs(e20.value - e40.value) < 1e-3);
  CHECK(e40.converged);
  MESSAGE("c* = " << e40.value << " +- " << e40.error);
  CHECK(std::fabs(e40.value - kCStarGolden) < 1e-6);
  // Independent tail check: the leading correction of cstar_partial(T) is
  // -(5/48) T^{-3/2}.
  CHECK(std::fabs(cstar_partial(240.0) + 5.0 / 48.0 * std::pow(240.0, -1.5) - kCStarGolden) < 1e-7);
  CHECK_THROWS_AS(c_star(10.0), DomainError);
}

TEST_CASE("noise-free reduction to Ai") {
  const BrownianPath zero = zero_path(-6.0, 1e-4, 200000, kInf);
  for (double lam : {-1.0, 0.0, 1.0}) {
    const SAiPath s = sai_backward(zero, lam, 12.0, -6.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double t = s.time(k);
      if (t < -5.0 || t > 8.0) continue;
      worst = std::max(worst, std::abs(s.value(k) - airy_ai(t + lam)));
    }
    CHECK(worst < 1e-3);
  }
  const ForwardLimit fl = sai_forward_limit(zero, 0.0, 0.0, {8.0, 10.0, 12.0});
  for (const cplx& v : fl.values) CHECK(std::abs(v + std::sqrt(M_PI) * airy_ai_prime(0.0)) < 1e-3);
  const ForwardLimit fl2 = sai_forward_limit(zero, 0.7, -1.5, {12.0});
  CHECK(std::abs(fl2.values[0] + std::sqrt(M_PI) * airy_ai_prime(-0.8)) < 1e-3);
}

TEST_CASE("backward construction") {
  const BrownianPath p = path_from(31, -6.0, 16.0, 1e-3);
  const GaussianFunctional gf = gaussian_functional(p, 16.0);
  // Equation residual on [-5, T - 1].
  const SAiPath s = sai_backward(p, gf, 0.0, 12.0, -6.0);
  const SolutionPath sol = as_solution(s, p, 0.0, -5.0, 11.0);
  CHECK(sa2_residual(sol) < 10.0 * 1e-3);
  // Complex lambda is carried through.
  const SAiPath sc = sai_backward(p, gf, cplx(0.0, 0.5), 12.0, -6.0);
  CHECK(std::abs(sc.value_at(0.0).imag()) > 0.0);
  CHECK_THROWS_AS(sai_backward(p, gf, 0.0, 5.0, -6.0), DomainError);
  CHECK_THROWS_AS(sai_backward(p, gf, -6.0, 12.0, -6.0), RangeError);
}

TEST_CASE("seed-time robustness") {
  // The direction of the solution is fixed to exponential accuracy by the
  // backward solve; its normalization carries the second-order effect of the
  // noise beyond the seed time, which no finite seed can see.
  double worst_shape = 0.0, worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const BrownianPath p = path_from(100 + seed, -6.0, 15.0, 1e-3);
    const GaussianFunctional gf = gaussian_functional(p, 15.0);
    const SAiPath a = sai_backward(p, gf, 0.0, 12.0, -6.0);
    const SAiPath b = sai_backward(p, gf, 0.0, 14.0, -6.0);
    const cplx ra = a.value_at(-5.0), rb = b.value_at(-5.0);
    for (double t = -5.0; t <= 6.0 + 1e-9; t += 0.25) {
      worst = std::max(worst, std::abs(a.value_at(t) / b.value_at(t) - 1.0));
      worst_shape = std::max(worst_shape, std::abs(a.value_at(t) / ra - b.value_at(t) / rb) /
                                              std::max(1e-3, std::abs(b.value_at(t) / rb)));
    }
  }
  MESSAGE("T = 12 vs 14: relative " << worst << ", after normalizing at t = -5 " << worst_shape);
  CHECK(worst_shape < 1e-4);
  CHECK(worst < 1e-4);
}

TEST_CASE("forward limit") {
  int shrinking = 0, agree = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const BrownianPath p = path_from(500 + seed, 0.0, 15.0, 1e-3);
    const ForwardLimit fl = sai_forward_limit(p, 0.0, 0.0, {8.0, 10.0, 12.0, 14.0});
    if (std::abs(fl.values[2] - fl.values[1]) < std::abs(fl.values[1] - fl.values[0])) ++shrinking;
    if (seed < 100) {
      const SAiPath b = sai_backward(p, 0.0, 14.0, 0.0);
      const cplx ref = -std::sqrt(M_PI) * b.derivative_at(0.0);
      const double rel = std::abs(fl.values[3] / ref - 1.0);
      worst = std::max(worst, rel);
      if (rel < 0.02) ++agree;
    }
  }
  MESSAGE("successive differences shrink on " << shrinking << "/200; cross-method worst " << worst);
  CHECK(agree == 100);
  CHECK(shrinking >= 180);
}

TEST_CASE("envelope") {
  CHECK(std::fabs(1.0 / std::sqrt(4.0 * M_PI) - 0.28209479177) < 1e-11);
  const BrownianPath zero = zero_path(0.0, 1e-3, 20000, kInf);
  const GaussianFunctional gz = gaussian_functional(zero, 20.0);
  const SAiPath s0 = sai_backward(zero, gz, 0.0, 12.0, 4.0);
  // Noise-free: the deviation is the Ai asymptotic-series correction.
  CHECK(envelope_check(s0, gz, 8.0, 0) < 0.01);
  CHECK(envelope_check(s0, gz, 8.0, 1) < 0.01);

  int inside = 0;
  const int seeds = 300;
  std::vector<double> d6, d10;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const BrownianPath p = path_from(900 + seed, 0.0, 13.0, 1e-3);
    const GaussianFunctional gf = gaussian_functional(p, 13.0);
    const SAiPath s = sai_backward(p, gf, 0.0, 12.0, 6.0);
    if (envelope_check(s, gf, 8.0, 0) < 1.0 / std::sqrt(8.0)) ++inside;
    d6.push_back(envelope_check(s, gf, 6.0, 0));
    d10.push_back(envelope_check(s, gf, 10.0, 0));
  }
  CHECK(inside >= 0.99 * seeds);
  CHECK(median(d10) < median(d6));
  CHECK_THROWS_AS(envelope_check(s0, gz, 2.0, 0), DomainError);
}

TEST_CASE("square integrability") {
  int dominated = 0;
  const int seeds = 100;
  for (std::uint64_t seed = 0; seed < seeds; ++seed) {
    const BrownianPath p = path_from(1300 + seed, 0.0, 13.0, 1e-3);
    const GaussianFunctional gf = gaussian_functional(p, 13.0);
    const L2Record r = l2_check(sai_backward(p, gf, 0.0, 12.0, 0.0), gf);
    CHECK(std::isfinite(r.integral));
    if (r.integral <= 2.0 * r.envelope_integral) ++dominated;
  }
  MESSAGE("int SAi^2 <= 2 int envelope^2 on " << dominated << "/" << seeds);
  CHECK(dominated >= 0.95 * seeds);
}

TEST_CASE("zeros in lambda") {
  const BrownianPath zero = zero_path(0.0, 1e-3, 25000, kInf);
  const PointProcessSample det = sai_zero_scan(zero, -8.0, 2.0, 1e-3, 3);
  REQUIRE(det.eigenvalues.size() == 3);
  CHECK(det.method == "sai-zeros");
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(det.eigenvalues[i] - airy_ai_zero(i + 1)) < 1e-3);
  CHECK(std::fabs(det.eigenvalues[0] + 2.33811) < 1e-3);

  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const BrownianPath p = path_from(1500 + seed, 0.0, 25.0, 1e-3);
    const PointProcessSample z = sai_zero_scan(p, -12.0, 6.0, 1e-3, 3);
    const PointProcessSample r = sample_airy_beta(p, -12.0, 6.0, 3, 1e-3);
    REQUIRE(z.eigenvalues.size() == 3);
    REQUIRE(r.eigenvalues.size() == 3);
    for (int i = 0; i < 3; ++i) {
      CHECK(std::fabs(z.eigenvalues[i] - r.eigenvalues[i]) < 1e-2);
      if (i > 0) CHECK(z.eigenvalues[i] < z.eigenvalues[i - 1]);
    }
  }
  const BrownianPath p = path_from(1600, 0.0, 25.0, 1e-3);
  const PointProcessSample few = sai_zero_scan(p, 4.0, 6.0, 1e-3, 2);
  CHECK(!few.complete);
}

TEST_CASE("shift invariance") {
  const ShiftInvarianceResult same = shift_invariance_test(7, 7, 0.0, 0.0, 0.0, 200);
  CHECK(same.ks == 0.0);
  // Signs do not depend on the normalization; they match across the shift.
  for (double lam : {0.0, -2.0}) {
    const ShiftInvarianceResult r = shift_invariance_test(7, 8, 1.0, 0.0, lam, 2000);
    MESSAGE("lambda " << lam << ": KS " << r.ks << " critical " << r.critical << "; P(SAi < 0) "
                      << r.negative_fraction_a << " vs " << r.negative_fraction_b);
    CHECK(std::fabs(r.negative_fraction_a - r.negative_fraction_b) < 3.0 * r.fraction_se);
    CHECK(r.ks < r.critical);
  }
}
