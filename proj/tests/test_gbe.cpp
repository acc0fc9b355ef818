#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"
#include "airybeta/gbe.hpp"
#include "airybeta/stats.hpp"
#include "airybeta/tridiag.hpp"

using namespace airybeta;

namespace {

cplx dense_det(const JacobiEnsemble& ens, cplx z, long n) {
  const double s = 1.0 / std::sqrt(4.0 * ens.N * ens.beta);
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

std::vector<double> scaled_eigenvalues(const JacobiEnsemble& ens) {
  std::vector<double> d, e;
  scaled_matrix(ens, d, e);
  return tridiag_eigenvalues(d, e);
}

}  // namespace

TEST_CASE("two by two forced draw") {
  const double beta = 2.0;
  const JacobiEnsemble e = make_jacobi({0.0, 0.0}, {std::sqrt(beta)}, beta);
  const std::vector<double> ev = scaled_eigenvalues(e);
  CHECK(ev[0] == doctest::Approx(-1.0 / (2.0 * std::sqrt(2.0))));
  CHECK(ev[1] == doctest::Approx(1.0 / (2.0 * std::sqrt(2.0))));
}

TEST_CASE("sampled ensemble structure") {
  const JacobiEnsemble e = sample_jacobi(Seed{1, 0}, 100, 2.0);
  CHECK(e.Y[0] == 0.0);
  for (double a : e.a) CHECK(a > 0.0);
  for (long k = 1; k <= 100; ++k) CHECK(e.X[k - 1] == e.b[k - 1] / std::sqrt(2.0));
  // Entries are addressed per row: a larger matrix extends a smaller one.
  const JacobiEnsemble big = sample_jacobi(Seed{1, 0}, 150, 2.0);
  for (long k = 0; k < 99; ++k) CHECK(big.a[k] == e.a[k]);
  CHECK_THROWS_AS(sample_jacobi(Seed{1, 0}, 1, 2.0), DomainError);
}

TEST_CASE("mean of a_i^2") {
  const int M = 100000;
  std::vector<double> a2(M);
  for (int i = 0; i < M; ++i) {
    const JacobiEnsemble e = sample_jacobi(Seed{2, static_cast<std::uint64_t>(i)}, 11, 1.0);
    a2[i] = e.a[9] * e.a[9];
  }
  CHECK(std::fabs(mean(a2) - 10.0) < 0.15);
}

TEST_CASE("semicircle law at N = 2000") {
  const JacobiEnsemble e = sample_jacobi(Seed{3, 0}, 2000, 2.0);
  const std::vector<double> ev = scaled_eigenvalues(e);
  const double ks = ks_one_sample(ev, [](double x) {
    if (x <= -1.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return 0.5 + (x * std::sqrt(1.0 - x * x) + std::asin(x)) / M_PI;
  });
  CHECK(ks < 0.02);
}

TEST_CASE("transfer recurrence against dense determinants") {
  const JacobiEnsemble e6 = sample_jacobi(Seed{4, 0}, 6, 2.0);
  const PolySequence p = transfer_recurrence(e6, cplx(0.3, 0.1));
  CHECK(std::abs(p.at(0) - 1.0) == 0.0);
  CHECK(std::abs(p.at(1) - (cplx(0.3, 0.1) - e6.b[0] / (2.0 * std::sqrt(6.0 * 2.0)))) < 1e-15);

  Stream s(Seed{5, 0});
  for (int i = 0; i < 5; ++i) {
    const cplx z(s.normal(), s.normal());
    const cplx ref = dense_det(e6, z, 6);
    CHECK(std::abs(transfer_recurrence(e6, z).at(6) - ref) / std::abs(ref) < 1e-12);
  }
  for (int i = 0; i < 20; ++i) {
    const long N = 2 + i % 7;
    const double beta = 0.5 + 0.25 * (i % 5);
    const JacobiEnsemble e = sample_jacobi(Seed{6, static_cast<std::uint64_t>(i)}, N, beta);
    const cplx z(0.7 * s.normal(), 0.7 * s.normal());
    const PolySequence seq = transfer_recurrence(e, z);
    for (long n = 1; n <= N; ++n) {
      const cplx ref = dense_det(e, z, n);
      CHECK(std::abs(seq.at(n) - ref) / std::abs(ref) < 1e-10);
    }
  }
}

TEST_CASE("zeros of Phi_N are the eigenvalues") {
  const long N = 2000;
  const JacobiEnsemble e = sample_jacobi(Seed{7, 0}, N, 2.0);
  const std::vector<double> ev = scaled_eigenvalues(e);
  const double c = 2.0 * std::pow(static_cast<double>(N), 2.0 / 3.0);
  const std::vector<double> zeros = psi_zeros(e, -8.0, 3.0);
  std::vector<double> expected;
  for (auto it = ev.rbegin(); it != ev.rend(); ++it) {
    const double lam = c * (*it - 1.0);
    if (lam < -8.0) break;
    expected.push_back(lam);
  }
  REQUIRE(zeros.size() == expected.size());
  REQUIRE(zeros.size() >= 3);
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    CHECK(std::fabs(zeros[i] - expected[i]) < 1e-8);
    // Raw scale: z-zeros against the eigensolver to 1e-10.
    CHECK(std::fabs(edge_point(N, zeros[i]) - edge_point(N, expected[i])) < 1e-10);
  }
}

TEST_CASE("Hermite recurrence") {
  const long N = 10;
  const cplx z(0.4, -0.2);
  const PolySequence h = hermite_recurrence(N, z, 3);
  CHECK(std::abs(h.at(1) - z) < 1e-15);
  CHECK(std::abs(h.at(2) - (z * z - 1.0 / (4.0 * N))) < 1e-15);

  auto pi_n = [&](int n, double x) { return hermite_recurrence(N, cplx(x), n).at(n).real(); };
  for (int m = 0; m <= 4; ++m) {
    for (int n = m + 1; n <= 4; ++n) {
      // The weight is below 1e-70 outside [-3, 3].
      const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          [&](double x) { return pi_n(m, x) * pi_n(n, x) * std::exp(-2.0 * N * x * x); }, -3.0, 3.0, 15, 1e-14);
      CHECK(std::fabs(v) < 1e-12);
    }
  }
}

TEST_CASE("E Phi_n equals pi_n") {
  const long N = 200;
  const double z = 1.2;
  const int M = 100000;
  const Scaled<double> ref = hermite_value(N, z, N);
  std::vector<double> ratio(M);
  for (int i = 0; i < M; ++i) {
    const JacobiEnsemble e = sample_jacobi(Seed{8, static_cast<std::uint64_t>(i)}, N, 2.0);
    const Scaled<double> v = transfer_value(e, z, N);
    ratio[i] = v.mantissa / ref.mantissa * std::exp(v.log_scale - ref.log_scale);
  }
  const MomentBand band = moment_band(ratio, 1);
  CHECK(std::fabs(band.estimate - 1.0) < 3.0 * band.standard_error);
}

TEST_CASE("edge normalizer") {
  CHECK_THROWS_AS(edge_normalizer(3, 10, 0.0), DomainError);
  const long N = 4000;
  CHECK(std::fabs(hermite_psi(N, 0.0, N) / 0.3550280539 - 1.0) < 0.01);
  for (long n : {1L, 17L, 4000L}) {
    const double r = std::exp(edge_normalizer(n, N, 1.1) - edge_normalizer(n - 1, N, 1.1));
    // Log-space evaluation carries an absolute error of order eps * N z^2.
    CHECK(r == doctest::Approx(std::sqrt(4.0 * N / n)).epsilon(1e-9));
  }
  CHECK(std::isfinite(edge_normalizer(1000000, 1000000, 1.0)));
  CHECK(std::isfinite(std::abs(edge_normalizer(1000000, 1000000, cplx(1.0, 0.3)))));
}

TEST_CASE("rescaled Psi") {
  const long N = 4000;
  const JacobiEnsemble nf = make_noise_free(N, 2.0);
  // Sup-norm deviation on the unit scale of Ai.
  double worst = 0.0;
  for (double lam = -2.0; lam <= 2.0 + 1e-12; lam += 0.02) {
    const double psi = rescaled_psi(nf, lam, static_cast<double>(N)).value();
    worst = std::max(worst, std::fabs(psi - airy_ai(lam)));
  }
  CHECK(worst < 0.02);
  // The finite-N profile is Ai shifted by N^{-1/3}/2 to leading order.
  double shifted = 0.0;
  for (double lam = -2.0; lam <= 2.0 + 1e-12; lam += 0.1) {
    const double psi = rescaled_psi(nf, lam, static_cast<double>(N)).value();
    shifted = std::max(shifted, std::fabs(psi / airy_ai(lam - 0.5 / std::cbrt(N)) - 1.0));
  }
  CHECK(shifted < 0.005);
  CHECK(rescaled_psi(nf, 0.0, 0.0).value() == doctest::Approx(std::exp(edge_normalizer(0, N, 1.0))));
  CHECK(rescaled_psi(nf, 0.0, 10.7).value() == rescaled_psi(nf, 0.0, 10.0).value());
  CHECK_THROWS_AS(rescaled_psi(nf, 0.0, N + 1.0), RangeError);
  // Complex and real paths agree for real lambda.
  const JacobiEnsemble e = sample_jacobi(Seed{9, 0}, 500, 1.0);
  CHECK(std::abs(rescaled_psi(e, cplx(0.5), 500.0).value() - rescaled_psi(e, 0.5, 500.0).value()) <
        1e-12 * std::fabs(rescaled_psi(e, 0.5, 500.0).value()));
}

TEST_CASE("overflow safety up to N = 1e6") {
  const long N = 1000000;
  const JacobiEnsemble e = sample_jacobi(Seed{10, 0}, N, 2.0);
  const Scaled<double> v = transfer_value(e, 1.5, N);
  CHECK(std::isfinite(v.mantissa));
  CHECK(std::fabs(v.mantissa) >= 0x1.0p-513);
  CHECK(std::fabs(v.mantissa) <= 0x1.0p513);
  CHECK(v.log_scale > 1000.0);
  CHECK(std::isfinite(rescaled_psi(e, 0.0, static_cast<double>(N)).log_scale));
}

TEST_CASE("finite difference view") {
  const long N = 100000;
  const JacobiEnsemble nf = make_noise_free(N, 2.0);
  const FiniteDifferenceView v = finite_difference_view(nf, cplx(0.5), 300);
  const double c = std::cbrt(static_cast<double>(N));
  const cplx z = edge_point(N, cplx(0.5));
  for (long k = 1; k <= 300; ++k) {
    const double n = static_cast<double>(N - k + 1);
    CHECK(std::abs(v.R[k - 1] - c * 2.0 * (z * std::sqrt(N / n) - 1.0)) == 0.0);
    CHECK(std::fabs(v.S[k - 1]) < 2.0 * std::pow(static_cast<double>(N), -2.0 / 3.0));
  }
  CHECK(std::abs(v.U(1.0, 1.0)) == 0.0);
  CHECK(std::abs(v.U(0.5, 2.0) + v.U(2.0, 0.5)) == 0.0);
}
