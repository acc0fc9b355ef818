#include <doctest.h>

#include <cmath>

#include "airybeta/airy.hpp"
#include "airybeta/errors.hpp"

using namespace airybeta;

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;
}

TEST_CASE("values at the origin") {
  const AiryValue v = airy(0.0);
  CHECK(v.ai == doctest::Approx(0.35502805388781723926).epsilon(1e-15));
  CHECK(v.ai_prime == doctest::Approx(-0.25881940379280679840).epsilon(1e-15));
  // Series oracle agrees.
  const AiryValue s = airy_series(0.0);
  CHECK(s.ai == doctest::Approx(0.35502805388781723926).epsilon(1e-15));
  CHECK(s.ai_prime == doctest::Approx(-0.25881940379280679840).epsilon(1e-15));
}

TEST_CASE("series oracle agrees on the central range") {
  for (double x = -6.0; x <= 2.0; x += 0.25) {
    const AiryValue a = airy(x), s = airy_series(x);
    CHECK(std::fabs(a.ai - s.ai) < 1e-11);
    CHECK(std::fabs(a.ai_prime - s.ai_prime) < 1e-11);
    CHECK(std::fabs(a.bi - s.bi) < 1e-11 * std::max(1.0, std::fabs(s.bi)));
  }
}

TEST_CASE("Wronskian") {
  for (double x = -20.0; x <= 20.0; x += 0.37) {
    CHECK(std::fabs(airy(x).wronskian() - 1.0 / kPi) < 1e-12);
  }
  CHECK(std::fabs(airy(150.0).wronskian() - 1.0 / kPi) < 1e-12);
  CHECK(std::fabs(airy(5000.0).wronskian() - 1.0 / kPi) < 1e-12);
}

TEST_CASE("large-x asymptotics") {
  const double x = 30.0;
  const double r = std::sqrt(4.0 * kPi) * std::pow(x, 0.25) * std::exp(2.0 / 3.0 * std::pow(x, 1.5)) * airy_ai(x);
  CHECK(std::fabs(r - 1.0) < 1e-3);
  // Log-form beyond the overflow guard stays finite.
  const AiryValue big = airy(1e4);
  CHECK(std::isfinite(big.bi));
  CHECK(big.log_scale_bi > 600000.0);
  CHECK_THROWS_AS(airy(2e4), DomainError);
}

TEST_CASE("ODE residual") {
  // Fourth-order central stencil of Ai' on the h = 1e-4 grid.
  const double h = 1e-4;
  for (double x = -10.0; x <= 10.0; x += 0.5) {
    const double d2 = (-airy_ai_prime(x + 2 * h) + 8.0 * airy_ai_prime(x + h) - 8.0 * airy_ai_prime(x - h) +
                       airy_ai_prime(x - 2 * h)) / (12.0 * h);
    CHECK(std::fabs(d2 - x * airy_ai(x)) < 1e-10);
  }
}

TEST_CASE("zeros") {
  CHECK(airy_ai_zero(1) == doctest::Approx(-2.338107410459767).epsilon(1e-12));
  CHECK(airy_ai_zero(2) == doctest::Approx(-4.087949444130971).epsilon(1e-12));
  CHECK(std::fabs(airy_ai(airy_ai_zero(3))) < 1e-13);
}

TEST_CASE("log-form large-argument expansion") {
  for (double x = 8.0; x <= 30.0; x += 1.7) {
    const AiryValue v = airy(x);
    const AiryLogValue l = airy_log_asymptotic(x);
    const double log_ai = std::log(v.ai) + v.log_scale_ai;
    const double log_bi = std::log(v.bi) + v.log_scale_bi;
    CHECK(std::fabs(l.log_ai.real() - log_ai) < 1e-10);
    CHECK(std::fabs(l.log_bi.real() - log_bi) < 1e-10);
    CHECK(std::fabs(l.ai_ratio.real() - v.ai_prime / v.ai) < 1e-9 * std::sqrt(x));
    CHECK(std::fabs(l.bi_ratio.real() - v.bi_prime / v.bi) < 1e-9 * std::sqrt(x));
    CHECK(std::fabs(l.log_ai.imag()) < 1e-15);
  }
  // Wronskian Ai Bi' - Ai' Bi = 1/pi off the real axis.
  const std::complex<double> z(12.0, 1.5);
  const AiryLogValue l = airy_log_asymptotic(z);
  const std::complex<double> w = std::exp(l.log_ai + l.log_bi) * (l.bi_ratio - l.ai_ratio);
  CHECK(std::abs(w - 1.0 / M_PI) < 1e-10);
  CHECK_THROWS_AS(airy_log_asymptotic(2.0), DomainError);
}
