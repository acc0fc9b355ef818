#pragma once

#include <complex>

namespace airybeta {

// Ai, Ai', Bi, Bi' at x. For x beyond the overflow guard the values are
// stored scaled: the true Ai is ai * exp(log_scale_ai), likewise for Bi.
struct AiryValue {
  double x = 0.0;
  double ai = 0.0;
  double ai_prime = 0.0;
  double bi = 0.0;
  double bi_prime = 0.0;
  double log_scale_ai = 0.0;
  double log_scale_bi = 0.0;

  double wronskian() const;
};

AiryValue airy(double x);
double airy_ai(double x);
double airy_ai_prime(double x);

// k-th zero of Ai, counting from the origin (a_1 = -2.33810741...).
double airy_ai_zero(int k);

// Large-argument expansions kept in log form so that nothing overflows:
// Ai(z) = exp(log_ai), Ai'(z) = ai_ratio * Ai(z), likewise for Bi. Valid for
// |z| >= 6 with |arg z| < pi/3; the Bi form drops the recessive term.
struct AiryLogValue {
  std::complex<double> log_ai, ai_ratio, log_bi, bi_ratio;
};
AiryLogValue airy_log_asymptotic(std::complex<double> z);

// Maclaurin series with a fixed number of terms; independent of airy().
AiryValue airy_series(double x, int terms = 40);

}  // namespace airybeta
