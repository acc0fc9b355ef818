#include "airybeta/airy.hpp"

#include <cmath>

#include <boost/math/special_functions/airy.hpp>

#include "airybeta/errors.hpp"

namespace airybeta {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kLogGuard = 100.0;

// Asymptotic expansions for large positive x, returned with the exponential
// factors split off.
AiryValue airy_asymptotic_positive(double x) {
  const double zeta = 2.0 / 3.0 * x * std::sqrt(x);
  double u = 1.0, su_alt = 1.0, su = 1.0, sv_alt = 1.0, sv = 1.0, zpow = 1.0;
  for (int k = 1; k <= 30; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    zpow *= zeta;
    const double tu = u / zpow, tv = v / zpow;
    const double sign = (k % 2) ? -1.0 : 1.0;
    su_alt += sign * tu;
    su += tu;
    sv_alt += sign * tv;
    sv += tv;
    if (std::fabs(tu) < 1e-18 && std::fabs(tv) < 1e-18) break;
  }
  const double q = std::pow(x, 0.25);
  const double sp = std::sqrt(kPi);
  AiryValue r;
  r.x = x;
  r.ai = su_alt / (2.0 * sp * q);
  r.ai_prime = -q * sv_alt / (2.0 * sp);
  r.bi = su / (sp * q);
  r.bi_prime = q * sv / sp;
  r.log_scale_ai = -zeta;
  r.log_scale_bi = zeta;
  return r;
}

}  // namespace

double AiryValue::wronskian() const {
  const double s = std::exp(log_scale_ai + log_scale_bi);
  return (ai * bi_prime - ai_prime * bi) * s;
}

AiryValue airy(double x) {
  if (!std::isfinite(x) || std::fabs(x) > 1e4) throw DomainError("airy: |x| must be <= 1e4");
  if (x > kLogGuard) return airy_asymptotic_positive(x);
  AiryValue r;
  r.x = x;
  r.ai = boost::math::airy_ai(x);
  r.ai_prime = boost::math::airy_ai_prime(x);
  r.bi = boost::math::airy_bi(x);
  r.bi_prime = boost::math::airy_bi_prime(x);
  return r;
}

double airy_ai(double x) {
  const AiryValue v = airy(x);
  return v.ai * std::exp(v.log_scale_ai);
}

double airy_ai_prime(double x) {
  const AiryValue v = airy(x);
  return v.ai_prime * std::exp(v.log_scale_ai);
}

double airy_ai_zero(int k) {
  if (k < 1) throw DomainError("airy_ai_zero: k must be >= 1");
  return boost::math::airy_ai_zero<double>(k);
}

AiryValue airy_series(double x, int terms) {
  // f and g are the even/odd power series solutions of y'' = x y.
  const double c1 = 0.355028053887817239260063186004183176;
  const double c2 = 0.258819403792806798405183560189203963;
  double f = 1.0, fp = 0.0, g = x, gp = 1.0;
  double tf = 1.0, tg = x;
  const double x3 = x * x * x;
  for (int k = 1; k < terms; ++k) {
    tf *= x3 / ((3.0 * k - 1.0) * (3.0 * k));
    tg *= x3 / ((3.0 * k) * (3.0 * k + 1.0));
    f += tf;
    g += tg;
    fp += 3.0 * k * tf / x;
    gp += (3.0 * k + 1.0) * tg / x;
  }
  if (x == 0.0) fp = 0.0, gp = 1.0;
  const double s3 = std::sqrt(3.0);
  AiryValue r;
  r.x = x;
  r.ai = c1 * f - c2 * g;
  r.ai_prime = c1 * fp - c2 * gp;
  r.bi = s3 * (c1 * f + c2 * g);
  r.bi_prime = s3 * (c1 * fp + c2 * gp);
  return r;
}

AiryLogValue airy_log_asymptotic(std::complex<double> z) {
  using C = std::complex<double>;
  if (std::abs(z) < 6.0 || std::abs(std::arg(z)) >= M_PI / 3.0)
    throw DomainError("airy_log_asymptotic: need |z| >= 6 and |arg z| < pi/3");
  const C zeta = (2.0 / 3.0) * z * std::sqrt(z);
  const C inv = 1.0 / zeta;
  // u_k and v_k coefficients of the standard expansions, summed until the
  // terms stop shrinking.
  C su_alt = 1.0, sv_alt = 1.0, su = 1.0, sv = 1.0, p = 1.0;
  double u = 1.0, last = 1.0;
  for (int k = 1; k < 80; ++k) {
    u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / ((2.0 * k - 1.0) * 216.0 * k);
    const double v = -(6.0 * k + 1.0) / (6.0 * k - 1.0) * u;
    p *= inv;
    const double mag = std::abs(u * p);
    if (mag > last || mag < 1e-18) break;
    last = mag;
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    su_alt += sign * u * p;
    sv_alt += sign * v * p;
    su += u * p;
    sv += v * p;
  }
  const double log_sqrt_pi = 0.5 * std::log(M_PI);
  const C quarter_log = 0.25 * std::log(z);
  const C root = std::sqrt(z);
  AiryLogValue r;
  r.log_ai = -zeta - std::log(2.0) - log_sqrt_pi - quarter_log + std::log(su_alt);
  r.ai_ratio = -root * sv_alt / su_alt;
  r.log_bi = zeta - log_sqrt_pi - quarter_log + std::log(su);
  r.bi_ratio = root * sv / su;
  return r;
}

}  // namespace airybeta
