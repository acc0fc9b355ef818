#include "airybeta/stats.hpp"

#include <algorithm>
#include <cmath>

#include "airybeta/errors.hpp"

namespace airybeta {

EmpiricalSample::EmpiricalSample(std::vector<double> v, std::string tag)
    : values(std::move(v)), provenance(std::move(tag)) {
  if (values.empty()) throw DomainError("EmpiricalSample: empty sample");
  std::sort(values.begin(), values.end());
}

double EmpiricalSample::cdf(double x) const {
  const auto it = std::upper_bound(values.begin(), values.end(), x);
  return static_cast<double>(it - values.begin()) / static_cast<double>(values.size());
}

double EmpiricalSample::quantile(double p) const {
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= values.size()) return values.back();
  const double w = pos - static_cast<double>(i);
  return values[i] + w * (values[i + 1] - values[i]);
}

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw DomainError("ks_one_sample: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DomainError("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_two_sample_critical(std::size_t n, std::size_t m) {
  const double nn = static_cast<double>(n), mm = static_cast<double>(m);
  return 1.63 * std::sqrt((nn + mm) / (nn * mm));
}

double mean(const std::vector<double>& x) {
  if (x.empty()) throw DomainError("mean: empty sample");
  double s = 0.0;
  for (double v : x) s += v;
  return s / static_cast<double>(x.size());
}

double variance(const std::vector<double>& x) {
  if (x.size() < 2) throw DomainError("variance: need at least two values");
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

double median(std::vector<double> x) {
  if (x.empty()) throw DomainError("median: empty sample");
  std::sort(x.begin(), x.end());
  const std::size_t n = x.size();
  return n % 2 ? x[n / 2] : 0.5 * (x[n / 2 - 1] + x[n / 2]);
}

MomentBand moment_band(const std::vector<double>& sample, int k) {
  if (sample.size() < 2) throw DomainError("moment_band: need at least two values");
  std::vector<double> p(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) p[i] = std::pow(sample[i], k);
  MomentBand band;
  band.estimate = mean(p);
  band.standard_error = std::sqrt(variance(p) / static_cast<double>(p.size()));
  return band;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double jarque_bera(const std::vector<double>& x) {
  const double m = mean(x);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  return n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol) {
  double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) throw BracketError("bisect: no sign change on the bracket");
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace airybeta
