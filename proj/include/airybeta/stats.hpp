#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace airybeta {

struct EmpiricalSample {
  std::vector<double> values;  // sorted ascending
  std::string provenance;

  EmpiricalSample() = default;
  explicit EmpiricalSample(std::vector<double> v, std::string tag = {});
  std::size_t n() const { return values.size(); }
  double cdf(double x) const;
  double quantile(double p) const;
};

double ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Critical value of the two-sample KS statistic at the 1% level.
double ks_two_sample_critical(std::size_t n, std::size_t m);

struct MomentBand {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// Raw moment E[x^k] with its CLT standard error.
MomentBand moment_band(const std::vector<double>& sample, int k);
double mean(const std::vector<double>& x);
double variance(const std::vector<double>& x);
double median(std::vector<double> x);

double normal_cdf(double x);

// Jarque-Bera statistic, asymptotically chi-square with two degrees of freedom.
double jarque_bera(const std::vector<double>& x);

double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

}  // namespace airybeta
