#include "airybeta/tridiag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "airybeta/errors.hpp"

namespace airybeta {

std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (e.size() + 1 != n) throw ContractError("tridiag_eigenvalues: off-diagonal must have n-1 entries");
  e.push_back(0.0);
  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw DomainError("tridiag_eigenvalues: no convergence");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool deflated = false;
        for (std::size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            deflated = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (deflated) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  std::sort(d.begin(), d.end());
  return d;
}

std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
  const double tiny = std::numeric_limits<double>::min();
  std::size_t count = 0;
  double q = d[0] - x;
  if (q == 0.0) q = -tiny;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q == 0.0) q = -tiny;
    if (q < 0.0) ++count;
  }
  return count;
}

double tridiag_kth_largest(const std::vector<double>& d, const std::vector<double>& e,
                           std::size_t k, double tol) {
  const std::size_t n = d.size();
  if (k < 1 || k > n) throw DomainError("tridiag_kth_largest: k out of range");
  double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(e[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const double scale = std::max(std::fabs(lo), std::fabs(hi));
  const double eps = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() * scale);
  // The k-th largest is the (n-k+1)-th smallest: count(x) >= n-k+1 iff x > lambda.
  const std::size_t target = n - k + 1;
  while (hi - lo > eps) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (sturm_count(d, e, mid) >= target) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace airybeta
