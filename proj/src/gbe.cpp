#include "airybeta/gbe.hpp"

#include <algorithm>
#include <cmath>

#include "airybeta/errors.hpp"

namespace airybeta {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458176568;
constexpr double kUpper = 0x1.0p512;
constexpr double kLower = 0x1.0p-512;

inline double absmax(double x) { return std::fabs(x); }
inline double absmax(cplx x) { return std::max(std::fabs(x.real()), std::fabs(x.imag())); }
inline double scale_by(double x, int e) { return std::ldexp(x, e); }
inline cplx scale_by(cplx x, int e) { return {std::ldexp(x.real(), e), std::ldexp(x.imag(), e)}; }

// Keeps the pair (p1, p2) inside [2^-512, 2^512] by exact power-of-two
// rescaling; the removed exponent accumulates in log_scale.
template <class T>
inline void renormalize(T& p1, T& p2, double& log_scale) {
  const double m = std::max(absmax(p1), absmax(p2));
  if ((m > kUpper || m < kLower) && m > 0.0 && std::isfinite(m)) {
    int ex;
    std::frexp(m, &ex);
    p1 = scale_by(p1, -ex);
    p2 = scale_by(p2, -ex);
    log_scale += ex * kLn2;
  }
}

// Phi_n = (z - diag(n)) Phi_{n-1} - off(n) Phi_{n-2}, emit(n, mantissa, log_scale).
template <class T, class Diag, class Off, class Emit>
void run_recurrence(T z, long n_max, Diag&& diag, Off&& off, Emit&& emit) {
  T p1 = T(1.0), p2 = T(0.0);
  double log_scale = 0.0;
  emit(0L, p1, log_scale);
  for (long n = 1; n <= n_max; ++n) {
    T p0 = (z - diag(n)) * p1;
    if (n >= 2) p0 -= off(n) * p2;
    p2 = p1;
    p1 = p0;
    renormalize(p1, p2, log_scale);
    emit(n, p1, log_scale);
  }
}

template <class T, class Emit>
void ensemble_recurrence(const JacobiEnsemble& e, T z, long n_max, Emit&& emit) {
  if (n_max > e.rows()) throw RangeError("transfer recurrence: index beyond sampled rows");
  const double c = 1.0 / (2.0 * std::sqrt(static_cast<double>(e.N) * e.beta));
  const double d = 1.0 / (4.0 * static_cast<double>(e.N) * e.beta);
  const double* b = e.b.data();
  const double* a = e.a.data();
  run_recurrence(
      z, n_max, [&](long n) { return c * b[n - 1]; },
      [&](long n) { return d * a[n - 2] * a[n - 2]; }, emit);
}

template <class T>
Scaled<T> single_value(const JacobiEnsemble& e, T z, long n) {
  if (n < 0) throw DomainError("transfer_value: n must be >= 0");
  Scaled<T> out;
  ensemble_recurrence(e, z, n, [&](long k, T m, double L) {
    if (k == n) out = {m, L};
  });
  return out;
}

long checked_floor(const JacobiEnsemble& ens, double n) {
  const long nn = static_cast<long>(std::floor(n));
  if (nn < 0) throw DomainError("rescaled_psi: n must be >= 0");
  if (nn > ens.rows()) throw RangeError("rescaled_psi: floor(n) exceeds the sampled matrix");
  return nn;
}

}  // namespace

JacobiEnsemble sample_jacobi(Seed seed, long N, double beta, const JacobiOptions& opts) {
  if (N < 2) throw DomainError("sample_jacobi: N must be >= 2");
  if (!(beta > 0.0)) throw DomainError("sample_jacobi: beta must be positive");
  if (opts.extra < 0) throw DomainError("sample_jacobi: extra must be >= 0");
  const long rows = N + opts.extra;
  JacobiEnsemble e;
  e.N = N;
  e.beta = beta;
  e.couple_lo = std::max(2L, opts.couple_lo);
  e.couple_hi = std::min(rows, opts.couple_hi);
  e.b.resize(rows);
  e.a.resize(rows - 1);
  e.X.resize(rows);
  e.Y.resize(rows);
  e.G.resize(rows);
  const double sqrt2 = std::sqrt(2.0);
  for (long k = 1; k <= rows; ++k) {
    Stream s(seed, Tag::jacobi_b, static_cast<std::uint64_t>(k));
    e.b[k - 1] = sqrt2 * s.normal();
    e.X[k - 1] = e.b[k - 1] / sqrt2;
  }
  e.Y[0] = 0.0;
  e.G[0] = 0.0;
  for (long k = 1; k <= rows - 1; ++k) {
    // a_k feeds Y_{k+1}.
    const long yk = k + 1;
    Stream s(seed, Tag::jacobi_a, static_cast<std::uint64_t>(k));
    const double bk = beta * static_cast<double>(k);
    if (yk >= e.couple_lo && yk <= e.couple_hi) {
      const CoupledPair cp = quantile_couple_from_uniform(s.uniform(), yk, beta);
      e.Y[yk - 1] = cp.Y;
      e.G[yk - 1] = cp.g;
      e.a[k - 1] = std::sqrt(bk + cp.Y * std::sqrt(2.0 * bk));
    } else {
      const double ak = sample_chi(s, bk);
      e.a[k - 1] = ak;
      e.Y[yk - 1] = (ak * ak - bk) / std::sqrt(2.0 * bk);
      e.G[yk - 1] = e.Y[yk - 1];
    }
  }
  return e;
}

JacobiEnsemble make_jacobi(std::vector<double> b, std::vector<double> a, double beta, long N) {
  if (b.size() < 2 || a.size() + 1 != b.size()) throw DomainError("make_jacobi: need |a| = |b| - 1 >= 1");
  if (!(beta > 0.0)) throw DomainError("make_jacobi: beta must be positive");
  JacobiEnsemble e;
  e.N = N < 0 ? static_cast<long>(b.size()) : N;
  e.beta = beta;
  const long rows = static_cast<long>(b.size());
  e.X.resize(rows);
  e.Y.resize(rows);
  for (long k = 1; k <= rows; ++k) e.X[k - 1] = b[k - 1] / std::sqrt(2.0);
  e.Y[0] = 0.0;
  for (long k = 1; k < rows; ++k) {
    const double bk = beta * static_cast<double>(k);
    e.Y[k] = (a[k - 1] * a[k - 1] - bk) / std::sqrt(2.0 * bk);
  }
  e.G = e.Y;
  e.b = std::move(b);
  e.a = std::move(a);
  return e;
}

JacobiEnsemble make_noise_free(long N, double beta, long extra) {
  const long rows = N + extra;
  std::vector<double> b(rows, 0.0), a(rows - 1);
  for (long k = 1; k < rows; ++k) a[k - 1] = std::sqrt(beta * static_cast<double>(k));
  JacobiEnsemble e = make_jacobi(std::move(b), std::move(a), beta, N);
  std::fill(e.Y.begin(), e.Y.end(), 0.0);
  std::fill(e.G.begin(), e.G.end(), 0.0);
  return e;
}

void scaled_matrix(const JacobiEnsemble& ens, std::vector<double>& diag, std::vector<double>& off) {
  const double s = 1.0 / std::sqrt(4.0 * static_cast<double>(ens.N) * ens.beta);
  diag.resize(ens.N);
  off.resize(ens.N - 1);
  for (long k = 0; k < ens.N; ++k) diag[k] = s * ens.b[k];
  for (long k = 0; k + 1 < ens.N; ++k) off[k] = s * ens.a[k];
}

PolySequence transfer_recurrence(const JacobiEnsemble& ens, cplx z, long n_max) {
  if (n_max < 0) n_max = ens.N;
  PolySequence p;
  p.z = z;
  p.values.resize(n_max + 1);
  p.log_scale.resize(n_max + 1);
  ensemble_recurrence(ens, z, n_max, [&](long n, cplx m, double L) {
    p.values[n] = m;
    p.log_scale[n] = L;
  });
  return p;
}

PolySequence hermite_recurrence(long N, cplx z, long n_max) {
  if (N < 1 || n_max < 0) throw DomainError("hermite_recurrence: need N >= 1 and n_max >= 0");
  PolySequence p;
  p.z = z;
  p.values.resize(n_max + 1);
  p.log_scale.resize(n_max + 1);
  const double inv = 1.0 / (4.0 * static_cast<double>(N));
  run_recurrence(
      z, n_max, [](long) { return 0.0; }, [&](long n) { return (n - 1) * inv; },
      [&](long n, cplx m, double L) {
        p.values[n] = m;
        p.log_scale[n] = L;
      });
  return p;
}

Scaled<double> transfer_value(const JacobiEnsemble& ens, double z, long n) { return single_value(ens, z, n); }
Scaled<cplx> transfer_value(const JacobiEnsemble& ens, cplx z, long n) { return single_value(ens, z, n); }

Scaled<double> hermite_value(long N, double z, long n) {
  Scaled<double> out;
  const double inv = 1.0 / (4.0 * static_cast<double>(N));
  run_recurrence(
      z, n, [](long) { return 0.0; }, [&](long k) { return (k - 1) * inv; },
      [&](long k, double m, double L) {
        if (k == n) out = {m, L};
      });
  return out;
}

double edge_normalizer(long n, long N, double z) {
  if (z == 0.0) throw DomainError("edge_normalizer: z must be nonzero");
  if (n < 0) throw DomainError("edge_normalizer: n must be >= 0");
  const double Nd = static_cast<double>(N), nd = static_cast<double>(n);
  const double nz2 = Nd * z * z;
  return -(0.25 * std::log(2.0 * M_PI) + nz2 - nd * kLn2 - std::log(nz2) / 12.0 +
           0.5 * (std::lgamma(nd + 1.0) - nd * std::log(Nd)));
}

cplx edge_normalizer(long n, long N, cplx z) {
  if (z == cplx(0.0)) throw DomainError("edge_normalizer: z must be nonzero");
  if (n < 0) throw DomainError("edge_normalizer: n must be >= 0");
  const double Nd = static_cast<double>(N), nd = static_cast<double>(n);
  const cplx nz2 = Nd * z * z;
  return -(0.25 * std::log(2.0 * M_PI) + nz2 - nd * kLn2 - std::log(nz2) / 12.0 +
           0.5 * (std::lgamma(nd + 1.0) - nd * std::log(Nd)));
}

double edge_point(long N, double lambda) {
  return 1.0 + lambda / (2.0 * std::pow(static_cast<double>(N), 2.0 / 3.0));
}

cplx edge_point(long N, cplx lambda) {
  return 1.0 + lambda / (2.0 * std::pow(static_cast<double>(N), 2.0 / 3.0));
}

Scaled<cplx> rescaled_psi(const JacobiEnsemble& ens, cplx lambda, double n) {
  const long nn = checked_floor(ens, n);
  const cplx z = edge_point(ens.N, lambda);
  const Scaled<cplx> phi = transfer_value(ens, z, nn);
  const cplx lw = edge_normalizer(nn, ens.N, z);
  return {phi.mantissa * std::exp(cplx(0.0, lw.imag())), phi.log_scale + lw.real()};
}

Scaled<double> rescaled_psi(const JacobiEnsemble& ens, double lambda, double n) {
  const long nn = checked_floor(ens, n);
  const double z = edge_point(ens.N, lambda);
  const Scaled<double> phi = transfer_value(ens, z, nn);
  return {phi.mantissa, phi.log_scale + edge_normalizer(nn, ens.N, z)};
}

std::vector<double> psi_window(const JacobiEnsemble& ens, double lambda, long n_lo, long n_hi) {
  if (n_lo < 0 || n_hi < n_lo) throw DomainError("psi_window: bad index range");
  if (n_hi > ens.rows()) throw RangeError("psi_window: index beyond sampled rows");
  const double z = edge_point(ens.N, lambda);
  std::vector<double> out(n_hi - n_lo + 1);
  ensemble_recurrence(ens, z, n_hi, [&](long n, double m, double L) {
    if (n >= n_lo) out[n - n_lo] = m * std::exp(L + edge_normalizer(n, ens.N, z));
  });
  return out;
}

double hermite_psi(long N, double lambda, long n) {
  const double z = edge_point(N, lambda);
  const Scaled<double> h = hermite_value(N, z, n);
  return h.mantissa * std::exp(h.log_scale + edge_normalizer(n, N, z));
}

std::vector<double> psi_zeros(const JacobiEnsemble& ens, double lambda_lo, double lambda_hi,
                              double step, double tol) {
  if (!(step > 0.0) || lambda_hi <= lambda_lo) throw DomainError("psi_zeros: bad scan window");
  auto sign_at = [&](double lam) {
    return transfer_value(ens, edge_point(ens.N, lam), ens.N).mantissa;
  };
  std::vector<double> zeros;
  const long steps = static_cast<long>(std::ceil((lambda_hi - lambda_lo) / step));
  double hi = lambda_hi;
  double f_hi = sign_at(hi);
  for (long i = 1; i <= steps; ++i) {
    const double lo = std::max(lambda_lo, lambda_hi - i * step);
    const double f_lo = sign_at(lo);
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      double a = lo, b = hi, fa = f_lo;
      while (b - a > tol) {
        const double m = 0.5 * (a + b);
        if (m == a || m == b) break;
        const double fm = sign_at(m);
        if ((fm > 0.0) == (fa > 0.0)) {
          a = m;
          fa = fm;
        } else {
          b = m;
        }
      }
      zeros.push_back(0.5 * (a + b));
    }
    hi = lo;
    f_hi = f_lo;
  }
  return zeros;
}

WalkSums walk_sums(const JacobiEnsemble& ens, long n_lo, long n_hi) {
  if (n_lo < 1 || n_hi > ens.rows() || n_hi < n_lo) throw RangeError("walk_sums: bad row range");
  WalkSums w;
  w.offset = n_lo;
  w.xhat.resize(n_hi - n_lo + 1);
  w.yhat.resize(n_hi - n_lo + 1);
  double sx = 0.0, sy = 0.0;
  for (long n = n_lo; n <= n_hi; ++n) {
    sx += ens.X[n - 1];
    sy += ens.G[n - 1];
    w.xhat[n - n_lo] = sx;
    w.yhat[n - n_lo] = sy;
  }
  return w;
}

WalkSums sample_walk_window(Seed seed, double beta, long n_lo, long n_hi) {
  if (n_lo < 2 || n_hi < n_lo) throw DomainError("sample_walk_window: bad row range");
  WalkSums w;
  w.offset = n_lo;
  w.xhat.resize(n_hi - n_lo + 1);
  w.yhat.resize(n_hi - n_lo + 1);
  double sx = 0.0, sy = 0.0;
  for (long n = n_lo; n <= n_hi; ++n) {
    Stream sb(seed, Tag::jacobi_b, static_cast<std::uint64_t>(n));
    sx += sb.normal();
    sy += quantile_couple_gamma(seed, n, beta).g;
    w.xhat[n - n_lo] = sx;
    w.yhat[n - n_lo] = sy;
  }
  return w;
}

cplx FiniteDifferenceView::U(double u, double t) const {
  if (u > t) return -U(t, u);
  const double c = std::cbrt(static_cast<double>(N_p));
  const long k_lo = static_cast<long>(std::floor(u * c));
  const long k_hi = static_cast<long>(std::floor(t * c));
  if (k_lo < 0 || k_hi > k_max) throw RangeError("finite difference view: time outside the window");
  return cumulative[k_hi] - cumulative[k_lo];
}

FiniteDifferenceView finite_difference_view(const JacobiEnsemble& ens, cplx lambda, long k_max) {
  if (k_max < 1 || k_max >= ens.N) throw DomainError("finite_difference_view: bad window");
  FiniteDifferenceView v;
  v.N_p = ens.N;
  v.k_max = k_max;
  v.lambda = lambda;
  const double Np = static_cast<double>(ens.N);
  const double c = std::cbrt(Np);
  const cplx z = edge_point(ens.N, lambda);
  const double s2b = std::sqrt(2.0 / ens.beta);
  v.R.resize(k_max);
  v.S.resize(k_max);
  v.cumulative.assign(k_max + 1, cplx(0.0));
  for (long k = 1; k <= k_max; ++k) {
    const long n = ens.N - k + 1;
    const double nd = static_cast<double>(n);
    const double sq = std::sqrt(nd);
    v.R[k - 1] = c * (2.0 * (z * std::sqrt(Np / nd) - 1.0) - s2b * ens.X[n - 1] / sq);
    v.S[k - 1] = c * (s2b * ens.Y[n - 1] / sq + std::sqrt((nd - 1.0) / nd) - 1.0);
    v.cumulative[k] = v.cumulative[k - 1] + v.R[k - 1] - v.S[k - 1];
  }
  return v;
}

}  // namespace airybeta
