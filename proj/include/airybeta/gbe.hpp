#pragma once

#include <cmath>
#include <complex>
#include <vector>

#include "airybeta/rng.hpp"

namespace airybeta {

using cplx = std::complex<double>;

// Entries are 1-based in the mathematical sense: b[k-1] holds b_k. Arrays may
// extend past N ("extra" rows of the semi-infinite matrix) for two-sided
// edge paths.
struct JacobiEnsemble {
  long N = 0;
  double beta = 2.0;
  std::vector<double> b;  // b_1 .. b_{N+extra}
  std::vector<double> a;  // a_1 .. a_{N+extra-1}
  std::vector<double> X;  // X_k = b_k / sqrt(2)
  std::vector<double> Y;  // Y_k, with Y_1 = 0
  std::vector<double> G;  // Y-walk source: coupled Gaussian g_k inside the window, Y_k outside
  long couple_lo = 0;     // Y indices [couple_lo, couple_hi] are quantile coupled
  long couple_hi = -1;

  long rows() const { return static_cast<long>(b.size()); }
};

struct JacobiOptions {
  long extra = 0;
  long couple_lo = 0;
  long couple_hi = -1;
};

JacobiEnsemble sample_jacobi(Seed seed, long N, double beta, const JacobiOptions& opts = {});
JacobiEnsemble make_jacobi(std::vector<double> b, std::vector<double> a, double beta, long N = -1);
// b = 0 and a_i^2 = beta*i: the recurrence collapses to the Hermite one.
JacobiEnsemble make_noise_free(long N, double beta, long extra = 0);

// Diagonal and off-diagonal of the scaled matrix A / sqrt(4 N beta), top N x N.
void scaled_matrix(const JacobiEnsemble& ens, std::vector<double>& diag, std::vector<double>& off);

template <class T>
struct Scaled {
  T mantissa{};
  double log_scale = 0.0;
  T value() const { return mantissa * std::exp(log_scale); }
};

struct PolySequence {
  cplx z;
  std::vector<cplx> values;      // mantissas of Phi_0 .. Phi_n
  std::vector<double> log_scale;  // natural-log scale per index
  cplx at(long n) const { return values[static_cast<std::size_t>(n)] * std::exp(log_scale[static_cast<std::size_t>(n)]); }
};

PolySequence transfer_recurrence(const JacobiEnsemble& ens, cplx z, long n_max = -1);
PolySequence hermite_recurrence(long N, cplx z, long n_max);

// Phi_n at a single index, overflow safe.
Scaled<double> transfer_value(const JacobiEnsemble& ens, double z, long n);
Scaled<cplx> transfer_value(const JacobiEnsemble& ens, cplx z, long n);
Scaled<double> hermite_value(long N, double z, long n);

double edge_normalizer(long n, long N, double z);
cplx edge_normalizer(long n, long N, cplx z);

double edge_point(long N, double lambda);
cplx edge_point(long N, cplx lambda);

Scaled<cplx> rescaled_psi(const JacobiEnsemble& ens, cplx lambda, double n);
Scaled<double> rescaled_psi(const JacobiEnsemble& ens, double lambda, double n);
// Psi_n(lambda) for n in [n_lo, n_hi] (plain values, index n - n_lo).
std::vector<double> psi_window(const JacobiEnsemble& ens, double lambda, long n_lo, long n_hi);
double hermite_psi(long N, double lambda, long n);

// Sign-change scan of lambda -> Psi_N(lambda), refined by bisection.
// Returned in descending order.
std::vector<double> psi_zeros(const JacobiEnsemble& ens, double lambda_lo, double lambda_hi,
                              double step = 0.05, double tol = 1e-10);

struct FiniteDifferenceView {
  long N_p = 0;
  long k_max = 0;
  cplx lambda;
  std::vector<cplx> R;    // R[k-1] = R_{lambda,k}
  std::vector<double> S;  // S[k-1] = S_k
  std::vector<cplx> cumulative;  // cumulative[k] = sum_{j<=k} (R_j - S_j)
  // Discrete kernel: sum over u N^{1/3} < k <= t N^{1/3}.
  cplx U(double u, double t) const;
};

// Cumulative walks of X and of the Y-walk source G over matrix rows
// [n_lo, n_hi]; xhat[i] is the partial sum through row offset + i.
struct WalkSums {
  long offset = 0;
  std::vector<double> xhat;
  std::vector<double> yhat;
};

WalkSums walk_sums(const JacobiEnsemble& ens, long n_lo, long n_hi);
// Samples only rows [n_lo, n_hi] (all quantile coupled); entries coincide
// with those of sample_jacobi under the same seed and coupling window.
WalkSums sample_walk_window(Seed seed, double beta, long n_lo, long n_hi);

FiniteDifferenceView finite_difference_view(const JacobiEnsemble& ens, cplx lambda, long k_max);

}  // namespace airybeta
