#pragma once

#include <cstdint>
#include <vector>

#include "airybeta/gbe.hpp"
#include "airybeta/rng.hpp"
#include "airybeta/sai.hpp"

namespace airybeta {

// Branch of sqrt(z^2 - u) that behaves like z at infinity, so that
// (z + root)/2 is the dominant root of r^2 - z r + u/4.
cplx dominant_sqrt(cplx z, double u);
// The conformal map of C \ [-1, 1] onto the unit disk, J(z) = z - sqrt(z^2 - 1).
cplx conformal_J(cplx z);

struct GafSample {
  double t = 0.0;
  cplx z;
  cplx value;
  double variance = 0.0;       // E|g|^2
  cplx pseudo_variance;        // E g^2, which gives E exp(a g) = exp(a^2 E g^2 / 2)
};

// Riemann-Stieltjes sum of -(1/2) int_0^t (dX_u + J(z/sqrt u) dY_u) / sqrt(z^2 - u)
// against the walks of X_k and Y_k on the mesh 1/N, with u = (k-1)/N for row k.
// Both moments come from adaptive quadrature of the same integrand.
GafSample gaf_g(const JacobiEnsemble& ens, double t, cplx z);
// Moments only.
GafSample gaf_moments(double t, cplx z);

struct PlanarRecord {
  cplx z;
  cplx ratio;
  double deviation = 0.0;  // |ratio - 1|
};

// Phi_N(z) E[exp(a g_1(z))] / (pi_N(z) exp(a g_1(z))) with a = sqrt(2/beta).
// A noise-free surrogate carries no field, so its normalization is one.
std::vector<PlanarRecord> planar_ratio_check(const JacobiEnsemble& ens,
                                             const std::vector<cplx>& z_list,
                                             bool noise_free = false);

struct CoupledConfig {
  long N = 100000;
  double beta = 2.0;
  double z0 = 1.0;
  double epsilon = 0.1;
  double dt = 1e-3;          // requested path mesh; snapped to divide N_p^{-1/3}
  double sai_horizon = 12.0; // seed time of the backward SAi solve
  double lambda_floor = -6.0;
  double t_min = 0.0;        // most negative time needed on the Psi side
  bool noise_free = false;
};

// One GbE realization and the edge Brownian motion built from its own walks.
struct CoupledRun {
  CoupledConfig config;
  JacobiEnsemble ens;
  BrownianPath edge_path;
  GaussianFunctional gf;
  long N_p = 0;
  long N_H = 0;
  double T = 0.0;
  double t_H = 0.0;

  double h() const { return std::cbrt(1.0 / static_cast<double>(N_p)); }
  cplx point(cplx lambda) const;
  double sai_beta() const;
};

CoupledRun make_coupled_run(Seed seed, const CoupledConfig& config);

// Psi_n(lambda) = w_n Phi_n(z0 + lambda z0 / (2 N_p^{2/3})) in scaled form.
Scaled<cplx> coupled_psi(const CoupledRun& run, cplx lambda, long n);

// q_N(lambda) = sqrt(2/beta) g_{t_H}(z) and log E exp(q_N).
struct HyperbolicGaussian {
  cplx q;
  cplx log_mean_exp;
};
HyperbolicGaussian hyperbolic_gaussian(const CoupledRun& run, cplx lambda);

struct UpsilonRecord {
  cplx lambda;
  cplx upsilon1;
  cplx upsilon2;
  cplx q;
};

std::vector<UpsilonRecord> upsilon_diagnostic(const CoupledRun& run,
                                              const std::vector<cplx>& lambda_grid);

struct CouplingProfile {
  std::vector<double> t;
  std::vector<double> lambda;
  std::vector<double> log_prefactor;  // per lambda
  // Row-major over (lambda, t).
  std::vector<double> psi_normalized;
  std::vector<double> sai;
  double sup_deviation = 0.0;
  double mean_deviation = 0.0;

  double psi_at(std::size_t i_lambda, std::size_t i_t) const { return psi_normalized[i_lambda * t.size() + i_t]; }
  double sai_at(std::size_t i_lambda, std::size_t i_t) const { return sai[i_lambda * t.size() + i_t]; }
};

// The prefactor exp(int_0^T X + q_N) / E exp(int_0^T X + q_N) is evaluated
// from its definition; the two Gaussians come from disjoint rows, so the
// normalization is the product of the two log-normal means. Times are
// snapped to the walk mesh t = j N_p^{-1/3}.
CouplingProfile psi_vs_sai(const CoupledRun& run, const std::vector<double>& t_grid,
                           const std::vector<double>& lambda_grid);

struct TopZeroPair {
  double psi = 0.0;
  double sai = 0.0;
  bool found = false;
};

// Largest zero of lambda -> Psi_{N_p}(lambda) and of lambda -> SAi_lambda(0)
// on the same noise, both searched below lambda_hi.
TopZeroPair top_zero_pair(const CoupledRun& run, double lambda_lo, double lambda_hi);

struct CltResult {
  long N = 0;
  double beta = 2.0;
  std::vector<double> log_abs_psi;
  std::vector<double> standardized;
  double ks = 0.0;              // standardized sample vs the standard normal
  double ks_studentized = 0.0;  // same after empirical centering and scaling
  double variance = 0.0;
  double variance_se = 0.0;
  double predicted_variance = 0.0;  // (2/(3 beta)) log N
};

// M independent ensembles Seed{seed, i}, statistic at lambda = 0.
CltResult clt_statistic(std::uint64_t seed, long N, double beta, int M, int workers = 1);

}  // namespace airybeta
