#pragma once

#include <limits>
#include <string>
#include <vector>

#include "airybeta/rng.hpp"

namespace airybeta {

enum class RiccatiScheme {
  // (phi, phi') carried by the unimodular kick-drift-kick map with exact U
  // increments and renormalized; rho = phi'/phi. Blow-downs are sign changes
  // of phi. Second order in dt and free of the -rho^2 stiffness.
  projective,
  // Euler-Maruyama on rho, switching to x = 1/rho near blow-downs, with
  // recursive step halving through Brownian-bridge refinement.
  euler_maruyama,
};

struct RiccatiOptions {
  RiccatiScheme scheme = RiccatiScheme::projective;
  double m_switch = 10.0;      // |rho| above this evolves x = 1/rho
  double x_back = 0.2;         // leave the inverse chart once |x| exceeds this
  bool ito_correction = true;  // +(4/beta) x^3 in the inverse drift
  int max_depth = 8;           // recursive step halving near blow-downs
  bool store = true;           // keep the per-node values
  long stop_after = -1;        // stop once this many blow-downs are seen
};

// rho = phi'/phi on the mesh s + k dt. Each node stores either rho (direct
// chart) or x = 1/rho (inverse chart). Blow-downs are the upward zero
// crossings of x, i.e. rho passing from -inf to +inf.
struct RiccatiTrajectory {
  double lambda = 0.0;
  double beta = 2.0;
  double s = 0.0;
  double omega = std::numeric_limits<double>::infinity();
  double dt = 0.0;
  double t_end = 0.0;
  std::vector<double> value;
  std::vector<unsigned char> inverse;
  std::vector<double> dU;  // U(t_{k+1}, t_k) per step, for log|phi| bookkeeping
  std::vector<double> blowdowns;
  long substeps = 0;  // halvings taken
  bool stopped_early = false;

  double time(std::size_t k) const { return s + dt * static_cast<double>(k); }
  double rho(std::size_t k) const;
  double x(std::size_t k) const;
};

RiccatiTrajectory evolve_riccati(const BrownianPath& path, double lambda, double s, double omega,
                                 double t_end, double dt, const RiccatiOptions& opts = {});

// Blow-downs in [s, t).
long count_zeros(const RiccatiTrajectory& traj, double s, double t);

struct PvResult {
  double log_abs_phi = 0.0;  // log|phi(t)|
  long sign_flips = 0;
  double eps_used = 0.0;
  bool degenerate = false;
};

// log|phi(t)| for phi(s) = c1 from the principal value of int rho, excising
// windows of half-width eps around each blow-down. Inside a window the exact
// inverse-chart identity d log|phi| = d log|x| + x dU - (2/beta) x^2 dt
// supplies the correction.
PvResult pv_reconstruct(const RiccatiTrajectory& traj, double c1, double s, double t,
                        double eps = 0.1);

// Number of blow-downs on [0, t_max] of rho started at +inf at time 0.
// stop_after >= 0 stops at that many.
long airy_beta_counting(const BrownianPath& path, double lambda, double t_max, double dt,
                        long stop_after = -1);

struct PointProcessSample {
  std::vector<double> eigenvalues;  // descending
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::string method;
  double beta = 2.0;
  double t_horizon = 0.0;
  bool complete = true;  // false when the window held fewer than k_max points
  long evaluations = 0;
};

PointProcessSample sample_airy_beta(const BrownianPath& path, double lambda_min, double lambda_max,
                                    int k_max, double dt, double t_max = 15.0, double tol = 1e-4);

}  // namespace airybeta
