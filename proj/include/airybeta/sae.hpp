#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "airybeta/rng.hpp"

namespace airybeta {

using cplx = std::complex<double>;

// U_lambda(t,u) = (t^2 - u^2)/2 + B(t) - B(u) + lambda (t - u), exact on the
// piecewise linear path. Throws RangeError outside the path domain.
cplx kernel_U(const BrownianPath& path, cplx lambda, double t, double u);

enum class Scheme {
  // Kick-drift-kick with exact U increments over each half step. Every step
  // is a unimodular map, so discrete Wronskians are conserved exactly.
  verlet,
  // Explicit U-increment kick from the left endpoint, trapezoid for phi.
  euler_trapezoid,
};

// Solution of  Phi(t) = c2 + c1 U(t,s) + int_s^t U(t,v) Phi(v) dv,
// phi(t) = c1 + int_s^t Phi, on the mesh t_min + k dt.
struct SolutionPath {
  cplx lambda;
  double base_s = 0.0;
  cplx c1, c2;
  double t_min = 0.0;
  double dt = 0.0;
  long base_index = 0;
  std::vector<cplx> phi;
  std::vector<cplx> phi_prime;
  const BrownianPath* path = nullptr;
  Scheme scheme = Scheme::verlet;

  std::size_t size() const { return phi.size(); }
  double t_max() const { return t_min + dt * static_cast<double>(phi.size() - 1); }
  double time(std::size_t k) const { return t_min + dt * static_cast<double>(k); }
  // Linear interpolation between nodes; RangeError outside the mesh.
  cplx value(double t) const;
  cplx derivative(double t) const;
};

// The mesh must contain s as a node: (s - t_min) and (t_max - s) are integer
// multiples of dt up to 1e-9 relative.
SolutionPath solve_ivp(const BrownianPath& path, cplx lambda, double s, cplx c1, cplx c2,
                       double t_min, double t_max, double dt, Scheme scheme = Scheme::verlet);

struct FundamentalPair {
  SolutionPath f;  // f(s) = 1, f'(s) = 0
  SolutionPath g;  // g(s) = 0, g'(s) = 1
};

FundamentalPair dirichlet_neumann(const BrownianPath& path, cplx lambda, double s, double t_min,
                                  double t_max, double dt, Scheme scheme = Scheme::verlet);

// f g' - f' g at t. ContractError when the two solutions do not share the
// path, lambda and mesh.
cplx wronskian(const SolutionPath& f, const SolutionPath& g, double t);

enum class KernelVariant { value, du, dt, dtdu };

// Stochastic Airy kernel A(t,u) and its derivatives from a fundamental pair
// based at u: A = -g_u(t), dA/du = f_u(t), dA/dt = -g_u'(t), d2A/dtdu = f_u'(t).
cplx sa_kernel(const BrownianPath& path, cplx lambda, double t, double u, KernelVariant variant,
               double dt = 1e-4);
// Same kernel from an arbitrary-base pair: f(t) g(u) - f(u) g(t) and its
// derivatives. Valid for any base point because the Wronskian is one.
cplx sa_kernel_from_pair(const FundamentalPair& pair, double t, double u, KernelVariant variant);

// Solves h(t) = zeta(t) + int_s^t U(t,v) h(v) dv through the kernel
// representation h = -int_s^t dA/dt (t,u) dzeta(u), equivalently
// zeta + int_s^t d2A/dtdu (t,u) zeta(u) du, evaluated with the base-s pair in
// O(mesh). zeta is sampled on the pair's mesh.
struct ForcedSolution {
  double t_min = 0.0;
  double dt = 0.0;
  long base_index = 0;
  std::vector<cplx> h;
  // sup |h - int U h - zeta| over the mesh (trapezoid quadrature).
  double residual = 0.0;
};

ForcedSolution solve_forced(const FundamentalPair& pair, const std::vector<cplx>& zeta);

// sup over the mesh of |h(t) - int_s^t U(t,v) h(v) dv - zeta(t)|, with
// trapezoid quadrature on every stride-th node.
double volterra_residual(const BrownianPath& path, cplx lambda, double s, double dt,
                         long base_index, const std::vector<cplx>& h,
                         const std::vector<cplx>& zeta, long stride = 1);
// Residual of the integral form for a homogeneous solution.
double sa2_residual(const SolutionPath& sol, long stride = 1);

// Partial sums of the Picard series for the resolvent kernel at (t, s):
// K^1(t,s) = U(t,s), K^m(t,s) = int_s^t U(t,u) K^{m-1}(u,s) du, by iterated
// trapezoid on n_quad panels (0 picks eight panels per path step).
struct PicardResult {
  cplx value;
  std::vector<cplx> terms;  // terms[m-1] = K^m(t,s)
  double sup_U = 0.0;       // sup over u in [s,t] of |U(t,u)|
  bool converged = false;   // last term below tol * |value|
};

PicardResult picard_kernel(const BrownianPath& path, cplx lambda, double s, double t, int m_max,
                           int n_quad = 0, double tol = 1e-14);

// E_lambda(t,s) growth envelope.
double growth_envelope(cplx lambda, double t, double s);

// Perturbed integral equation
//   h(t) = c2 + int_s^t (U(t,u) + D1(t,u)) h(u) du + c1 U(t,s) + D2(t)
// solved by product trapezoid on the mesh, compared with the unperturbed
// solution on the same mesh.
struct StabilityRecord {
  double t_min = 0.0;
  double dt = 0.0;
  std::vector<double> weighted_deviation;  // |h - Phi| / E(t,s)
  double sup_weighted = 0.0;
  double sup_delta1 = 0.0;  // recorded perturbation sizes
  double sup_delta2_weighted = 0.0;
};

using KernelPerturbation = std::function<cplx(double, double)>;
using FunctionPerturbation = std::function<cplx(double)>;

StabilityRecord stability_probe(const BrownianPath& path, cplx lambda, double s, cplx c1, cplx c2,
                                const KernelPerturbation& delta1,
                                const FunctionPerturbation& delta2, double t_min, double t_max,
                                double dt);

}  // namespace airybeta
