#pragma once

#include <cstddef>
#include <vector>

namespace airybeta {

// All eigenvalues of the symmetric tridiagonal matrix with diagonal d and
// off-diagonal e (size n-1), ascending, by implicit-shift QL.
std::vector<double> tridiag_eigenvalues(std::vector<double> d, std::vector<double> e);

// Number of eigenvalues strictly below x (Sturm sequence).
std::size_t sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x);

// k-th largest eigenvalue (k = 1 is the top) by Sturm bisection.
double tridiag_kth_largest(const std::vector<double>& d, const std::vector<double>& e,
                           std::size_t k, double tol = 0.0);

}  // namespace airybeta
