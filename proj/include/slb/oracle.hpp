#pragma once

#include <optional>
#include <tuple>
#include <vector>

#include "slb/problem.hpp"

namespace slb {

// Symmetric tridiagonal pencil (A, R) from the three-point scheme on
// [-L, L] with Dirichlet ends eliminated: n sub-intervals, n-1 interior
// nodes, p sampled at midpoints, q and r at nodes.  R is diagonal with
// entries floored at 1e-12.
struct DiscretePencil {
  double L = 1.0;
  int n = 2;
  double h = 1.0;
  std::vector<double> diag;  // size n-1
  std::vector<double> off;   // size n-2
  std::vector<double> mass;  // size n-1, strictly positive
};

DiscretePencil discretize(const Problem& prob, double L, int n);

// Number of pencil eigenvalues strictly below lambda (negative-pivot
// count of the LDL^T factorization of A - lambda R).
int eigenvalues_below(const DiscretePencil& m, double lambda);

// Smallest eigenvalue by bisection on the pivot count.  lower_hint, if
// given and valid, replaces the Gershgorin lower end of the bracket.
double min_eigenvalue(const DiscretePencil& m, double tol = 1e-10,
                      std::optional<double> lower_hint = {});

struct SpectralEstimate {
  double lambda_min = 0.0;
  double L = 0.0;
  int n = 0;
  bool converged = false;
  // (L, n, lambda_min) for every ladder step, in execution order.
  std::vector<std::tuple<double, int, double>> history;
};

// Refinement ladder: L in {8, 16, ...} up to L_max, n doubling from
// 2^12 up to n_max per level, stopping when successive values differ by
// less than tol.  Dirichlet truncation means the estimate approaches
// the spectrum minimum from above as L grows.
SpectralEstimate estimate_min_spectrum(const Problem& prob, double tol = 1e-3,
                                       std::optional<double> lower_hint = {},
                                       double L_max = 128, int n_max = 1 << 15);

}  // namespace slb
