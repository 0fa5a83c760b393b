#pragma once

#include <functional>
#include <span>
#include <vector>

#include "slb/expr.hpp"

namespace slb {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;  // estimated |value - integral|
  bool converged = true;   // false if the depth limit was hit somewhere
  long evaluations = 0;
};

// Adaptive Gauss-Kronrod (7,15) over [lo, hi].  The interval is split
// at the supplied breakpoints first; panels are then bisected until the
// nested-rule error estimate meets the local share of tol (absolute +
// relative).  Nodes are interior, so panel edges may sit on poles.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double lo, double hi, double tol,
                                    std::span<const double> breakpoints = {},
                                    int max_depth = 48);

// Convenience over an expression: extracts breakpoints itself and maps
// EvalError at a node to a nudged re-evaluation.
QuadratureResult integrate_adaptive(const Expr& e, double lo, double hi,
                                    double tol);

}  // namespace slb
