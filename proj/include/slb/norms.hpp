#pragma once

#include <optional>
#include <string>

#include "slb/expr.hpp"
#include "slb/problem.hpp"

namespace slb {

enum class NormKind { lp, ess_sup, l1_uniform, omega_measure };

// A computed norm (or measure).  finite == false marks the +infinity
// sentinel: value then holds a floating infinity for display only and
// must not enter arithmetic.
struct NormValue {
  double value = 0.0;
  double abs_error = 0.0;
  bool finite = true;
  NormKind kind = NormKind::lp;
  double exponent = 0.0;  // s for lp; the constant g for omega_measure
  std::string note;       // divergence / non-convergence annotations

  static NormValue infinity(NormKind k, double s = 0.0,
                            std::string note = "");
  // Pessimistic value used inside bound formulas.
  double inflated() const { return value + abs_error; }
};

// L^s norm of |f| over the line, s in [1, inf].  Finite s: interval
// doubling from [-L0, L0] with L0 = max(window, 8), capped at 2^20,
// stopping when both the increment and the declared-envelope tail bound
// fall below tol relative.  s = inf: ess-sup by dense sampling per
// breakpoint piece plus dyadic refinement near the running max.
NormValue lp_norm(const Expr::Ptr& f, double s, double tol,
                  const std::optional<TailEnvelope>& tail, double window);

// sup over integers n of the integral of |f| over [n, n+1].
NormValue uniform_local_norm(const Expr::Ptr& f, double tol,
                             const std::optional<TailEnvelope>& tail,
                             double window);

struct OmegaContext {
  double a = -1.0, b = 1.0;
  double essinf_outside = 0.0;              // from the hypothesis check
  std::optional<TailEnvelope> inv_r_env;    // used to close the sub-level set
};

// Lebesgue measure of { x : r(x) * g_const < 1 }.  Infinite sentinel
// when the set cannot be enclosed in a compact interval.
NormValue omega_measure(const Expr::Ptr& r, double g_const,
                        const OmegaContext& ctx, double tol = 1e-10);

}  // namespace slb
