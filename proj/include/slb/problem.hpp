#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "slb/expr.hpp"

namespace slb {

class ProblemError : public std::runtime_error {
public:
  explicit ProblemError(const std::string& msg) : std::runtime_error(msg) {}
};

// Power-law tail envelope |h(x)| <= scale * |x|^(-exponent) for
// |x| >= cutoff.  scale is fitted from samples at load time; a negative
// exponent declares growth.
struct TailEnvelope {
  double cutoff = 1.0;
  double exponent = 0.0;
  double scale = 0.0;

  // Upper bound for |h| on any point with |x| >= t >= cutoff.
  double value_beyond(double t) const;
  // Upper bound for the integral of |h|^s over |x| >= t (both tails);
  // returns +infinity when the envelope does not give integrability.
  double tail_integral_beyond(double t, double s) const;
};

struct DecayDecl {
  double cutoff = 1.0;
  double exponent = 0.0;
};

// One operator instance: coefficients p, q, r, the interval [a, b]
// outside of which the weight stays away from zero, and optional decay
// declarations keyed by "q", "inv_p", "inv_r".
struct Problem {
  std::string name;
  Expr::Ptr p, q, r;
  double a = -1.0, b = 1.0;
  std::map<std::string, DecayDecl> tail_decay;

  // Derived at load time.
  Expr::Ptr inv_p, inv_r, q_plus, q_minus, q_abs;
  std::optional<TailEnvelope> q_env, inv_p_env, inv_r_env;

  // Window radius large enough to cover [a,b], declared cutoffs and a
  // minimum of 8; norm scans start here.
  double window() const;

  static Problem from_json_text(const std::string& text,
                                const std::string& name_hint = "");
  static Problem from_file(const std::string& path);
};

struct Verdict {
  bool pass = false;
  double evidence = 0.0;  // the sampled quantity the verdict rests on
  std::string detail;
};

struct HypothesisReport {
  Verdict p_positive;             // evidence: sampled min of p
  Verdict inv_p_integrable;       // evidence: smallest eta found finite
  Verdict q_locally_integrable;   // evidence: sup_n int_n^{n+1} |q|
  Verdict r_positive;             // evidence: sampled min of r
  Verdict r_floor_outside;        // evidence: ess inf of r off [a,b]
  std::vector<double> inv_p_finite_exponents;  // among {1, 2, inf}
  double q_uniform_norm = 0.0;
  double r_essinf_outside = 0.0;

  bool all_pass() const {
    return p_positive.pass && inv_p_integrable.pass &&
           q_locally_integrable.pass && r_positive.pass &&
           r_floor_outside.pass;
  }
};

// Dense sampled floor of r outside [a, b].  essinf is the refined
// minimum over the whole scan; the near/far split supports drift
// detection (a weight sliding toward zero at the window edge).
struct OutsideFloor {
  double essinf = 0.0;
  double near_min = 0.0;
  double far_min = 0.0;
};
OutsideFloor r_floor_scan(const Problem& prob);

// Sampling-based check of the standing assumptions; tolerances follow
// the declared tail envelopes where present.
HypothesisReport check_hypotheses(const Problem& prob, double tol = 1e-8);

}  // namespace slb
