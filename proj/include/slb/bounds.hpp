#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slb/norms.hpp"
#include "slb/problem.hpp"

namespace slb {

// The five lower-bound routes, named for what drives each one:
//   flat   - p == r == 1 only, driven by ||q||_s
//   local  - driven by the uniform local mass of q_-
//   sup_p  - driven by ess sup of 1/p and ||q_-||_s
//   eta_p  - driven by an L^eta moment of 1/p and ||q_-||_s
//   sign   - nonnegativity certificate from ||1/p||_1 ||q_-||_1 < 1
enum class Theorem { flat, local, sup_p, eta_p, sign };

const char* theorem_name(Theorem t);

// Preference order used to break exact ties between equal bounds:
// sign > flat > sup_p > eta_p > local.
int theorem_rank(Theorem t);

struct GChoice {
  bool inverse_r = false;  // g = 1/r (sub-level set is empty)
  double constant = 1.0;   // g = const otherwise
};

struct BoundResult {
  Theorem theorem = Theorem::flat;
  double s = std::numeric_limits<double>::quiet_NaN();
  double eta = std::numeric_limits<double>::quiet_NaN();
  double alpha = 0.0;
  double beta = 0.0;
  GChoice g{};
  bool uses_g = false;     // flat / sign routes take no weight function
  double omega = 0.0;      // measure of the sub-level set for this g
  double bound = 0.0;      // lower bound for min spectrum; always <= 0
  bool applicable = false;
  std::string reason;      // set when not applicable
};

// Scalar front factor of the flat route at unit norm:
// s=1 -> 1/4, s=inf -> 1, else 2^(-2/(2s-1)) ((s-1)/s)^(2(s-1)/(2s-1)).
double flat_constant(double s);

// Front factor of the sup_p route specialised to p = r = 1 at unit
// norm: s=1 -> 4, else 2^(2/(2s-1)); s=inf -> 1.
double sup_p_unit_constant(double s);

// Flat route: requires p == 1 and r == 1; q_s is the full |q| norm.
BoundResult flat_bound(const NormValue& q_s, double s);

// Weighted routes share the assembly
// bound = -alpha * sup g / (1 - omega * beta), needing omega * beta < 1;
// g = 1/r empties the sub-level set, a constant g keeps it measurable.
BoundResult local_bound(const NormValue& qminus_u, const NormValue& inv_p_inf,
                        const GChoice& g, const NormValue& omega,
                        const NormValue& inv_r_inf);
BoundResult sup_p_bound(const NormValue& qminus_s, double s,
                        const NormValue& inv_p_inf, const GChoice& g,
                        const NormValue& omega, const NormValue& inv_r_inf);
BoundResult eta_p_bound(const NormValue& qminus_s, double s,
                        const NormValue& inv_p_eta, double eta,
                        const GChoice& g, const NormValue& omega,
                        const NormValue& inv_r_inf);

// Sign test: ||1/p||_1 * ||q_-||_1 < 1 certifies a nonnegative minimum.
// A vanishing ||q_-||_1 certifies it without the 1/p norm.
BoundResult nonnegativity_test(const NormValue& inv_p_l1,
                               const NormValue& qminus_l1);

struct GOptimum {
  bool feasible = false;
  double g_star = 0.0;
  double omega = 0.0;
  double bound = 0.0;
  std::string reason;
};

// Maximizes -alpha*c / (1 - mu(c)*beta) over constants c with
// mu(c)*beta < 1, golden-section on log c.
GOptimum optimize_constant_g(double alpha, double beta, const Problem& prob,
                             const OmegaContext& ctx, double tol = 1e-6);

struct ExponentGrid {
  std::vector<double> s;
  std::vector<double> eta;
  static ExponentGrid defaults();  // s {1,5/4,3/2,2,3,inf}, eta {1,2}
};

enum class GStrategy { automatic, fixed_constant, inverse_r };

struct GConfig {
  GStrategy strategy = GStrategy::automatic;
  double fixed_c = 1.0;
};

// Memoized norms of one problem's coefficients.
class NormTable {
public:
  NormTable(const Problem& prob, double tol);

  const NormValue& q_abs_lp(double s);    // || |q| ||_s
  const NormValue& q_minus_lp(double s);  // || q_- ||_s
  const NormValue& q_minus_uniform();
  const NormValue& inv_p_lp(double eta);  // eta in [1, inf]
  const NormValue& inv_r_sup();
  NormValue omega(double g_const, double omega_tol = 1e-10);
  const OmegaContext& omega_context() const { return omega_ctx_; }

  bool p_is_one() const { return p_is_one_; }
  bool r_is_one() const { return r_is_one_; }
  const Problem& problem() const { return prob_; }
  double tol() const { return tol_; }

private:
  const Problem& prob_;
  double tol_;
  bool p_is_one_, r_is_one_;
  OmegaContext omega_ctx_;
  std::map<double, NormValue> q_abs_, q_minus_, inv_p_;
  std::optional<NormValue> q_minus_u_, inv_r_sup_;
};

struct BoundSet {
  std::vector<BoundResult> results;
  std::optional<BoundResult> best;  // most favourable applicable bound
};

// Evaluates every route over the exponent grid and g strategy and
// selects the best applicable bound.
BoundSet best_bound(NormTable& norms, const ExponentGrid& grid,
                    const GConfig& g);

struct RemarkRow {
  double s;
  double general_constant;  // sup_p route at p = r = 1, unit norm
  double flat_constant;
};

// Side-by-side front factors of the two flat-coefficient routes at unit
// norm, one row per s.
std::vector<RemarkRow> remark_comparison_table(std::span<const double> s_list);

}  // namespace slb
