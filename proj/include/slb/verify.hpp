#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "slb/bounds.hpp"
#include "slb/oracle.hpp"
#include "slb/problem.hpp"

namespace slb {

// Compactly supported piecewise-linear function: nodes xs strictly
// increasing, vs the values there, vs.front() == vs.back() == 0, and at
// least 3 nodes.  Zero off [xs.front(), xs.back()].
struct TestFunction {
  std::vector<double> xs;
  std::vector<double> vs;

  double value(double x) const;
  double slope(std::size_t piece) const;  // on [xs[i], xs[i+1]]
  double sup_abs() const;
  double sup_abs_on(double lo, double hi) const;
  void validate() const;  // throws std::invalid_argument
};

TestFunction random_test_function(std::mt19937_64& rng);

// Integrals of a test function against a problem's coefficients.
struct FormParts {
  double energy = 0.0;        // int p |f'|^2
  double q_full = 0.0;        // int q f^2
  double q_plus = 0.0;        // int q_+ f^2
  double q_minus = 0.0;       // int q_- f^2
  double f_sq = 0.0;          // int f^2
  double weighted_f_sq = 0.0; // int r f^2
};

FormParts form_parts(const TestFunction& f, const Problem& prob,
                     double tol = 1e-10);

// |(energy + q_full) - (energy + q_plus - q_minus)| via two independent
// quadrature routes; returns the slack scaled by 1 + magnitudes.
double quadratic_form_identity_slack(const TestFunction& f,
                                     const Problem& prob);

struct WorstCase {
  std::uint64_t seed = 0;
  std::string inequality;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct FuzzCounts {
  int trials = 0;
  int checks = 0;      // individual inequality evaluations
  int violations = 0;
  double worst_slack = -std::numeric_limits<double>::infinity();  // lhs-rhs
  double identity_max_slack = 0.0;
  std::vector<WorstCase> worst_cases;  // one per inequality family
};

// Random test functions against the sup-norm interval estimates and the
// quadratic-form identity.  Violation: lhs > rhs + 1e-10 * (1 + |rhs|).
FuzzCounts fuzz_sobolev_inequalities(const Problem& prob,
                                     std::span<const double> etas, int trials,
                                     std::uint64_t seed);

enum class IneqVerdict { holds, violated, skipped };

// For f with nonpositive form value: the energy is dominated by the
// negative-part integral, and the full |q| integral by twice of it.
IneqVerdict check_sign_domination(const TestFunction& f, const Problem& prob,
                                   double* slack_out = nullptr);

struct VerificationReport {
  std::string problem;
  HypothesisReport hypothesis;
  BoundSet bounds;
  SpectralEstimate oracle;
  double margin = 0.0;
  bool all_bounds_below_oracle = false;
  FuzzCounts fuzz;
  bool pass = false;
};

// Full cross-check: bounds from the calculators, an independent
// spectral estimate, and the inequality fuzzer.  margin is twice the
// last ladder increment plus 1e-6.
VerificationReport validate_bounds(const Problem& prob,
                                   const ExponentGrid& grid, const GConfig& g,
                                   double tol, std::uint64_t seed,
                                   int fuzz_trials = 1000);

}  // namespace slb
