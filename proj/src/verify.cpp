#include "slb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "slb/norms.hpp"
#include "slb/quadrature.hpp"

namespace slb {

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double eval_nudged(const Expr& e, double x, double span) {
  try {
    return e.evaluate(x);
  } catch (const EvalError&) {
  }
  const double nudge = std::max(span, 1e-6) * 1e-13;
  try {
    return e.evaluate(x + nudge);
  } catch (const EvalError&) {
  }
  return e.evaluate(x - nudge);
}

std::vector<double> clip_points(const std::vector<double>& pts, double lo,
                                double hi) {
  std::vector<double> out;
  for (double t : pts)
    if (t > lo && t < hi) out.push_back(t);
  return out;
}

// integral of (v0 + m (x - x0))^2 over [a, b], exactly
double linear_sq_integral(double v0, double m, double x0, double a, double b) {
  auto anti = [&](double x) {
    const double t = v0 + m * (x - x0);
    return m != 0.0 ? t * t * t / (3.0 * m) : v0 * v0 * x;
  };
  return anti(b) - anti(a);
}

double coeff_integral(const Expr& coeff, const std::vector<double>& cuts,
                      double v0, double m, double x0, double a, double b,
                      double tol) {
  const double span = b - a;
  auto g = [&](double x) {
    const double t = v0 + m * (x - x0);
    return eval_nudged(coeff, x, span) * t * t;
  };
  return integrate_adaptive(g, a, b, tol, clip_points(cuts, a, b)).value;
}

// energy and plain mass of f over [lo, hi] only
struct LocalParts {
  double energy = 0.0;
  double f_sq = 0.0;
};

LocalParts local_parts(const TestFunction& f, const Problem& prob, double lo,
                       double hi, double tol) {
  LocalParts out;
  const std::size_t pieces = f.xs.size() - 1;
  auto pb = prob.p->breakpoints(std::max(lo, f.xs.front()),
                                std::min(hi, f.xs.back()));
  for (std::size_t i = 0; i < pieces; ++i) {
    const double a = std::max(f.xs[i], lo);
    const double b = std::min(f.xs[i + 1], hi);
    if (!(a < b)) continue;
    const double m = f.slope(i);
    QuadratureResult ip =
        integrate_adaptive([&](double x) { return eval_nudged(*prob.p, x, b - a); },
                           a, b, tol, clip_points(pb, a, b));
    out.energy += m * m * ip.value;
    out.f_sq += linear_sq_integral(f.vs[i], m, f.xs[i], a, b);
  }
  return out;
}

std::string eta_label(double eta) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sup_energy_eta%g", eta);
  return buf;
}

}  // namespace

double TestFunction::value(double x) const {
  if (xs.empty() || x <= xs.front() || x >= xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  return vs[i] + slope(i) * (x - xs[i]);
}

double TestFunction::slope(std::size_t piece) const {
  return (vs[piece + 1] - vs[piece]) / (xs[piece + 1] - xs[piece]);
}

double TestFunction::sup_abs() const {
  double m = 0.0;
  for (double v : vs) m = std::max(m, std::abs(v));
  return m;
}

double TestFunction::sup_abs_on(double lo, double hi) const {
  double m = std::max(std::abs(value(lo)), std::abs(value(hi)));
  for (std::size_t i = 0; i < xs.size(); ++i)
    if (xs[i] > lo && xs[i] < hi) m = std::max(m, std::abs(vs[i]));
  return m;
}

void TestFunction::validate() const {
  if (xs.size() != vs.size())
    throw std::invalid_argument("test function: xs/vs size mismatch");
  if (xs.size() < 3)
    throw std::invalid_argument("test function: needs at least 3 nodes");
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    if (!(xs[i] < xs[i + 1]))
      throw std::invalid_argument("test function: nodes must increase");
  for (double v : vs)
    if (!std::isfinite(v))
      throw std::invalid_argument("test function: non-finite value");
  if (vs.front() != 0.0 || vs.back() != 0.0)
    throw std::invalid_argument("test function: support must close to zero");
}

TestFunction random_test_function(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(3, 12);
  std::uniform_real_distribution<double> xd(-6.0, 6.0), vd(-2.0, 2.0);
  const int k = kd(rng);
  TestFunction f;
  f.xs.resize(k);
  for (double& x : f.xs) x = xd(rng);
  std::sort(f.xs.begin(), f.xs.end());
  for (int i = 1; i < k; ++i)
    if (f.xs[i] - f.xs[i - 1] < 1e-6) f.xs[i] = f.xs[i - 1] + 1e-6;
  f.vs.assign(k, 0.0);
  for (int i = 1; i + 1 < k; ++i) f.vs[i] = vd(rng);
  return f;
}

FormParts form_parts(const TestFunction& f, const Problem& prob, double tol) {
  f.validate();
  FormParts out;
  const double lo = f.xs.front(), hi = f.xs.back();
  const auto pb = prob.p->breakpoints(lo, hi);
  const auto qb = prob.q->breakpoints(lo, hi);
  const auto rb = prob.r->breakpoints(lo, hi);
  for (std::size_t i = 0; i + 1 < f.xs.size(); ++i) {
    const double a = f.xs[i], b = f.xs[i + 1];
    const double m = f.slope(i), v0 = f.vs[i];
    QuadratureResult ip =
        integrate_adaptive([&](double x) { return eval_nudged(*prob.p, x, b - a); },
                           a, b, tol, clip_points(pb, a, b));
    out.energy += m * m * ip.value;
    out.f_sq += linear_sq_integral(v0, m, a, a, b);
    out.q_full += coeff_integral(*prob.q, qb, v0, m, a, a, b, tol);
    out.q_plus += coeff_integral(*prob.q_plus, qb, v0, m, a, a, b, tol);
    out.q_minus += coeff_integral(*prob.q_minus, qb, v0, m, a, a, b, tol);
    out.weighted_f_sq += coeff_integral(*prob.r, rb, v0, m, a, a, b, tol);
  }
  return out;
}

double quadratic_form_identity_slack(const TestFunction& f,
                                     const Problem& prob) {
  const FormParts parts = form_parts(f, prob);
  const double a = parts.energy + parts.q_full;
  const double b = parts.energy + parts.q_plus - parts.q_minus;
  return std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b));
}

namespace {

IneqVerdict sign_domination_from_parts(const FormParts& parts,
                                        double* slack_out) {
  const double form = parts.energy + parts.q_plus - parts.q_minus;
  if (form > 0.0) return IneqVerdict::skipped;
  const double lhs1 = parts.energy, rhs1 = parts.q_minus;
  const double lhs2 = parts.q_plus + parts.q_minus;
  const double rhs2 = 2.0 * parts.q_minus;
  if (slack_out) *slack_out = std::max(lhs1 - rhs1, lhs2 - rhs2);
  const bool bad1 = lhs1 > rhs1 + 1e-10 * (1.0 + std::abs(rhs1));
  const bool bad2 = lhs2 > rhs2 + 1e-10 * (1.0 + std::abs(rhs2));
  return (bad1 || bad2) ? IneqVerdict::violated : IneqVerdict::holds;
}

}  // namespace

IneqVerdict check_sign_domination(const TestFunction& f, const Problem& prob,
                                   double* slack_out) {
  return sign_domination_from_parts(form_parts(f, prob), slack_out);
}

FuzzCounts fuzz_sobolev_inequalities(const Problem& prob,
                                     std::span<const double> etas, int trials,
                                     std::uint64_t seed) {
  FuzzCounts out;
  out.trials = trials;
  const double W = prob.window();
  const NormValue inv_p_inf =
      lp_norm(prob.inv_p, kInf, 1e-9, prob.inv_p_env, W);
  std::vector<std::pair<double, NormValue>> eta_norms;
  for (double eta : etas) {
    if (!(eta >= 1.0) || std::isinf(eta)) continue;
    NormValue n = lp_norm(prob.inv_p, eta, 1e-9, prob.inv_p_env, W);
    if (n.finite) eta_norms.emplace_back(eta, n);
  }

  std::map<std::string, WorstCase> worst;
  auto record = [&](const std::string& name, std::uint64_t tseed, double lhs,
                    double rhs) {
    ++out.checks;
    const double slack = lhs - rhs;
    out.worst_slack = std::max(out.worst_slack, slack);
    if (lhs > rhs + 1e-10 * (1.0 + std::abs(rhs))) ++out.violations;
    auto it = worst.find(name);
    if (it == worst.end() || slack > it->second.lhs - it->second.rhs) {
      WorstCase w;
      w.seed = tseed;
      w.inequality = name;
      w.lhs = lhs;
      w.rhs = rhs;
      worst[name] = w;
    }
  };

  for (int trial = 0; trial < trials; ++trial) {
    const std::uint64_t tseed =
        seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(trial + 1));
    std::mt19937_64 rng(tseed);
    const TestFunction f = random_test_function(rng);
    const FormParts parts = form_parts(f, prob);
    const double energy_sqrt = std::sqrt(std::max(parts.energy, 0.0));
    const double l2 = std::sqrt(std::max(parts.f_sq, 0.0));
    const double sup = f.sup_abs();

    if (inv_p_inf.finite) {
      const double pi_norm = inv_p_inf.value;
      record("sup_energy_sqrt", tseed, sup,
             std::sqrt(2.0 * std::sqrt(pi_norm) * energy_sqrt * l2));

      const int n0 = static_cast<int>(std::floor(f.xs.front()));
      const int n1 = static_cast<int>(std::ceil(f.xs.back()));
      for (int n = n0; n < n1; ++n) {
        const double s = f.sup_abs_on(n, n + 1.0);
        if (s == 0.0) continue;
        const LocalParts lp = local_parts(f, prob, n, n + 1.0, 1e-10);
        for (double eps : {0.1, 1.0, 10.0})
          record("unit_interval_sup", tseed, s * s,
                 eps * pi_norm * lp.energy + (1.0 + 1.0 / eps) * lp.f_sq);
      }
    }

    for (const auto& [eta, pn] : eta_norms) {
      const double c = (2.0 * eta - 1.0) / eta;
      const double rhs =
          std::pow(c * std::sqrt(pn.value) * energy_sqrt,
                   eta / (2.0 * eta - 1.0)) *
          std::pow(l2, (eta - 1.0) / (2.0 * eta - 1.0));
      record(eta_label(eta), tseed, sup, rhs);
    }

    const double a = parts.energy + parts.q_full;
    const double b = parts.energy + parts.q_plus - parts.q_minus;
    out.identity_max_slack =
        std::max(out.identity_max_slack,
                 std::abs(a - b) / (1.0 + std::abs(a) + std::abs(b)));

    double slack = 0.0;
    const IneqVerdict v = sign_domination_from_parts(parts, &slack);
    if (v != IneqVerdict::skipped) {
      ++out.checks;
      out.worst_slack = std::max(out.worst_slack, slack);
      if (v == IneqVerdict::violated) ++out.violations;
      auto it = worst.find("sign_domination");
      if (it == worst.end() || slack > it->second.lhs - it->second.rhs) {
        WorstCase w;
        w.seed = tseed;
        w.inequality = "sign_domination";
        w.lhs = slack;
        w.rhs = 0.0;
        worst["sign_domination"] = w;
      }
    }
  }

  out.worst_cases.reserve(worst.size());
  for (auto& [name, w] : worst) out.worst_cases.push_back(std::move(w));
  return out;
}

VerificationReport validate_bounds(const Problem& prob,
                                   const ExponentGrid& grid, const GConfig& g,
                                   double tol, std::uint64_t seed,
                                   int fuzz_trials) {
  VerificationReport rep;
  rep.problem = prob.name;
  rep.hypothesis = check_hypotheses(prob, std::max(tol, 1e-8));
  NormTable norms(prob, std::max(tol, 1e-9));
  rep.bounds = best_bound(norms, grid, g);
  rep.oracle = estimate_min_spectrum(prob, 1e-3);
  double delta = 1e-3;
  if (rep.oracle.history.size() >= 2) {
    const auto& h = rep.oracle.history;
    delta = std::abs(std::get<2>(h[h.size() - 1]) -
                     std::get<2>(h[h.size() - 2]));
  }
  rep.margin = 2.0 * delta + 1e-6;
  rep.all_bounds_below_oracle = true;
  for (const BoundResult& r : rep.bounds.results)
    if (r.applicable && r.bound > rep.oracle.lambda_min + rep.margin)
      rep.all_bounds_below_oracle = false;
  rep.fuzz = fuzz_sobolev_inequalities(prob, grid.eta, fuzz_trials, seed);
  // An unconverged ladder does not fail the report: the last Dirichlet
  // value still upper-bounds the spectrum minimum, so the comparison
  // stays one-sided and the converged flag records the weaker claim.
  rep.pass = rep.hypothesis.all_pass() && rep.all_bounds_below_oracle &&
             rep.fuzz.violations == 0 && rep.fuzz.identity_max_slack < 1e-8;
  return rep;
}

}  // namespace slb
