#include "slb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slb {

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kNaN = std::numeric_limits<double>::quiet_NaN();

// alpha and beta of one weighted route, before any weight is chosen.
struct AB {
  bool ok = false;
  double alpha = 0.0;
  double beta = 0.0;
  std::string reason;
};

AB ab_fail(std::string why) {
  AB ab;
  ab.reason = std::move(why);
  return ab;
}

AB local_ab(const NormValue& qminus_u, const NormValue& inv_p_inf) {
  if (!qminus_u.finite) return ab_fail("uniform local mass of q_- is not finite");
  if (!inv_p_inf.finite) return ab_fail("ess sup of 1/p is not finite");
  const double Q = qminus_u.inflated();
  const double P = inv_p_inf.inflated();
  AB ab;
  ab.ok = true;
  ab.alpha = 2.0 * Q + 4.0 * P * Q * Q;
  ab.beta = std::sqrt(4.0 * P * ab.alpha);
  return ab;
}

AB sup_p_ab(const NormValue& qminus_s, double s, const NormValue& inv_p_inf) {
  if (s < 1.0) return ab_fail("exponent below 1");
  if (!qminus_s.finite) return ab_fail("||q_-||_s is not finite");
  if (!inv_p_inf.finite) return ab_fail("ess sup of 1/p is not finite");
  const double Q = qminus_s.inflated();
  const double P = inv_p_inf.inflated();
  AB ab;
  ab.ok = true;
  if (std::isinf(s)) {
    ab.beta = std::sqrt(4.0 * P * Q);
    ab.alpha = Q;
  } else {
    ab.beta = std::pow(4.0 * P * Q, s / (2.0 * s - 1.0));
    ab.alpha = Q * std::pow(ab.beta, 1.0 / s);
  }
  return ab;
}

AB eta_p_ab(const NormValue& qminus_s, double s, const NormValue& inv_p_eta,
            double eta) {
  if (s < 1.0) return ab_fail("exponent below 1");
  if (eta < 1.0 || std::isinf(eta)) return ab_fail("eta must lie in [1, inf)");
  if (!qminus_s.finite) return ab_fail("||q_-||_s is not finite");
  if (!inv_p_eta.finite) return ab_fail("||1/p||_eta is not finite");
  const double Q = qminus_s.inflated();
  const double P = inv_p_eta.inflated();
  const double K = std::pow((2.0 * eta - 1.0) / eta, 2.0);
  AB ab;
  if (std::isinf(s)) {
    ab.beta = std::pow(K * P, eta / (2.0 * eta - 1.0));
    ab.alpha = Q;
  } else {
    const double den = 2.0 * eta * s - eta - s;
    if (den <= 0.0)
      return ab_fail("exponent pair leaves no usable power (eta + s <= 2)");
    ab.beta = std::pow(K * P * Q, eta * s / den);
    ab.alpha = Q * std::pow(ab.beta, 1.0 / s);
  }
  ab.ok = true;
  return ab;
}

// Assembles -alpha * sup g / (1 - mu * beta) for the chosen weight.
BoundResult finish(Theorem t, double s, double eta, const AB& ab,
                   const GChoice& g, const NormValue& omega,
                   const NormValue& inv_r_inf) {
  BoundResult r;
  r.theorem = t;
  r.s = s;
  r.eta = eta;
  r.g = g;
  r.uses_g = true;
  if (!ab.ok) {
    r.reason = ab.reason;
    return r;
  }
  r.alpha = ab.alpha;
  r.beta = ab.beta;
  if (ab.alpha == 0.0) {
    // no negative part: the bound is zero for any admissible weight
    r.applicable = true;
    r.bound = 0.0;
    return r;
  }
  if (g.inverse_r) {
    if (!inv_r_inf.finite) {
      r.reason = "1/r is not essentially bounded";
      return r;
    }
    r.bound = -ab.alpha * inv_r_inf.inflated();
    r.applicable = true;
    return r;
  }
  if (!omega.finite) {
    r.reason = "sub-level set of the constant weight has infinite measure";
    return r;
  }
  const double mu = omega.inflated();
  if (mu * ab.beta >= 1.0) {
    r.reason = "measure * beta >= 1, the denominator closes";
    return r;
  }
  r.omega = omega.value;
  r.bound = -ab.alpha * g.constant / (1.0 - mu * ab.beta);
  r.applicable = true;
  return r;
}

}  // namespace

const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::flat: return "flat";
    case Theorem::local: return "local";
    case Theorem::sup_p: return "sup_p";
    case Theorem::eta_p: return "eta_p";
    case Theorem::sign: return "sign";
  }
  return "?";
}

int theorem_rank(Theorem t) {
  switch (t) {
    case Theorem::sign: return 5;
    case Theorem::flat: return 4;
    case Theorem::sup_p: return 3;
    case Theorem::eta_p: return 2;
    case Theorem::local: return 1;
  }
  return 0;
}

double flat_constant(double s) {
  if (s == 1.0) return 0.25;
  if (std::isinf(s)) return 1.0;
  const double w = 2.0 * s - 1.0;
  return std::pow(2.0, -2.0 / w) * std::pow((s - 1.0) / s, 2.0 * (s - 1.0) / w);
}

double sup_p_unit_constant(double s) {
  if (s == 1.0) return 4.0;
  if (std::isinf(s)) return 1.0;
  return std::pow(2.0, 2.0 / (2.0 * s - 1.0));
}

BoundResult flat_bound(const NormValue& q_s, double s) {
  BoundResult r;
  r.theorem = Theorem::flat;
  r.s = s;
  if (s < 1.0) {
    r.reason = "exponent below 1";
    return r;
  }
  if (!q_s.finite) {
    r.reason = "||q||_s is not finite";
    return r;
  }
  const double Q = q_s.inflated();
  const double power = std::isinf(s) ? 1.0 : 2.0 * s / (2.0 * s - 1.0);
  r.bound = -flat_constant(s) * std::pow(Q, power);
  r.applicable = true;
  return r;
}

BoundResult local_bound(const NormValue& qminus_u, const NormValue& inv_p_inf,
                        const GChoice& g, const NormValue& omega,
                        const NormValue& inv_r_inf) {
  return finish(Theorem::local, kNaN, kNaN, local_ab(qminus_u, inv_p_inf), g,
                omega, inv_r_inf);
}

BoundResult sup_p_bound(const NormValue& qminus_s, double s,
                        const NormValue& inv_p_inf, const GChoice& g,
                        const NormValue& omega, const NormValue& inv_r_inf) {
  return finish(Theorem::sup_p, s, kNaN, sup_p_ab(qminus_s, s, inv_p_inf), g,
                omega, inv_r_inf);
}

BoundResult eta_p_bound(const NormValue& qminus_s, double s,
                        const NormValue& inv_p_eta, double eta,
                        const GChoice& g, const NormValue& omega,
                        const NormValue& inv_r_inf) {
  return finish(Theorem::eta_p, s, eta,
                eta_p_ab(qminus_s, s, inv_p_eta, eta), g, omega, inv_r_inf);
}

BoundResult nonnegativity_test(const NormValue& inv_p_l1,
                               const NormValue& qminus_l1) {
  BoundResult r;
  r.theorem = Theorem::sign;
  if (!qminus_l1.finite) {
    r.reason = "||q_-||_1 is not finite";
    return r;
  }
  const double Q = qminus_l1.inflated();
  if (Q == 0.0) {
    r.applicable = true;
    return r;
  }
  if (!inv_p_l1.finite) {
    r.reason = "||1/p||_1 is not finite";
    return r;
  }
  const double P = inv_p_l1.inflated();
  if (P * Q >= 1.0) {
    r.reason = "||1/p||_1 * ||q_-||_1 is not below 1";
    return r;
  }
  r.applicable = true;
  return r;
}

GOptimum optimize_constant_g(double alpha, double beta, const Problem& prob,
                             const OmegaContext& ctx, double tol) {
  std::map<double, NormValue> memo;
  auto mu = [&](double c) -> const NormValue& {
    auto it = memo.find(c);
    if (it == memo.end())
      it = memo.emplace(c, omega_measure(prob.r, c, ctx)).first;
    return it->second;
  };
  auto objective = [&](double c) -> double {
    const NormValue& m = mu(c);
    if (!m.finite) return kInf;
    const double prod = m.inflated() * beta;
    if (prod >= 1.0) return kInf;
    return alpha * c / (1.0 - prod);
  };

  GOptimum out;
  double best_c = 0.0, best_f = kInf;
  for (int k = -20; k <= 40; ++k) {
    const double c = std::ldexp(1.0, k);
    if (alpha == 0.0) {
      const NormValue& m = mu(c);
      if (m.finite && m.inflated() * beta < 1.0) {
        out.feasible = true;
        out.g_star = c;
        out.omega = m.value;
        out.bound = 0.0;
        return out;
      }
      continue;
    }
    const double f = objective(c);
    if (f < best_f) {
      best_f = f;
      best_c = c;
    }
  }
  if (!std::isfinite(best_f)) {
    out.reason = "no constant weight keeps measure * beta below 1";
    return out;
  }

  // The feasible set is a ray and the objective blows up at both of its
  // ends, so a factor-2 bracket around the ladder minimum contains the
  // optimum.  Golden section on log c.
  double glo = std::log(best_c / 2.0), ghi = std::log(best_c * 2.0);
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double t1 = ghi - gr * (ghi - glo), t2 = glo + gr * (ghi - glo);
  double f1 = objective(std::exp(t1)), f2 = objective(std::exp(t2));
  while (ghi - glo > tol) {
    if (f1 < f2) {
      ghi = t2;
      t2 = t1;
      f2 = f1;
      t1 = ghi - gr * (ghi - glo);
      f1 = objective(std::exp(t1));
    } else {
      glo = t1;
      t1 = t2;
      f1 = f2;
      t2 = glo + gr * (ghi - glo);
      f2 = objective(std::exp(t2));
    }
  }
  double c_star = std::exp(0.5 * (glo + ghi));
  double f_star = objective(c_star);
  if (!(f_star <= best_f)) {
    c_star = best_c;
    f_star = best_f;
  }
  out.feasible = true;
  out.g_star = c_star;
  out.omega = mu(c_star).value;
  out.bound = -f_star;
  return out;
}

ExponentGrid ExponentGrid::defaults() {
  ExponentGrid g;
  g.s = {1.0, 1.25, 1.5, 2.0, 3.0, kInf};
  g.eta = {1.0, 2.0};
  return g;
}

NormTable::NormTable(const Problem& prob, double tol)
    : prob_(prob),
      tol_(tol),
      p_is_one_(expr_is_one(*prob.p, prob.window())),
      r_is_one_(expr_is_one(*prob.r, prob.window())) {
  omega_ctx_.a = prob.a;
  omega_ctx_.b = prob.b;
  omega_ctx_.inv_r_env = prob.inv_r_env;
  omega_ctx_.essinf_outside = r_is_one_ ? 1.0 : r_floor_scan(prob).essinf;
}

const NormValue& NormTable::q_abs_lp(double s) {
  auto it = q_abs_.find(s);
  if (it == q_abs_.end())
    it = q_abs_
             .emplace(s, lp_norm(prob_.q_abs, s, tol_, prob_.q_env,
                                 prob_.window()))
             .first;
  return it->second;
}

const NormValue& NormTable::q_minus_lp(double s) {
  auto it = q_minus_.find(s);
  if (it == q_minus_.end())
    it = q_minus_
             .emplace(s, lp_norm(prob_.q_minus, s, tol_, prob_.q_env,
                                 prob_.window()))
             .first;
  return it->second;
}

const NormValue& NormTable::q_minus_uniform() {
  if (!q_minus_u_)
    q_minus_u_ =
        uniform_local_norm(prob_.q_minus, tol_, prob_.q_env, prob_.window());
  return *q_minus_u_;
}

const NormValue& NormTable::inv_p_lp(double eta) {
  auto it = inv_p_.find(eta);
  if (it == inv_p_.end())
    it = inv_p_
             .emplace(eta, lp_norm(prob_.inv_p, eta, tol_, prob_.inv_p_env,
                                   prob_.window()))
             .first;
  return it->second;
}

const NormValue& NormTable::inv_r_sup() {
  if (!inv_r_sup_)
    inv_r_sup_ = lp_norm(prob_.inv_r, kInf, tol_, prob_.inv_r_env,
                         prob_.window());
  return *inv_r_sup_;
}

NormValue NormTable::omega(double g_const, double omega_tol) {
  return omega_measure(prob_.r, g_const, omega_ctx_, omega_tol);
}

BoundSet best_bound(NormTable& norms, const ExponentGrid& grid,
                    const GConfig& g) {
  BoundSet out;
  auto consider = [&out](BoundResult r) {
    if (r.applicable) {
      const bool better =
          !out.best || r.bound > out.best->bound ||
          (r.bound == out.best->bound &&
           theorem_rank(r.theorem) > theorem_rank(out.best->theorem));
      if (better) out.best = r;
    }
    out.results.push_back(std::move(r));
  };

  consider(nonnegativity_test(norms.inv_p_lp(1.0), norms.q_minus_lp(1.0)));

  if (norms.p_is_one() && norms.r_is_one())
    for (double s : grid.s) consider(flat_bound(norms.q_abs_lp(s), s));

  struct Instance {
    Theorem t;
    double s, eta;
    AB ab;
  };
  std::vector<Instance> instances;
  instances.push_back({Theorem::local, kNaN, kNaN,
                       local_ab(norms.q_minus_uniform(), norms.inv_p_lp(kInf))});
  for (double s : grid.s)
    instances.push_back({Theorem::sup_p, s, kNaN,
                         sup_p_ab(norms.q_minus_lp(s), s,
                                  norms.inv_p_lp(kInf))});
  for (double eta : grid.eta)
    for (double s : grid.s)
      instances.push_back({Theorem::eta_p, s, eta,
                           eta_p_ab(norms.q_minus_lp(s), s,
                                    norms.inv_p_lp(eta), eta)});

  for (const Instance& in : instances) {
    if (g.strategy == GStrategy::automatic ||
        g.strategy == GStrategy::inverse_r)
      consider(finish(in.t, in.s, in.eta, in.ab, GChoice{true, 0.0},
                      NormValue{}, norms.inv_r_sup()));
    if (g.strategy == GStrategy::fixed_constant) {
      NormValue om = in.ab.ok ? norms.omega(g.fixed_c) : NormValue{};
      consider(finish(in.t, in.s, in.eta, in.ab, GChoice{false, g.fixed_c}, om,
                      norms.inv_r_sup()));
    }
    if (g.strategy == GStrategy::automatic && in.ab.ok && in.ab.alpha > 0.0) {
      GOptimum opt = optimize_constant_g(in.ab.alpha, in.ab.beta,
                                         norms.problem(),
                                         norms.omega_context());
      if (opt.feasible) {
        NormValue om;
        om.kind = NormKind::omega_measure;
        om.value = opt.omega;
        om.exponent = opt.g_star;
        consider(finish(in.t, in.s, in.eta, in.ab, GChoice{false, opt.g_star},
                        om, norms.inv_r_sup()));
      } else {
        BoundResult r;
        r.theorem = in.t;
        r.s = in.s;
        r.eta = in.eta;
        r.uses_g = true;
        r.g = GChoice{false, 0.0};
        r.alpha = in.ab.alpha;
        r.beta = in.ab.beta;
        r.reason = opt.reason;
        consider(std::move(r));
      }
    }
  }
  return out;
}

std::vector<RemarkRow> remark_comparison_table(
    std::span<const double> s_list) {
  std::vector<RemarkRow> rows;
  rows.reserve(s_list.size());
  for (double s : s_list)
    rows.push_back({s, sup_p_unit_constant(s), flat_constant(s)});
  return rows;
}

}  // namespace slb
