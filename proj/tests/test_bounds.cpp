#include <doctest.h>

#include <cmath>

#include "slb/bounds.hpp"

using namespace slb;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const double kPi = std::acos(-1.0);

NormValue nv(double v, NormKind k = NormKind::lp, double s = 0.0) {
  NormValue x;
  x.value = v;
  x.kind = k;
  x.exponent = s;
  return x;
}

NormValue nv_inf() { return NormValue::infinity(NormKind::lp, 1.0, "test"); }

GChoice via_inv_r() { return GChoice{true, 0.0}; }
GChoice via_const(double c) { return GChoice{false, c}; }

Problem flat_weight_problem() {
  return Problem::from_json_text(
      R"json({"p":"1","q":"-indicator(-1,1)","r":"1","ab":[-1,1]})json", "fw");
}

Problem pinched_weight_problem() {
  return Problem::from_json_text(
      R"json({"p":"1","q":"-indicator(-1,1)","r":"min(1,abs(x))","ab":[-8,8],
              "tail_decay":{"inv_r":{"cutoff":1,"exponent":0}}})json",
      "pw");
}

}  // namespace

TEST_CASE("flat-route front factor") {
  CHECK(flat_constant(1.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(flat_constant(1.5) ==
        doctest::Approx(0.2886751345948129).epsilon(1e-13));
  CHECK(flat_constant(2.0) ==
        doctest::Approx(0.3968502629920499).epsilon(1e-13));
  CHECK(flat_constant(kInf) == doctest::Approx(1.0));
  // continuous from the right at s = 1
  double d1 = std::abs(flat_constant(1.01) - 0.25);
  double d2 = std::abs(flat_constant(1.001) - 0.25);
  CHECK(d2 < d1);
  CHECK(d2 < 0.003);
}

TEST_CASE("general-route front factor at flat unit data") {
  CHECK(sup_p_unit_constant(1.0) == doctest::Approx(4.0));
  CHECK(sup_p_unit_constant(2.0) ==
        doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(1e-13));
  CHECK(sup_p_unit_constant(kInf) == doctest::Approx(1.0));
}

TEST_CASE("front factor comparison table") {
  double s_list[] = {1.0, 1.5, 2.0};
  auto rows = remark_comparison_table(s_list);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].s == 1.0);
  CHECK(rows[0].general_constant == doctest::Approx(4.0));
  CHECK(rows[0].flat_constant == doctest::Approx(0.25));
  for (const auto& row : rows)
    CHECK(row.general_constant > row.flat_constant);
}

TEST_CASE("flat route bounds") {
  auto b1 = flat_bound(nv(1.0), 1.0);
  CHECK(b1.applicable);
  CHECK(b1.bound == doctest::Approx(-0.25));

  auto binf = flat_bound(nv(2.0), kInf);
  CHECK(binf.bound == doctest::Approx(-2.0));

  // the smooth-bump norm at s = 3/2 raised to 2s/(2s-1) is sqrt(2) pi
  auto b32 = flat_bound(nv(std::pow(std::sqrt(2.0) * kPi, 2.0 / 3.0)), 1.5);
  CHECK(b32.bound == doctest::Approx(-kPi / std::sqrt(6.0)).epsilon(1e-12));

  auto bz = flat_bound(nv(0.0), 2.0);
  CHECK(bz.applicable);
  CHECK(bz.bound == 0.0);

  auto bad = flat_bound(nv_inf(), 1.0);
  CHECK(!bad.applicable);
  CHECK(!bad.reason.empty());
}

TEST_CASE("local-mass route") {
  // unit local mass, unit 1/p: alpha = 6, beta = sqrt(24)
  auto b = local_bound(nv(1.0), nv(1.0), via_inv_r(), NormValue{}, nv(1.0));
  CHECK(b.applicable);
  CHECK(b.alpha == doctest::Approx(6.0));
  CHECK(b.beta == doctest::Approx(std::sqrt(24.0)).epsilon(1e-14));
  CHECK(b.bound == doctest::Approx(-6.0));

  // constant weight c = 25 with sub-level measure 2/25
  auto bc = local_bound(nv(1.0), nv(1.0), via_const(25.0),
                        nv(0.08, NormKind::omega_measure, 25.0), nv(1.0));
  CHECK(bc.applicable);
  CHECK(bc.bound == doctest::Approx(-246.67740291445682).epsilon(1e-12));

  // measure * beta at or above 1 kills the denominator
  auto bfail = local_bound(nv(1.0), nv(1.0), via_const(4.0),
                           nv(0.25, NormKind::omega_measure, 4.0), nv(1.0));
  CHECK(!bfail.applicable);
  CHECK(!bfail.reason.empty());

  // no negative part: the bound is zero whatever the weight does
  auto bz = local_bound(nv(0.0), nv(1.0), via_inv_r(), NormValue{}, nv_inf());
  CHECK(bz.applicable);
  CHECK(bz.bound == 0.0);

  // unbounded 1/r blocks the inverse weight route
  auto bq = local_bound(nv(1.0), nv(1.0), via_inv_r(), NormValue{}, nv_inf());
  CHECK(!bq.applicable);

  // unbounded sub-level set blocks the constant route
  auto bu = local_bound(nv(1.0), nv(1.0), via_const(0.5),
                        NormValue::infinity(NormKind::omega_measure, 0.5, "x"),
                        nv(1.0));
  CHECK(!bu.applicable);
}

TEST_CASE("sup-slope route") {
  auto b1 = sup_p_bound(nv(1.0), 1.0, nv(1.0), via_inv_r(), NormValue{},
                        nv(1.0));
  CHECK(b1.applicable);
  CHECK(b1.bound == doctest::Approx(-4.0).epsilon(1e-13));

  auto b2 = sup_p_bound(nv(1.0), 2.0, nv(1.0), via_inv_r(), NormValue{},
                        nv(1.0));
  CHECK(b2.bound == doctest::Approx(-1.5874010519681994).epsilon(1e-13));

  auto binf = sup_p_bound(nv(2.0), kInf, nv(1.0), via_inv_r(), NormValue{},
                          nv(1.0));
  CHECK(binf.bound == doctest::Approx(-2.0));
  CHECK(binf.beta == doctest::Approx(std::sqrt(8.0)).epsilon(1e-14));

  // doubling the potential makes the bound strictly worse; at s = 2 the
  // closed form collapses to exactly -4
  auto bq2 = sup_p_bound(nv(2.0), 2.0, nv(1.0), via_inv_r(), NormValue{},
                         nv(1.0));
  CHECK(bq2.bound == doctest::Approx(-4.0).epsilon(1e-13));
  CHECK(bq2.bound < b2.bound);

  // independent closed form: -(4P)^(1/(2s-1)) Q^(2s/(2s-1)) R
  double s = 3.0, Q = 0.8, P = 1.7, R = 1.3;
  auto bx = sup_p_bound(nv(Q), s, nv(P), via_inv_r(), NormValue{}, nv(R));
  double expect = -std::pow(4.0 * P, 1.0 / (2.0 * s - 1.0)) *
                  std::pow(Q, 2.0 * s / (2.0 * s - 1.0)) * R;
  CHECK(bx.bound == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("moment-slope route") {
  auto b22 = eta_p_bound(nv(1.0), 2.0, nv(1.0), 2.0, via_inv_r(), NormValue{},
                         nv(1.0));
  CHECK(b22.applicable);
  CHECK(b22.bound == doctest::Approx(-1.5).epsilon(1e-13));

  auto binf = eta_p_bound(nv(2.0), kInf, nv(1.0), 1.0, via_inv_r(),
                          NormValue{}, nv(1.0));
  CHECK(binf.applicable);
  CHECK(binf.bound == doctest::Approx(-2.0).epsilon(1e-13));

  // eta = s = 1 leaves no usable exponent
  auto bad = eta_p_bound(nv(1.0), 1.0, nv(1.0), 1.0, via_inv_r(), NormValue{},
                         nv(1.0));
  CHECK(!bad.applicable);
  CHECK(!bad.reason.empty());

  // frozen spot value at eta=2, s=3, Q=1.3, P=0.7, R=1.1
  auto bx = eta_p_bound(nv(1.3), 3.0, nv(0.7), 2.0, via_inv_r(), NormValue{},
                        nv(1.1));
  CHECK(bx.bound == doctest::Approx(-1.7549193182287697).epsilon(1e-12));
  // and the independent closed form agrees
  double eta = 2.0, s = 3.0, Q = 1.3, P = 0.7, R = 1.1;
  double den = 2.0 * eta * s - eta - s;
  double K = std::pow((2.0 * eta - 1.0) / eta, 2.0);
  double expect = -std::pow(K * P, eta / den) *
                  std::pow(Q, (2.0 * eta * s - s) / den) * R;
  CHECK(bx.bound == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("sign certificate") {
  auto ok = nonnegativity_test(nv(0.5), nv(1.5));  // product 0.75
  CHECK(ok.applicable);
  CHECK(ok.bound == 0.0);

  auto zero_q = nonnegativity_test(nv_inf(), nv(0.0));
  CHECK(zero_q.applicable);
  CHECK(zero_q.bound == 0.0);

  auto fail = nonnegativity_test(nv(2.0), nv(1.0));
  CHECK(!fail.applicable);
  CHECK(!fail.reason.empty());

  auto fail2 = nonnegativity_test(nv_inf(), nv(1.0));
  CHECK(!fail2.applicable);
}

TEST_CASE("constant-weight optimizer on a flat weight") {
  Problem prob = flat_weight_problem();
  OmegaContext ctx{-1.0, 1.0, 1.0, TailEnvelope{1.0, 0.0, 1.0}};
  GOptimum opt = optimize_constant_g(6.0, std::sqrt(24.0), prob, ctx);
  REQUIRE(opt.feasible);
  // any c < 1 floods the sub-level set, so the optimum sits at c = 1
  CHECK(opt.g_star == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(opt.bound == doctest::Approx(-6.0).epsilon(1e-3));
}

TEST_CASE("constant-weight optimizer on the pinched weight") {
  Problem prob = pinched_weight_problem();
  OmegaContext ctx{-8.0, 8.0, 1.0, prob.inv_r_env};
  double beta = std::sqrt(24.0);
  GOptimum opt = optimize_constant_g(6.0, beta, prob, ctx);
  REQUIRE(opt.feasible);
  CHECK(opt.g_star == doctest::Approx(4.0 * beta).epsilon(0.01));
  CHECK(opt.bound == doctest::Approx(-48.0 * beta).epsilon(0.01));
}

TEST_CASE("optimizer with no negative part certifies zero") {
  Problem prob = pinched_weight_problem();
  OmegaContext ctx{-8.0, 8.0, 1.0, prob.inv_r_env};
  GOptimum opt = optimize_constant_g(0.0, 0.0, prob, ctx);
  REQUIRE(opt.feasible);
  CHECK(opt.bound == 0.0);
}

TEST_CASE("route names and tie ranks") {
  CHECK(std::string(theorem_name(Theorem::flat)) == "flat");
  CHECK(std::string(theorem_name(Theorem::local)) == "local");
  CHECK(std::string(theorem_name(Theorem::sup_p)) == "sup_p");
  CHECK(std::string(theorem_name(Theorem::eta_p)) == "eta_p");
  CHECK(std::string(theorem_name(Theorem::sign)) == "sign");
  CHECK(theorem_rank(Theorem::sign) > theorem_rank(Theorem::flat));
  CHECK(theorem_rank(Theorem::flat) > theorem_rank(Theorem::sup_p));
  CHECK(theorem_rank(Theorem::sup_p) > theorem_rank(Theorem::eta_p));
  CHECK(theorem_rank(Theorem::eta_p) > theorem_rank(Theorem::local));
}

TEST_CASE("norm table memoizes the smooth bump") {
  auto prob = Problem::from_json_text(
      R"json({"p":"1","q":"-2*sech(x)^2","r":"1","ab":[-8,8],
              "tail_decay":{"q":{"cutoff":4,"exponent":6},
                            "inv_p":{"cutoff":1,"exponent":0},
                            "inv_r":{"cutoff":1,"exponent":0}}})json",
      "bump");
  NormTable table(prob, 1e-8);
  CHECK(table.p_is_one());
  CHECK(table.r_is_one());
  CHECK(table.q_minus_lp(1.0).value == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(table.q_abs_lp(kInf).value == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(table.q_minus_uniform().value ==
        doctest::Approx(2.0 * std::tanh(1.0)).epsilon(1e-6));
  CHECK(table.inv_p_lp(kInf).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(!table.inv_p_lp(1.0).finite);
  CHECK(table.inv_r_sup().value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(table.omega(2.0).value == doctest::Approx(0.0));
}

TEST_CASE("best bound on the smooth bump lands on the flat route") {
  auto prob = Problem::from_json_text(
      R"json({"p":"1","q":"-2*sech(x)^2","r":"1","ab":[-8,8],
              "tail_decay":{"q":{"cutoff":4,"exponent":6},
                            "inv_p":{"cutoff":1,"exponent":0},
                            "inv_r":{"cutoff":1,"exponent":0}}})json",
      "bump");
  NormTable table(prob, 1e-8);
  ExponentGrid grid;
  grid.s = {1.0, 1.5, 2.0, kInf};
  grid.eta = {1.0, 2.0};
  BoundSet set = best_bound(table, grid, GConfig{});
  REQUIRE(set.best.has_value());
  CHECK(set.best->theorem == Theorem::flat);
  CHECK(set.best->s == 2.0);
  // -(16/9)^(1/3)
  CHECK(set.best->bound ==
        doctest::Approx(-1.2114137285547597).epsilon(1e-5));
  for (const auto& r : set.results)
    if (r.applicable) CHECK(r.bound <= set.best->bound + 1e-12);
  // the flat route at s = 3/2 must be among the results
  bool saw_flat_32 = false;
  for (const auto& r : set.results)
    if (r.theorem == Theorem::flat && r.s == 1.5) {
      saw_flat_32 = true;
      CHECK(r.bound ==
            doctest::Approx(-1.2825498301618641).epsilon(1e-5));
    }
  CHECK(saw_flat_32);
}

TEST_CASE("best bound on the pinched weight uses a constant weight") {
  Problem prob = pinched_weight_problem();
  NormTable table(prob, 1e-8);
  CHECK(!table.inv_r_sup().finite);
  CHECK(table.omega(4.0).value == doctest::Approx(0.5).epsilon(1e-8));
  ExponentGrid grid;
  grid.s = {1.0, kInf};
  grid.eta = {1.0};
  BoundSet set = best_bound(table, grid, GConfig{});
  REQUIRE(set.best.has_value());
  // sup-slope at s = inf: alpha = 1, beta = 2, optimum c = 8, F = 16
  CHECK(set.best->theorem == Theorem::sup_p);
  CHECK(std::isinf(set.best->s));
  CHECK(!set.best->g.inverse_r);
  CHECK(set.best->g.constant == doctest::Approx(8.0).epsilon(1e-2));
  CHECK(set.best->bound == doctest::Approx(-16.0).epsilon(1e-3));
  // the local route's optimized entry carries the frozen optimum
  bool saw_local = false;
  for (const auto& r : set.results)
    if (r.theorem == Theorem::local && r.applicable && !r.g.inverse_r) {
      saw_local = true;
      CHECK(r.alpha == doctest::Approx(6.0).epsilon(1e-6));
      CHECK(r.g.constant ==
            doctest::Approx(19.595917942265423).epsilon(0.01));
      CHECK(r.bound == doctest::Approx(-235.15101530718507).epsilon(0.01));
    }
  CHECK(saw_local);
}

TEST_CASE("default exponent grid") {
  auto grid = ExponentGrid::defaults();
  REQUIRE(grid.s.size() == 6);
  CHECK(grid.s.front() == 1.0);
  CHECK(std::isinf(grid.s.back()));
  REQUIRE(grid.eta.size() == 2);
  CHECK(grid.eta[0] == 1.0);
  CHECK(grid.eta[1] == 2.0);
}
