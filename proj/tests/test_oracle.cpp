#include <doctest.h>

#include <cmath>
#include <random>

#include "slb/oracle.hpp"

using namespace slb;

namespace {

const double kPi = std::acos(-1.0);

Problem make_problem(const std::string& q) {
  std::string text = R"json({"p":"1","q":")json" + q +
                     R"json(","r":"1","ab":[-1,1]})json";
  return Problem::from_json_text(text, "t");
}

Problem bump_problem() {
  return Problem::from_json_text(
      R"json({"p":"1","q":"-2*sech(x)^2","r":"1","ab":[-8,8],
              "tail_decay":{"q":{"cutoff":4,"exponent":6}}})json",
      "bump");
}

}  // namespace

TEST_CASE("single interior node") {
  Problem prob = make_problem("0");
  DiscretePencil m = discretize(prob, 1.0, 2);
  REQUIRE(m.diag.size() == 1);
  REQUIRE(m.off.size() == 0);
  CHECK(m.h == doctest::Approx(1.0));
  CHECK(m.diag[0] == doctest::Approx(2.0));
  CHECK(m.mass[0] == doctest::Approx(1.0));
  CHECK(min_eigenvalue(m) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("free line at Dirichlet truncation") {
  Problem prob = make_problem("0");
  DiscretePencil m = discretize(prob, 8.0, 4096);
  const double expect = std::pow(kPi / 16.0, 2.0);
  CHECK(min_eigenvalue(m) == doctest::Approx(expect).epsilon(1e-4));
}

TEST_CASE("constant shift moves the minimum exactly") {
  Problem base = make_problem("0");
  Problem shifted = make_problem("3.7");
  DiscretePencil m0 = discretize(base, 6.0, 512);
  DiscretePencil m1 = discretize(shifted, 6.0, 512);
  const double l0 = min_eigenvalue(m0, 1e-11);
  const double l1 = min_eigenvalue(m1, 1e-11);
  CHECK(l1 - l0 == doctest::Approx(3.7).epsilon(1e-8));
}

TEST_CASE("pivot counts bracket and order the spectrum") {
  Problem prob = bump_problem();
  DiscretePencil m = discretize(prob, 8.0, 1024);
  const double lm = min_eigenvalue(m, 1e-11);
  CHECK(eigenvalues_below(m, lm - 1e-6) == 0);
  CHECK(eigenvalues_below(m, lm + 1e-6) >= 1);
  CHECK(eigenvalues_below(m, 1e9) == 1023);
  int prev = 0;
  for (double lam = -2.0; lam <= 2.0; lam += 0.25) {
    int c = eigenvalues_below(m, lam);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("rayleigh quotients sit above the minimum") {
  Problem prob = bump_problem();
  DiscretePencil m = discretize(prob, 8.0, 256);
  const double lm = min_eigenvalue(m, 1e-11);
  std::mt19937 rng(20260815);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const size_t k = m.diag.size();
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(k);
    for (double& x : v) x = u(rng);
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < k; ++i) {
      num += m.diag[i] * v[i] * v[i];
      if (i + 1 < k) num += 2.0 * m.off[i] * v[i] * v[i + 1];
      den += m.mass[i] * v[i] * v[i];
    }
    CHECK(num / den >= lm - 1e-8);
  }
}

TEST_CASE("smooth bump ladder lands on minus one") {
  SpectralEstimate est = estimate_min_spectrum(bump_problem(), 1e-3);
  CHECK(est.converged);
  CHECK(est.lambda_min == doctest::Approx(-1.0).epsilon(1e-3));
  REQUIRE(est.history.size() >= 2);
  CHECK(std::get<0>(est.history.front()) == 8.0);
  CHECK(std::get<1>(est.history.front()) == 4096);
}

TEST_CASE("mesh halving quarters the error") {
  Problem prob = make_problem("0");
  const double expect = std::pow(kPi / 16.0, 2.0);
  double err[3];
  int n = 256;
  for (int i = 0; i < 3; ++i, n *= 2) {
    DiscretePencil m = discretize(prob, 8.0, n);
    err[i] = std::abs(min_eigenvalue(m, 1e-13) - expect);
  }
  CHECK(err[0] / err[1] > 3.5);
  CHECK(err[0] / err[1] < 4.5);
  CHECK(err[1] / err[2] > 3.5);
  CHECK(err[1] / err[2] < 4.5);
}

TEST_CASE("domain growth lowers the level at matched step") {
  Problem prob = make_problem("0");
  const double l8 = min_eigenvalue(discretize(prob, 8.0, 1 << 11), 1e-12);
  const double l16 = min_eigenvalue(discretize(prob, 16.0, 1 << 12), 1e-12);
  const double l32 = min_eigenvalue(discretize(prob, 32.0, 1 << 13), 1e-12);
  CHECK(l8 >= l16 - 1e-10);
  CHECK(l16 >= l32 - 1e-10);
}

TEST_CASE("vanishing weight is floored, not fatal") {
  auto prob = Problem::from_json_text(
      R"json({"p":"1","q":"-indicator(-1,1)","r":"min(1,abs(x))",
              "ab":[-8,8],"tail_decay":{"inv_r":{"cutoff":1,"exponent":0}}})json",
      "pw");
  DiscretePencil m = discretize(prob, 4.0, 8);
  CHECK(m.mass[3] == doctest::Approx(1e-12));  // node x = 0
  const double lm = min_eigenvalue(m, 1e-10);
  CHECK(std::isfinite(lm));
  CHECK(eigenvalues_below(m, lm - 1e-4) == 0);
}

TEST_CASE("node evaluation retries off a singular point") {
  Problem prob = make_problem("tanh(x)/x");
  DiscretePencil m = discretize(prob, 2.0, 4);  // nodes -1, 0, 1
  CHECK(m.diag[1] == doctest::Approx(2.0 / (m.h * m.h) + 1.0).epsilon(1e-6));
}

TEST_CASE("lower hint tightens the bracket when valid") {
  Problem prob = bump_problem();
  DiscretePencil m = discretize(prob, 8.0, 512);
  const double plain = min_eigenvalue(m, 1e-11);
  const double hinted = min_eigenvalue(m, 1e-11, -2.0);
  const double bad_hint = min_eigenvalue(m, 1e-11, 5.0);  // above: ignored
  CHECK(hinted == doctest::Approx(plain).epsilon(1e-9));
  CHECK(bad_hint == doctest::Approx(plain).epsilon(1e-9));
}
