#include "slb/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "slb/quadrature.hpp"

namespace slb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLpWindowCap = 1048576.0;  // 2^20
constexpr double kSupWindowCap = 4096.0;
constexpr long kUniformCap = 16384;  // unit intervals per side

double rel_floor(double v) { return std::max(1.0, std::abs(v)); }

double eval_or_nan(const Expr& e, double x) {
  try {
    return e.evaluate(x);
  } catch (const EvalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

NormValue finite_lp(double integral, double err, double s, std::string note) {
  NormValue nv;
  nv.kind = NormKind::lp;
  nv.exponent = s;
  nv.note = std::move(note);
  double I = std::max(integral, 0.0);
  if (s == 1.0) {
    nv.value = I;
    nv.abs_error = err;
  } else if (I > 0.0) {
    nv.value = std::pow(I, 1.0 / s);
    nv.abs_error = nv.value / (s * I) * err;
  } else {
    nv.value = 0.0;
    nv.abs_error = std::pow(std::max(err, 0.0), 1.0 / s);
  }
  return nv;
}

struct SupScan {
  double best = 0.0;
  double arg = 0.0;
  bool diverging = false;
};

// Dense midpoint sampling per breakpoint piece, then a shrinking zoom
// around the running argmax.  diverging marks a pole: the value passes
// 1e50 or keeps climbing when the zoom hits the resolution floor.
SupScan scan_sup(const Expr& fabs, double lo, double hi) {
  SupScan out;
  if (!(hi > lo)) return out;

  std::vector<double> edges;
  edges.push_back(lo);
  for (double b : fabs.breakpoints(lo, hi))
    if (b > lo && b < hi) edges.push_back(b);
  edges.push_back(hi);

  const double total = hi - lo;
  const long budget = 1 << 16;
  double spacing_at_arg = total;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    double u = edges[i], v = edges[i + 1];
    if (!(v > u)) continue;
    long m = std::max<long>(8, std::lround(double(budget) * (v - u) / total));
    double step = (v - u) / double(m);
    for (long k = 0; k < m; ++k) {
      double x = u + (double(k) + 0.5) * step;
      double val = eval_or_nan(fabs, x);
      if (std::isnan(val)) continue;
      if (val > out.best) {
        out.best = val;
        out.arg = x;
        spacing_at_arg = step;
      }
    }
  }

  std::vector<double> trail;
  trail.push_back(out.best);
  double w = spacing_at_arg;
  int rounds = 0;
  while (w > 1e-13 * rel_floor(out.arg) && rounds++ < 200) {
    double step = 2.0 * w / 64.0;
    for (int k = 0; k < 64; ++k) {
      double x = out.arg - w + (double(k) + 0.5) * step;
      double val = eval_or_nan(fabs, x);
      if (!std::isnan(val) && val > out.best) {
        out.best = val;
        out.arg = x;
      }
    }
    trail.push_back(out.best);
    if (out.best > 1e50) {
      out.diverging = true;
      return out;
    }
    w /= 3.0;
  }
  size_t n = trail.size();
  if (n >= 4 && trail[n - 4] > 0.0 &&
      trail[n - 1] / trail[n - 4] - 1.0 > 1e-3)
    out.diverging = true;
  return out;
}

NormValue finite_sup(double best, std::string note) {
  NormValue nv;
  nv.kind = NormKind::ess_sup;
  nv.exponent = kInf;
  nv.value = best;
  nv.abs_error = 1e-9 * rel_floor(best);
  nv.note = std::move(note);
  return nv;
}

NormValue ess_sup_norm(const Expr::Ptr& f,
                       const std::optional<TailEnvelope>& tail,
                       double window) {
  auto fabs = Expr::unary(NodeKind::Abs, f);
  double W = std::max(window, 8.0);
  if (tail) W = std::max(W, tail->cutoff);

  double prev = -1.0;
  int stable = 0;
  for (;;) {
    SupScan scan = scan_sup(*fabs, -W, W);
    if (scan.diverging)
      return NormValue::infinity(NormKind::ess_sup, kInf,
                                 "refinement keeps climbing near x = " +
                                     std::to_string(scan.arg));
    if (tail && tail->value_beyond(W) <= scan.best * (1.0 + 1e-12) + 1e-300)
      return finite_sup(scan.best, "");
    if (prev >= 0.0 && std::abs(scan.best - prev) <= 1e-9 * rel_floor(scan.best)) {
      if (++stable >= 2)
        return finite_sup(scan.best,
                          "window-stable maximum without a decay certificate");
    } else {
      stable = 0;
    }
    prev = scan.best;
    if (W >= kSupWindowCap)
      return NormValue::infinity(NormKind::ess_sup, kInf,
                                 "no stabilization up to the window cap");
    W *= 2.0;
  }
}

}  // namespace

NormValue NormValue::infinity(NormKind k, double s, std::string note) {
  NormValue nv;
  nv.value = std::numeric_limits<double>::infinity();
  nv.abs_error = 0.0;
  nv.finite = false;
  nv.kind = k;
  nv.exponent = s;
  nv.note = std::move(note);
  return nv;
}

NormValue lp_norm(const Expr::Ptr& f, double s, double tol,
                  const std::optional<TailEnvelope>& tail, double window) {
  if (!f) throw std::invalid_argument("lp_norm: empty expression");
  if (std::isnan(s) || s < 1.0)
    throw std::invalid_argument("lp_norm: exponent must be >= 1");
  if (std::isinf(s)) return ess_sup_norm(f, tail, window);
  if (!(tol > 0.0)) throw std::invalid_argument("lp_norm: tol must be positive");

  auto fabs = Expr::unary(NodeKind::Abs, f);
  Expr::Ptr integrand =
      (s == 1.0) ? fabs
                 : Expr::binary(NodeKind::Pow, fabs, Expr::constant(s));
  const bool certified = tail && tail->exponent * s > 1.0;

  double L = std::max(window, 8.0);
  if (tail) L = std::max(L, tail->cutoff);
  auto head = integrate_adaptive(*integrand, -L, L, tol);
  double I = head.value;
  double qerr = head.abs_error;
  // The head integral seeds the increment chain so a zero function can
  // settle without extra rounds.
  double last_inc = head.value;
  double prev_inc = kInf;
  int tiny = 0, grow = 0, rounds = 0;

  for (;;) {
    const double floor = tol * rel_floor(I);
    if (certified) {
      double tail_bound = tail->tail_integral_beyond(L, s);
      if (tail_bound <= floor && std::abs(last_inc) <= floor)
        return finite_lp(I, qerr + tail_bound, s, "");
    } else {
      if (std::abs(last_inc) <= floor) {
        grow = 0;
        if (++tiny >= 2 && rounds >= 1)
          return finite_lp(I, qerr + 4.0 * std::abs(last_inc), s,
                           "tail accepted after stable increments");
      } else {
        tiny = 0;
        if (last_inc >= prev_inc * 0.999) {
          if (++grow >= 3)
            return NormValue::infinity(NormKind::lp, s,
                                       "mass keeps growing with the window");
        } else {
          grow = 0;
        }
      }
    }
    if (L >= kLpWindowCap) break;
    auto right = integrate_adaptive(*integrand, L, 2.0 * L, tol);
    auto left = integrate_adaptive(*integrand, -2.0 * L, -L, tol);
    prev_inc = last_inc;
    last_inc = right.value + left.value;
    I += last_inc;
    qerr += right.abs_error + left.abs_error;
    L *= 2.0;
    ++rounds;
  }

  if (certified) {
    double tail_bound = tail->tail_integral_beyond(L, s);
    double fl = tol * rel_floor(I);
    double extra = std::abs(last_inc) > fl ? 4.0 * std::abs(last_inc) : 0.0;
    return finite_lp(I, qerr + tail_bound + extra, s,
                     "window cap reached; envelope tail kept in the error");
  }
  if (last_inc > 0.0 && prev_inc > 0.0 && last_inc < prev_inc) {
    double ratio = last_inc / prev_inc;
    double remaining = last_inc * ratio / (1.0 - ratio);
    return finite_lp(I, qerr + 4.0 * (last_inc + remaining), s,
                     "window cap reached; geometric tail extrapolation");
  }
  return NormValue::infinity(NormKind::lp, s,
                             "no decay evidence at the window cap");
}

NormValue uniform_local_norm(const Expr::Ptr& f, double tol,
                             const std::optional<TailEnvelope>& tail,
                             double window) {
  if (!f) throw std::invalid_argument("uniform_local_norm: empty expression");
  auto fabs = Expr::unary(NodeKind::Abs, f);
  long N = std::lround(std::ceil(std::max(window, 8.0)));
  if (tail) N = std::max(N, std::lround(std::ceil(tail->cutoff)));

  double best = 0.0, qerr = 0.0;
  auto take = [&](long n) {
    auto r = integrate_adaptive(*fabs, double(n), double(n + 1), tol);
    if (r.value > best) best = r.value;
    qerr = std::max(qerr, r.abs_error);
  };
  for (long n = -N; n < N; ++n) take(n);

  auto finite = [&](std::string note) {
    NormValue nv;
    nv.kind = NormKind::l1_uniform;
    nv.exponent = 1.0;
    nv.value = best;
    nv.abs_error = qerr;
    nv.note = std::move(note);
    return nv;
  };

  double prev = -1.0;
  int stable = 0, grow = 0;
  for (;;) {
    if (tail && tail->value_beyond(double(N)) <= best * (1.0 + 1e-12) + 1e-300)
      return finite("");
    if (prev >= 0.0) {
      if (std::abs(best - prev) <= 1e-9 * rel_floor(best)) {
        grow = 0;
        if (++stable >= 2)
          return finite("window-stable without a decay certificate");
      } else {
        stable = 0;
        if (++grow >= 3)
          return NormValue::infinity(NormKind::l1_uniform, 1.0,
                                     "unit-interval mass keeps growing");
      }
    }
    prev = best;
    if (2 * N > kUniformCap)
      return NormValue::infinity(NormKind::l1_uniform, 1.0,
                                 "no stabilization up to the interval cap");
    for (long n = N; n < 2 * N; ++n) {
      take(n);
      take(-n - 1);
    }
    N *= 2;
  }
}

NormValue omega_measure(const Expr::Ptr& r, double g_const,
                        const OmegaContext& ctx, double tol) {
  if (!r) throw std::invalid_argument("omega_measure: empty expression");
  if (!(g_const > 0.0) || !std::isfinite(g_const))
    throw std::invalid_argument("omega_measure: g must be a positive constant");
  const double theta = 1.0 / g_const;
  const double box = std::max(std::abs(ctx.a), std::abs(ctx.b));

  // Enclose { r < theta } in [-X, X] or give up.
  double X = -1.0;
  if (std::isfinite(ctx.essinf_outside) &&
      ctx.essinf_outside * g_const >= 1.0 - 1e-12) {
    X = box;
  } else if (ctx.inv_r_env) {
    const TailEnvelope& env = *ctx.inv_r_env;
    if (env.exponent > 0.0) {
      X = std::max({box, env.cutoff,
                    std::pow(env.scale * theta, 1.0 / env.exponent)});
    } else if (env.exponent == 0.0 && env.scale > 0.0 &&
               1.0 / env.scale >= theta * (1.0 - 1e-12)) {
      X = std::max(box, env.cutoff);
    } else {
      return NormValue::infinity(NormKind::omega_measure, g_const,
                                 "the declared weight floor sits below 1/g");
    }
  } else {
    return NormValue::infinity(NormKind::omega_measure, g_const,
                               "no certificate closes the sub-level set");
  }

  const int kSeeds = 4097;
  std::vector<double> pts;
  pts.reserve(kSeeds + 128);
  for (int i = 0; i < kSeeds; ++i)
    pts.push_back(-X + 2.0 * X * double(i) / double(kSeeds - 1));
  for (double b : r->breakpoints(-X, X))
    if (b > -X && b < X) pts.push_back(b);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](double u, double v) {
                          return std::abs(u - v) <= 1e-15 * rel_floor(u);
                        }),
            pts.end());

  auto dval = [&](double x) { return eval_or_nan(*r, x) - theta; };
  auto sgn = [](double d) { return d < 0.0 ? -1 : 1; };  // sign(0) = +

  std::vector<double> dv(pts.size());
  for (size_t i = 0; i < pts.size(); ++i) dv[i] = dval(pts[i]);

  std::vector<double> cuts;
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    if (std::isnan(dv[i]) || std::isnan(dv[i + 1])) continue;
    int s0 = sgn(dv[i]);
    if (s0 == sgn(dv[i + 1])) continue;
    double lo = pts[i], hi = pts[i + 1];
    for (int it = 0; it < 100; ++it) {
      double mid = 0.5 * (lo + hi);
      double dm = dval(mid);
      if (std::isnan(dm)) break;
      if (sgn(dm) == s0)
        lo = mid;
      else
        hi = mid;
    }
    cuts.push_back(0.5 * (lo + hi));
  }

  std::vector<double> edges = pts;
  edges.insert(edges.end(), cuts.begin(), cuts.end());
  std::sort(edges.begin(), edges.end());

  double measure = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    double u = edges[i], v = edges[i + 1];
    if (!(v > u)) continue;
    double dm = dval(0.5 * (u + v));
    // Unreadable cells count as inside: the measure may only be
    // over-reported, never under-reported.
    bool in = std::isnan(dm) ? true : (dm < 0.0);
    if (in) measure += v - u;
  }

  NormValue nv;
  nv.kind = NormKind::omega_measure;
  nv.exponent = g_const;
  nv.value = measure;
  nv.abs_error = tol + 1e-12 * X * double(cuts.size() + 1);
  return nv;
}

}  // namespace slb
