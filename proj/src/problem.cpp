#include "slb/problem.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "slb/norms.hpp"

namespace slb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_or_nan(const Expr& e, double x) {
  try {
    return e.evaluate(x);
  } catch (const EvalError&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

// Fits the coefficient of a declared power-law cover and validates it.
// The fit maximizes |h(x)| * |x|^e over a log-spaced grid; a second
// look at the far half of the range catches declarations the data
// outgrows, and a uniform grid re-checks domination.
TailEnvelope fit_envelope(const Expr& h, const DecayDecl& d,
                          const std::string& key) {
  const double c = d.cutoff;
  const double e = d.exponent;
  const double hi = 1024.0 * c;
  const double split = 32.0 * c;
  const int kFit = 512;

  double near_max = 0.0, far_max = 0.0;
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < kFit; ++i) {
      double t = c * std::pow(hi / c, double(i) / double(kFit - 1));
      double v = eval_or_nan(h, side ? -t : t);
      if (std::isnan(v)) continue;
      double g = std::abs(v) * std::pow(t, e);
      if (t <= split)
        near_max = std::max(near_max, g);
      else
        far_max = std::max(far_max, g);
    }
  }
  if (far_max > near_max * 1.02 + 1e-12)
    throw ProblemError("tail_decay." + key +
                       ": the data outgrows the declared rate");

  TailEnvelope env{c, e, std::max(near_max, far_max) * (1.0 + 1e-6)};

  const int kCheck = 4096;
  long total = 0, viol = 0;
  for (int side = 0; side < 2; ++side) {
    for (int i = 0; i < kCheck; ++i) {
      double t = c + (hi - c) * (double(i) + 0.5) / double(kCheck);
      double v = eval_or_nan(h, side ? -t : t);
      if (std::isnan(v)) continue;
      ++total;
      if (std::abs(v) > env.scale * std::pow(t, -e) * (1.0 + 1e-9) + 1e-300)
        ++viol;
    }
  }
  if (total > 0 && viol > total / 100)
    throw ProblemError("tail_decay." + key +
                       ": declared envelope does not dominate the data");
  return env;
}

struct PositivityScan {
  double min = kInf;
  long nonpos = 0;
  long bad = 0;
  long total = 0;
};

PositivityScan scan_positivity(const Expr& e, double W) {
  PositivityScan out;
  const long kSamples = 16384;
  std::vector<double> probes;
  probes.reserve(kSamples + 64);
  double step = 2.0 * W / double(kSamples);
  for (long i = 0; i < kSamples; ++i)
    probes.push_back(-W + (double(i) + 0.5) * step);
  for (double b : e.breakpoints(-W, W)) {
    probes.push_back(b);
    probes.push_back(b - 1e-7);
    probes.push_back(b + 1e-7);
  }
  for (double x : probes) {
    double v = eval_or_nan(e, x);
    ++out.total;
    if (std::isnan(v)) {
      ++out.bad;
      continue;
    }
    out.min = std::min(out.min, v);
    if (v <= 0.0) ++out.nonpos;
  }
  return out;
}

Verdict positivity_verdict(const Expr& e, double W, const std::string& label) {
  PositivityScan scan = scan_positivity(e, W);
  Verdict v;
  v.evidence = std::isfinite(scan.min) ? scan.min : 0.0;
  // A measure-zero touch of zero is fine; allow up to 0.5% of probes.
  v.pass = scan.total > 0 && (scan.nonpos + scan.bad) <= scan.total / 200;
  std::ostringstream os;
  os << label << ": " << scan.nonpos << "/" << scan.total
     << " nonpositive probes, sampled min " << v.evidence;
  v.detail = os.str();
  return v;
}

struct MinScan {
  double min = kInf;
  double arg = 0.0;
};

MinScan scan_min(const Expr& e, double lo, double hi, long samples) {
  MinScan out;
  if (!(hi > lo)) return out;
  std::vector<double> probes;
  probes.reserve(samples + 32);
  double step = (hi - lo) / double(samples);
  for (long i = 0; i < samples; ++i)
    probes.push_back(lo + (double(i) + 0.5) * step);
  for (double b : e.breakpoints(lo, hi))
    if (b > lo && b < hi) probes.push_back(b + 1e-9 * (hi - lo));
  for (double x : probes) {
    double v = eval_or_nan(e, x);
    if (std::isnan(v)) continue;
    if (v < out.min) {
      out.min = v;
      out.arg = x;
    }
  }
  // Shrinking zoom around the argmin.
  double w = step;
  int rounds = 0;
  while (w > 1e-13 * std::max(1.0, std::abs(out.arg)) && rounds++ < 60) {
    double zstep = 2.0 * w / 32.0;
    for (int k = 0; k < 32; ++k) {
      double x = out.arg - w + (double(k) + 0.5) * zstep;
      if (x <= lo || x >= hi) continue;
      double v = eval_or_nan(e, x);
      if (!std::isnan(v) && v < out.min) {
        out.min = v;
        out.arg = x;
      }
    }
    w /= 3.0;
  }
  return out;
}

}  // namespace

double TailEnvelope::value_beyond(double t) const {
  if (exponent < 0.0) return kInf;
  t = std::max(t, cutoff);
  return scale * std::pow(t, -exponent);
}

double TailEnvelope::tail_integral_beyond(double t, double s) const {
  double es = exponent * s;
  if (!(es > 1.0)) return kInf;
  t = std::max(t, cutoff);
  return 2.0 * std::pow(scale, s) * std::pow(t, 1.0 - es) / (es - 1.0);
}

double Problem::window() const {
  double w = std::max({8.0, std::abs(a), std::abs(b)});
  for (const auto& [key, d] : tail_decay) w = std::max(w, d.cutoff);
  return w;
}

Problem Problem::from_json_text(const std::string& text,
                                const std::string& name_hint) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& ex) {
    throw ProblemError(std::string("invalid json: ") + ex.what());
  }
  if (!j.is_object()) throw ProblemError("problem must be a json object");

  for (const auto& [key, val] : j.items()) {
    (void)val;
    if (key != "name" && key != "p" && key != "q" && key != "r" &&
        key != "ab" && key != "tail_decay")
      throw ProblemError("unknown key '" + key + "'");
  }
  for (const char* req : {"p", "q", "r", "ab"})
    if (!j.contains(req))
      throw ProblemError(std::string("missing key '") + req + "'");

  Problem prob;
  prob.name = name_hint;
  if (j.contains("name")) {
    if (!j["name"].is_string()) throw ProblemError("name must be a string");
    prob.name = j["name"].get<std::string>();
  }

  auto coeff = [&](const char* key) -> Expr::Ptr {
    if (!j[key].is_string())
      throw ProblemError(std::string(key) + " must be an expression string");
    std::string src = j[key].get<std::string>();
    try {
      return parse_expression(src);
    } catch (const ParseError& ex) {
      throw ProblemError(std::string(key) + ": " + ex.what() + " at offset " +
                         std::to_string(ex.offset()));
    }
  };
  prob.p = coeff("p");
  prob.q = coeff("q");
  prob.r = coeff("r");

  const auto& ab = j["ab"];
  if (!ab.is_array() || ab.size() != 2 || !ab[0].is_number() ||
      !ab[1].is_number())
    throw ProblemError("ab must be a numeric pair [a, b]");
  prob.a = ab[0].get<double>();
  prob.b = ab[1].get<double>();
  if (!(prob.a < prob.b)) throw ProblemError("ab must satisfy a < b");

  if (j.contains("tail_decay")) {
    const auto& td = j["tail_decay"];
    if (!td.is_object()) throw ProblemError("tail_decay must be an object");
    for (const auto& [key, val] : td.items()) {
      if (key != "q" && key != "inv_p" && key != "inv_r")
        throw ProblemError("unknown tail_decay key '" + key + "'");
      if (!val.is_object())
        throw ProblemError("tail_decay." + key + " must be an object");
      for (const auto& [fk, fv] : val.items()) {
        (void)fv;
        if (fk != "cutoff" && fk != "exponent")
          throw ProblemError("unknown tail_decay field '" + fk + "'");
      }
      if (!val.contains("cutoff") || !val.contains("exponent") ||
          !val["cutoff"].is_number() || !val["exponent"].is_number())
        throw ProblemError("tail_decay." + key +
                           " needs numeric cutoff and exponent");
      DecayDecl d;
      d.cutoff = val["cutoff"].get<double>();
      d.exponent = val["exponent"].get<double>();
      if (!(d.cutoff > 0.0) || !std::isfinite(d.exponent))
        throw ProblemError("tail_decay." + key + ": bad cutoff or exponent");
      prob.tail_decay[key] = d;
    }
  }

  prob.inv_p = Expr::binary(NodeKind::Div, Expr::constant(1.0), prob.p);
  prob.inv_r = Expr::binary(NodeKind::Div, Expr::constant(1.0), prob.r);
  prob.q_plus = positive_part(prob.q);
  prob.q_minus = negative_part(prob.q);
  prob.q_abs = Expr::unary(NodeKind::Abs, prob.q);

  for (const auto& [key, d] : prob.tail_decay) {
    if (key == "q")
      prob.q_env = fit_envelope(*prob.q_abs, d, key);
    else if (key == "inv_p")
      prob.inv_p_env = fit_envelope(*prob.inv_p, d, key);
    else
      prob.inv_r_env = fit_envelope(*prob.inv_r, d, key);
  }
  return prob;
}

Problem Problem::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ProblemError("cannot open problem file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string stem = std::filesystem::path(path).stem().string();
  return from_json_text(ss.str(), stem);
}

OutsideFloor r_floor_scan(const Problem& prob) {
  const double box = std::max(std::abs(prob.a), std::abs(prob.b));
  double W2 = std::max(4.0 * prob.window(), 64.0);
  if (prob.inv_r_env) W2 = std::max(W2, 4.0 * prob.inv_r_env->cutoff);
  const double mid = 0.5 * (box + W2);
  MinScan near_r = scan_min(*prob.r, box, mid, 8192);
  MinScan far_r = scan_min(*prob.r, mid, W2, 8192);
  MinScan near_l = scan_min(*prob.r, -mid, -box, 8192);
  MinScan far_l = scan_min(*prob.r, -W2, -mid, 8192);
  OutsideFloor out;
  out.near_min = std::min(near_r.min, near_l.min);
  out.far_min = std::min(far_r.min, far_l.min);
  out.essinf = std::min(out.near_min, out.far_min);
  if (!std::isfinite(out.essinf)) out.essinf = 0.0;
  return out;
}

HypothesisReport check_hypotheses(const Problem& prob, double tol) {
  HypothesisReport rep;
  const double W = prob.window();
  const double norm_tol = std::max(tol, 1e-7);

  rep.p_positive = positivity_verdict(*prob.p, W, "p");
  rep.r_positive = positivity_verdict(*prob.r, W, "r");

  // Some eta in {1, 2, inf} must make 1/p integrable in the eta sense.
  for (double eta : {1.0, 2.0, kInf}) {
    NormValue nv = lp_norm(prob.inv_p, eta, norm_tol, prob.inv_p_env, W);
    if (nv.finite) rep.inv_p_finite_exponents.push_back(eta);
  }
  rep.inv_p_integrable.pass = !rep.inv_p_finite_exponents.empty();
  rep.inv_p_integrable.evidence = rep.inv_p_integrable.pass
                                      ? rep.inv_p_finite_exponents.front()
                                      : 0.0;
  rep.inv_p_integrable.detail =
      rep.inv_p_integrable.pass
          ? "1/p has a finite integrability exponent"
          : "1/p has no finite exponent among {1, 2, inf}";

  NormValue qu = uniform_local_norm(prob.q_abs, norm_tol, prob.q_env, W);
  rep.q_locally_integrable.pass = qu.finite;
  rep.q_locally_integrable.evidence = qu.finite ? qu.value : kInf;
  rep.q_locally_integrable.detail =
      qu.finite ? "sup of unit-interval mass of |q| is finite" : qu.note;
  rep.q_uniform_norm = qu.finite ? qu.value : kInf;

  // ess inf of r outside [a, b]: dense scan on a widened window; a
  // decay declaration for 1/r (exponent >= 0) certifies the far tail,
  // otherwise the two halves of the scan must agree.
  OutsideFloor floor = r_floor_scan(prob);
  double sampled = floor.essinf;
  bool certified = prob.inv_r_env && prob.inv_r_env->exponent >= 0.0;
  bool no_drift = floor.far_min >= floor.near_min * (1.0 - 1e-6);
  rep.r_floor_outside.pass =
      std::isfinite(sampled) && sampled > 0.0 && (certified || no_drift);
  rep.r_floor_outside.evidence = std::isfinite(sampled) ? sampled : 0.0;
  rep.r_floor_outside.detail =
      certified ? "far tail certified by the declared 1/r envelope"
                : (no_drift ? "no downward drift across the scan halves"
                            : "r keeps dropping toward the window edge");
  rep.r_essinf_outside = rep.r_floor_outside.evidence;

  return rep;
}

}  // namespace slb
