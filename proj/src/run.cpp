#include "slb/run.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "slb/catalogue.hpp"

namespace slb {

namespace {

using ordered_json = nlohmann::ordered_json;

const double kInf = std::numeric_limits<double>::infinity();

double parse_plain_number(const std::string& tok) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last)
    throw std::invalid_argument("bad exponent entry: " + tok);
  return v;
}

double parse_exponent_entry(const std::string& tok) {
  if (tok == "inf") return kInf;
  const std::size_t slash = tok.find('/');
  if (slash != std::string::npos) {
    const double a = parse_plain_number(tok.substr(0, slash));
    const double b = parse_plain_number(tok.substr(slash + 1));
    if (b == 0.0) throw std::invalid_argument("bad exponent entry: " + tok);
    return a / b;
  }
  return parse_plain_number(tok);
}

// Numbers that may legitimately be infinite are serialized as "inf"
// strings; NaN (an unused slot, e.g. s of the local route) as null.
ordered_json loose_number(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ordered_json verdict_json(const Verdict& v) {
  return {{"pass", v.pass},
          {"evidence", loose_number(v.evidence)},
          {"detail", v.detail}};
}

ordered_json hypothesis_json(const HypothesisReport& h) {
  ordered_json j;
  j["all_pass"] = h.all_pass();
  j["p_positive"] = verdict_json(h.p_positive);
  j["inv_p_integrable"] = verdict_json(h.inv_p_integrable);
  j["q_locally_integrable"] = verdict_json(h.q_locally_integrable);
  j["r_positive"] = verdict_json(h.r_positive);
  j["r_floor_outside"] = verdict_json(h.r_floor_outside);
  ordered_json exps = ordered_json::array();
  for (double e : h.inv_p_finite_exponents) exps.push_back(loose_number(e));
  j["inv_p_finite_exponents"] = exps;
  j["q_uniform_norm"] = loose_number(h.q_uniform_norm);
  j["r_essinf_outside"] = loose_number(h.r_essinf_outside);
  return j;
}

ordered_json bound_json(const BoundResult& r) {
  ordered_json j;
  j["theorem"] = theorem_name(r.theorem);
  j["s"] = loose_number(r.s);
  j["eta"] = loose_number(r.eta);
  if (r.uses_g) {
    j["alpha"] = r.alpha;
    j["beta"] = r.beta;
    if (r.g.inverse_r)
      j["g"] = {{"type", "inverse_r"}};
    else
      j["g"] = {{"type", "constant"}, {"value", r.g.constant}};
    if (r.applicable && !r.g.inverse_r) j["omega"] = r.omega;
  }
  j["applicable"] = r.applicable;
  j["bound"] = r.applicable ? ordered_json(r.bound) : ordered_json(nullptr);
  if (!r.reason.empty()) j["reason"] = r.reason;
  return j;
}

ordered_json bound_set_json(const BoundSet& set) {
  ordered_json j;
  ordered_json rows = ordered_json::array();
  for (const BoundResult& r : set.results) rows.push_back(bound_json(r));
  j["results"] = rows;
  j["best"] = set.best ? bound_json(*set.best) : ordered_json(nullptr);
  return j;
}

ordered_json oracle_json(const SpectralEstimate& est) {
  ordered_json j;
  j["lambda_min"] = est.lambda_min;
  j["L"] = est.L;
  j["n"] = est.n;
  j["converged"] = est.converged;
  ordered_json hist = ordered_json::array();
  for (const auto& [L, n, lam] : est.history)
    hist.push_back(ordered_json::array({L, n, lam}));
  j["history"] = hist;
  return j;
}

ordered_json fuzz_json(const FuzzCounts& f) {
  ordered_json j;
  j["trials"] = f.trials;
  j["checks"] = f.checks;
  j["violations"] = f.violations;
  j["worst_slack"] = loose_number(f.worst_slack);
  j["identity_max_slack"] = f.identity_max_slack;
  ordered_json cases = ordered_json::array();
  for (const WorstCase& w : f.worst_cases)
    cases.push_back({{"seed", w.seed},
                     {"inequality", w.inequality},
                     {"lhs", w.lhs},
                     {"rhs", w.rhs}});
  j["worst_cases"] = cases;
  return j;
}

ordered_json report_json(const VerificationReport& rep) {
  ordered_json j;
  j["problem"] = rep.problem;
  j["pass"] = rep.pass;
  j["hypothesis"] = hypothesis_json(rep.hypothesis);
  j["bounds"] = bound_set_json(rep.bounds);
  j["oracle"] = oracle_json(rep.oracle);
  j["margin"] = rep.margin;
  j["all_bounds_below_oracle"] = rep.all_bounds_below_oracle;
  j["fuzz"] = fuzz_json(rep.fuzz);
  return j;
}

ordered_json grid_json(const std::vector<double>& grid) {
  ordered_json a = ordered_json::array();
  for (double v : grid) a.push_back(loose_number(v));
  return a;
}

std::string strategy_name(const GConfig& g) {
  switch (g.strategy) {
    case GStrategy::automatic: return "auto";
    case GStrategy::fixed_constant: return "constant";
    case GStrategy::inverse_r: return "inverse_r";
  }
  return "?";
}

std::string bound_line(const BoundResult& r) {
  std::ostringstream os;
  os << theorem_name(r.theorem);
  if (!std::isnan(r.s)) os << " s=" << format_double(r.s);
  if (!std::isnan(r.eta)) os << " eta=" << format_double(r.eta);
  if (r.uses_g)
    os << (r.g.inverse_r
               ? std::string(" g=1/r")
               : " g=" + format_double(r.g.constant));
  if (r.applicable)
    os << "  bound " << format_double(r.bound);
  else
    os << "  not applicable (" << r.reason << ")";
  return os.str();
}

Problem load_problem(const std::string& path_or_name) {
  for (const CatalogueEntry& e : builtin_catalogue())
    if (e.name == path_or_name) return catalogue_problem(path_or_name);
  return Problem::from_file(path_or_name);
}

ExponentGrid resolve_grid(const RunConfig& cfg) {
  ExponentGrid grid = ExponentGrid::defaults();
  if (!cfg.s_list.empty()) grid.s = cfg.s_list;
  if (!cfg.eta_list.empty()) grid.eta = cfg.eta_list;
  return grid;
}

// Shared gate: loads the problem and refuses on a failed hypothesis
// check, printing the report.
int load_checked(const RunConfig& cfg, Problem& prob, HypothesisReport& hyp,
                 std::string& out, std::string& err) {
  if (cfg.problem_path.empty()) {
    err = "no problem given";
    return kExitInputError;
  }
  prob = load_problem(cfg.problem_path);
  hyp = check_hypotheses(prob, std::max(cfg.tol, 1e-8));
  if (!hyp.all_pass()) {
    ordered_json j;
    j["problem"] = prob.name;
    j["hypothesis"] = hypothesis_json(hyp);
    if (cfg.format == OutputFormat::text) {
      std::ostringstream os;
      os << "problem " << prob.name << ": hypothesis check failed\n"
         << j["hypothesis"].dump(2) << "\n";
      out = os.str();
    } else {
      out = j.dump(2) + "\n";
    }
    err = "hypotheses not satisfied for " + prob.name;
    return kExitInputError;
  }
  return kExitOk;
}

int run_bound(const RunConfig& cfg, std::string& out, std::string& err) {
  Problem prob;
  HypothesisReport hyp;
  if (int rc = load_checked(cfg, prob, hyp, out, err); rc != kExitOk)
    return rc;
  ExponentGrid grid = resolve_grid(cfg);
  NormTable norms(prob, cfg.tol);
  BoundSet set = best_bound(norms, grid, cfg.g);

  if (cfg.format == OutputFormat::text) {
    std::ostringstream os;
    os << "problem: " << prob.name << "\n";
    for (const BoundResult& r : set.results)
      os << "  " << bound_line(r) << "\n";
    if (set.best)
      os << "best: " << bound_line(*set.best) << "\n";
    else
      os << "best: none\n";
    out = os.str();
  } else {
    ordered_json j;
    j["problem"] = prob.name;
    j["tol"] = cfg.tol;
    j["g_strategy"] = strategy_name(cfg.g);
    if (cfg.g.strategy == GStrategy::fixed_constant)
      j["fixed_c"] = cfg.g.fixed_c;
    j["s_grid"] = grid_json(grid.s);
    j["eta_grid"] = grid_json(grid.eta);
    j["hypothesis"] = hypothesis_json(hyp);
    j["results"] = bound_set_json(set)["results"];
    j["best"] = set.best ? bound_json(*set.best) : ordered_json(nullptr);
    out = j.dump(2) + "\n";
  }
  if (!set.best) {
    err = "no applicable bound";
    return kExitInapplicable;
  }
  return kExitOk;
}

int run_verify(const RunConfig& cfg, std::string& out, std::string& err) {
  Problem prob;
  HypothesisReport hyp;
  if (int rc = load_checked(cfg, prob, hyp, out, err); rc != kExitOk)
    return rc;
  ExponentGrid grid = resolve_grid(cfg);
  VerificationReport rep = validate_bounds(prob, grid, cfg.g, cfg.tol,
                                           cfg.seed, cfg.fuzz_trials);
  if (cfg.format == OutputFormat::text) {
    std::ostringstream os;
    os << "problem: " << rep.problem << "\n"
       << "oracle:  " << format_double(rep.oracle.lambda_min) << " (L="
       << rep.oracle.L << ", n=" << rep.oracle.n << ", "
       << (rep.oracle.converged ? "converged" : "not converged") << ")\n"
       << "margin:  " << format_double(rep.margin) << "\n"
       << "bounds below oracle: "
       << (rep.all_bounds_below_oracle ? "yes" : "no") << "\n"
       << "fuzz: " << rep.fuzz.checks << " checks, " << rep.fuzz.violations
       << " violations\n"
       << "result: " << (rep.pass ? "pass" : "fail") << "\n";
    if (rep.bounds.best) os << "best: " << bound_line(*rep.bounds.best) << "\n";
    out = os.str();
  } else {
    out = report_json(rep).dump(2) + "\n";
  }
  if (!rep.pass) {
    err = "verification failed for " + rep.problem;
    return kExitFailedVerification;
  }
  if (!rep.bounds.best) {
    err = "no applicable bound";
    return kExitInapplicable;
  }
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, std::string& out, std::string& err) {
  if (cfg.format == OutputFormat::text) {
    err = "sweep needs csv or json format";
    return kExitInputError;
  }
  Problem prob;
  HypothesisReport hyp;
  if (int rc = load_checked(cfg, prob, hyp, out, err); rc != kExitOk)
    return rc;
  std::vector<double> s_grid =
      cfg.s_list.empty() ? ExponentGrid::defaults().s : cfg.s_list;
  std::vector<double> eta_grid =
      cfg.eta_list.empty() ? ExponentGrid::defaults().eta : cfg.eta_list;
  NormTable norms(prob, cfg.tol);

  struct Row {
    double s;
    std::optional<BoundResult> best;
  };
  std::vector<Row> rows;
  for (double s : s_grid) {
    ExponentGrid grid;
    grid.s = {s};
    grid.eta = eta_grid;
    BoundSet set = best_bound(norms, grid, cfg.g);
    rows.push_back({s, set.best});
  }

  bool any = false;
  if (cfg.format == OutputFormat::csv) {
    std::ostringstream os;
    os << "s,theorem,bound\n";
    for (const Row& row : rows) {
      os << format_double(row.s) << ",";
      if (row.best) {
        os << theorem_name(row.best->theorem) << ","
           << format_double(row.best->bound);
        any = true;
      } else {
        os << "none,";
      }
      os << "\n";
    }
    out = os.str();
  } else {
    ordered_json j;
    j["problem"] = prob.name;
    ordered_json arr = ordered_json::array();
    for (const Row& row : rows) {
      ordered_json rj;
      rj["s"] = loose_number(row.s);
      rj["theorem"] =
          row.best ? ordered_json(theorem_name(row.best->theorem))
                   : ordered_json(nullptr);
      rj["bound"] =
          row.best ? ordered_json(row.best->bound) : ordered_json(nullptr);
      arr.push_back(rj);
      if (row.best) any = true;
    }
    j["rows"] = arr;
    out = j.dump(2) + "\n";
  }
  if (!any) {
    err = "no applicable bound at any grid point";
    return kExitInapplicable;
  }
  return kExitOk;
}

int run_catalogue(const RunConfig& cfg, std::string& out, std::string& err) {
  ExponentGrid grid = resolve_grid(cfg);
  ordered_json problems = ordered_json::array();
  std::ostringstream table;
  table << "problem            result  best bound      oracle\n";
  bool all_pass = true;
  bool any_flagged = false;
  for (const CatalogueEntry& e : builtin_catalogue()) {
    Problem prob = catalogue_problem(e.name);
    VerificationReport rep = validate_bounds(prob, grid, cfg.g, cfg.tol,
                                             cfg.seed, cfg.fuzz_trials);
    all_pass = all_pass && rep.pass;
    ordered_json j;
    j["name"] = rep.problem;
    j["pass"] = rep.pass;
    j["best"] = rep.bounds.best ? bound_json(*rep.bounds.best)
                                : ordered_json(nullptr);
    j["oracle_lambda_min"] = rep.oracle.lambda_min;
    j["oracle_converged"] = rep.oracle.converged;
    j["margin"] = rep.margin;
    j["all_bounds_below_oracle"] = rep.all_bounds_below_oracle;
    j["fuzz_violations"] = rep.fuzz.violations;
    problems.push_back(j);

    any_flagged = any_flagged || !rep.oracle.converged;
    std::string oracle_col = format_double(rep.oracle.lambda_min);
    if (!rep.oracle.converged) oracle_col += "*";
    char line[128];
    std::snprintf(line, sizeof line, "%-18s %-7s %-15s %s\n", rep.problem.c_str(),
                  rep.pass ? "pass" : "FAIL",
                  rep.bounds.best ? format_double(rep.bounds.best->bound).c_str()
                                  : "none",
                  oracle_col.c_str());
    table << line;
  }
  if (any_flagged)
    table << "* refinement ladder unconverged; last Dirichlet value shown\n";
  if (cfg.format == OutputFormat::text) {
    out = table.str();
  } else {
    ordered_json j;
    j["problems"] = problems;
    j["all_pass"] = all_pass;
    out = j.dump(2) + "\n";
  }
  if (!all_pass) {
    err = "catalogue verification failed";
    return kExitFailedVerification;
  }
  return kExitOk;
}

}  // namespace

std::vector<double> parse_exponent_list(const std::string& text) {
  if (text == "default") return {};
  if (text.empty()) throw std::invalid_argument("empty exponent list");
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok = text.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    if (tok.empty()) throw std::invalid_argument("empty exponent entry");
    const std::size_t c1 = tok.find(':');
    if (c1 != std::string::npos) {
      const std::size_t c2 = tok.find(':', c1 + 1);
      if (c2 == std::string::npos)
        throw std::invalid_argument("range needs lo:step:hi: " + tok);
      const double lo = parse_exponent_entry(tok.substr(0, c1));
      const double step = parse_exponent_entry(tok.substr(c1 + 1, c2 - c1 - 1));
      const double hi = parse_exponent_entry(tok.substr(c2 + 1));
      if (!std::isfinite(lo) || !std::isfinite(step) || !std::isfinite(hi) ||
          step <= 0.0 || hi < lo)
        throw std::invalid_argument("bad range: " + tok);
      for (int k = 0;; ++k) {
        const double v = lo + k * step;
        if (v > hi + step * 1e-9) break;
        out.push_back(v);
      }
    } else {
      out.push_back(parse_exponent_entry(tok));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
    if (start == text.size())
      throw std::invalid_argument("trailing comma in exponent list");
  }
  return out;
}

int run(const RunConfig& cfg, std::string& out, std::string& err) {
  out.clear();
  err.clear();
  if (!(cfg.tol > 0.0)) {
    err = "tol must be positive";
    return kExitInputError;
  }
  if (cfg.fuzz_trials < 0) {
    err = "fuzz trial count must be nonnegative";
    return kExitInputError;
  }
  try {
    switch (cfg.command) {
      case Command::bound: return run_bound(cfg, out, err);
      case Command::verify: return run_verify(cfg, out, err);
      case Command::sweep: return run_sweep(cfg, out, err);
      case Command::catalogue: return run_catalogue(cfg, out, err);
    }
    err = "unknown command";
    return kExitInputError;
  } catch (const ProblemError& e) {
    err = e.what();
    return kExitInputError;
  } catch (const std::exception& e) {
    err = e.what();
    return kExitInputError;
  }
}

}  // namespace slb
