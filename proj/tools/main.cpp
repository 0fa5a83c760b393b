#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "slb/run.hpp"

namespace {

bool parse_g(const std::string& text, slb::GConfig& g, std::string& err) {
  if (text == "auto") {
    g.strategy = slb::GStrategy::automatic;
    return true;
  }
  if (text == "inv_r") {
    g.strategy = slb::GStrategy::inverse_r;
    return true;
  }
  if (text.rfind("c=", 0) == 0) {
    const std::string num = text.substr(2);
    try {
      std::size_t pos = 0;
      const double c = std::stod(num, &pos);
      if (pos != num.size() || !(c > 0.0)) {
        err = "constant in --g c=VALUE must be a positive number";
        return false;
      }
      g.strategy = slb::GStrategy::fixed_constant;
      g.fixed_c = c;
      return true;
    } catch (const std::exception&) {
      err = "constant in --g c=VALUE must be a positive number";
      return false;
    }
  }
  err = "unknown --g value '" + text + "' (expected auto, c=VALUE, or inv_r)";
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral lower bounds for Sturm-Liouville operators on the line"};
  app.require_subcommand(1);

  std::string problem;
  std::string s_text = "default";
  std::string eta_text = "default";
  std::string g_text = "auto";
  std::string format_text = "json";
  std::string output_path;
  double tol = 1e-8;
  std::uint64_t seed = 42;

  auto add_common = [&](CLI::App* sub, bool needs_problem) {
    auto* popt = sub->add_option("--problem", problem,
                                 "problem file or built-in catalogue name");
    if (needs_problem) popt->required();
    sub->add_option("--s", s_text,
                    "exponent list: decimals, a/b, inf, or lo:step:hi");
    sub->add_option("--eta", eta_text, "second exponent list, same syntax");
    sub->add_option("--g", g_text, "weight choice: auto, c=VALUE, or inv_r");
    sub->add_option("--tol", tol, "numerical tolerance");
    sub->add_option("--format", format_text, "output format: json, text, csv");
    sub->add_option("--output", output_path, "write the report here, not stdout");
    sub->add_option("--seed", seed, "seed for randomized checks");
  };

  CLI::App* bound =
      app.add_subcommand("bound", "compute lower bounds for one problem");
  CLI::App* verify =
      app.add_subcommand("verify", "bounds plus independent numerical check");
  CLI::App* sweep = app.add_subcommand("sweep", "best bound for each s value");
  CLI::App* catalogue =
      app.add_subcommand("catalogue", "verify every built-in problem");
  add_common(bound, true);
  add_common(verify, true);
  add_common(sweep, true);
  add_common(catalogue, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return slb::kExitInputError;
  }

  slb::RunConfig cfg;
  if (bound->parsed()) cfg.command = slb::Command::bound;
  if (verify->parsed()) cfg.command = slb::Command::verify;
  if (sweep->parsed()) cfg.command = slb::Command::sweep;
  if (catalogue->parsed()) cfg.command = slb::Command::catalogue;
  cfg.problem_path = problem;
  cfg.tol = tol;
  cfg.output_path = output_path;
  cfg.seed = seed;

  try {
    cfg.s_list = slb::parse_exponent_list(s_text);
    cfg.eta_list = slb::parse_exponent_list(eta_text);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return slb::kExitInputError;
  }

  std::string gerr;
  if (!parse_g(g_text, cfg.g, gerr)) {
    std::cerr << "error: " << gerr << "\n";
    return slb::kExitInputError;
  }

  if (format_text == "json") {
    cfg.format = slb::OutputFormat::json;
  } else if (format_text == "text") {
    cfg.format = slb::OutputFormat::text;
  } else if (format_text == "csv") {
    cfg.format = slb::OutputFormat::csv;
  } else {
    std::cerr << "error: unknown format '" << format_text << "'\n";
    return slb::kExitInputError;
  }

  std::string out, err;
  const int rc = slb::run(cfg, out, err);
  if (!out.empty()) {
    if (cfg.output_path.empty()) {
      std::cout << out;
    } else {
      std::ofstream file(cfg.output_path, std::ios::binary);
      if (!file) {
        std::cerr << "error: cannot open " << cfg.output_path << "\n";
        return slb::kExitInputError;
      }
      file << out;
    }
  }
  if (!err.empty()) std::cerr << "error: " << err << "\n";
  return rc;
}
