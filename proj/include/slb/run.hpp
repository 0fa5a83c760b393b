#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "slb/verify.hpp"

namespace slb {

enum class Command { bound, verify, sweep, catalogue };
enum class OutputFormat { json, text, csv };

// Exit codes shared by run() and the executable.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInapplicable = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitFailedVerification = 3;

struct RunConfig {
  Command command = Command::bound;
  std::string problem_path;         // file path or catalogue name
  std::vector<double> s_list;       // empty -> default grid
  std::vector<double> eta_list;     // empty -> default grid
  GConfig g{};
  double tol = 1e-8;
  OutputFormat format = OutputFormat::json;
  std::string output_path;          // empty -> stdout
  std::uint64_t seed = 42;
  int fuzz_trials = 1000;           // verify/catalogue fuzz budget
};

// Entry "a/b", "inf", a decimal, or a range "lo:step:hi"; throws
// std::invalid_argument on malformed input.
std::vector<double> parse_exponent_list(const std::string& text);

// Executes the command and writes the report; returns the exit code.
// err receives diagnostics for nonzero exits.
int run(const RunConfig& cfg, std::string& out, std::string& err);

}  // namespace slb
