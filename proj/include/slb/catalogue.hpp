#pragma once

#include <string>
#include <vector>

#include "slb/problem.hpp"

namespace slb {

struct CatalogueEntry {
  std::string name;
  std::string json_text;
};

// Built-in worked problems: free operator, a reflectionless well, three
// square wells, a growing-p sign-test case, and a vanishing-weight case.
const std::vector<CatalogueEntry>& builtin_catalogue();

Problem catalogue_problem(const std::string& name);

}  // namespace slb
