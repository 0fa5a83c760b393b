#include "slb/catalogue.hpp"

namespace slb {

const std::vector<CatalogueEntry>& builtin_catalogue() {
  static const std::vector<CatalogueEntry> entries = {
      {"free",
       R"json({"name":"free","p":"1","q":"0","r":"1","ab":[-1,1],
         "tail_decay":{"q":{"cutoff":1,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"poschl_teller",
       R"json({"name":"poschl_teller","p":"1","q":"-2*sech(x)^2","r":"1",
         "ab":[-8,8],
         "tail_decay":{"q":{"cutoff":4,"exponent":6},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"square_well_1",
       R"json({"name":"square_well_1","p":"1","q":"-indicator(0,1)","r":"1",
         "ab":[-2,2],
         "tail_decay":{"q":{"cutoff":2,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"square_well_5",
       R"json({"name":"square_well_5","p":"1","q":"-5*indicator(-1,1)",
         "r":"1","ab":[-2,2],
         "tail_decay":{"q":{"cutoff":2,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"square_well_50",
       R"json({"name":"square_well_50","p":"1","q":"-50*indicator(-1,1)",
         "r":"1","ab":[-2,2],
         "tail_decay":{"q":{"cutoff":2,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"growing_p",
       R"json({"name":"growing_p","p":"1+x^2","q":"-0.2*indicator(0,1)",
         "r":"1","ab":[-2,2],
         "tail_decay":{"q":{"cutoff":2,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":2},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
      {"weighted",
       R"json({"name":"weighted","p":"1","q":"-indicator(-1,1)",
         "r":"min(1,abs(x))","ab":[-8,8],
         "tail_decay":{"q":{"cutoff":2,"exponent":4},
                       "inv_p":{"cutoff":1,"exponent":0},
                       "inv_r":{"cutoff":1,"exponent":0}}})json"},
  };
  return entries;
}

Problem catalogue_problem(const std::string& name) {
  for (const CatalogueEntry& e : builtin_catalogue())
    if (e.name == name) return Problem::from_json_text(e.json_text, e.name);
  throw ProblemError("unknown catalogue problem: " + name);
}

}  // namespace slb
