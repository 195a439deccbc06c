#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qdob {

struct CheckResult {
  std::string tag;
  std::string description;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Full verification battery with pinned seeds and tolerances. An empty
// filter runs everything; otherwise only checks whose tag contains the
// filter substring.
std::vector<CheckResult> run_paper_suite(const std::string& filter = "");

// one line per check; returns the number of failures
int print_suite_results(const std::vector<CheckResult>& results, std::ostream& os);

}  // namespace qdob
