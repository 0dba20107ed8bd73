#pragma once

#include <string>
#include <vector>

namespace aircomp {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Fast in-process property suites: closed-form examples, minorant and majorizer
// bounds on random draws, solver ascent and feasibility on small seeded instances.
std::vector<CheckResult> run_selftest();

}  // namespace aircomp
