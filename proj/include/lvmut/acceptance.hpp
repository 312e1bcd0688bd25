#pragma once

#include <functional>
#include <string>
#include <vector>

namespace lvmut {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id = 0;
  std::string name;
  std::function<CriterionResult()> run;
};

/// The acceptance suite, in id order starting at 1.
const std::vector<Criterion>& acceptance_criteria();

/// "[PASS] C<id> <name>: <detail>" or "[FAIL] ...".
std::string format_result_line(const CriterionResult& result);

}  // namespace lvmut
