#include <cstdio>

#include "lvmut/acceptance.hpp"

int main() {
  int failed = 0;
  const auto& criteria = lvmut::acceptance_criteria();
  for (const auto& criterion : criteria) {
    const lvmut::CriterionResult r = criterion.run();
    if (!r.passed) ++failed;
    std::printf("%s\n", lvmut::format_result_line(r).c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
