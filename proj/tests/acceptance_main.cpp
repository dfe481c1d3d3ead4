#include <iostream>

#include "ssmod/acceptance.hpp"

int main() {
  int failed = 0;
  ssmod::run_acceptance(ssmod::kDefaultSeed, [&](const ssmod::CriterionResult& r) {
    ssmod::print_result(std::cout, r);
    std::cout.flush();
    if (!r.passed) ++failed;
  });
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
