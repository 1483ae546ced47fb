#pragma once

#include <string>
#include <vector>

namespace glv {

struct CheckResult {
    std::string name;
    bool pass = false;
    double value = 0.0;   // measured quantity (residual, error, ...)
    double bound = 0.0;   // tolerance it is compared against
    std::string note;
};

// module-invariant suites behind the verify command; "quick" completes in
// well under a minute, "full" adds the fine-grid oracle recomputations
std::vector<CheckResult> run_verify(const std::string& level, unsigned seed = 20240901);

}  // namespace glv
