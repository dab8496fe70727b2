#pragma once

// Runtime invariant suite behind `phasekit selfcheck`. Each check is small
// enough to finish in seconds on one core.

#include <string>
#include <vector>

namespace phasekit {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

std::vector<CheckResult> run_selfcheck();

}  // namespace phasekit
