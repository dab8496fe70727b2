#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "phasekit/model.hpp"

namespace phasekit {

enum class TransitionOrder { First, Second };

inline std::string_view to_string(TransitionOrder o) { return o == TransitionOrder::First ? "first" : "second"; }

/// A located phase-boundary point. For a g-scan j is fixed and g_c is the
/// located coupling; for the classical J-scan g_c holds the fixed g and
/// j the located coupling.
struct TransitionPoint {
    double j{0.0};
    double g_c{0.0};
    TransitionOrder order{TransitionOrder::Second};
    double jump{0.0};            // order-parameter discontinuity across the boundary
    double bracket_width{0.0};   // final bisection bracket
    PhaseLabel below{PhaseLabel::PM_N};
    PhaseLabel above{PhaseLabel::PM_N};
    bool coexistent{false};      // two degenerate minima at the boundary
    double coexistence_gap{0.0}; // |e_1 - e_2| of the tracked minima at g_c
    std::string backend;         // "mean-field", "free-fermion", "chain-ed(16)", ...
    std::vector<std::pair<int, double>> jump_trend;  // (n_sites, jump), chain-ED only
};

}  // namespace phasekit
