#pragma once

#include <optional>
#include <string_view>

#include "schedopt/parameter.hpp"

namespace schedopt {

enum class Phase { doe, bo };

inline std::string_view to_string(Phase phase) { return phase == Phase::doe ? "doe" : "bo"; }

/// One evaluated configuration. `objective` is present iff `feasible`.
struct EvaluationRecord {
    std::size_t iteration = 0;
    Configuration configuration;
    std::optional<double> objective;
    bool feasible = false;
    Phase phase = Phase::doe;
    double timestamp = 0.0;

    friend bool operator==(const EvaluationRecord&, const EvaluationRecord&) = default;
};

}  // namespace schedopt
