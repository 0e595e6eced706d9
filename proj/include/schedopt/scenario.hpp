#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "schedopt/engine.hpp"
#include "schedopt/protocol.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

struct EvaluatorSpec {
    /// argv of an external evaluator speaking the line protocol.
    std::vector<std::string> command;
    /// Name of a built-in benchmark; set instead of `command`.
    std::optional<std::string> builtin;
    double timeout = kDefaultEvaluationTimeout;
};

/// A tuning problem as read from a scenario file.
///
/// JSON schema (unknown keys are rejected):
///   name         string, required
///   parameters   array of {name, type, ...}; type-specific keys:
///                  real        bounds [lo, hi], transform "none"|"log"
///                  integer     bounds [lo, hi] (integers), transform
///                  ordinal     values [strictly increasing numbers], transform
///                  categorical values [distinct strings]
///                  permutation size (>= 2), metric kendall|spearman|hamming|naive
///                Omitted when the evaluator is a builtin, whose space is used.
///   constraints  array of expression strings (default none)
///   budget       positive integer; defaults to the builtin's budget
///   doe_size     positive integer (default max(10, D + 1))
///   method       "bo" | "random-uniform" | "random-cot" (default "bo")
///   seed         non-negative integer (default 0)
///   ablation     {permutation_metric, log_transforms, priors, local_search,
///                 feasibility_model, epsilon_filter, advanced_hyperfit,
///                 cot_sampling: "leaf"|"path", preset: "stripped"}
///   evaluator    {command: [argv...], timeout: seconds} or {builtin: name}
struct Scenario {
    std::string name;
    SearchSpace space;
    std::optional<BudgetSpec> budget;
    std::optional<std::size_t> doe_size;
    Method method = Method::bo;
    std::uint64_t seed = 0;
    Ablation ablation;
    std::optional<EvaluatorSpec> evaluator;

    /// Options for a Tuner. Throws ValidationError when no budget is set.
    TuningOptions tuning_options() const;
};

/// Throws ValidationError naming the offending field path, e.g.
/// "parameters[2].type: unknown parameter kind 'matrix'".
Scenario parse_scenario(const nlohmann::json& document);
Scenario load_scenario(const std::string& path);

nlohmann::ordered_json scenario_to_json(const Scenario& scenario);

}  // namespace schedopt
