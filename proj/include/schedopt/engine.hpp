#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "schedopt/acquisition.hpp"
#include "schedopt/chain_of_trees.hpp"
#include "schedopt/common.hpp"
#include "schedopt/feasibility.hpp"
#include "schedopt/gaussian_process.hpp"
#include "schedopt/record.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Outcome of one black-box evaluation. An objective attached to an
/// infeasible result is ignored.
struct EvaluationResult {
    std::optional<double> objective;
    bool feasible = true;
};

class Evaluator {
public:
    virtual ~Evaluator() = default;
    virtual EvaluationResult evaluate(const Configuration& cfg) = 0;
};

/// Adapts a plain function.
class FunctionEvaluator : public Evaluator {
public:
    explicit FunctionEvaluator(std::function<EvaluationResult(const Configuration&)> fn) : fn_(std::move(fn)) {}
    EvaluationResult evaluate(const Configuration& cfg) override { return fn_(cfg); }

private:
    std::function<EvaluationResult(const Configuration&)> fn_;
};

enum class Method { bo, random_uniform, random_cot };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

/// Switches that each disable one ingredient of the optimizer.
struct Ablation {
    /// Replaces the metric of every permutation parameter.
    std::optional<PermutationMetric> permutation_metric;
    /// Log transforms on inputs and on the objective.
    bool log_transforms = true;
    /// Gamma priors on the GP lengthscales.
    bool priors = true;
    /// Hill climbing from the best random candidates.
    bool local_search = true;
    /// Random-forest probability of feasibility.
    bool feasibility_model = true;
    /// Random minimum feasibility limit.
    bool epsilon_filter = true;
    /// Multistart hyperparameter fitting; off runs one ascent from a fixed start.
    bool advanced_hyperfit = true;
    SamplingMode cot_sampling = SamplingMode::leaf_uniform;

    /// Log transforms, priors, local search and multistart fitting off, with
    /// permutations compared by the naive 0/1 metric. The feasibility model
    /// and the limit stay on.
    static Ablation stripped();
};

/// Evaluation budget; the reduced budgets are a third and two thirds of the
/// full one, rounded up.
struct BudgetSpec {
    std::size_t full = 0;

    std::size_t tiny() const { return (full + 2) / 3; }
    std::size_t small() const { return (2 * full + 2) / 3; }
};

enum class TimestampMode {
    /// timestamp = iteration index; runs are byte-for-byte reproducible.
    logical,
    /// Seconds since the start of the run.
    wall,
};

struct TuningOptions {
    std::size_t budget = 0;
    std::optional<std::size_t> doe_size;
    Method method = Method::bo;
    std::uint64_t seed = 0;
    Ablation ablation;
    TimestampMode timestamps = TimestampMode::logical;
    FeasibilityThreshold threshold;
    AcquisitionOptions acquisition;
    GPFitOptions gp;
    ForestOptions forest;
};

/// Initial random sample size for a space of `dimension` parameters: max(10, D+1).
std::size_t default_doe_size(std::size_t dimension);

struct TuningRun {
    Method method = Method::bo;
    std::uint64_t seed = 0;
    std::vector<EvaluationRecord> history;
    /// Set when the run stopped early because every feasible configuration
    /// had been evaluated.
    bool exhausted = false;
};

/// Minimum-objective feasible record; equal objectives go to the smaller
/// configuration.
std::optional<std::pair<Configuration, double>> best_feasible(std::span<const EvaluationRecord> history);

using RecordCallback = std::function<void(const EvaluationRecord&)>;

/// Runs one tuning session: an initial random design, then (for method=bo)
/// one model-guided proposal per iteration until the budget is spent.
class Tuner {
public:
    /// Throws ValidationError on a zero budget, a budget below the initial
    /// design size, or an empty feasible set.
    Tuner(SearchSpace space, TuningOptions options);

    const SearchSpace& space() const { return space_; }
    /// The space as the models see it, after ablations.
    const SearchSpace& model_space() const { return model_space_; }
    const ChainOfTrees* cot() const { return cot_.get(); }
    const TuningOptions& options() const { return options_; }
    std::size_t doe_size() const { return doe_size_; }

    /// Runs the whole session. `on_record` sees each record as soon as it is
    /// appended. Evaluator exceptions propagate; `history()` keeps what was
    /// recorded before.
    TuningRun run(Evaluator& evaluator, const RecordCallback& on_record = {});

    const std::vector<EvaluationRecord>& history() const { return history_; }

private:
    std::optional<Configuration> draw_fresh(Rng& rng);
    std::optional<Configuration> propose(Rng& rng);
    void evaluate(Evaluator& evaluator, Configuration cfg, Phase phase, const RecordCallback& on_record);

    SearchSpace space_;
    SearchSpace model_space_;
    TuningOptions options_;
    std::shared_ptr<const ChainOfTrees> cot_;
    std::size_t doe_size_ = 0;
    std::vector<EvaluationRecord> history_;
    std::set<Configuration> evaluated_;
    std::chrono::steady_clock::time_point started_;
};

}  // namespace schedopt
