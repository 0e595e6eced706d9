#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "schedopt/engine.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// A synthetic tuning problem with a known optimum.
struct Benchmark {
    std::string name;
    std::string description;
    SearchSpace space;
    /// Pure objective; only meaningful where `hidden` holds.
    std::function<double(const Configuration&)> objective;
    /// Hidden feasibility rule; empty means every configuration runs.
    std::function<bool(const Configuration&)> hidden;
    std::size_t default_budget = 40;
    /// Exhaustive optimum over the feasible set.
    std::pair<Configuration, double> optimum;

    EvaluationResult evaluate(const Configuration& cfg) const;
};

/// Names accepted by builtin().
std::vector<std::string> builtin_names();

/// Built-in benchmarks:
///  - quadratic-mixed: two power-of-two ordinals (log) and a 3-label
///    categorical, o1 >= o2; separable quadratic in log2 coordinates plus a
///    per-label offset. Minimum 10.
///  - quadratic-dense: unconstrained 10 x 10 x 5 space (integer, log ordinal,
///    categorical) with a separable quadratic objective. Minimum 0.
///  - perm-assignment: a 5-element permutation and a power-of-two ordinal;
///    squared displacement to a hidden target ordering plus a quadratic in
///    the ordinal. Minimum 0 at the target.
///  - hidden-ridge: three integers in [0, 9]; runs fail when their sum exceeds
///    13, which is half the space. The minimum, 17, sits on the failure edge.
/// Throws ValidationError on an unknown name.
Benchmark builtin(std::string_view name);

/// Exhaustive minimum over the known-feasible set intersected with the
/// hidden rule; ties go to the smaller configuration. Throws ValidationError
/// when the feasible set is empty or larger than `limit`.
std::pair<Configuration, double> brute_force_optimum(const Benchmark& bench, std::uint64_t limit = 100'000);

class BenchmarkEvaluator : public Evaluator {
public:
    explicit BenchmarkEvaluator(Benchmark bench) : bench_(std::move(bench)) {}
    EvaluationResult evaluate(const Configuration& cfg) override { return bench_.evaluate(cfg); }
    const Benchmark& benchmark() const { return bench_; }

private:
    Benchmark bench_;
};

}  // namespace schedopt
