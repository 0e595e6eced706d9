#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "schedopt/common.hpp"
#include "schedopt/expression.hpp"
#include "schedopt/parameter.hpp"

namespace schedopt {

class ChainOfTrees;

/// Number of grid points real parameters are discretized to for local search.
inline constexpr int kRealNeighborGrid = 64;

/// The optimization domain: ordered parameters plus known constraints.
/// Immutable after construction.
class SearchSpace {
public:
    SearchSpace() = default;
    /// Throws ValidationError on duplicate names and ParseError on bad constraints.
    SearchSpace(std::vector<Parameter> parameters, const std::vector<std::string>& constraints = {});

    const std::vector<Parameter>& parameters() const { return parameters_; }
    const Parameter& parameter(std::size_t i) const { return parameters_.at(i); }
    const std::vector<ConstraintExpr>& constraints() const { return constraints_; }
    std::vector<std::string> constraint_texts() const;
    std::size_t dimension() const { return parameters_.size(); }
    bool has_constraints() const { return !constraints_.empty(); }

    std::optional<std::size_t> index_of(std::string_view name) const;

    /// Every value is inside its parameter's domain.
    bool contains(const Configuration& cfg) const;
    /// Every known constraint evaluates to true. Assumes `contains(cfg)`.
    bool satisfies_constraints(const Configuration& cfg) const;

    /// Size of the unconstrained cross product; nullopt when infinite or beyond 2^64.
    std::optional<std::uint64_t> dense_size() const;
    /// Visits every configuration of the dense cross product in lexicographic
    /// index order. Requires a finite space.
    void for_each_dense(const std::function<void(const Configuration&)>& visit) const;

    std::string format(const Configuration& cfg) const;

    /// Copy with every log transform removed.
    SearchSpace without_log_transforms() const;
    /// Copy with every permutation parameter switched to `metric`.
    SearchSpace with_permutation_metric(PermutationMetric metric) const;

private:
    std::vector<Parameter> parameters_;
    std::vector<ConstraintExpr> constraints_;
};

/// All configurations differing from `cfg` in exactly one parameter:
/// adjacent values for integer and ordinal, every other label for categorical,
/// adjacent grid points for real, single transpositions for permutations.
/// With a Chain-of-Trees, only members of the feasible set are returned.
std::vector<Configuration> neighbors(const SearchSpace& space, const Configuration& cfg,
                                     const ChainOfTrees* cot = nullptr);

/// Draws a value uniformly from the parameter's domain.
Value sample_value(const Parameter& param, Rng& rng);

/// Independent uniform draws from the dense cross product; constraints ignored.
std::vector<Configuration> sample_uniform(const SearchSpace& space, std::size_t n, Rng& rng);

}  // namespace schedopt
