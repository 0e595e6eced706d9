#pragma once

#include <optional>
#include <span>
#include <vector>

#include "schedopt/common.hpp"
#include "schedopt/record.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Flattens configurations into classifier features: numeric parameters as
/// their normalized coordinate, categoricals one-hot, permutations as the
/// position of each element (m columns).
class FeatureEncoder {
public:
    FeatureEncoder() = default;
    explicit FeatureEncoder(const SearchSpace& space);

    std::size_t width() const { return width_; }
    std::vector<double> encode(const Configuration& cfg) const;

private:
    std::vector<Parameter> params_;
    std::size_t width_ = 0;
};

struct DecisionTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;     // taken when x[feature] <= threshold
        int right = -1;
        double feasible_fraction = 0.0;
    };

    std::vector<Node> nodes;  // nodes[0] is the root

    double predict(std::span<const double> features) const;
};

struct ForestOptions {
    std::size_t trees = 100;
    std::size_t max_depth = 10;
    std::size_t min_samples_split = 2;
};

/// Random-forest classifier for the probability that a configuration is
/// feasible. Bootstrap samples, √F candidate features per split, Gini
/// impurity; each leaf stores the feasible fraction of its samples.
class FeasibilityModel {
public:
    /// Trains on every record (feasible and infeasible). Records are put in a
    /// canonical order first, so the result does not depend on input order.
    static FeasibilityModel fit(const SearchSpace& space, std::span<const EvaluationRecord> records, Rng& rng,
                                const ForestOptions& options = {});
    static FeasibilityModel fit(const SearchSpace& space, std::span<const Configuration> inputs,
                                std::span<const bool> feasible, Rng& rng, const ForestOptions& options = {});

    /// A model made of explicit trees.
    static FeasibilityModel from_trees(const SearchSpace& space, std::vector<DecisionTree> trees);

    /// Mean leaf feasible-fraction across trees, in [0, 1]. Throws if the
    /// model holds neither trees nor a constant.
    double predict_proba(const Configuration& cfg) const;

    const std::vector<DecisionTree>& trees() const { return trees_; }
    const FeatureEncoder& encoder() const { return encoder_; }
    /// Set when training data held a single class.
    std::optional<double> constant() const { return constant_; }

private:
    FeatureEncoder encoder_;
    std::vector<DecisionTree> trees_;
    std::optional<double> constant_;
};

/// Distribution of the per-iteration minimum feasibility limit: exactly 0 with
/// probability `p_zero`, otherwise Uniform(0, max).
struct FeasibilityThreshold {
    double p_zero = 0.5;
    double max = 0.5;

    double sample(Rng& rng) const;
};

}  // namespace schedopt
