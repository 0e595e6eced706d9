#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "schedopt/common.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

enum class SamplingMode {
    /// Descend weighted by subtree leaf counts: exactly uniform over the feasible set.
    leaf_uniform,
    /// Descend choosing children uniformly: biased toward sparse subtrees.
    path_uniform,
};

inline constexpr std::uint64_t kDefaultNodeCap = 10'000'000;

/// The feasible set of a constrained space, stored as one tree per group of
/// co-dependent parameters.
///
/// Parameters are grouped by union-find over constraint co-occurrence; each
/// group's tree has one level per parameter in declaration order, and every
/// root-to-leaf path is a feasible partial configuration. Unconstrained
/// integer, ordinal and categorical parameters become depth-1 trees.
/// Unconstrained reals and permutations are "free": they are sampled from
/// their domains directly and never enumerated.
///
/// A constraint prunes at the deepest level where all of its variables are
/// bound. Nodes that end up with no leaves are discarded, so the stored trees
/// hold only live paths.
class ChainOfTrees {
public:
    struct Node {
        std::uint32_t value = 0;        // index into the level parameter's domain
        std::uint32_t first_child = 0;  // offset into Tree::children
        std::uint32_t child_count = 0;
        std::uint64_t leaf_count = 0;
    };

    struct Tree {
        std::vector<std::size_t> parameters;  // level order
        std::vector<Node> nodes;
        std::vector<std::uint32_t> children;  // node indices, sorted by value per parent
        std::uint32_t root = 0;               // virtual node above level 0

        std::uint64_t leaf_count() const { return nodes.empty() ? 0 : nodes[root].leaf_count; }
        const Node* child_with_value(const Node& parent, std::uint32_t value) const;
    };

    /// Throws ValidationError if a constrained parameter is real and
    /// SpaceTooLargeError if more than `node_cap` nodes would be explored.
    /// An empty feasible set is not an error here: `empty()` reports it.
    static ChainOfTrees build(const SearchSpace& space, std::uint64_t node_cap = kDefaultNodeCap);

    const SearchSpace& space() const { return space_; }
    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<std::size_t>& free_parameters() const { return free_; }

    bool empty() const;
    /// True when every parameter is enumerable (no free reals).
    bool finite() const;

    /// Number of feasible configurations, saturating at 2^64-1. Free
    /// permutations contribute m!; free reals are not counted.
    std::uint64_t count() const;

    /// Membership in the feasible set; O(depth) per tree.
    bool contains(const Configuration& cfg) const;

    Configuration sample_one(Rng& rng, SamplingMode mode = SamplingMode::leaf_uniform) const;
    std::vector<Configuration> sample(std::size_t n, Rng& rng, SamplingMode mode = SamplingMode::leaf_uniform) const;

    /// Visits every feasible configuration. Requires `finite()`.
    void for_each(const std::function<void(const Configuration&)>& visit) const;

    /// Total nodes stored across trees, virtual roots excluded.
    std::uint64_t node_count() const;

private:
    SearchSpace space_;
    std::vector<Tree> trees_;
    std::vector<std::size_t> free_;
    std::vector<std::vector<Value>> domains_;  // enumerated values for discrete parameters
    bool contradictory_ = false;               // a variable-free constraint is false
};

/// Leaf-uniform draws from the feasible set.
std::vector<Configuration> cot_sample_leaf_uniform(const ChainOfTrees& cot, std::size_t n, Rng& rng);
/// Uniform-child draws (the biased baseline).
std::vector<Configuration> cot_sample_path_biased(const ChainOfTrees& cot, std::size_t n, Rng& rng);

}  // namespace schedopt
