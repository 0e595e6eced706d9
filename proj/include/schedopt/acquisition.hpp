#pragma once

#include <limits>
#include <optional>
#include <set>

#include "schedopt/chain_of_trees.hpp"
#include "schedopt/common.hpp"
#include "schedopt/feasibility.hpp"
#include "schedopt/gaussian_process.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Value returned for candidates whose feasibility probability is below the
/// current limit; such candidates are never selected on acquisition value.
inline constexpr double kExcluded = -std::numeric_limits<double>::infinity();

/// Expected improvement for minimization. `variance` is the latent
/// (noise-free) posterior variance; negative values are treated as 0.
double expected_improvement(double mean, double variance, double best);

struct AcquisitionContext {
    const GPModel* gp = nullptr;                  // required
    const FeasibilityModel* feasibility = nullptr;  // null: every point counts as feasible
    double best = 0.0;                            // incumbent, in the GP's target units
    double epsilon = 0.0;                         // minimum feasibility limit
    bool epsilon_filter = true;                   // off: never exclude on probability
};

struct AcquisitionScore {
    double value = kExcluded;  // EI · p, or kExcluded
    double probability = 1.0;  // predicted probability of feasibility
};

AcquisitionScore score(const AcquisitionContext& ctx, const Configuration& cfg);

/// EI(cfg) · p(cfg), or kExcluded when p < epsilon and the filter is on.
double acquisition_value(const AcquisitionContext& ctx, const Configuration& cfg);

struct AcquisitionOptions {
    std::size_t candidates = 5000;
    std::size_t starts = 10;
    std::size_t max_steps = 50;
    /// Off: return the best random candidate without hill climbing.
    bool local_search = true;
    SamplingMode sampling = SamplingMode::leaf_uniform;
    /// Spaces with at most this many feasible configurations are enumerated
    /// when random candidates fail to turn up an unevaluated one.
    std::uint64_t enumeration_limit = 100'000;
};

struct Proposal {
    Configuration configuration;
    AcquisitionScore score;
};

/// Multi-start local search for the acquisition maximizer.
///
/// Random candidates (from the Chain-of-Trees when given, otherwise uniform
/// with rejection of known-constraint violators) are scored; the best
/// non-excluded ones start steepest-ascent hill climbs over `neighbors()`.
/// The best endpoint not in `evaluated` is returned, ties going to the
/// lexicographically smallest configuration. When every candidate is
/// excluded, the candidate with the highest feasibility probability is
/// returned instead. nullopt means every feasible configuration has already
/// been evaluated.
std::optional<Proposal> optimize_acquisition(const AcquisitionContext& ctx, const SearchSpace& space,
                                             const ChainOfTrees* cot, const std::set<Configuration>& evaluated,
                                             const AcquisitionOptions& options, Rng& rng);

/// Draws `n` configurations that satisfy the known constraints: from the
/// Chain-of-Trees when given, otherwise uniform over the dense space with
/// rejection. May return fewer than `n` when rejection keeps failing.
std::vector<Configuration> sample_candidates(const SearchSpace& space, const ChainOfTrees* cot, std::size_t n,
                                             SamplingMode mode, Rng& rng);

/// Every feasible configuration not in `evaluated`, provided the feasible set
/// is finite and holds at most `limit` configurations; empty otherwise.
std::vector<Configuration> enumerate_unevaluated(const SearchSpace& space, const ChainOfTrees* cot,
                                                 const std::set<Configuration>& evaluated, std::uint64_t limit);

}  // namespace schedopt
