#include "schedopt/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace schedopt {

double expected_improvement(double mean, double variance, double best) {
    const double sigma = std::sqrt(std::max(variance, 0.0));
    const double gain = best - mean;
    if (!(sigma > 0.0)) return std::max(gain, 0.0);
    const double z = gain / sigma;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return std::max(gain * cdf + sigma * pdf, 0.0);
}

AcquisitionScore score(const AcquisitionContext& ctx, const Configuration& cfg) {
    AcquisitionScore s;
    s.probability = ctx.feasibility ? ctx.feasibility->predict_proba(cfg) : 1.0;
    if (ctx.epsilon_filter && s.probability < ctx.epsilon) return s;
    const Prediction pred = ctx.gp->predict(cfg, /*include_noise=*/false);
    s.value = expected_improvement(pred.mean, pred.variance, ctx.best) * s.probability;
    return s;
}

double acquisition_value(const AcquisitionContext& ctx, const Configuration& cfg) { return score(ctx, cfg).value; }

std::vector<Configuration> sample_candidates(const SearchSpace& space, const ChainOfTrees* cot, std::size_t n,
                                             SamplingMode mode, Rng& rng) {
    if (cot) {
        if (cot->empty()) return {};
        return cot->sample(n, rng, mode);
    }
    if (!space.has_constraints()) return sample_uniform(space, n, rng);
    std::vector<Configuration> out;
    out.reserve(n);
    const std::size_t max_attempts = 100 * n;
    for (std::size_t attempt = 0; attempt < max_attempts && out.size() < n; ++attempt) {
        auto cfg = sample_uniform(space, 1, rng).front();
        if (space.satisfies_constraints(cfg)) out.push_back(std::move(cfg));
    }
    return out;
}

namespace {

/// Larger value first; equal values go to the smaller configuration.
bool better(const AcquisitionScore& a, const Configuration& ca, const AcquisitionScore& b, const Configuration& cb) {
    if (a.value != b.value) return a.value > b.value;
    return ca < cb;
}

class Search {
public:
    Search(const AcquisitionContext& ctx, const SearchSpace& space, const ChainOfTrees* cot,
           const std::set<Configuration>& evaluated)
        : ctx_(ctx), space_(space), cot_(cot), evaluated_(evaluated) {}

    const AcquisitionScore& eval(const Configuration& cfg) {
        auto it = memo_.find(cfg);
        if (it == memo_.end()) it = memo_.emplace(cfg, score(ctx_, cfg)).first;
        return it->second;
    }

    Configuration climb(Configuration current, std::size_t max_steps) {
        AcquisitionScore here = eval(current);
        for (std::size_t step = 0; step < max_steps; ++step) {
            const Configuration* best = nullptr;
            AcquisitionScore best_score = here;
            std::vector<Configuration> around = neighbors(space_, current, cot_);
            for (const auto& nb : around) {
                const AcquisitionScore& s = eval(nb);
                if (s.value > here.value && (!best || better(s, nb, best_score, *best))) {
                    best = &nb;
                    best_score = s;
                }
            }
            if (!best) break;
            current = *best;
            here = best_score;
        }
        return current;
    }

    bool fresh(const Configuration& cfg) const { return !evaluated_.contains(cfg); }

    /// Best unevaluated, non-excluded configuration among `pool`.
    std::optional<Proposal> best_of(const std::vector<Configuration>& pool) {
        std::optional<Proposal> out;
        for (const auto& cfg : pool) {
            if (!fresh(cfg)) continue;
            const AcquisitionScore& s = eval(cfg);
            if (s.value == kExcluded) continue;
            if (!out || better(s, cfg, out->score, out->configuration)) out = Proposal{cfg, s};
        }
        return out;
    }

    /// Unevaluated configuration with the highest feasibility probability.
    std::optional<Proposal> most_feasible(const std::vector<Configuration>& pool) {
        std::optional<Proposal> out;
        for (const auto& cfg : pool) {
            if (!fresh(cfg)) continue;
            const AcquisitionScore& s = eval(cfg);
            if (!out || s.probability > out->score.probability ||
                (s.probability == out->score.probability && cfg < out->configuration))
                out = Proposal{cfg, s};
        }
        return out;
    }

    std::vector<Configuration> scored() const {
        std::vector<Configuration> out;
        out.reserve(memo_.size());
        for (const auto& [cfg, s] : memo_) out.push_back(cfg);
        return out;
    }

private:
    const AcquisitionContext& ctx_;
    const SearchSpace& space_;
    const ChainOfTrees* cot_;
    const std::set<Configuration>& evaluated_;
    std::map<Configuration, AcquisitionScore> memo_;
};

}  // namespace

std::vector<Configuration> enumerate_unevaluated(const SearchSpace& space, const ChainOfTrees* cot,
                                                 const std::set<Configuration>& evaluated, std::uint64_t limit) {
    std::vector<Configuration> out;
    auto keep = [&](const Configuration& cfg) {
        if (!evaluated.contains(cfg)) out.push_back(cfg);
    };
    if (cot) {
        if (cot->finite() && cot->count() <= limit) cot->for_each(keep);
        return out;
    }
    const auto dense = space.dense_size();
    if (!dense || *dense > limit) return out;
    space.for_each_dense([&](const Configuration& cfg) {
        if (space.satisfies_constraints(cfg)) keep(cfg);
    });
    return out;
}

std::optional<Proposal> optimize_acquisition(const AcquisitionContext& ctx, const SearchSpace& space,
                                             const ChainOfTrees* cot, const std::set<Configuration>& evaluated,
                                             const AcquisitionOptions& options, Rng& rng) {
    if (!ctx.gp) throw ValidationError("acquisition needs a fitted GP");
    Search search(ctx, space, cot, evaluated);

    std::vector<Configuration> candidates = sample_candidates(space, cot, options.candidates, options.sampling, rng);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    for (const auto& cfg : candidates) search.eval(cfg);

    std::optional<Proposal> choice;
    if (options.local_search) {
        std::vector<std::pair<AcquisitionScore, const Configuration*>> ranked;
        for (const auto& cfg : candidates) {
            const AcquisitionScore& s = search.eval(cfg);
            if (s.value != kExcluded) ranked.emplace_back(s, &cfg);
        }
        const std::size_t starts = std::min(options.starts, ranked.size());
        std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(starts), ranked.end(),
                          [](const auto& a, const auto& b) { return better(a.first, *a.second, b.first, *b.second); });
        std::vector<Configuration> endpoints;
        for (std::size_t i = 0; i < starts; ++i) endpoints.push_back(search.climb(*ranked[i].second, options.max_steps));
        choice = search.best_of(endpoints);
        if (!choice) choice = search.best_of(search.scored());
    } else {
        choice = search.best_of(candidates);
    }
    if (!choice) choice = search.most_feasible(search.scored());
    if (choice) return choice;

    // Every scored configuration has been evaluated already: look at the
    // rest of the feasible set if it is small enough to list.
    const std::vector<Configuration> rest = enumerate_unevaluated(space, cot, evaluated, options.enumeration_limit);
    choice = search.best_of(rest);
    if (!choice) choice = search.most_feasible(rest);
    return choice;
}

}  // namespace schedopt
