#include "schedopt/engine.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace schedopt {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::bo: return "bo";
        case Method::random_uniform: return "random-uniform";
        case Method::random_cot: return "random-cot";
    }
    return "bo";
}

std::optional<Method> parse_method(std::string_view text) {
    for (Method m : {Method::bo, Method::random_uniform, Method::random_cot})
        if (text == to_string(m)) return m;
    return std::nullopt;
}

Ablation Ablation::stripped() {
    Ablation a;
    a.permutation_metric = PermutationMetric::naive;
    a.log_transforms = false;
    a.priors = false;
    a.local_search = false;
    a.advanced_hyperfit = false;
    return a;
}

std::size_t default_doe_size(std::size_t dimension) { return std::max<std::size_t>(10, dimension + 1); }

std::optional<std::pair<Configuration, double>> best_feasible(std::span<const EvaluationRecord> history) {
    std::optional<std::pair<Configuration, double>> best;
    for (const auto& r : history) {
        if (!r.feasible || !r.objective) continue;
        if (!best || *r.objective < best->second || (*r.objective == best->second && r.configuration < best->first))
            best = std::make_pair(r.configuration, *r.objective);
    }
    return best;
}

Tuner::Tuner(SearchSpace space, TuningOptions options) : space_(std::move(space)), options_(std::move(options)) {
    model_space_ = options_.ablation.log_transforms ? space_ : space_.without_log_transforms();
    if (options_.ablation.permutation_metric)
        model_space_ = model_space_.with_permutation_metric(*options_.ablation.permutation_metric);

    doe_size_ = options_.doe_size.value_or(default_doe_size(space_.dimension()));
    if (options_.budget == 0) throw ValidationError("budget must be at least 1");
    if (doe_size_ == 0) throw ValidationError("doe_size must be at least 1");
    if (options_.budget < doe_size_)
        throw ValidationError("budget (" + std::to_string(options_.budget) + ") is smaller than the initial design (" +
                              std::to_string(doe_size_) + ")");
    if (space_.has_constraints()) {
        cot_ = std::make_shared<const ChainOfTrees>(ChainOfTrees::build(space_));
        if (cot_->empty()) throw ValidationError("the known constraints leave no feasible configuration");
    }
}

TuningRun Tuner::run(Evaluator& evaluator, const RecordCallback& on_record) {
    history_.clear();
    evaluated_.clear();
    started_ = std::chrono::steady_clock::now();
    Rng rng(options_.seed);

    TuningRun run;
    run.method = options_.method;
    run.seed = options_.seed;
    for (std::size_t i = 0; i < options_.budget; ++i) {
        std::optional<Configuration> next;
        Phase phase = Phase::doe;
        if (options_.method != Method::bo || i < doe_size_) {
            next = draw_fresh(rng);
        } else if (std::count_if(history_.begin(), history_.end(), [](const auto& r) { return r.feasible; }) < 2) {
            // Too few feasible points to fit a model: keep sampling.
            next = draw_fresh(rng);
        } else {
            next = propose(rng);
            phase = Phase::bo;
        }
        if (!next) {
            run.exhausted = true;
            break;
        }
        evaluate(evaluator, std::move(*next), phase, on_record);
    }
    run.history = history_;
    return run;
}

std::optional<Configuration> Tuner::draw_fresh(Rng& rng) {
    const ChainOfTrees* source = options_.method == Method::random_uniform ? nullptr : cot_.get();
    constexpr int kAttempts = 1000;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        auto drawn = sample_candidates(space_, source, 1, options_.ablation.cot_sampling, rng);
        if (!drawn.empty() && !evaluated_.contains(drawn.front())) return std::move(drawn.front());
    }
    // Random draws keep hitting evaluated points: pick among the rest.
    const auto rest = enumerate_unevaluated(space_, cot_.get(), evaluated_, options_.acquisition.enumeration_limit);
    if (rest.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, rest.size() - 1);
    return rest[pick(rng)];
}

std::optional<Configuration> Tuner::propose(Rng& rng) {
    const Ablation& ablation = options_.ablation;
    std::vector<Configuration> inputs;
    std::vector<double> raw;
    bool any_infeasible = false;
    for (const auto& r : history_) {
        if (r.feasible) {
            inputs.push_back(r.configuration);
            raw.push_back(*r.objective);
        } else {
            any_infeasible = true;
        }
    }

    const OutputTransform transform = OutputTransform::choose(raw, ablation.log_transforms);
    std::vector<double> targets;
    for (double y : raw) targets.push_back(transform.apply(y));

    GPFitOptions fit = options_.gp;
    fit.use_prior = ablation.priors;
    fit.multistart = ablation.advanced_hyperfit;
    std::optional<GPModel> gp;
    try {
        gp = GPModel::fit(model_space_, inputs, targets, fit, rng);
    } catch (const NumericError& e) {
        std::cerr << "schedopt: warning: surrogate fit failed (" << e.what() << "); sampling at random\n";
        return draw_fresh(rng);
    }

    std::optional<FeasibilityModel> feasibility;
    if (ablation.feasibility_model && any_infeasible)
        feasibility = FeasibilityModel::fit(model_space_, history_, rng, options_.forest);

    AcquisitionContext ctx;
    ctx.gp = &*gp;
    ctx.feasibility = feasibility ? &*feasibility : nullptr;
    ctx.best = *std::min_element(targets.begin(), targets.end());
    ctx.epsilon_filter = ablation.epsilon_filter;
    ctx.epsilon = ablation.epsilon_filter ? options_.threshold.sample(rng) : 0.0;

    AcquisitionOptions acq = options_.acquisition;
    acq.local_search = ablation.local_search;
    acq.sampling = ablation.cot_sampling;
    auto proposal = optimize_acquisition(ctx, model_space_, cot_.get(), evaluated_, acq, rng);
    if (!proposal) return std::nullopt;
    return std::move(proposal->configuration);
}

void Tuner::evaluate(Evaluator& evaluator, Configuration cfg, Phase phase, const RecordCallback& on_record) {
    const EvaluationResult result = evaluator.evaluate(cfg);
    EvaluationRecord rec;
    rec.iteration = history_.size();
    rec.feasible = result.feasible && result.objective && std::isfinite(*result.objective);
    if (result.feasible && !rec.feasible)
        std::cerr << "schedopt: warning: feasible result without a finite objective at iteration " << rec.iteration
                  << "; recorded as infeasible\n";
    if (rec.feasible) rec.objective = result.objective;
    rec.phase = phase;
    rec.timestamp = options_.timestamps == TimestampMode::logical
                        ? static_cast<double>(rec.iteration)
                        : std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
    rec.configuration = std::move(cfg);
    evaluated_.insert(rec.configuration);
    history_.push_back(rec);
    if (on_record) on_record(history_.back());
}

}  // namespace schedopt
