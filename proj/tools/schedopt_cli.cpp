// Command-line entry point: run a scenario, count its feasible set, or run a
// built-in benchmark.
//
// Exit codes: 0 success, 1 invalid input, 2 evaluator/protocol or runtime failure.

#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "schedopt/bench.hpp"
#include "schedopt/chain_of_trees.hpp"
#include "schedopt/engine.hpp"
#include "schedopt/protocol.hpp"
#include "schedopt/results.hpp"
#include "schedopt/scenario.hpp"

namespace {

using namespace schedopt;

constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

/// Command-line overrides shared by `run` and `bench`.
struct RunFlags {
    std::string output;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> method;
    std::optional<std::size_t> budget;
    std::optional<std::string> budget_level;
    std::optional<std::size_t> doe_size;
    std::optional<std::string> permutation_metric;
    std::optional<std::string> cot_sampling;
    std::optional<double> timeout;
    bool stripped = false;
    bool no_log_transforms = false;
    bool no_priors = false;
    bool no_local_search = false;
    bool no_feasibility_model = false;
    bool no_epsilon_filter = false;
    bool no_advanced_hyperfit = false;
    bool wall_clock = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--output,-o", f.output, "CSV file for the evaluation history");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--method", f.method, "bo | random-uniform | random-cot")
        ->check(CLI::IsMember({"bo", "random-uniform", "random-cot"}));
    cmd->add_option("--budget", f.budget, "Number of evaluations (full budget)")->check(CLI::PositiveNumber);
    cmd->add_option("--budget-level", f.budget_level, "Use a third (tiny) or two thirds (small) of the budget")
        ->check(CLI::IsMember({"tiny", "small", "full"}));
    cmd->add_option("--doe-size", f.doe_size, "Initial random design size")->check(CLI::PositiveNumber);
    cmd->add_option("--permutation-metric", f.permutation_metric, "kendall | spearman | hamming | naive")
        ->check(CLI::IsMember({"kendall", "spearman", "hamming", "naive"}));
    cmd->add_option("--cot-sampling", f.cot_sampling, "leaf | path")->check(CLI::IsMember({"leaf", "path"}));
    cmd->add_option("--timeout", f.timeout, "Per-evaluation timeout in seconds (external evaluators)")
        ->check(CLI::PositiveNumber);
    cmd->add_flag("--stripped", f.stripped, "Disable transforms, priors, local search, permutation metrics, multistart");
    cmd->add_flag("--no-log-transforms", f.no_log_transforms, "Disable input and output log transforms");
    cmd->add_flag("--no-priors", f.no_priors, "Disable lengthscale priors");
    cmd->add_flag("--no-local-search", f.no_local_search, "Pick the best random candidate without hill climbing");
    cmd->add_flag("--no-feasibility-model", f.no_feasibility_model, "Ignore hidden-constraint failures");
    cmd->add_flag("--no-epsilon-filter", f.no_epsilon_filter, "Never filter candidates on feasibility probability");
    cmd->add_flag("--no-advanced-hyperfit", f.no_advanced_hyperfit, "Single-start hyperparameter fitting");
    cmd->add_flag("--wall-clock", f.wall_clock, "Record wall-clock timestamps instead of iteration indices");
}

void apply_flags(const RunFlags& f, Scenario& s) {
    if (f.seed) s.seed = *f.seed;
    if (f.method) s.method = *parse_method(*f.method);
    if (f.budget) s.budget = BudgetSpec{*f.budget};
    if (f.doe_size) s.doe_size = *f.doe_size;
    if (f.stripped) s.ablation = Ablation::stripped();
    if (f.permutation_metric) s.ablation.permutation_metric = parse_permutation_metric(*f.permutation_metric);
    if (f.cot_sampling)
        s.ablation.cot_sampling = *f.cot_sampling == "path" ? SamplingMode::path_uniform : SamplingMode::leaf_uniform;
    if (f.no_log_transforms) s.ablation.log_transforms = false;
    if (f.no_priors) s.ablation.priors = false;
    if (f.no_local_search) s.ablation.local_search = false;
    if (f.no_feasibility_model) s.ablation.feasibility_model = false;
    if (f.no_epsilon_filter) s.ablation.epsilon_filter = false;
    if (f.no_advanced_hyperfit) s.ablation.advanced_hyperfit = false;
    if (f.timeout && s.evaluator) s.evaluator->timeout = *f.timeout;
    if (f.budget_level && s.budget) {
        if (*f.budget_level == "tiny") s.budget = BudgetSpec{s.budget->tiny()};
        else if (*f.budget_level == "small") s.budget = BudgetSpec{s.budget->small()};
    }
}

int execute(const Scenario& scenario, const RunFlags& flags) {
    if (!scenario.evaluator) throw ValidationError("evaluator: missing required field");
    TuningOptions options = scenario.tuning_options();
    options.timestamps = flags.wall_clock ? TimestampMode::wall : TimestampMode::logical;
    Tuner tuner(scenario.space, options);

    std::unique_ptr<Evaluator> evaluator;
    if (scenario.evaluator->builtin)
        evaluator = std::make_unique<BenchmarkEvaluator>(builtin(*scenario.evaluator->builtin));
    else
        evaluator = std::make_unique<ExternalEvaluator>(scenario.space, scenario.evaluator->command,
                                                        scenario.evaluator->timeout);

    std::optional<ResultsWriter> writer;
    if (!flags.output.empty()) writer.emplace(scenario.space, flags.output);
    RecordCallback on_record;
    if (writer) on_record = [&](const EvaluationRecord& r) { writer->write(r); };

    const TuningRun run = tuner.run(*evaluator, on_record);
    evaluator.reset();  // terminates an external evaluator

    const auto feasible = std::count_if(run.history.begin(), run.history.end(), [](const auto& r) { return r.feasible; });
    std::cout << "scenario: " << scenario.name << "\n"
              << "method: " << to_string(run.method) << "\n"
              << "seed: " << run.seed << "\n"
              << "evaluations: " << run.history.size() << " (" << feasible << " feasible)\n";
    if (run.exhausted) std::cout << "note: every feasible configuration was evaluated\n";
    if (auto best = best_feasible(run.history))
        std::cout << "best: " << format_number(best->second) << " at " << scenario.space.format(best->first) << "\n";
    else
        std::cout << "best: none (no feasible evaluation)\n";
    return 0;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ValidationError& e) {
        std::cerr << "schedopt: error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const ProtocolError& e) {
        std::cerr << "schedopt: evaluator error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "schedopt: error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bayesian-optimization autotuner for mixed, constrained search spaces"};
    app.require_subcommand(1);

    std::string run_scenario;
    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Tune a scenario");
    run->add_option("--scenario,-s", run_scenario, "Scenario JSON file")->required();
    add_run_flags(run, run_flags);

    std::string count_scenario;
    auto* count = app.add_subcommand("count", "Print the number of configurations satisfying the known constraints");
    count->add_option("--scenario,-s", count_scenario, "Scenario JSON file")->required();

    std::string bench_name;
    bool bench_list = false;
    RunFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "Run a built-in benchmark");
    bench->add_option("--name,-n", bench_name, "Benchmark name");
    bench->add_flag("--list", bench_list, "List the built-in benchmarks");
    add_run_flags(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    if (*run) {
        return guarded([&] {
            Scenario scenario = load_scenario(run_scenario);
            apply_flags(run_flags, scenario);
            return execute(scenario, run_flags);
        });
    }
    if (*count) {
        return guarded([&] {
            const Scenario scenario = load_scenario(count_scenario);
            const ChainOfTrees cot = ChainOfTrees::build(scenario.space);
            if (!cot.finite()) throw ValidationError("the space has unconstrained real parameters and is infinite");
            std::cout << cot.count() << "\n";
            return 0;
        });
    }
    return guarded([&] {
        if (bench_list) {
            for (const auto& name : builtin_names()) {
                const Benchmark b = builtin(name);
                std::cout << name << ": " << b.description << "\n";
            }
            return 0;
        }
        if (bench_name.empty()) throw ValidationError("bench: --name or --list is required");
        Scenario scenario;
        scenario.name = bench_name;
        scenario.evaluator = EvaluatorSpec{};
        scenario.evaluator->builtin = bench_name;
        const Benchmark b = builtin(bench_name);
        scenario.space = b.space;
        scenario.budget = BudgetSpec{b.default_budget};
        apply_flags(bench_flags, scenario);
        const int status = execute(scenario, bench_flags);
        std::cout << "optimum: " << format_number(b.optimum.second) << " at " << b.space.format(b.optimum.first)
                  << "\n";
        return status;
    });
}
