// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Every tolerance and sample count is pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "schedopt/acquisition.hpp"
#include "schedopt/bench.hpp"
#include "schedopt/chain_of_trees.hpp"
#include "schedopt/distance.hpp"
#include "schedopt/engine.hpp"
#include "schedopt/gaussian_process.hpp"
#include "schedopt/results.hpp"
#include "schedopt/scenario.hpp"

namespace {

using namespace schedopt;
using Clock = std::chrono::steady_clock;

// Criterion 1
constexpr std::uint64_t kExampleFeasible = 21;
constexpr std::uint64_t kExampleDense = 72;
constexpr double kExampleBuildSeconds = 1.0;
// Criterion 2
constexpr std::size_t kUniformityDraws = 21000;
constexpr double kUniformityBand = 0.15;
constexpr double kChiSquare20At0001 = 45.315;
constexpr double kPathBiasFactor = 3.0;
// Criterion 4
constexpr std::size_t kGramConfigurations = 100;
constexpr double kMinEigenvalue = -1e-8;
// Criterion 5
constexpr std::size_t kOracleDatasets = 5;
constexpr std::size_t kOracleSize = 10;
constexpr std::size_t kOracleProbes = 20;
constexpr double kOracleTolerance = 1e-8;
constexpr double kInterpolationTolerance = 1e-6;
// Criterion 6
constexpr std::size_t kMonteCarloSamples = 1'000'000;
constexpr std::size_t kEiTriples = 100;
constexpr double kEiTolerance = 1e-3;
// Criteria 7-9
constexpr std::uint64_t kSeeds = 30;
constexpr std::size_t kEndToEndBudget = 40;
constexpr double kOptimumSlack = 0.05;
constexpr double kSolvedFraction = 0.9;
constexpr double kSuiteSeconds = 600.0;
constexpr std::size_t kEndToEndIndex = 6;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fixed(double v, int digits = 4) {
    std::ostringstream out;
    out << std::setprecision(digits) << v;
    return out.str();
}

SearchSpace example_space() {
    const Scenario s = load_scenario(std::string(SCHEDOPT_TEST_DATA) + "/five_params.json");
    return s.space;
}

Configuration cfg(std::vector<Value> values) { return Configuration{std::move(values)}; }

SearchSpace mixed_space(PermutationMetric metric) {
    return SearchSpace({Parameter::real("x", -2.0, 3.0), Parameter::integer("n", 1, 64, Transform::log),
                        Parameter::ordinal("tile", {2, 4, 8, 16, 32}, Transform::log),
                        Parameter::categorical("layout", {"row", "col", "tiled"}),
                        Parameter::permutation("order", 5, metric)});
}

Eigen::MatrixXd gram(const SearchSpace& space, const std::vector<Configuration>& xs, const GPHyperparameters& h) {
    const auto n = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = kernel(space, xs[i], xs[j], h);
    return k;
}

// ---------------------------------------------------------------------------

Outcome chain_of_trees_example() {
    const SearchSpace space = example_space();
    const auto start = Clock::now();
    const ChainOfTrees cot = ChainOfTrees::build(space);
    std::set<Configuration> enumerated;
    cot.for_each([&](const Configuration& c) { enumerated.insert(c); });
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    std::set<Configuration> brute;
    std::uint64_t dense = 0;
    space.for_each_dense([&](const Configuration& c) {
        ++dense;
        if (space.satisfies_constraints(c)) brute.insert(c);
    });
    const bool member = cot.contains(cfg({2.0, 2.0, 4.0, 4.0, 8.0}));
    const bool pass = cot.count() == kExampleFeasible && dense == kExampleDense && enumerated == brute &&
                      brute.size() == kExampleFeasible && member && seconds < kExampleBuildSeconds;
    return {pass, "count=" + std::to_string(cot.count()) + " brute=" + std::to_string(brute.size()) + "/" +
                      std::to_string(dense) + " set-equal=" + (enumerated == brute ? "yes" : "no") +
                      " member(2,2,4,4,8)=" + (member ? "yes" : "no") + " build=" + fixed(seconds * 1e3, 3) + "ms"};
}

Outcome sampling_uniformity() {
    const ChainOfTrees cot = ChainOfTrees::build(example_space());
    Rng rng(2024);
    std::map<Configuration, std::size_t> counts;
    for (const auto& c : cot.sample(kUniformityDraws, rng, SamplingMode::leaf_uniform)) ++counts[c];
    const double expected = static_cast<double>(kUniformityDraws) / static_cast<double>(kExampleFeasible);
    bool in_band = counts.size() == kExampleFeasible;
    double chi2 = 0.0;
    std::size_t lo = kUniformityDraws, hi = 0;
    for (const auto& [c, n] : counts) {
        in_band = in_band && std::abs(static_cast<double>(n) - expected) <= kUniformityBand * expected;
        chi2 += (static_cast<double>(n) - expected) * (static_cast<double>(n) - expected) / expected;
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }

    // The right tree holds (p3, p4, p5); 4-4-8 is one of its 7 leaves.
    const auto biased = cot_sample_path_biased(cot, kUniformityDraws, rng);
    const auto hits = std::count_if(biased.begin(), biased.end(), [](const Configuration& c) {
        return c.values[2] == Value{4.0} && c.values[3] == Value{4.0} && c.values[4] == Value{8.0};
    });
    const double share = static_cast<double>(hits) / static_cast<double>(kUniformityDraws);
    const double uniform_share = 1.0 / 7.0;
    const bool biased_ok = share > kPathBiasFactor * uniform_share;
    return {in_band && chi2 < kChiSquare20At0001 && biased_ok,
            "counts in [" + std::to_string(lo) + ", " + std::to_string(hi) + "] chi2=" + fixed(chi2) +
                " path-biased 4-4-8 share=" + fixed(share) + " (uniform " + fixed(uniform_share) + ")"};
}

Outcome permutation_semimetrics() {
    std::vector<std::vector<int>> perms;
    std::vector<int> p = {1, 2, 3, 4};
    do perms.push_back(p);
    while (std::next_permutation(p.begin(), p.end()));
    double kendall = 0, spearman = 0, hamming = 0;
    for (const auto& a : perms) {
        for (const auto& b : perms) {
            kendall = std::max(kendall, kendall_distance(a, b));
            spearman = std::max(spearman, spearman_distance(a, b));
            hamming = std::max(hamming, hamming_distance(a, b));
        }
    }
    const std::vector<int> a = {1, 2, 3, 4};
    const std::vector<int> b = {2, 4, 3, 1};
    const double k = kendall_distance(a, b), s = spearman_distance(a, b), h = hamming_distance(a, b);
    const bool pass = perms.size() == 24 && kendall == 6 && spearman == 20 && hamming == 4 && k == 4 && s == 14 &&
                      h == 3 && max_permutation_distance(4, PermutationMetric::kendall) == 6 &&
                      max_permutation_distance(4, PermutationMetric::spearman) == 20 &&
                      max_permutation_distance(4, PermutationMetric::hamming) == 4;
    return {pass, "maxima (" + fixed(kendall) + ", " + fixed(spearman) + ", " + fixed(hamming) + ") pair (" + fixed(k) +
                      ", " + fixed(s) + ", " + fixed(h) + ")"};
}

Outcome kernel_validity() {
    bool pass = true;
    std::string detail;
    for (auto metric : {PermutationMetric::kendall, PermutationMetric::spearman, PermutationMetric::hamming,
                        PermutationMetric::naive}) {
        const SearchSpace space = mixed_space(metric);
        Rng rng(404);
        const auto xs = sample_uniform(space, kGramConfigurations, rng);
        double worst = std::numeric_limits<double>::infinity();
        bool diagonal = true;
        for (double l : {0.1, 0.5, 2.0}) {
            GPHyperparameters h;
            h.outputscale = 1.7;
            h.lengthscales.assign(space.dimension(), l);
            const Eigen::MatrixXd k = gram(space, xs, h);
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
            worst = std::min(worst, eig.eigenvalues().minCoeff());
            for (Eigen::Index i = 0; i < k.rows(); ++i) diagonal = diagonal && k(i, i) == h.outputscale;
        }
        pass = pass && worst >= kMinEigenvalue && diagonal;
        detail += std::string(to_string(metric)) + " min-eig=" + fixed(worst, 3) + (diagonal ? "" : " k(x,x)!=σ") + " ";
    }
    detail.pop_back();
    return {pass, detail};
}

Outcome gp_correctness() {
    const SearchSpace space = mixed_space(PermutationMetric::spearman);
    Rng rng(505);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst_mean = 0.0, worst_var = 0.0, worst_interp = 0.0;
    for (std::size_t trial = 0; trial < kOracleDatasets; ++trial) {
        const auto xs = sample_uniform(space, kOracleSize, rng);
        std::vector<double> y;
        for (std::size_t i = 0; i < xs.size(); ++i) y.push_back(std::normal_distribution<double>(0.0, 2.0)(rng));
        GPHyperparameters h;
        h.outputscale = 0.5 + u(rng);
        h.noise_variance = 1e-3 + 0.05 * u(rng);
        for (std::size_t p = 0; p < space.dimension(); ++p) h.lengthscales.push_back(0.2 + u(rng));

        const GPModel model = GPModel::condition(space, xs, y, h, false);
        Eigen::MatrixXd ky = gram(space, xs, h);
        ky.diagonal().array() += h.noise_variance + kGramJitter;
        const Eigen::MatrixXd inverse = ky.inverse();
        const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
        for (const auto& x : sample_uniform(space, kOracleProbes, rng)) {
            Eigen::VectorXd ks(static_cast<Eigen::Index>(xs.size()));
            for (std::size_t i = 0; i < xs.size(); ++i) ks[static_cast<Eigen::Index>(i)] = kernel(space, x, xs[i], h);
            const double mean = ks.dot(inverse * yv);
            const double var = std::max(0.0, h.outputscale - ks.dot(inverse * ks));
            const Prediction p = model.predict(x);
            worst_mean = std::max(worst_mean, std::abs(p.mean - mean));
            worst_var = std::max(worst_var, std::abs(p.variance - var));
        }

        // Noise at the jitter floor: the posterior mean interpolates.
        GPHyperparameters exact = h;
        exact.noise_variance = 0.0;
        const GPModel interp = GPModel::condition(space, xs, y, exact);
        for (std::size_t i = 0; i < xs.size(); ++i)
            worst_interp = std::max(worst_interp, std::abs(interp.predict(xs[i]).mean - y[i]));
    }
    return {worst_mean <= kOracleTolerance && worst_var <= kOracleTolerance && worst_interp <= kInterpolationTolerance,
            "max |Δmean|=" + fixed(worst_mean, 3) + " max |Δvar|=" + fixed(worst_var, 3) +
                " max interpolation error=" + fixed(worst_interp, 3)};
}

Outcome ei_correctness() {
    // Stratified Monte Carlo: one jittered uniform per stratum, mapped through
    // the normal quantile. The same standard-normal draws serve every triple.
    const boost::math::normal_distribution<double> standard;
    Rng rng(606);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> z(kMonteCarloSamples);
    for (std::size_t i = 0; i < kMonteCarloSamples; ++i) {
        const double v = (static_cast<double>(i) + unit(rng)) / static_cast<double>(kMonteCarloSamples);
        z[i] = boost::math::quantile(standard, std::clamp(v, 1e-300, 1.0 - 1e-16));
    }
    double worst = 0.0;
    for (std::size_t t = 0; t < kEiTriples; ++t) {
        const double mean = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        const double sd = std::uniform_real_distribution<double>(0.01, 3.0)(rng);
        const double best = std::uniform_real_distribution<double>(-3.0, 3.0)(rng);
        double sum = 0.0;
        for (double zi : z) sum += std::max(0.0, best - (mean + sd * zi));
        const double mc = sum / static_cast<double>(kMonteCarloSamples);
        worst = std::max(worst, std::abs(mc - expected_improvement(mean, sd * sd, best)));
    }
    bool degenerate = true;
    for (double gap : {0.0, 1e-9, 0.5, 1.0, 10.0}) degenerate = degenerate && expected_improvement(2.0 + gap, 0.0, 2.0) == 0.0;
    return {worst <= kEiTolerance && degenerate,
            "max |closed form - MC|=" + fixed(worst, 3) + " over " + std::to_string(kEiTriples) +
                " triples; σ=0, mean>=f* gives 0: " + (degenerate ? "yes" : "no")};
}

std::vector<TuningRun> run_seeds(const Benchmark& bench, const std::function<void(TuningOptions&)>& configure) {
    BenchmarkEvaluator evaluator(bench);
    std::vector<TuningRun> runs;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
        TuningOptions options;
        options.budget = bench.default_budget;
        options.seed = seed;
        configure(options);
        runs.push_back(Tuner(bench.space, options).run(evaluator));
    }
    return runs;
}

double mean_best(const std::vector<TuningRun>& runs) {
    double sum = 0.0;
    for (const auto& r : runs) sum += best_feasible(r.history).value().second;
    return sum / static_cast<double>(runs.size());
}

Outcome end_to_end() {
    const Benchmark bench = builtin("quadratic-mixed");
    const double optimum = brute_force_optimum(bench).second;
    const auto bo = run_seeds(bench, [](TuningOptions& o) { o.budget = kEndToEndBudget; });
    const auto random = run_seeds(bench, [](TuningOptions& o) {
        o.budget = kEndToEndBudget;
        o.method = Method::random_cot;
    });
    std::size_t solved = 0;
    for (const auto& r : bo) solved += best_feasible(r.history)->second <= optimum + kOptimumSlack * std::abs(optimum);
    const double bo_mean = mean_best(bo);
    const double random_mean = mean_best(random);
    const bool pass = static_cast<double>(solved) >= kSolvedFraction * kSeeds && bo_mean < random_mean;
    return {pass, "within 5% of " + fixed(optimum) + " in " + std::to_string(solved) + "/30; mean best bo=" +
                      fixed(bo_mean) + " random-cot=" + fixed(random_mean)};
}

double post_design_feasible_fraction(const std::vector<TuningRun>& runs) {
    double sum = 0.0;
    for (const auto& run : runs) {
        std::size_t total = 0, feasible = 0;
        for (const auto& r : run.history) {
            if (r.phase != Phase::bo) continue;
            ++total;
            feasible += r.feasible;
        }
        sum += total ? static_cast<double>(feasible) / static_cast<double>(total) : 0.0;
    }
    return sum / static_cast<double>(runs.size());
}

Outcome hidden_constraints() {
    const Benchmark bench = builtin("hidden-ridge");
    const double enabled = post_design_feasible_fraction(run_seeds(bench, [](TuningOptions&) {}));
    const double no_model =
        post_design_feasible_fraction(run_seeds(bench, [](TuningOptions& o) { o.ablation.feasibility_model = false; }));
    const double no_filter =
        post_design_feasible_fraction(run_seeds(bench, [](TuningOptions& o) { o.ablation.epsilon_filter = false; }));
    return {enabled > no_model && enabled > no_filter,
            "post-design feasible fraction: enabled=" + fixed(enabled) + " no-feasibility-model=" + fixed(no_model) +
                " no-epsilon-filter=" + fixed(no_filter)};
}

Outcome ablation_direction() {
    const Benchmark bench = builtin("perm-assignment");
    const double spearman = mean_best(
        run_seeds(bench, [](TuningOptions& o) { o.ablation.permutation_metric = PermutationMetric::spearman; }));
    const double naive =
        mean_best(run_seeds(bench, [](TuningOptions& o) { o.ablation.permutation_metric = PermutationMetric::naive; }));
    return {spearman <= naive, "mean best at budget: spearman=" + fixed(spearman) + " naive=" + fixed(naive)};
}

Outcome determinism() {
    Scenario scenario = load_scenario(std::string(SCHEDOPT_TEST_DATA) + "/five_params.json");
    FunctionEvaluator evaluator([](const Configuration& c) {
        double sum = 0.0;
        for (const auto& v : c.values) sum += std::log2(std::get<double>(v));
        return EvaluationResult{std::abs(sum - 5.0) + 0.25, true};
    });
    const auto csv = [&](Method method) {
        scenario.method = method;
        std::ostringstream out;
        write_results(scenario.space, Tuner(scenario.space, scenario.tuning_options()).run(evaluator).history, out);
        return out.str();
    };
    bool identical = true;
    for (auto method : {Method::bo, Method::random_uniform, Method::random_cot}) {
        const std::string a = csv(method);
        identical = identical && a == csv(method) && a.size() > 100;
    }
    const Benchmark bench = builtin("hidden-ridge");
    BenchmarkEvaluator ridge(bench);
    TuningOptions options;
    options.budget = bench.default_budget;
    options.seed = 17;
    std::ostringstream first, second;
    write_results(bench.space, Tuner(bench.space, options).run(ridge).history, first);
    write_results(bench.space, Tuner(bench.space, options).run(ridge).history, second);
    identical = identical && first.str() == second.str();
    return {identical, identical ? "byte-identical CSVs for bo, random-uniform, random-cot and hidden-ridge"
                                 : "CSV bytes differ between identical runs"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"chain-of-trees example space", chain_of_trees_example},
        {"leaf-uniform sampling", sampling_uniformity},
        {"permutation semimetrics", permutation_semimetrics},
        {"kernel validity", kernel_validity},
        {"GP posterior oracle", gp_correctness},
        {"expected improvement oracle", ei_correctness},
        {"end-to-end optimization", end_to_end},
        {"hidden constraints", hidden_constraints},
        {"permutation metric ablation", ablation_direction},
        {"determinism", determinism},
    };
    const auto suite_start = Clock::now();
    std::vector<std::pair<Outcome, double>> outcomes;
    for (const auto& [name, check] : criteria) {
        const auto start = Clock::now();
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        outcomes.emplace_back(outcome, std::chrono::duration<double>(Clock::now() - start).count());
        std::cerr << "finished " << name << std::endl;
    }
    // The end-to-end criterion also bounds the runtime of the whole suite.
    const double total = std::chrono::duration<double>(Clock::now() - suite_start).count();
    Outcome& end_to_end_outcome = outcomes[kEndToEndIndex].first;
    end_to_end_outcome.pass = end_to_end_outcome.pass && total < kSuiteSeconds;
    end_to_end_outcome.detail += "; suite runtime " + fixed(total, 4) + "s";

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& [outcome, seconds] = outcomes[i];
        failures += !outcome.pass;
        std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << outcome.detail << " [" << fixed(seconds, 3) << "s]" << std::endl;
    }
    std::cout << "acceptance: " << criteria.size() - static_cast<std::size_t>(failures) << "/" << criteria.size()
              << " passed in " << fixed(total, 4) << "s" << std::endl;
    return failures == 0 ? 0 : 1;
}
