#include "schedopt/bench.hpp"

#include <array>
#include <cmath>

#include "schedopt/chain_of_trees.hpp"

namespace schedopt {

EvaluationResult Benchmark::evaluate(const Configuration& cfg) const {
    if (hidden && !hidden(cfg)) return {std::nullopt, false};
    return {objective(cfg), true};
}

namespace {

std::vector<double> powers_of_two(int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(std::ldexp(1.0, i));
    return out;
}

double square(double x) { return x * x; }

Benchmark quadratic_mixed() {
    Benchmark b;
    b.name = "quadratic-mixed";
    b.description = "two log ordinals with o1 >= o2 and a categorical offset; minimum 10";
    b.space = SearchSpace({Parameter::ordinal("o1", powers_of_two(8), Transform::log),
                           Parameter::ordinal("o2", powers_of_two(8), Transform::log),
                           Parameter::categorical("c", {"a", "b", "c"})},
                          {"o1 >= o2"});
    b.objective = [](const Configuration& cfg) {
        static constexpr std::array<double, 3> offsets{0.0, 1.5, 3.0};
        const double o1 = std::log2(std::get<double>(cfg.values[0]));
        const double o2 = std::log2(std::get<double>(cfg.values[1]));
        const auto& label = std::get<std::string>(cfg.values[2]);
        return 10.0 + square(o1 - 5.0) + 2.0 * square(o2 - 2.0) + offsets[static_cast<std::size_t>(label[0] - 'a')];
    };
    b.default_budget = 40;
    return b;
}

Benchmark quadratic_dense() {
    Benchmark b;
    b.name = "quadratic-dense";
    b.description = "unconstrained 10 x 10 x 5 separable quadratic; minimum 0";
    b.space = SearchSpace({Parameter::integer("a", 1, 10), Parameter::ordinal("b", powers_of_two(10), Transform::log),
                           Parameter::categorical("c", {"v", "w", "x", "y", "z"})});
    b.objective = [](const Configuration& cfg) {
        const double a = static_cast<double>(std::get<std::int64_t>(cfg.values[0]));
        const double lb = std::log2(std::get<double>(cfg.values[1]));
        const auto& label = std::get<std::string>(cfg.values[2]);
        return 0.5 * square(a - 7.0) + square(lb - 6.0) + static_cast<double>(label[0] - 'v');
    };
    b.default_budget = 40;
    return b;
}

Benchmark perm_assignment() {
    Benchmark b;
    b.name = "perm-assignment";
    b.description = "squared displacement to a hidden 5-element ordering plus a log-ordinal quadratic; minimum 0";
    b.space = SearchSpace({Parameter::permutation("order", 5), Parameter::ordinal("tile", powers_of_two(6), Transform::log)});
    b.objective = [](const Configuration& cfg) {
        static constexpr std::array<int, 5> target{3, 1, 5, 2, 4};
        const auto& perm = std::get<Permutation>(cfg.values[0]);
        double cost = 0.0;
        for (std::size_t i = 0; i < target.size(); ++i) cost += square(perm[i] - target[i]);
        return cost + square(std::log2(std::get<double>(cfg.values[1])) - 3.0);
    };
    b.default_budget = 60;
    return b;
}

Benchmark hidden_ridge() {
    Benchmark b;
    b.name = "hidden-ridge";
    b.description = "three integers; runs fail when x + y + z > 13; minimum 17 on the failure edge";
    b.space = SearchSpace({Parameter::integer("x", 0, 9), Parameter::integer("y", 0, 9), Parameter::integer("z", 0, 9)});
    auto coords = [](const Configuration& cfg) {
        return std::array<double, 3>{static_cast<double>(std::get<std::int64_t>(cfg.values[0])),
                                     static_cast<double>(std::get<std::int64_t>(cfg.values[1])),
                                     static_cast<double>(std::get<std::int64_t>(cfg.values[2]))};
    };
    b.hidden = [coords](const Configuration& cfg) {
        const auto [x, y, z] = coords(cfg);
        return x + y + z <= 13.0;
    };
    b.objective = [coords](const Configuration& cfg) {
        const auto [x, y, z] = coords(cfg);
        return 30.0 - (x + y + z) + 0.1 * (square(x - 5.0) + square(y - 5.0) + square(z - 3.0));
    };
    b.default_budget = 60;
    return b;
}

}  // namespace

std::vector<std::string> builtin_names() {
    return {"quadratic-mixed", "quadratic-dense", "perm-assignment", "hidden-ridge"};
}

Benchmark builtin(std::string_view name) {
    Benchmark b;
    if (name == "quadratic-mixed") b = quadratic_mixed();
    else if (name == "quadratic-dense") b = quadratic_dense();
    else if (name == "perm-assignment") b = perm_assignment();
    else if (name == "hidden-ridge") b = hidden_ridge();
    else throw ValidationError("unknown builtin benchmark '" + std::string(name) + "'");
    b.optimum = brute_force_optimum(b);
    return b;
}

std::pair<Configuration, double> brute_force_optimum(const Benchmark& bench, std::uint64_t limit) {
    const ChainOfTrees cot = ChainOfTrees::build(bench.space);
    if (!cot.finite()) throw ValidationError("benchmark '" + bench.name + "' has an infinite space");
    if (cot.count() > limit) throw ValidationError("benchmark '" + bench.name + "' is too large to enumerate");
    std::optional<std::pair<Configuration, double>> best;
    cot.for_each([&](const Configuration& cfg) {
        const EvaluationResult r = bench.evaluate(cfg);
        if (!r.feasible) return;
        if (!best || *r.objective < best->second || (*r.objective == best->second && cfg < best->first))
            best = std::make_pair(cfg, *r.objective);
    });
    if (!best) throw ValidationError("benchmark '" + bench.name + "' has no feasible configuration");
    return *best;
}

}  // namespace schedopt
