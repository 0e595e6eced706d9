#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "schedopt/chain_of_trees.hpp"
#include "schedopt/space.hpp"

using namespace schedopt;

namespace {

std::vector<double> powers(double first, int count) {
    std::vector<double> v;
    for (int i = 0; i < count; ++i) v.push_back(first * std::ldexp(1.0, i));
    return v;
}

SearchSpace example_space() {
    return SearchSpace({Parameter::ordinal("p1", {2, 4}), Parameter::ordinal("p2", {2, 4}),
                        Parameter::ordinal("p3", {1, 4}), Parameter::ordinal("p4", {1, 2, 4}),
                        Parameter::ordinal("p5", {2, 4, 8})},
                       {"p1 >= p2", "p4 >= p3", "p5 >= 2*p4"});
}

Configuration cfg(std::vector<Value> values) { return Configuration{std::move(values)}; }

}  // namespace

TEST_CASE("log transform gives equal gaps between consecutive powers of two") {
    const auto p = Parameter::ordinal("tile", powers(2, 10), Transform::log);  // 2..1024
    const double small_gap = p.transform_value(4.0) - p.transform_value(2.0);
    const double large_gap = p.transform_value(1024.0) - p.transform_value(512.0);
    CHECK(small_gap == doctest::Approx(large_gap).epsilon(1e-12));
}

TEST_CASE("min-max scaling maps real endpoints to 0 and 1") {
    const auto p = Parameter::real("x", 0.0, 10.0);
    CHECK(p.transform_value(0.0) == 0.0);
    CHECK(p.transform_value(10.0) == 1.0);
}

TEST_CASE("log ordinal coordinate of 2 in {1,2,4,8}") {
    const auto p = Parameter::ordinal("o", {1, 2, 4, 8}, Transform::log);
    CHECK(p.transform_value(2.0) == doctest::Approx((std::log(2.0) - std::log(1.0)) / (std::log(8.0) - std::log(1.0))));
    CHECK(p.transform_value(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("transform is strictly monotone with image in [0,1]") {
    const std::vector<Parameter> params = {Parameter::integer("i", -5, 17), Parameter::integer("j", 1, 300, Transform::log),
                                           Parameter::ordinal("o", {0.5, 1, 3, 9, 27}, Transform::log),
                                           Parameter::ordinal("q", {-3, 0, 2, 10})};
    for (const auto& p : params) {
        double previous = -1.0;
        for (std::size_t k = 0; k < *p.cardinality(); ++k) {
            const double t = p.transform_value(p.value_at(k));
            CHECK(t >= 0.0);
            CHECK(t <= 1.0);
            CHECK(t > previous);
            previous = t;
        }
    }
    const auto r = Parameter::real("r", 0.1, 100.0, Transform::log);
    double previous = -1.0;
    for (double x = 0.1; x <= 100.0; x *= 1.3) {
        const double t = r.transform_value(x);
        CHECK(t > previous);
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
        previous = t;
    }
}

TEST_CASE("log transform on a non-positive domain is rejected") {
    CHECK_THROWS_AS(Parameter::real("x", 0.0, 1.0, Transform::log), ValidationError);
    CHECK_THROWS_AS(Parameter::integer("n", -1, 4, Transform::log), ValidationError);
    CHECK_THROWS_AS(Parameter::ordinal("o", {0, 1, 2}, Transform::log), ValidationError);
}

TEST_CASE("parameter invariants are validated") {
    CHECK_THROWS_AS(Parameter::ordinal("o", {1, 1, 2}), ValidationError);
    CHECK_THROWS_AS(Parameter::ordinal("o", {3, 2}), ValidationError);
    CHECK_THROWS_AS(Parameter::categorical("c", {"a", "a"}), ValidationError);
    CHECK_THROWS_AS(Parameter::permutation("p", 1), ValidationError);
    CHECK_THROWS_AS(SearchSpace({Parameter::integer("a", 0, 1), Parameter::integer("a", 0, 1)}), ValidationError);
}

TEST_CASE("configuration membership") {
    const SearchSpace space({Parameter::integer("n", 1, 4), Parameter::categorical("c", {"x", "y"}),
                             Parameter::permutation("p", 3)});
    CHECK(space.contains(cfg({std::int64_t{2}, std::string("x"), Permutation{3, 1, 2}})));
    CHECK_FALSE(space.contains(cfg({std::int64_t{5}, std::string("x"), Permutation{3, 1, 2}})));
    CHECK_FALSE(space.contains(cfg({std::int64_t{2}, std::string("z"), Permutation{3, 1, 2}})));
    CHECK_FALSE(space.contains(cfg({std::int64_t{2}, std::string("x"), Permutation{3, 3, 2}})));
    CHECK_FALSE(space.contains(cfg({std::int64_t{2}, std::string("x"), Permutation{1, 2}})));
}

TEST_CASE("ordinal neighbors are the adjacent values") {
    const SearchSpace space({Parameter::ordinal("o", {1, 2, 4, 8})});
    const auto n = neighbors(space, cfg({4.0}));
    std::set<Configuration> got(n.begin(), n.end());
    CHECK(got == std::set<Configuration>{cfg({2.0}), cfg({8.0})});
}

TEST_CASE("permutation neighbors are all transpositions") {
    const SearchSpace space({Parameter::permutation("p", 3)});
    const auto n = neighbors(space, cfg({Permutation{1, 2, 3}}));
    std::set<Configuration> got(n.begin(), n.end());
    CHECK(got == std::set<Configuration>{cfg({Permutation{2, 1, 3}}), cfg({Permutation{3, 2, 1}}),
                                         cfg({Permutation{1, 3, 2}})});

    const SearchSpace five({Parameter::permutation("p", 5)});
    CHECK(neighbors(five, cfg({Permutation{1, 2, 3, 4, 5}})).size() == 10);
}

TEST_CASE("categorical neighbors are every other label; integers step by one") {
    const SearchSpace space({Parameter::categorical("c", {"a", "b", "c"}), Parameter::integer("n", 0, 3)});
    const auto n = neighbors(space, cfg({std::string("b"), std::int64_t{0}}));
    std::set<Configuration> got(n.begin(), n.end());
    CHECK(got == std::set<Configuration>{cfg({std::string("a"), std::int64_t{0}}),
                                         cfg({std::string("c"), std::int64_t{0}}),
                                         cfg({std::string("b"), std::int64_t{1}})});
}

TEST_CASE("real neighbors step along the 64-point grid") {
    const SearchSpace space({Parameter::real("x", 0.0, 63.0)});
    const auto n = neighbors(space, cfg({10.0}));
    std::set<Configuration> got(n.begin(), n.end());
    CHECK(got == std::set<Configuration>{cfg({9.0}), cfg({11.0})});
    CHECK(neighbors(space, cfg({0.0})).size() == 1);
}

TEST_CASE("neighbors filtered by the Chain-of-Trees on the example space") {
    const SearchSpace space = example_space();
    const ChainOfTrees cot = ChainOfTrees::build(space);
    const Configuration start = cfg({2.0, 2.0, 1.0, 1.0, 2.0});
    const auto n = neighbors(space, start, &cot);
    const std::set<Configuration> got(n.begin(), n.end());
    CHECK(got.contains(cfg({4.0, 2.0, 1.0, 1.0, 2.0})));
    CHECK_FALSE(got.contains(cfg({2.0, 4.0, 1.0, 1.0, 2.0})));

    // Oracle: every single-parameter flip, filtered by direct constraint evaluation.
    std::set<Configuration> expected;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        for (double v : space.parameter(i).values()) {
            Configuration c = start;
            c.values[i] = v;
            if (c == start) continue;
            bool ok = true;
            for (const auto& e : space.constraints()) ok = ok && e.evaluate(c);
            if (ok) expected.insert(c);
        }
    }
    // Ordinal moves are adjacent-only; with two- and three-value domains
    // starting from the bottom value every flip is adjacent except p4/p5 jumps.
    for (const auto& c : got) CHECK(expected.contains(c));
    for (const auto& c : got) CHECK(cot.contains(c));
}

TEST_CASE("neighbors are symmetric, exclude the start, and have no duplicates") {
    const SearchSpace space({Parameter::integer("n", 0, 5), Parameter::ordinal("o", {1, 2, 4, 8}, Transform::log),
                             Parameter::categorical("c", {"a", "b", "c"}), Parameter::permutation("p", 4)});
    Rng rng(11);
    for (const auto& x : sample_uniform(space, 50, rng)) {
        const auto around = neighbors(space, x);
        const std::set<Configuration> unique(around.begin(), around.end());
        CHECK(unique.size() == around.size());
        CHECK_FALSE(unique.contains(x));
        for (const auto& y : around) {
            const auto back = neighbors(space, y);
            CHECK(std::find(back.begin(), back.end(), x) != back.end());
        }
    }
}

TEST_CASE("uniform samples stay in the domain") {
    const SearchSpace space({Parameter::categorical("c", {"a", "b"})});
    Rng rng(1);
    const auto draws = sample_uniform(space, 5, rng);
    CHECK(draws.size() == 5);
    for (const auto& d : draws) CHECK(space.contains(d));
}

TEST_CASE("uniform sampling of a two-label categorical is balanced") {
    const SearchSpace space({Parameter::categorical("c", {"a", "b"})});
    Rng rng(2);
    const auto draws = sample_uniform(space, 100000, rng);
    const auto a = std::count_if(draws.begin(), draws.end(),
                                 [](const Configuration& c) { return std::get<std::string>(c.values[0]) == "a"; });
    CHECK(static_cast<double>(a) / 100000.0 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(static_cast<double>(a) / 100000.0 - 0.5) <= 0.01);
}

TEST_CASE("uniform sampling of S_3 hits every permutation equally often") {
    const SearchSpace space({Parameter::permutation("p", 3)});
    Rng rng(3);
    std::map<Permutation, int> counts;
    for (const auto& d : sample_uniform(space, 60000, rng)) ++counts[std::get<Permutation>(d.values[0])];
    CHECK(counts.size() == 6);
    double chi2 = 0.0;
    for (const auto& [perm, count] : counts) {
        CHECK(std::abs(count - 10000) <= 500);
        chi2 += (count - 10000.0) * (count - 10000.0) / 10000.0;
    }
    CHECK(chi2 < 20.52);  // chi-square, 5 degrees of freedom, alpha = 0.001
}

TEST_CASE("value text round-trips through parse_value") {
    const std::vector<Parameter> params = {Parameter::real("x", -1.0, 1.0), Parameter::integer("n", -10, 10),
                                           Parameter::ordinal("o", {0.125, 3, 1e6}),
                                           Parameter::categorical("c", {"alpha", "beta"}),
                                           Parameter::permutation("p", 4)};
    const std::vector<Value> values = {0.1 + 0.2, std::int64_t{-7}, 1e6, std::string("beta"), Permutation{2, 4, 3, 1}};
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto text = to_string(values[i]);
        const auto back = parse_value(params[i], text);
        REQUIRE(back.has_value());
        CHECK(*back == values[i]);
    }
    CHECK(to_string(Value{Permutation{2, 4, 3, 1}}) == "2;4;3;1");
    CHECK_FALSE(parse_value(params[4], "1;1;2;3").has_value());
    CHECK_FALSE(parse_value(params[1], "11").has_value());
    CHECK_FALSE(parse_value(params[2], "2").has_value());
}

TEST_CASE("ablation copies of a space") {
    const SearchSpace space({Parameter::ordinal("o", {1, 2, 4}, Transform::log), Parameter::permutation("p", 3)},
                            {"o >= 2"});
    const SearchSpace plain = space.without_log_transforms();
    CHECK(plain.parameter(0).transform() == Transform::none);
    CHECK(plain.constraints().size() == 1);
    const SearchSpace kendall = space.with_permutation_metric(PermutationMetric::kendall);
    CHECK(kendall.parameter(1).metric() == PermutationMetric::kendall);
    CHECK(kendall.parameter(0).transform() == Transform::log);
}
