#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include "schedopt/chain_of_trees.hpp"
#include "schedopt/expression.hpp"
#include "schedopt/space.hpp"

using namespace schedopt;

namespace {

SearchSpace example_space() {
    return SearchSpace({Parameter::ordinal("p1", {2, 4}), Parameter::ordinal("p2", {2, 4}),
                        Parameter::ordinal("p3", {1, 4}), Parameter::ordinal("p4", {1, 2, 4}),
                        Parameter::ordinal("p5", {2, 4, 8})},
                       {"p1 >= p2", "p4 >= p3", "p5 >= 2*p4"});
}

Configuration cfg(std::vector<Value> values) { return Configuration{std::move(values)}; }

std::set<Configuration> brute_force(const SearchSpace& space) {
    std::set<Configuration> out;
    space.for_each_dense([&](const Configuration& c) {
        if (space.satisfies_constraints(c)) out.insert(c);
    });
    return out;
}

std::set<Configuration> enumerate(const ChainOfTrees& cot) {
    std::set<Configuration> out;
    cot.for_each([&](const Configuration& c) { out.insert(c); });
    return out;
}

}  // namespace

TEST_CASE("constraint parsing") {
    const SearchSpace space = example_space();
    const auto& params = space.parameters();

    const auto simple = parse_constraint("p1 >= p2", params);
    CHECK(simple.nodes()[simple.root()].kind == ConstraintExpr::NodeKind::binary);
    CHECK(simple.nodes()[simple.root()].op == ConstraintExpr::Op::ge);
    CHECK(simple.variables() == std::vector<std::size_t>{0, 1});

    const auto scaled = parse_constraint("p5 >= 2*p4", params);
    CHECK(scaled.variables() == std::vector<std::size_t>{3, 4});

    SUBCASE("truncated input reports the column past the end") {
        try {
            parse_constraint("p1 >= ", params);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.column() == 7);
        }
    }
    SUBCASE("unknown identifier") {
        try {
            parse_constraint("p1 >= q9", params);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.column() == 7);
        }
    }
    SUBCASE("trailing garbage") { CHECK_THROWS_AS(parse_constraint("p1 >= p2 )", params), ParseError); }
    SUBCASE("a bare number is not a condition") { CHECK_THROWS_AS(parse_constraint("p1 + 1", params), ParseError); }
}

TEST_CASE("constraint typing rules") {
    const std::vector<Parameter> params = {Parameter::categorical("layout", {"row", "col"}),
                                           Parameter::categorical("other", {"row", "col"}),
                                           Parameter::integer("n", 0, 8), Parameter::permutation("order", 3),
                                           Parameter::real("r", 0.0, 1.0)};
    CHECK_NOTHROW(parse_constraint("layout == 'row' || n > 2", params));
    CHECK_NOTHROW(parse_constraint("layout != other", params));
    CHECK_NOTHROW(parse_constraint("r * 2 < 1.5", params));
    CHECK_THROWS_AS(parse_constraint("layout == 'diagonal'", params), ParseError);
    CHECK_THROWS_AS(parse_constraint("layout > 'row'", params), ParseError);
    CHECK_THROWS_AS(parse_constraint("layout + 1 > 2", params), ParseError);
    CHECK_THROWS_AS(parse_constraint("order == 1", params), ParseError);
    CHECK_THROWS_AS(parse_constraint("(n > 1) > 0", params), ParseError);
}

TEST_CASE("constraint evaluation") {
    const SearchSpace space = example_space();
    const auto& params = space.parameters();
    const auto ge = parse_constraint("p1 >= p2", params);
    CHECK(ge.evaluate(cfg({4.0, 2.0, 1.0, 1.0, 2.0})));
    CHECK_FALSE(ge.evaluate(cfg({2.0, 4.0, 1.0, 1.0, 2.0})));

    const auto scaled = parse_constraint("p5 >= 2*p4", params);
    CHECK(scaled.evaluate(cfg({2.0, 2.0, 4.0, 4.0, 8.0})));

    const Value p4 = 4.0;
    const Value* partial[] = {nullptr, nullptr, nullptr, &p4, nullptr};
    CHECK(scaled.evaluate(partial) == Truth::undecided);
    const Value p5 = 8.0;
    const Value* full[] = {nullptr, nullptr, nullptr, &p4, &p5};
    CHECK(scaled.evaluate(full) == Truth::satisfied);
}

TEST_CASE("integral arithmetic, short circuits and division by zero") {
    const std::vector<Parameter> params = {Parameter::integer("a", -10, 10), Parameter::integer("b", -10, 10),
                                           Parameter::real("x", 0.0, 4.0)};
    const auto c = [](std::int64_t a, std::int64_t b, double x) {
        return Configuration{{Value{a}, Value{b}, Value{x}}};
    };
    CHECK(parse_constraint("a / b == 2", params).evaluate(c(7, 3, 0.0)));
    CHECK(parse_constraint("a % b == -1", params).evaluate(c(-7, 3, 0.0)));
    CHECK(parse_constraint("x / 2 == 0.75", params).evaluate(c(0, 1, 1.5)));
    CHECK(parse_constraint("-a == 3", params).evaluate(c(-3, 1, 0.0)));
    CHECK(parse_constraint("!(a < b) && a - b >= 2 * 1", params).evaluate(c(5, 3, 0.0)));

    // Division or remainder by zero makes the whole constraint false, even
    // under a negation or beside a true disjunct.
    CHECK_FALSE(parse_constraint("a / b > 0", params).evaluate(c(4, 0, 0.0)));
    CHECK_FALSE(parse_constraint("a % b == 0 || a == 4", params).evaluate(c(4, 0, 0.0)));
    CHECK_FALSE(parse_constraint("!(x / b > 1)", params).evaluate(c(4, 0, 1.0)));

    // A partial assignment stays undecided until every variable is bound, even
    // when one side of a disjunction already holds: a later division by zero
    // could still make the whole constraint false.
    const auto either = parse_constraint("a > 0 || b / a > 0", params);
    const Value a = std::int64_t{5};
    const Value b = std::int64_t{-1};
    const Value* only_a[] = {&a, nullptr, nullptr};
    const Value* both[] = {&a, &b, nullptr};
    CHECK(either.evaluate(only_a) == Truth::undecided);
    CHECK(either.evaluate(both) == Truth::satisfied);
}

TEST_CASE("Chain-of-Trees on the five-parameter example") {
    const SearchSpace space = example_space();
    const auto start = std::chrono::steady_clock::now();
    const ChainOfTrees cot = ChainOfTrees::build(space);
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(1));

    REQUIRE(cot.trees().size() == 2);
    CHECK(cot.trees()[0].parameters == std::vector<std::size_t>{0, 1});
    CHECK(cot.trees()[0].leaf_count() == 3);
    CHECK(cot.trees()[1].parameters == std::vector<std::size_t>{2, 3, 4});
    CHECK(cot.trees()[1].leaf_count() == 7);
    CHECK(cot.count() == 21);
    CHECK(*space.dense_size() == 72);

    const auto feasible = brute_force(space);
    CHECK(feasible.size() == 21);
    CHECK(enumerate(cot) == feasible);

    CHECK(cot.contains(cfg({2.0, 2.0, 4.0, 4.0, 8.0})));
    CHECK_FALSE(cot.contains(cfg({2.0, 4.0, 1.0, 1.0, 2.0})));
    space.for_each_dense([&](const Configuration& c) { CHECK(cot.contains(c) == feasible.contains(c)); });
}

TEST_CASE("feasible-set counts") {
    CHECK(ChainOfTrees::build(SearchSpace({Parameter::categorical("c", {"a", "b"})})).count() == 2);
    const auto single = ChainOfTrees::build(SearchSpace({Parameter::categorical("c", {"a", "b"})}));
    REQUIRE(single.trees().size() == 1);
    CHECK(single.trees()[0].leaf_count() == 2);

    const SearchSpace grid({Parameter::categorical("c", {"a", "b"}), Parameter::ordinal("o", {1, 2, 4})});
    CHECK(ChainOfTrees::build(grid).count() == 6);

    const SearchSpace empty({Parameter::integer("a", 0, 3), Parameter::integer("b", 0, 3)}, {"a + b > 10"});
    const auto none = ChainOfTrees::build(empty);
    CHECK(none.empty());
    CHECK(none.count() == 0);

    const SearchSpace contradictory({Parameter::integer("a", 0, 3)}, {"1 > 2"});
    CHECK(ChainOfTrees::build(contradictory).count() == 0);

    const SearchSpace with_perm({Parameter::integer("a", 0, 3), Parameter::integer("b", 0, 3),
                                 Parameter::permutation("p", 4)},
                                {"a < b"});
    CHECK(ChainOfTrees::build(with_perm).count() == 6 * 24);
}

TEST_CASE("constraints on real parameters are rejected by the tree builder") {
    const SearchSpace space({Parameter::real("x", 0.0, 1.0), Parameter::integer("n", 0, 3)}, {"x < n"});
    CHECK_THROWS_AS(ChainOfTrees::build(space), ValidationError);
}

TEST_CASE("the node cap is enforced") {
    const SearchSpace space({Parameter::integer("a", 0, 999), Parameter::integer("b", 0, 999),
                             Parameter::integer("c", 0, 999)},
                            {"a + b + c > 0"});
    CHECK_THROWS_AS(ChainOfTrees::build(space, 100'000), SpaceTooLargeError);
}

TEST_CASE("enumeration matches brute force on random constrained spaces") {
    Rng rng(5);
    const std::vector<std::string> templates = {"a + b <= c + 3", "a != b", "b % 2 == 0 || c > 3", "c >= a",
                                                "lbl == 'x' || a > 2", "a * b < 12"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::string> chosen;
        for (const auto& t : templates)
            if (std::uniform_int_distribution<int>(0, 1)(rng)) chosen.push_back(t);
        const SearchSpace space({Parameter::integer("a", 0, 5), Parameter::integer("b", 0, 4),
                                 Parameter::ordinal("c", {1, 2, 4, 8}), Parameter::categorical("lbl", {"x", "y"}),
                                 Parameter::integer("free", 0, 2)},
                                chosen);
        const auto cot = ChainOfTrees::build(space);
        const auto expected = brute_force(space);
        CHECK(cot.count() == expected.size());
        CHECK(enumerate(cot) == expected);
    }
}

TEST_CASE("leaf-uniform sampling is uniform over the 21 feasible configurations") {
    const ChainOfTrees cot = ChainOfTrees::build(example_space());
    Rng rng(42);
    std::map<Configuration, int> counts;
    for (const auto& c : cot.sample(21000, rng, SamplingMode::leaf_uniform)) ++counts[c];
    CHECK(counts.size() == 21);
    double chi2 = 0.0;
    for (const auto& [c, n] : counts) {
        CHECK(cot.contains(c));
        CHECK(n >= 850);
        CHECK(n <= 1150);
        chi2 += (n - 1000.0) * (n - 1000.0) / 1000.0;
    }
    CHECK(chi2 < 45.31);  // chi-square, 20 degrees of freedom, alpha = 0.001
}

TEST_CASE("path-biased sampling over-weights sparse subtrees") {
    const ChainOfTrees cot = ChainOfTrees::build(example_space());
    Rng rng(43);
    const auto draws = cot_sample_path_biased(cot, 21000, rng);
    // (p3, p4, p5) = (4, 4, 8) is the only leaf under p3 = 4: half of all
    // path-biased draws, against 1/7 under uniform sampling.
    const auto hits = std::count_if(draws.begin(), draws.end(), [](const Configuration& c) {
        return c.values[2] == Value{4.0} && c.values[3] == Value{4.0} && c.values[4] == Value{8.0};
    });
    CHECK(static_cast<double>(hits) / 21000.0 > 3.0 / 7.0);
    for (const auto& c : draws) CHECK(cot.contains(c));
}

TEST_CASE("sampling a single-leaf tree always returns that configuration") {
    const SearchSpace space({Parameter::integer("a", 0, 3), Parameter::integer("b", 0, 3)}, {"a == 3 && b == 0"});
    const auto cot = ChainOfTrees::build(space);
    Rng rng(1);
    for (const auto& c : cot.sample(50, rng)) CHECK(c == cfg({std::int64_t{3}, std::int64_t{0}}));
}

TEST_CASE("free permutations and reals are sampled from their domains") {
    const SearchSpace space({Parameter::integer("a", 0, 3), Parameter::permutation("p", 4), Parameter::real("x", -1, 1),
                             Parameter::integer("b", 0, 3)},
                            {"a <= b"});
    const auto cot = ChainOfTrees::build(space);
    CHECK(cot.free_parameters() == std::vector<std::size_t>{1, 2});
    CHECK_FALSE(cot.finite());
    Rng rng(9);
    for (const auto& c : cot.sample(200, rng)) {
        CHECK(space.contains(c));
        CHECK(space.satisfies_constraints(c));
        CHECK(cot.contains(c));
    }
}
