#include "schedopt/space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "schedopt/chain_of_trees.hpp"

namespace schedopt {

SearchSpace::SearchSpace(std::vector<Parameter> parameters, const std::vector<std::string>& constraints)
    : parameters_(std::move(parameters)) {
    std::set<std::string> names;
    for (const auto& p : parameters_) {
        if (!names.insert(p.name()).second)
            throw ValidationError("duplicate parameter name '" + p.name() + "'");
    }
    constraints_.reserve(constraints.size());
    for (const auto& text : constraints) constraints_.push_back(parse_constraint(text, parameters_));
}

std::vector<std::string> SearchSpace::constraint_texts() const {
    std::vector<std::string> out;
    for (const auto& c : constraints_) out.push_back(c.text());
    return out;
}

std::optional<std::size_t> SearchSpace::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        if (parameters_[i].name() == name) return i;
    }
    return std::nullopt;
}

bool SearchSpace::contains(const Configuration& cfg) const {
    if (cfg.values.size() != parameters_.size()) return false;
    for (std::size_t i = 0; i < parameters_.size(); ++i) {
        if (!parameters_[i].contains(cfg.values[i])) return false;
    }
    return true;
}

bool SearchSpace::satisfies_constraints(const Configuration& cfg) const {
    return std::all_of(constraints_.begin(), constraints_.end(),
                       [&](const ConstraintExpr& c) { return c.evaluate(cfg); });
}

std::optional<std::uint64_t> SearchSpace::dense_size() const {
    std::uint64_t total = 1;
    for (const auto& p : parameters_) {
        auto card = p.cardinality();
        if (!card) return std::nullopt;
        if (*card != 0 && total > std::numeric_limits<std::uint64_t>::max() / *card) return std::nullopt;
        total *= *card;
    }
    return total;
}

namespace {

std::vector<Value> domain_values(const Parameter& p) {
    std::vector<Value> out;
    if (p.kind() == ParameterKind::permutation) {
        Permutation perm(p.permutation_size());
        std::iota(perm.begin(), perm.end(), 1);
        do {
            out.emplace_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));
        return out;
    }
    const auto card = p.cardinality();
    if (!card) throw ValidationError("parameter '" + p.name() + "' has no finite domain to enumerate");
    for (std::size_t i = 0; i < *card; ++i) out.push_back(p.value_at(i));
    return out;
}

}  // namespace

void SearchSpace::for_each_dense(const std::function<void(const Configuration&)>& visit) const {
    std::vector<std::vector<Value>> domains;
    for (const auto& p : parameters_) domains.push_back(domain_values(p));
    for (const auto& d : domains) {
        if (d.empty()) return;
    }
    std::vector<std::size_t> index(domains.size(), 0);
    Configuration cfg;
    cfg.values.resize(domains.size());
    for (std::size_t i = 0; i < domains.size(); ++i) cfg.values[i] = domains[i][0];
    while (true) {
        visit(cfg);
        std::size_t level = domains.size();
        while (level > 0) {
            --level;
            if (++index[level] < domains[level].size()) {
                cfg.values[level] = domains[level][index[level]];
                break;
            }
            index[level] = 0;
            cfg.values[level] = domains[level][0];
            if (level == 0) return;
        }
        if (domains.empty()) return;
    }
}

std::string SearchSpace::format(const Configuration& cfg) const {
    std::string out = "(";
    for (std::size_t i = 0; i < cfg.values.size(); ++i) {
        if (i) out += ", ";
        if (i < parameters_.size()) out += parameters_[i].name() + "=";
        out += to_string(cfg.values[i]);
    }
    return out + ")";
}

SearchSpace SearchSpace::without_log_transforms() const {
    SearchSpace copy = *this;
    for (auto& p : copy.parameters_) p = p.with_transform(Transform::none);
    return copy;
}

SearchSpace SearchSpace::with_permutation_metric(PermutationMetric metric) const {
    SearchSpace copy = *this;
    for (auto& p : copy.parameters_) p = p.with_metric(metric);
    return copy;
}

namespace {

void single_parameter_moves(const Parameter& p, const Value& current, std::vector<Value>& out) {
    switch (p.kind()) {
        case ParameterKind::integer: {
            const auto v = std::get<std::int64_t>(current);
            if (static_cast<double>(v) - 1 >= p.lower()) out.emplace_back(v - 1);
            if (static_cast<double>(v) + 1 <= p.upper()) out.emplace_back(v + 1);
            break;
        }
        case ParameterKind::ordinal: {
            const auto idx = p.index_of(current);
            if (!idx) throw ValidationError("neighbors: value outside the domain of '" + p.name() + "'");
            if (*idx > 0) out.push_back(p.value_at(*idx - 1));
            if (*idx + 1 < p.values().size()) out.push_back(p.value_at(*idx + 1));
            break;
        }
        case ParameterKind::categorical: {
            const auto& label = std::get<std::string>(current);
            for (const auto& l : p.labels()) {
                if (l != label) out.emplace_back(l);
            }
            break;
        }
        case ParameterKind::real: {
            if (p.lower() == p.upper()) break;
            constexpr int last = kRealNeighborGrid - 1;
            const double t = p.transform_value(current);
            const long k = std::lround(t * last);
            const double v = std::get<double>(current);
            std::vector<long> steps = {k - 1, k + 1};
            if (std::abs(t * last - static_cast<double>(k)) > 1e-9) steps.push_back(k);
            std::sort(steps.begin(), steps.end());
            for (long s : steps) {
                if (s < 0 || s > last) continue;
                const double g = std::get<double>(p.from_coordinate(static_cast<double>(s) / last));
                if (g != v) out.emplace_back(g);
            }
            break;
        }
        case ParameterKind::permutation: {
            const auto& perm = std::get<Permutation>(current);
            for (std::size_t i = 0; i < perm.size(); ++i) {
                for (std::size_t j = i + 1; j < perm.size(); ++j) {
                    Permutation swapped = perm;
                    std::swap(swapped[i], swapped[j]);
                    out.emplace_back(std::move(swapped));
                }
            }
            break;
        }
    }
}

}  // namespace

std::vector<Configuration> neighbors(const SearchSpace& space, const Configuration& cfg, const ChainOfTrees* cot) {
    std::vector<Configuration> out;
    std::vector<Value> moves;
    for (std::size_t i = 0; i < space.dimension(); ++i) {
        moves.clear();
        single_parameter_moves(space.parameter(i), cfg.values[i], moves);
        for (auto& v : moves) {
            Configuration next = cfg;
            next.values[i] = std::move(v);
            if (cot && !cot->contains(next)) continue;
            out.push_back(std::move(next));
        }
    }
    return out;
}

Value sample_value(const Parameter& p, Rng& rng) {
    switch (p.kind()) {
        case ParameterKind::real: {
            std::uniform_real_distribution<double> dist(p.lower(), p.upper());
            return p.lower() == p.upper() ? p.lower() : dist(rng);
        }
        case ParameterKind::integer: {
            std::uniform_int_distribution<std::int64_t> dist(static_cast<std::int64_t>(p.lower()),
                                                              static_cast<std::int64_t>(p.upper()));
            return dist(rng);
        }
        case ParameterKind::ordinal:
        case ParameterKind::categorical: {
            std::uniform_int_distribution<std::size_t> dist(0, *p.cardinality() - 1);
            return p.value_at(dist(rng));
        }
        case ParameterKind::permutation: {
            Permutation perm(p.permutation_size());
            std::iota(perm.begin(), perm.end(), 1);
            std::shuffle(perm.begin(), perm.end(), rng);
            return perm;
        }
    }
    return 0.0;
}

std::vector<Configuration> sample_uniform(const SearchSpace& space, std::size_t n, Rng& rng) {
    std::vector<Configuration> out(n);
    for (auto& cfg : out) {
        cfg.values.reserve(space.dimension());
        for (const auto& p : space.parameters()) cfg.values.push_back(sample_value(p, rng));
    }
    return out;
}

}  // namespace schedopt
