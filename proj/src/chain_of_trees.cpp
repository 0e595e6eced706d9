#include "schedopt/chain_of_trees.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace schedopt {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a == 0 || b == 0) return 0;
    if (a > kSaturated / b) return kSaturated;
    return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

struct UnionFind {
    explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> parent;
};

class TreeBuilder {
public:
    TreeBuilder(const SearchSpace& space, const std::vector<std::vector<Value>>& domains,
                ChainOfTrees::Tree& tree, std::uint64_t& explored, std::uint64_t cap)
        : space_(space), domains_(domains), tree_(tree), explored_(explored), cap_(cap),
          assignment_(space.dimension(), nullptr) {
        // Each constraint belongs to the level where its last variable is bound.
        level_constraints_.resize(tree_.parameters.size());
        for (const auto& c : space.constraints()) {
            if (c.variables().empty()) continue;
            std::size_t deepest = 0;
            bool in_tree = false;
            for (auto v : c.variables()) {
                auto it = std::find(tree_.parameters.begin(), tree_.parameters.end(), v);
                if (it == tree_.parameters.end()) continue;
                in_tree = true;
                deepest = std::max(deepest, static_cast<std::size_t>(it - tree_.parameters.begin()));
            }
            if (in_tree) level_constraints_[deepest].push_back(&c);
        }
    }

    void build() {
        std::vector<std::uint32_t> kids = expand(0);
        ChainOfTrees::Node root;
        finish(root, kids);
        tree_.nodes.push_back(root);
        tree_.root = static_cast<std::uint32_t>(tree_.nodes.size() - 1);
    }

private:
    void finish(ChainOfTrees::Node& node, const std::vector<std::uint32_t>& kids) {
        node.first_child = static_cast<std::uint32_t>(tree_.children.size());
        node.child_count = static_cast<std::uint32_t>(kids.size());
        node.leaf_count = 0;
        for (auto k : kids) {
            tree_.children.push_back(k);
            node.leaf_count = saturating_add(node.leaf_count, tree_.nodes[k].leaf_count);
        }
    }

    std::vector<std::uint32_t> expand(std::size_t level) {
        const std::size_t param = tree_.parameters[level];
        const auto& domain = domains_[param];
        const bool last = level + 1 == tree_.parameters.size();
        std::vector<std::uint32_t> kids;
        for (std::size_t v = 0; v < domain.size(); ++v) {
            if (++explored_ > cap_)
                throw SpaceTooLargeError("chain-of-trees exceeds the node cap of " + std::to_string(cap_) +
                                         " nodes; log-transform or prune the parameter domains");
            assignment_[param] = &domain[v];
            bool ok = true;
            for (const auto* c : level_constraints_[level]) {
                if (c->evaluate(assignment_) == Truth::violated) {
                    ok = false;
                    break;
                }
            }
            if (!ok) continue;
            ChainOfTrees::Node node;
            node.value = static_cast<std::uint32_t>(v);
            if (last) {
                node.leaf_count = 1;
                node.first_child = static_cast<std::uint32_t>(tree_.children.size());
            } else {
                std::vector<std::uint32_t> grandkids = expand(level + 1);
                if (grandkids.empty()) continue;
                finish(node, grandkids);
                node.value = static_cast<std::uint32_t>(v);
            }
            tree_.nodes.push_back(node);
            kids.push_back(static_cast<std::uint32_t>(tree_.nodes.size() - 1));
        }
        assignment_[param] = nullptr;
        return kids;
    }

    const SearchSpace& space_;
    const std::vector<std::vector<Value>>& domains_;
    ChainOfTrees::Tree& tree_;
    std::uint64_t& explored_;
    std::uint64_t cap_;
    std::vector<const Value*> assignment_;
    std::vector<std::vector<const ConstraintExpr*>> level_constraints_;
};

}  // namespace

const ChainOfTrees::Node* ChainOfTrees::Tree::child_with_value(const Node& parent, std::uint32_t value) const {
    auto first = children.begin() + parent.first_child;
    auto last = first + parent.child_count;
    auto it = std::lower_bound(first, last, value,
                               [&](std::uint32_t idx, std::uint32_t v) { return nodes[idx].value < v; });
    if (it == last || nodes[*it].value != value) return nullptr;
    return &nodes[*it];
}

ChainOfTrees ChainOfTrees::build(const SearchSpace& space, std::uint64_t node_cap) {
    ChainOfTrees cot;
    cot.space_ = space;
    const std::size_t dim = space.dimension();

    UnionFind groups(dim);
    std::vector<bool> constrained(dim, false);
    for (const auto& c : space.constraints()) {
        const auto& vars = c.variables();
        for (auto v : vars) {
            constrained[v] = true;
            if (space.parameter(v).kind() == ParameterKind::real)
                throw ValidationError("parameter '" + space.parameter(v).name() +
                                      "' is real-valued and cannot appear in a known constraint");
        }
        for (std::size_t i = 1; i < vars.size(); ++i) groups.unite(vars[0], vars[i]);
    }

    cot.domains_.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        const auto& p = space.parameter(i);
        if (!p.is_discrete()) continue;
        const auto card = p.cardinality();
        if (!card || *card > node_cap)
            throw SpaceTooLargeError("parameter '" + p.name() + "' has too many values to enumerate");
        cot.domains_[i].reserve(*card);
        for (std::size_t k = 0; k < *card; ++k) cot.domains_[i].push_back(p.value_at(k));
    }

    for (const auto& c : space.constraints()) {
        if (c.variables().empty() && c.evaluate(std::span<const Value* const>{}) == Truth::violated)
            cot.contradictory_ = true;
    }

    std::uint64_t explored = 0;
    std::vector<bool> placed(dim, false);
    for (std::size_t i = 0; i < dim; ++i) {
        if (placed[i]) continue;
        const auto& p = space.parameter(i);
        if (!constrained[i] && !p.is_discrete()) {
            cot.free_.push_back(i);
            placed[i] = true;
            continue;
        }
        Tree tree;
        const std::size_t root = groups.find(i);
        for (std::size_t j = i; j < dim; ++j) {
            if (!placed[j] && groups.find(j) == root && (constrained[j] || j == i)) {
                tree.parameters.push_back(j);
                placed[j] = true;
            }
        }
        TreeBuilder(space, cot.domains_, tree, explored, node_cap).build();
        cot.trees_.push_back(std::move(tree));
    }
    return cot;
}

bool ChainOfTrees::empty() const {
    return contradictory_ || std::any_of(trees_.begin(), trees_.end(), [](const Tree& t) { return t.leaf_count() == 0; });
}

bool ChainOfTrees::finite() const {
    return std::none_of(free_.begin(), free_.end(),
                        [&](std::size_t i) { return space_.parameter(i).kind() == ParameterKind::real; });
}

std::uint64_t ChainOfTrees::count() const {
    if (empty()) return 0;
    std::uint64_t total = 1;
    for (const auto& t : trees_) total = saturating_mul(total, t.leaf_count());
    for (auto i : free_) {
        if (auto card = space_.parameter(i).cardinality()) total = saturating_mul(total, *card);
        else if (space_.parameter(i).kind() == ParameterKind::permutation) total = saturating_mul(total, kSaturated);
    }
    return total;
}

std::uint64_t ChainOfTrees::node_count() const {
    std::uint64_t n = 0;
    for (const auto& t : trees_) n += t.nodes.empty() ? 0 : t.nodes.size() - 1;
    return n;
}

bool ChainOfTrees::contains(const Configuration& cfg) const {
    if (cfg.values.size() != space_.dimension()) return false;
    for (const auto& t : trees_) {
        const Node* node = &t.nodes[t.root];
        for (auto p : t.parameters) {
            const auto idx = space_.parameter(p).index_of(cfg.values[p]);
            if (!idx) return false;
            node = t.child_with_value(*node, static_cast<std::uint32_t>(*idx));
            if (!node) return false;
        }
    }
    for (auto i : free_) {
        if (!space_.parameter(i).contains(cfg.values[i])) return false;
    }
    return true;
}

Configuration ChainOfTrees::sample_one(Rng& rng, SamplingMode mode) const {
    if (empty()) throw ValidationError("cannot sample from an empty feasible set");
    Configuration cfg;
    cfg.values.resize(space_.dimension());
    for (const auto& t : trees_) {
        const Node* node = &t.nodes[t.root];
        for (auto p : t.parameters) {
            std::uint32_t pick = 0;
            if (mode == SamplingMode::leaf_uniform) {
                std::uniform_int_distribution<std::uint64_t> dist(0, node->leaf_count - 1);
                std::uint64_t r = dist(rng);
                for (std::uint32_t c = 0; c < node->child_count; ++c) {
                    const auto w = t.nodes[t.children[node->first_child + c]].leaf_count;
                    if (r < w) {
                        pick = c;
                        break;
                    }
                    r -= w;
                }
            } else {
                std::uniform_int_distribution<std::uint32_t> dist(0, node->child_count - 1);
                pick = dist(rng);
            }
            node = &t.nodes[t.children[node->first_child + pick]];
            cfg.values[p] = domains_[p][node->value];
        }
    }
    for (auto i : free_) cfg.values[i] = sample_value(space_.parameter(i), rng);
    return cfg;
}

std::vector<Configuration> ChainOfTrees::sample(std::size_t n, Rng& rng, SamplingMode mode) const {
    std::vector<Configuration> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng, mode));
    return out;
}

void ChainOfTrees::for_each(const std::function<void(const Configuration&)>& visit) const {
    if (!finite()) throw ValidationError("cannot enumerate a space with free real parameters");
    if (empty()) return;

    // Every root-to-leaf path of each tree, as domain indices per level.
    std::vector<std::vector<std::vector<std::uint32_t>>> paths(trees_.size());
    for (std::size_t ti = 0; ti < trees_.size(); ++ti) {
        const Tree& t = trees_[ti];
        std::vector<std::uint32_t> prefix;
        std::function<void(const Node&)> walk = [&](const Node& node) {
            if (prefix.size() == t.parameters.size()) {
                paths[ti].push_back(prefix);
                return;
            }
            for (std::uint32_t c = 0; c < node.child_count; ++c) {
                const Node& child = t.nodes[t.children[node.first_child + c]];
                prefix.push_back(child.value);
                walk(child);
                prefix.pop_back();
            }
        };
        walk(t.nodes[t.root]);
    }
    std::vector<std::vector<Permutation>> perms;
    for (auto i : free_) {
        Permutation p(space_.parameter(i).permutation_size());
        std::iota(p.begin(), p.end(), 1);
        perms.emplace_back();
        do {
            perms.back().push_back(p);
        } while (std::next_permutation(p.begin(), p.end()));
    }

    Configuration cfg;
    cfg.values.resize(space_.dimension());
    const std::size_t groups = trees_.size() + free_.size();
    std::function<void(std::size_t)> recurse = [&](std::size_t g) {
        if (g == groups) {
            visit(cfg);
            return;
        }
        if (g < trees_.size()) {
            const Tree& t = trees_[g];
            for (const auto& path : paths[g]) {
                for (std::size_t l = 0; l < path.size(); ++l) cfg.values[t.parameters[l]] = domains_[t.parameters[l]][path[l]];
                recurse(g + 1);
            }
        } else {
            const std::size_t f = g - trees_.size();
            for (const auto& p : perms[f]) {
                cfg.values[free_[f]] = p;
                recurse(g + 1);
            }
        }
    };
    recurse(0);
}

std::vector<Configuration> cot_sample_leaf_uniform(const ChainOfTrees& cot, std::size_t n, Rng& rng) {
    return cot.sample(n, rng, SamplingMode::leaf_uniform);
}

std::vector<Configuration> cot_sample_path_biased(const ChainOfTrees& cot, std::size_t n, Rng& rng) {
    return cot.sample(n, rng, SamplingMode::path_uniform);
}

}  // namespace schedopt
