#include "schedopt/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

namespace schedopt {

FeatureEncoder::FeatureEncoder(const SearchSpace& space) : params_(space.parameters()) {
    for (const auto& p : params_) {
        switch (p.kind()) {
            case ParameterKind::categorical: width_ += p.labels().size(); break;
            case ParameterKind::permutation: width_ += static_cast<std::size_t>(p.permutation_size()); break;
            default: width_ += 1; break;
        }
    }
}

std::vector<double> FeatureEncoder::encode(const Configuration& cfg) const {
    std::vector<double> out;
    out.reserve(width_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& p = params_[i];
        switch (p.kind()) {
            case ParameterKind::categorical: {
                const auto idx = *p.index_of(cfg.values[i]);
                for (std::size_t k = 0; k < p.labels().size(); ++k) out.push_back(k == idx ? 1.0 : 0.0);
                break;
            }
            case ParameterKind::permutation:
                for (int v : std::get<Permutation>(cfg.values[i])) out.push_back(v);
                break;
            default: out.push_back(p.transform_value(cfg.values[i])); break;
        }
    }
    return out;
}

double DecisionTree::predict(std::span<const double> features) const {
    int i = 0;
    while (nodes[i].feature >= 0) {
        const auto& n = nodes[i];
        i = features[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[i].feasible_fraction;
}

namespace {

class TreeTrainer {
public:
    TreeTrainer(const std::vector<std::vector<double>>& x, const std::vector<int>& y, const ForestOptions& options,
                Rng& rng)
        : x_(x), y_(y), options_(options), rng_(rng), features_(x.empty() ? 0 : x[0].size()) {
        mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(features_))));
    }

    DecisionTree train(std::vector<std::size_t> sample) {
        DecisionTree tree;
        tree_ = &tree;
        grow(sample, 0);
        return tree;
    }

private:
    int grow(std::vector<std::size_t>& idx, std::size_t depth) {
        const int id = static_cast<int>(tree_->nodes.size());
        tree_->nodes.emplace_back();
        std::size_t positives = 0;
        for (auto i : idx) positives += static_cast<std::size_t>(y_[i]);
        tree_->nodes[id].feasible_fraction = static_cast<double>(positives) / static_cast<double>(idx.size());
        if (depth >= options_.max_depth || idx.size() < options_.min_samples_split || positives == 0 ||
            positives == idx.size())
            return id;

        // Visit features in random order; examine at least mtry of them and
        // keep going until some valid split exists.
        std::vector<std::size_t> order(features_);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng_);

        const double n = static_cast<double>(idx.size());
        double best_impurity = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::pair<double, int>> column(idx.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (k >= mtry_ && best_feature >= 0) break;
            const std::size_t f = order[k];
            for (std::size_t j = 0; j < idx.size(); ++j) column[j] = {x_[idx[j]][f], y_[idx[j]]};
            std::sort(column.begin(), column.end());
            double left_pos = 0.0;
            const double total_pos = static_cast<double>(positives);
            for (std::size_t j = 0; j + 1 < column.size(); ++j) {
                left_pos += column[j].second;
                if (!(column[j].first < column[j + 1].first)) continue;
                const double nl = static_cast<double>(j + 1);
                const double nr = n - nl;
                const double pl = left_pos / nl;
                const double pr = (total_pos - left_pos) / nr;
                const double impurity = (nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr)) / n;
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    best_threshold = 0.5 * (column[j].first + column[j + 1].first);
                }
            }
        }
        if (best_feature < 0) return id;

        std::vector<std::size_t> left, right;
        for (auto i : idx) (x_[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right).push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = tree_->nodes[id];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    const std::vector<std::vector<double>>& x_;
    const std::vector<int>& y_;
    const ForestOptions& options_;
    Rng& rng_;
    std::size_t features_;
    std::size_t mtry_ = 1;
    DecisionTree* tree_ = nullptr;
};

}  // namespace

FeasibilityModel FeasibilityModel::fit(const SearchSpace& space, std::span<const EvaluationRecord> records, Rng& rng,
                                       const ForestOptions& options) {
    std::vector<Configuration> inputs;
    // std::vector<bool> cannot back a span, so labels live in a plain array.
    auto labels = std::make_unique<bool[]>(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        inputs.push_back(records[i].configuration);
        labels[i] = records[i].feasible;
    }
    return fit(space, inputs, std::span<const bool>(labels.get(), records.size()), rng, options);
}

FeasibilityModel FeasibilityModel::fit(const SearchSpace& space, std::span<const Configuration> inputs,
                                       std::span<const bool> feasible, Rng& rng, const ForestOptions& options) {
    if (inputs.empty()) throw ValidationError("feasibility model needs at least one record");
    FeasibilityModel model;
    model.encoder_ = FeatureEncoder(space);

    const auto positives = static_cast<std::size_t>(std::count(feasible.begin(), feasible.end(), true));
    if (positives == inputs.size() || positives == 0) {
        model.constant_ = positives == 0 ? 0.0 : 1.0;
        return model;
    }

    std::vector<std::size_t> order(inputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (inputs[a] < inputs[b]) return true;
        if (inputs[b] < inputs[a]) return false;
        return feasible[a] < feasible[b];
    });
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (auto i : order) {
        x.push_back(model.encoder_.encode(inputs[i]));
        y.push_back(feasible[i] ? 1 : 0);
    }

    TreeTrainer trainer(x, y, options, rng);
    std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
    model.trees_.reserve(options.trees);
    for (std::size_t t = 0; t < options.trees; ++t) {
        std::vector<std::size_t> sample(x.size());
        for (auto& s : sample) s = pick(rng);
        model.trees_.push_back(trainer.train(std::move(sample)));
    }
    return model;
}

FeasibilityModel FeasibilityModel::from_trees(const SearchSpace& space, std::vector<DecisionTree> trees) {
    FeasibilityModel model;
    model.encoder_ = FeatureEncoder(space);
    model.trees_ = std::move(trees);
    return model;
}

double FeasibilityModel::predict_proba(const Configuration& cfg) const {
    if (constant_) return *constant_;
    if (trees_.empty()) throw ValidationError("feasibility model has no trees");
    const auto features = encoder_.encode(cfg);
    double sum = 0.0;
    for (const auto& t : trees_) sum += t.predict(features);
    return std::clamp(sum / static_cast<double>(trees_.size()), 0.0, 1.0);
}

double FeasibilityThreshold::sample(Rng& rng) const {
    if (!(p_zero > 0.0)) throw ValidationError("feasibility threshold needs p_zero > 0");
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < p_zero) return 0.0;
    std::uniform_real_distribution<double> eps(0.0, max);
    return eps(rng);
}

}  // namespace schedopt
