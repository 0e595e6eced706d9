#include "schedopt/distance.hpp"

#include <algorithm>
#include <cmath>

namespace schedopt {

double kendall_distance(std::span<const int> a, std::span<const int> b) {
    double discordant = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            if ((a[i] < a[j]) != (b[i] < b[j])) discordant += 1.0;
        }
    }
    return discordant;
}

double spearman_distance(std::span<const int> a, std::span<const int> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i] - b[i]);
        sum += d * d;
    }
    return sum;
}

double hamming_distance(std::span<const int> a, std::span<const int> b) {
    double changed = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) changed += a[i] != b[i] ? 1.0 : 0.0;
    return changed;
}

double max_permutation_distance(int size, PermutationMetric metric) {
    const double m = size;
    switch (metric) {
        case PermutationMetric::kendall: return m * (m - 1.0) / 2.0;
        case PermutationMetric::spearman: return m * (m * m - 1.0) / 3.0;
        case PermutationMetric::hamming: return m;
        case PermutationMetric::naive: return 1.0;
    }
    return 1.0;
}

namespace {

double raw_permutation_distance(std::span<const int> a, std::span<const int> b, PermutationMetric metric) {
    switch (metric) {
        case PermutationMetric::kendall: return kendall_distance(a, b);
        case PermutationMetric::spearman: return spearman_distance(a, b);
        case PermutationMetric::hamming: return hamming_distance(a, b);
        case PermutationMetric::naive: return std::equal(a.begin(), a.end(), b.begin(), b.end()) ? 0.0 : 1.0;
    }
    return 0.0;
}

}  // namespace

double permutation_distance(std::span<const int> a, std::span<const int> b, PermutationMetric metric) {
    const double scale = max_permutation_distance(static_cast<int>(a.size()), metric);
    return raw_permutation_distance(a, b, metric) / scale;
}

double distance(const Parameter& param, const Value& a, const Value& b) {
    switch (param.kind()) {
        case ParameterKind::real:
        case ParameterKind::integer:
        case ParameterKind::ordinal: return std::abs(param.transform_value(a) - param.transform_value(b));
        case ParameterKind::categorical: return std::get<std::string>(a) == std::get<std::string>(b) ? 0.0 : 1.0;
        case ParameterKind::permutation:
            return permutation_distance(std::get<Permutation>(a), std::get<Permutation>(b), param.metric());
    }
    return 0.0;
}

double squared_kernel_distance(const Parameter& param, const Value& a, const Value& b) {
    const double d = distance(param, a, b);
    return param.kind() == ParameterKind::permutation ? d : d * d;
}

ConfigurationEncoder::ConfigurationEncoder(const SearchSpace& space) : params_(space.parameters()) {
    for (const auto& p : space.parameters()) {
        kinds_.push_back(p.kind());
        metrics_.push_back(p.metric());
        offsets_.push_back(width_);
        const std::size_t size = p.kind() == ParameterKind::permutation ? p.permutation_size() : 1;
        sizes_.push_back(size);
        perm_scale_.push_back(p.kind() == ParameterKind::permutation
                                  ? 1.0 / max_permutation_distance(p.permutation_size(), p.metric())
                                  : 1.0);
        width_ += size;
    }
}

std::vector<double> ConfigurationEncoder::encode(const Configuration& cfg) const {
    std::vector<double> out(width_);
    encode_into(cfg, out);
    return out;
}

void ConfigurationEncoder::encode_into(const Configuration& cfg, std::span<double> out) const {
    for (std::size_t i = 0; i < kinds_.size(); ++i) {
        const auto& p = params_[i];
        double* dst = out.data() + offsets_[i];
        switch (kinds_[i]) {
            case ParameterKind::real:
            case ParameterKind::integer:
            case ParameterKind::ordinal: *dst = p.transform_value(cfg.values[i]); break;
            case ParameterKind::categorical: *dst = static_cast<double>(*p.index_of(cfg.values[i])); break;
            case ParameterKind::permutation: {
                const auto& perm = std::get<Permutation>(cfg.values[i]);
                for (std::size_t k = 0; k < perm.size(); ++k) dst[k] = perm[k];
                break;
            }
        }
    }
}

double ConfigurationEncoder::distance(std::size_t p, std::span<const double> a, std::span<const double> b) const {
    const std::size_t off = offsets_[p];
    switch (kinds_[p]) {
        case ParameterKind::real:
        case ParameterKind::integer:
        case ParameterKind::ordinal: return std::abs(a[off] - b[off]);
        case ParameterKind::categorical: return a[off] == b[off] ? 0.0 : 1.0;
        case ParameterKind::permutation: break;
    }
    const std::size_t m = sizes_[p];
    const double* x = a.data() + off;
    const double* y = b.data() + off;
    double raw = 0.0;
    switch (metrics_[p]) {
        case PermutationMetric::kendall:
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j) raw += (x[i] < x[j]) != (y[i] < y[j]) ? 1.0 : 0.0;
            break;
        case PermutationMetric::spearman:
            for (std::size_t i = 0; i < m; ++i) raw += (x[i] - y[i]) * (x[i] - y[i]);
            break;
        case PermutationMetric::hamming:
            for (std::size_t i = 0; i < m; ++i) raw += x[i] != y[i] ? 1.0 : 0.0;
            break;
        case PermutationMetric::naive: raw = std::equal(x, x + m, y) ? 0.0 : 1.0; break;
    }
    return raw * perm_scale_[p];
}

double ConfigurationEncoder::squared_distance(std::size_t p, std::span<const double> a,
                                              std::span<const double> b) const {
    const double d = distance(p, a, b);
    return kinds_[p] == ParameterKind::permutation ? d : d * d;
}

}  // namespace schedopt
