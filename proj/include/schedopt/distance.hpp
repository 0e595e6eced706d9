#pragma once

#include <span>
#include <vector>

#include "schedopt/parameter.hpp"
#include "schedopt/space.hpp"

namespace schedopt {

/// Number of discordant pairs between two permutations.
double kendall_distance(std::span<const int> a, std::span<const int> b);
/// Sum of squared element displacements.
double spearman_distance(std::span<const int> a, std::span<const int> b);
/// Number of positions holding different elements.
double hamming_distance(std::span<const int> a, std::span<const int> b);

/// Largest value `metric` takes over all pairs of permutations of `size`
/// elements: m(m-1)/2 for Kendall, m(m^2-1)/3 for Spearman, m for Hamming, 1
/// for the naive (categorical) metric.
double max_permutation_distance(int size, PermutationMetric metric);

/// Distance normalized to [0, 1] by max_permutation_distance.
double permutation_distance(std::span<const int> a, std::span<const int> b, PermutationMetric metric);

/// Per-parameter distance: |t(a) - t(b)| on normalized coordinates for numeric
/// kinds, the 0/1 indicator for categoricals, and the parameter's normalized
/// semimetric for permutations.
double distance(const Parameter& param, const Value& a, const Value& b);

/// Contribution of one parameter to the squared distance inside the kernel:
/// the squared per-parameter distance for numeric and categorical kinds, and
/// the normalized semimetric itself for permutations.
///
/// Every permutation semimetric here is a squared Euclidean distance between
/// embeddings (positions for Spearman, pairwise orders for Kendall, position
/// indicators for Hamming, a whole-permutation indicator for naive). Entering
/// it linearly keeps the kernel distance Euclidean, so the Matérn Gram matrix
/// stays positive semidefinite; squaring it again would not.
double squared_kernel_distance(const Parameter& param, const Value& a, const Value& b);

/// Flat numeric encoding of a configuration used by the GP: one coordinate per
/// numeric parameter, the label index per categorical, and the m entries of
/// each permutation.
class ConfigurationEncoder {
public:
    ConfigurationEncoder() = default;
    explicit ConfigurationEncoder(const SearchSpace& space);

    std::size_t width() const { return width_; }
    std::size_t dimension() const { return kinds_.size(); }

    std::vector<double> encode(const Configuration& cfg) const;
    void encode_into(const Configuration& cfg, std::span<double> out) const;

    /// Distance in parameter `p` between two encoded configurations.
    double distance(std::size_t p, std::span<const double> a, std::span<const double> b) const;
    /// squared_kernel_distance in parameter `p` between two encoded configurations.
    double squared_distance(std::size_t p, std::span<const double> a, std::span<const double> b) const;

private:
    std::vector<Parameter> params_;
    std::vector<ParameterKind> kinds_;
    std::vector<PermutationMetric> metrics_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> sizes_;
    std::vector<double> perm_scale_;
    std::size_t width_ = 0;
};

}  // namespace schedopt
