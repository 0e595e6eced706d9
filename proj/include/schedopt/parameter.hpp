#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "schedopt/common.hpp"

namespace schedopt {

enum class ParameterKind { real, integer, ordinal, categorical, permutation };
enum class Transform { none, log };
enum class PermutationMetric { kendall, spearman, hamming, naive };

/// One-based permutation: element i holds the new position of item i.
using Permutation = std::vector<int>;

/// A single parameter value. Alternative by kind:
///   real, ordinal -> double
///   integer       -> std::int64_t
///   categorical   -> std::string (the label)
///   permutation   -> Permutation
using Value = std::variant<double, std::int64_t, std::string, Permutation>;

/// Text form used in CSV output: shortest round-trip decimal for numbers,
/// the label for categoricals, `;`-joined elements for permutations.
std::string to_string(const Value& value);
/// Shortest decimal that reads back as the same double.
std::string format_number(double value);

std::string_view to_string(ParameterKind kind);
std::string_view to_string(PermutationMetric metric);
std::optional<ParameterKind> parse_parameter_kind(std::string_view text);
std::optional<PermutationMetric> parse_permutation_metric(std::string_view text);

/// A typed, named optimization variable with its domain.
///
/// Numeric kinds (real, integer, ordinal) map onto a normalized coordinate in
/// [0, 1]: optional log, then min-max scaling over the (transformed) domain.
/// This coordinate is what distances and the feature encoders operate on.
class Parameter {
public:
    static Parameter real(std::string name, double lower, double upper, Transform transform = Transform::none);
    static Parameter integer(std::string name, std::int64_t lower, std::int64_t upper,
                             Transform transform = Transform::none);
    static Parameter ordinal(std::string name, std::vector<double> values, Transform transform = Transform::none);
    static Parameter categorical(std::string name, std::vector<std::string> labels);
    static Parameter permutation(std::string name, int size, PermutationMetric metric = PermutationMetric::spearman);

    const std::string& name() const { return name_; }
    ParameterKind kind() const { return kind_; }
    Transform transform() const { return transform_; }
    PermutationMetric metric() const { return metric_; }

    double lower() const { return lower_; }
    double upper() const { return upper_; }
    const std::vector<double>& values() const { return values_; }
    const std::vector<std::string>& labels() const { return labels_; }
    /// Number of permuted elements (permutation kind only).
    int permutation_size() const { return perm_size_; }

    bool is_numeric() const;
    /// Finite and enumerable by value index: integer, ordinal, categorical.
    bool is_discrete() const;

    /// Number of distinct values; nullopt for reals and for sizes beyond 2^64.
    std::optional<std::uint64_t> cardinality() const;

    bool contains(const Value& value) const;

    /// Normalized coordinate in [0, 1]; numeric kinds only.
    double transform_value(const Value& value) const;
    /// Inverse of transform_value for reals and integers (rounded).
    Value from_coordinate(double coordinate) const;

    /// Position of `value` in the enumerable domain (integer, ordinal, categorical).
    std::optional<std::size_t> index_of(const Value& value) const;
    Value value_at(std::size_t index) const;

    Parameter with_transform(Transform transform) const;
    Parameter with_metric(PermutationMetric metric) const;

private:
    Parameter() = default;
    double raw_numeric(const Value& value) const;
    double forward(double raw) const;

    std::string name_;
    ParameterKind kind_ = ParameterKind::real;
    Transform transform_ = Transform::none;
    PermutationMetric metric_ = PermutationMetric::spearman;
    double lower_ = 0.0;
    double upper_ = 0.0;
    std::vector<double> values_;
    std::vector<std::string> labels_;
    int perm_size_ = 0;
};

/// One value per parameter, positionally aligned with the owning space.
struct Configuration {
    std::vector<Value> values;

    friend bool operator==(const Configuration&, const Configuration&) = default;
    friend bool operator<(const Configuration& a, const Configuration& b) { return a.values < b.values; }
};

bool is_valid_permutation(const Permutation& perm);

/// Inverse of to_string(Value) for a value of `param`; nullopt when the text
/// does not name a member of the domain.
std::optional<Value> parse_value(const Parameter& param, std::string_view text);

}  // namespace schedopt
