#include "schedopt/parameter.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace schedopt {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_string(const Value& value) {
    struct Visitor {
        std::string operator()(double v) const { return format_number(v); }
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(const std::string& v) const { return v; }
        std::string operator()(const Permutation& p) const {
            std::string out;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (i) out += ';';
                out += std::to_string(p[i]);
            }
            return out;
        }
    };
    return std::visit(Visitor{}, value);
}

std::string_view to_string(ParameterKind kind) {
    switch (kind) {
        case ParameterKind::real: return "real";
        case ParameterKind::integer: return "integer";
        case ParameterKind::ordinal: return "ordinal";
        case ParameterKind::categorical: return "categorical";
        case ParameterKind::permutation: return "permutation";
    }
    return "?";
}

std::string_view to_string(PermutationMetric metric) {
    switch (metric) {
        case PermutationMetric::kendall: return "kendall";
        case PermutationMetric::spearman: return "spearman";
        case PermutationMetric::hamming: return "hamming";
        case PermutationMetric::naive: return "naive";
    }
    return "?";
}

std::optional<ParameterKind> parse_parameter_kind(std::string_view text) {
    for (auto k : {ParameterKind::real, ParameterKind::integer, ParameterKind::ordinal, ParameterKind::categorical,
                   ParameterKind::permutation}) {
        if (to_string(k) == text) return k;
    }
    return std::nullopt;
}

std::optional<PermutationMetric> parse_permutation_metric(std::string_view text) {
    for (auto m : {PermutationMetric::kendall, PermutationMetric::spearman, PermutationMetric::hamming,
                   PermutationMetric::naive}) {
        if (to_string(m) == text) return m;
    }
    return std::nullopt;
}

bool is_valid_permutation(const Permutation& perm) {
    std::vector<bool> seen(perm.size() + 1, false);
    for (int v : perm) {
        if (v < 1 || static_cast<std::size_t>(v) > perm.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

Parameter Parameter::real(std::string name, double lower, double upper, Transform transform) {
    if (!(lower <= upper) || !std::isfinite(lower) || !std::isfinite(upper))
        throw ValidationError("parameter '" + name + "': real bounds must be finite with lower <= upper");
    if (transform == Transform::log && lower <= 0.0)
        throw ValidationError("parameter '" + name + "': log transform requires a strictly positive domain");
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::real;
    p.transform_ = transform;
    p.lower_ = lower;
    p.upper_ = upper;
    return p;
}

Parameter Parameter::integer(std::string name, std::int64_t lower, std::int64_t upper, Transform transform) {
    if (lower > upper) throw ValidationError("parameter '" + name + "': integer bounds must satisfy lower <= upper");
    if (transform == Transform::log && lower <= 0)
        throw ValidationError("parameter '" + name + "': log transform requires a strictly positive domain");
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::integer;
    p.transform_ = transform;
    p.lower_ = static_cast<double>(lower);
    p.upper_ = static_cast<double>(upper);
    return p;
}

Parameter Parameter::ordinal(std::string name, std::vector<double> values, Transform transform) {
    if (values.empty()) throw ValidationError("parameter '" + name + "': ordinal needs at least one value");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]))
            throw ValidationError("parameter '" + name + "': ordinal values must be finite");
        if (i > 0 && !(values[i - 1] < values[i]))
            throw ValidationError("parameter '" + name + "': ordinal values must be strictly increasing");
    }
    if (transform == Transform::log && values.front() <= 0.0)
        throw ValidationError("parameter '" + name + "': log transform requires a strictly positive domain");
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::ordinal;
    p.transform_ = transform;
    p.lower_ = values.front();
    p.upper_ = values.back();
    p.values_ = std::move(values);
    return p;
}

Parameter Parameter::categorical(std::string name, std::vector<std::string> labels) {
    if (labels.empty()) throw ValidationError("parameter '" + name + "': categorical needs at least one label");
    std::set<std::string> unique(labels.begin(), labels.end());
    if (unique.size() != labels.size())
        throw ValidationError("parameter '" + name + "': categorical labels must be distinct");
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::categorical;
    p.labels_ = std::move(labels);
    return p;
}

Parameter Parameter::permutation(std::string name, int size, PermutationMetric metric) {
    if (size < 2) throw ValidationError("parameter '" + name + "': permutation size must be at least 2");
    Parameter p;
    p.name_ = std::move(name);
    p.kind_ = ParameterKind::permutation;
    p.metric_ = metric;
    p.perm_size_ = size;
    return p;
}

bool Parameter::is_numeric() const {
    return kind_ == ParameterKind::real || kind_ == ParameterKind::integer || kind_ == ParameterKind::ordinal;
}

bool Parameter::is_discrete() const {
    return kind_ == ParameterKind::integer || kind_ == ParameterKind::ordinal || kind_ == ParameterKind::categorical;
}

std::optional<std::uint64_t> Parameter::cardinality() const {
    switch (kind_) {
        case ParameterKind::real: return std::nullopt;
        case ParameterKind::integer: return static_cast<std::uint64_t>(upper_ - lower_) + 1;
        case ParameterKind::ordinal: return values_.size();
        case ParameterKind::categorical: return labels_.size();
        case ParameterKind::permutation: {
            std::uint64_t f = 1;
            for (int i = 2; i <= perm_size_; ++i) {
                if (f > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(i)) return std::nullopt;
                f *= static_cast<std::uint64_t>(i);
            }
            return f;
        }
    }
    return std::nullopt;
}

bool Parameter::contains(const Value& value) const {
    switch (kind_) {
        case ParameterKind::real: {
            auto v = std::get_if<double>(&value);
            return v && *v >= lower_ && *v <= upper_;
        }
        case ParameterKind::integer: {
            auto v = std::get_if<std::int64_t>(&value);
            return v && static_cast<double>(*v) >= lower_ && static_cast<double>(*v) <= upper_;
        }
        case ParameterKind::ordinal: {
            auto v = std::get_if<double>(&value);
            return v && std::binary_search(values_.begin(), values_.end(), *v);
        }
        case ParameterKind::categorical: {
            auto v = std::get_if<std::string>(&value);
            return v && std::find(labels_.begin(), labels_.end(), *v) != labels_.end();
        }
        case ParameterKind::permutation: {
            auto v = std::get_if<Permutation>(&value);
            return v && static_cast<int>(v->size()) == perm_size_ && is_valid_permutation(*v);
        }
    }
    return false;
}

double Parameter::raw_numeric(const Value& value) const {
    if (auto d = std::get_if<double>(&value)) return *d;
    if (auto i = std::get_if<std::int64_t>(&value)) return static_cast<double>(*i);
    throw ValidationError("parameter '" + name_ + "': expected a numeric value");
}

double Parameter::forward(double raw) const {
    if (transform_ == Transform::log) {
        if (!(raw > 0.0)) throw ValidationError("parameter '" + name_ + "': log transform of non-positive value");
        return std::log(raw);
    }
    return raw;
}

double Parameter::transform_value(const Value& value) const {
    if (!is_numeric()) throw ValidationError("parameter '" + name_ + "': transform_value needs a numeric kind");
    const double t = forward(raw_numeric(value));
    const double lo = forward(lower_);
    const double hi = forward(upper_);
    if (hi == lo) return 0.0;
    return (t - lo) / (hi - lo);
}

Value Parameter::from_coordinate(double coordinate) const {
    coordinate = std::clamp(coordinate, 0.0, 1.0);
    const double lo = forward(lower_);
    const double hi = forward(upper_);
    double t = lo + coordinate * (hi - lo);
    double raw = transform_ == Transform::log ? std::exp(t) : t;
    raw = std::clamp(raw, lower_, upper_);
    switch (kind_) {
        case ParameterKind::real: return raw;
        case ParameterKind::integer: return static_cast<std::int64_t>(std::llround(raw));
        default: throw ValidationError("parameter '" + name_ + "': from_coordinate needs a real or integer kind");
    }
}

std::optional<std::size_t> Parameter::index_of(const Value& value) const {
    switch (kind_) {
        case ParameterKind::integer:
            if (auto v = std::get_if<std::int64_t>(&value); v && contains(value))
                return static_cast<std::size_t>(*v - static_cast<std::int64_t>(lower_));
            return std::nullopt;
        case ParameterKind::ordinal:
            if (auto v = std::get_if<double>(&value)) {
                auto it = std::lower_bound(values_.begin(), values_.end(), *v);
                if (it != values_.end() && *it == *v) return static_cast<std::size_t>(it - values_.begin());
            }
            return std::nullopt;
        case ParameterKind::categorical:
            if (auto v = std::get_if<std::string>(&value)) {
                auto it = std::find(labels_.begin(), labels_.end(), *v);
                if (it != labels_.end()) return static_cast<std::size_t>(it - labels_.begin());
            }
            return std::nullopt;
        default: return std::nullopt;
    }
}

Value Parameter::value_at(std::size_t index) const {
    switch (kind_) {
        case ParameterKind::integer: return static_cast<std::int64_t>(lower_) + static_cast<std::int64_t>(index);
        case ParameterKind::ordinal: return values_.at(index);
        case ParameterKind::categorical: return labels_.at(index);
        default: throw ValidationError("parameter '" + name_ + "': value_at needs a discrete kind");
    }
}

Parameter Parameter::with_transform(Transform transform) const {
    Parameter p = *this;
    if (is_numeric()) p.transform_ = transform;
    return p;
}

Parameter Parameter::with_metric(PermutationMetric metric) const {
    Parameter p = *this;
    if (kind_ == ParameterKind::permutation) p.metric_ = metric;
    return p;
}

namespace {

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    T v{};
    const char* end = text.data() + text.size();
    auto res = std::from_chars(text.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) return std::nullopt;
    return v;
}

}  // namespace

std::optional<Value> parse_value(const Parameter& param, std::string_view text) {
    std::optional<Value> out;
    switch (param.kind()) {
        case ParameterKind::real:
        case ParameterKind::ordinal:
            if (auto v = parse_number<double>(text)) out = *v;
            break;
        case ParameterKind::integer:
            if (auto v = parse_number<std::int64_t>(text)) out = *v;
            break;
        case ParameterKind::categorical: out = std::string(text); break;
        case ParameterKind::permutation: {
            Permutation perm;
            std::size_t start = 0;
            while (start <= text.size()) {
                const std::size_t stop = std::min(text.find(';', start), text.size());
                auto v = parse_number<int>(text.substr(start, stop - start));
                if (!v) return std::nullopt;
                perm.push_back(*v);
                start = stop + 1;
            }
            out = std::move(perm);
            break;
        }
    }
    if (out && !param.contains(*out)) return std::nullopt;
    return out;
}

}  // namespace schedopt
