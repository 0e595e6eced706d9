#include "schedopt/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "schedopt/bench.hpp"

namespace schedopt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

void check_keys(const json& object, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!object.is_object()) fail(path.empty() ? "scenario" : path, "expected an object");
    for (const auto& [key, value] : object.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail(path.empty() ? key : path + "." + key, "unknown field");
    }
}

const json& require(const json& object, const std::string& key, const std::string& path) {
    auto it = object.find(key);
    if (it == object.end()) fail(path, "missing required field");
    return *it;
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

double get_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::int64_t get_integer(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<std::int64_t>();
}

std::uint64_t get_count(const json& v, const std::string& path, std::uint64_t minimum) {
    const std::int64_t n = get_integer(v, path);
    if (n < static_cast<std::int64_t>(minimum)) fail(path, "must be at least " + std::to_string(minimum));
    return static_cast<std::uint64_t>(n);
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected true or false");
    return v.get<bool>();
}

const json& get_array(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
}

Transform get_transform(const json& object, const std::string& path) {
    auto it = object.find("transform");
    if (it == object.end()) return Transform::none;
    const std::string t = get_string(*it, path + ".transform");
    if (t == "none") return Transform::none;
    if (t == "log") return Transform::log;
    fail(path + ".transform", "expected \"none\" or \"log\", got '" + t + "'");
}

std::pair<const json*, const json*> get_bounds(const json& object, const std::string& path) {
    const std::string p = path + ".bounds";
    const json& b = get_array(require(object, "bounds", p), p);
    if (b.size() != 2) fail(p, "expected [lower, upper]");
    return {&b[0], &b[1]};
}

Parameter parse_parameter(const json& object, const std::string& path) {
    if (!object.is_object()) fail(path, "expected an object");
    const std::string name = get_string(require(object, "name", path + ".name"), path + ".name");
    const std::string kind_text = get_string(require(object, "type", path + ".type"), path + ".type");
    const auto kind = parse_parameter_kind(kind_text);
    if (!kind) fail(path + ".type", "unknown parameter kind '" + kind_text + "'");

    try {
        switch (*kind) {
            case ParameterKind::real: {
                check_keys(object, path, {"name", "type", "bounds", "transform"});
                auto [lo, hi] = get_bounds(object, path);
                return Parameter::real(name, get_number(*lo, path + ".bounds[0]"), get_number(*hi, path + ".bounds[1]"),
                                       get_transform(object, path));
            }
            case ParameterKind::integer: {
                check_keys(object, path, {"name", "type", "bounds", "transform"});
                auto [lo, hi] = get_bounds(object, path);
                return Parameter::integer(name, get_integer(*lo, path + ".bounds[0]"),
                                          get_integer(*hi, path + ".bounds[1]"), get_transform(object, path));
            }
            case ParameterKind::ordinal: {
                check_keys(object, path, {"name", "type", "values", "transform"});
                const std::string p = path + ".values";
                std::vector<double> values;
                const json& list = get_array(require(object, "values", p), p);
                for (std::size_t i = 0; i < list.size(); ++i)
                    values.push_back(get_number(list[i], p + "[" + std::to_string(i) + "]"));
                return Parameter::ordinal(name, std::move(values), get_transform(object, path));
            }
            case ParameterKind::categorical: {
                check_keys(object, path, {"name", "type", "values"});
                const std::string p = path + ".values";
                std::vector<std::string> labels;
                const json& list = get_array(require(object, "values", p), p);
                for (std::size_t i = 0; i < list.size(); ++i)
                    labels.push_back(get_string(list[i], p + "[" + std::to_string(i) + "]"));
                return Parameter::categorical(name, std::move(labels));
            }
            case ParameterKind::permutation: {
                check_keys(object, path, {"name", "type", "size", "metric"});
                const std::string p = path + ".size";
                const auto size = get_count(require(object, "size", p), p, 2);
                if (size > 20) fail(p, "permutations of more than 20 elements are not supported");
                PermutationMetric metric = PermutationMetric::spearman;
                if (auto it = object.find("metric"); it != object.end()) {
                    const std::string m = get_string(*it, path + ".metric");
                    auto parsed = parse_permutation_metric(m);
                    if (!parsed) fail(path + ".metric", "unknown permutation metric '" + m + "'");
                    metric = *parsed;
                }
                return Parameter::permutation(name, static_cast<int>(size), metric);
            }
        }
    } catch (const ValidationError& e) {
        const std::string what = e.what();
        if (what.rfind(path, 0) == 0) throw;
        fail(path, what);
    }
    fail(path + ".type", "unknown parameter kind '" + kind_text + "'");
}

Ablation parse_ablation(const json& object) {
    const std::string path = "ablation";
    check_keys(object, path,
               {"preset", "permutation_metric", "log_transforms", "priors", "local_search", "feasibility_model",
                "epsilon_filter", "advanced_hyperfit", "cot_sampling"});
    Ablation a;
    if (auto it = object.find("preset"); it != object.end()) {
        const std::string preset = get_string(*it, path + ".preset");
        if (preset == "stripped") a = Ablation::stripped();
        else if (preset != "none") fail(path + ".preset", "expected \"none\" or \"stripped\", got '" + preset + "'");
    }
    if (auto it = object.find("permutation_metric"); it != object.end()) {
        const std::string m = get_string(*it, path + ".permutation_metric");
        auto parsed = parse_permutation_metric(m);
        if (!parsed) fail(path + ".permutation_metric", "unknown permutation metric '" + m + "'");
        a.permutation_metric = *parsed;
    }
    auto flag = [&](const char* key, bool& field) {
        if (auto it = object.find(key); it != object.end()) field = get_bool(*it, path + "." + key);
    };
    flag("log_transforms", a.log_transforms);
    flag("priors", a.priors);
    flag("local_search", a.local_search);
    flag("feasibility_model", a.feasibility_model);
    flag("epsilon_filter", a.epsilon_filter);
    flag("advanced_hyperfit", a.advanced_hyperfit);
    if (auto it = object.find("cot_sampling"); it != object.end()) {
        const std::string mode = get_string(*it, path + ".cot_sampling");
        if (mode == "leaf") a.cot_sampling = SamplingMode::leaf_uniform;
        else if (mode == "path") a.cot_sampling = SamplingMode::path_uniform;
        else fail(path + ".cot_sampling", "expected \"leaf\" or \"path\", got '" + mode + "'");
    }
    return a;
}

EvaluatorSpec parse_evaluator(const json& object) {
    const std::string path = "evaluator";
    check_keys(object, path, {"command", "builtin", "timeout"});
    EvaluatorSpec spec;
    const bool has_command = object.contains("command");
    const bool has_builtin = object.contains("builtin");
    if (has_command == has_builtin) fail(path, "expected exactly one of 'command' or 'builtin'");
    if (has_command) {
        const json& argv = get_array(object.at("command"), path + ".command");
        if (argv.empty()) fail(path + ".command", "must not be empty");
        for (std::size_t i = 0; i < argv.size(); ++i)
            spec.command.push_back(get_string(argv[i], path + ".command[" + std::to_string(i) + "]"));
    } else {
        const std::string name = get_string(object.at("builtin"), path + ".builtin");
        const auto names = builtin_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
            fail(path + ".builtin", "unknown builtin benchmark '" + name + "'");
        spec.builtin = name;
        if (object.contains("timeout")) fail(path + ".timeout", "only applies to external commands");
    }
    if (auto it = object.find("timeout"); it != object.end()) {
        spec.timeout = get_number(*it, path + ".timeout");
        if (!(spec.timeout > 0.0)) fail(path + ".timeout", "must be positive");
    }
    return spec;
}

}  // namespace

TuningOptions Scenario::tuning_options() const {
    if (!budget) throw ValidationError("budget: missing required field");
    TuningOptions o;
    o.budget = budget->full;
    o.doe_size = doe_size;
    o.method = method;
    o.seed = seed;
    o.ablation = ablation;
    return o;
}

Scenario parse_scenario(const json& doc) {
    check_keys(doc, "",
               {"name", "parameters", "constraints", "budget", "doe_size", "method", "seed", "ablation", "evaluator"});
    Scenario s;
    s.name = get_string(require(doc, "name", "name"), "name");

    if (auto it = doc.find("evaluator"); it != doc.end()) s.evaluator = parse_evaluator(*it);
    const bool builtin_space = s.evaluator && s.evaluator->builtin;

    std::vector<Parameter> params;
    std::vector<std::string> constraints;
    if (auto it = doc.find("parameters"); it != doc.end()) {
        if (builtin_space) fail("parameters", "a builtin evaluator defines its own parameters");
        const json& list = get_array(*it, "parameters");
        if (list.empty()) fail("parameters", "must not be empty");
        std::set<std::string> names;
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "parameters[" + std::to_string(i) + "]";
            params.push_back(parse_parameter(list[i], path));
            if (!names.insert(params.back().name()).second)
                fail(path + ".name", "duplicate parameter name '" + params.back().name() + "'");
        }
    } else if (!builtin_space) {
        fail("parameters", "missing required field");
    }
    if (auto it = doc.find("constraints"); it != doc.end()) {
        if (builtin_space) fail("constraints", "a builtin evaluator defines its own constraints");
        const json& list = get_array(*it, "constraints");
        for (std::size_t i = 0; i < list.size(); ++i) {
            const std::string path = "constraints[" + std::to_string(i) + "]";
            constraints.push_back(get_string(list[i], path));
            try {
                SearchSpace(params, {constraints.back()});
            } catch (const ValidationError& e) {
                fail(path, e.what());
            }
        }
    }

    std::optional<Benchmark> bench;
    if (builtin_space) {
        bench = builtin(*s.evaluator->builtin);
        s.space = bench->space;
    } else {
        s.space = SearchSpace(std::move(params), constraints);
    }

    if (auto it = doc.find("budget"); it != doc.end()) s.budget = BudgetSpec{get_count(*it, "budget", 1)};
    else if (bench) s.budget = BudgetSpec{bench->default_budget};
    if (auto it = doc.find("doe_size"); it != doc.end()) s.doe_size = get_count(*it, "doe_size", 1);
    if (s.budget) {
        const std::size_t doe = s.doe_size.value_or(default_doe_size(s.space.dimension()));
        if (s.budget->full < doe)
            fail("budget", "must be at least the initial design size (" + std::to_string(doe) + ")");
    }
    if (auto it = doc.find("method"); it != doc.end()) {
        const std::string m = get_string(*it, "method");
        auto parsed = parse_method(m);
        if (!parsed) fail("method", "unknown method '" + m + "'");
        s.method = *parsed;
    }
    if (auto it = doc.find("seed"); it != doc.end()) {
        if (!it->is_number_unsigned()) fail("seed", "expected a non-negative integer");
        s.seed = it->get<std::uint64_t>();
    }
    if (auto it = doc.find("ablation"); it != doc.end()) s.ablation = parse_ablation(*it);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError(path + ": cannot open scenario file");
    json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ValidationError(path + ": not valid JSON");
    return parse_scenario(doc);
}

ordered_json scenario_to_json(const Scenario& s) {
    ordered_json doc;
    doc["name"] = s.name;
    const bool builtin_space = s.evaluator && s.evaluator->builtin;
    if (!builtin_space) {
        ordered_json params = ordered_json::array();
        for (const auto& p : s.space.parameters()) {
            ordered_json o;
            o["name"] = p.name();
            o["type"] = std::string(to_string(p.kind()));
            switch (p.kind()) {
                case ParameterKind::real: o["bounds"] = {p.lower(), p.upper()}; break;
                case ParameterKind::integer:
                    o["bounds"] = {static_cast<std::int64_t>(p.lower()), static_cast<std::int64_t>(p.upper())};
                    break;
                case ParameterKind::ordinal: o["values"] = p.values(); break;
                case ParameterKind::categorical: o["values"] = p.labels(); break;
                case ParameterKind::permutation:
                    o["size"] = p.permutation_size();
                    o["metric"] = std::string(to_string(p.metric()));
                    break;
            }
            if (p.is_numeric()) o["transform"] = p.transform() == Transform::log ? "log" : "none";
            params.push_back(std::move(o));
        }
        doc["parameters"] = std::move(params);
        doc["constraints"] = s.space.constraint_texts();
    }
    if (s.budget) doc["budget"] = s.budget->full;
    if (s.doe_size) doc["doe_size"] = *s.doe_size;
    doc["method"] = std::string(to_string(s.method));
    doc["seed"] = s.seed;

    const Ablation& a = s.ablation;
    ordered_json ab;
    if (a.permutation_metric) ab["permutation_metric"] = std::string(to_string(*a.permutation_metric));
    ab["log_transforms"] = a.log_transforms;
    ab["priors"] = a.priors;
    ab["local_search"] = a.local_search;
    ab["feasibility_model"] = a.feasibility_model;
    ab["epsilon_filter"] = a.epsilon_filter;
    ab["advanced_hyperfit"] = a.advanced_hyperfit;
    ab["cot_sampling"] = a.cot_sampling == SamplingMode::leaf_uniform ? "leaf" : "path";
    doc["ablation"] = std::move(ab);

    if (s.evaluator) {
        ordered_json ev;
        if (s.evaluator->builtin) {
            ev["builtin"] = *s.evaluator->builtin;
        } else {
            ev["command"] = s.evaluator->command;
            ev["timeout"] = s.evaluator->timeout;
        }
        doc["evaluator"] = std::move(ev);
    }
    return doc;
}

}  // namespace schedopt
