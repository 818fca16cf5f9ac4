#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "switchkit/errors.hpp"
#include "switchkit/process.hpp"
#include "switchkit/switching_law.hpp"

namespace switchkit {

inline constexpr const char* kLawSchema = "switchkit/law/v1";
inline constexpr const char* kProcessSchema = "switchkit/process/v1";

/// Parameter tree behind the JSON law descriptors. Kinds:
///   exponential(mean), gamma(shape, scale), geom_div(p, divisor),
///   first_attempt(alpha, first, between), scaled_common(a, b, alpha, divisor).
/// A scaled_common descriptor names a pair; when used where a single law is
/// expected, `component` selects the side (default "plus").
struct LawDescriptor {
    std::string kind;
    double mean = 0.0, shape = 0.0, scale = 0.0;
    double p = 0.0, alpha = 0.0, a = 0.0, b = 0.0;
    std::string component = "plus";
    std::vector<LawDescriptor> children;
};

namespace detail {

inline double need_number(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw parameter_error(std::string("law descriptor: missing or non-numeric field '") + field + "'");
    return j[field].get<double>();
}

inline const nlohmann::json& need_object(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_object())
        throw parameter_error(std::string("law descriptor: missing or non-object field '") + field + "'");
    return j[field];
}

}  // namespace detail

inline LawDescriptor law_descriptor_from_json(const nlohmann::json& j, bool top_level = true) {
    if (!j.is_object()) throw parameter_error("law descriptor must be a JSON object");
    if (top_level) {
        if (!j.contains("schema") || j["schema"] != kLawSchema)
            throw parameter_error(std::string("law descriptor must carry \"schema\": \"") + kLawSchema + "\"");
    } else if (j.contains("schema") && j["schema"] != kLawSchema) {
        throw parameter_error("nested law descriptor carries a foreign schema tag");
    }
    if (!j.contains("kind") || !j["kind"].is_string())
        throw parameter_error("law descriptor needs a string 'kind'");

    LawDescriptor d;
    d.kind = j["kind"].get<std::string>();
    if (d.kind == "exponential") {
        d.mean = detail::need_number(j, "mean");
    } else if (d.kind == "gamma") {
        d.shape = detail::need_number(j, "shape");
        d.scale = detail::need_number(j, "scale");
    } else if (d.kind == "geom_div") {
        d.p = detail::need_number(j, "p");
        d.children.push_back(law_descriptor_from_json(detail::need_object(j, "divisor"), false));
    } else if (d.kind == "first_attempt") {
        d.alpha = detail::need_number(j, "alpha");
        d.children.push_back(law_descriptor_from_json(detail::need_object(j, "first"), false));
        d.children.push_back(law_descriptor_from_json(detail::need_object(j, "between"), false));
    } else if (d.kind == "scaled_common") {
        d.a = detail::need_number(j, "a");
        d.b = detail::need_number(j, "b");
        d.alpha = detail::need_number(j, "alpha");
        d.children.push_back(law_descriptor_from_json(detail::need_object(j, "divisor"), false));
        if (j.contains("component")) {
            d.component = j["component"].get<std::string>();
            if (d.component != "plus" && d.component != "minus")
                throw parameter_error("scaled_common component must be \"plus\" or \"minus\"");
        }
    } else {
        throw parameter_error("unknown law kind '" + d.kind + "'");
    }
    return d;
}

inline nlohmann::json law_descriptor_to_json(const LawDescriptor& d, bool top_level = true) {
    nlohmann::json j;
    if (top_level) j["schema"] = kLawSchema;
    j["kind"] = d.kind;
    if (d.kind == "exponential") {
        j["mean"] = d.mean;
    } else if (d.kind == "gamma") {
        j["shape"] = d.shape;
        j["scale"] = d.scale;
    } else if (d.kind == "geom_div") {
        j["p"] = d.p;
        j["divisor"] = law_descriptor_to_json(d.children.at(0), false);
    } else if (d.kind == "first_attempt") {
        j["alpha"] = d.alpha;
        j["first"] = law_descriptor_to_json(d.children.at(0), false);
        j["between"] = law_descriptor_to_json(d.children.at(1), false);
    } else if (d.kind == "scaled_common") {
        j["a"] = d.a;
        j["b"] = d.b;
        j["alpha"] = d.alpha;
        j["divisor"] = law_descriptor_to_json(d.children.at(0), false);
        if (d.component != "plus") j["component"] = d.component;
    } else {
        throw parameter_error("unknown law kind '" + d.kind + "'");
    }
    return j;
}

inline SwitchingLaw build_law(const LawDescriptor& d);

inline std::pair<SwitchingLaw, SwitchingLaw> build_scaled_common_pair(const LawDescriptor& d) {
    if (d.kind != "scaled_common") throw parameter_error("descriptor is not a scaled_common pair");
    return make_scaled_common_divisor(d.a, d.b, d.alpha, build_law(d.children.at(0)));
}

inline SwitchingLaw build_law(const LawDescriptor& d) {
    if (d.kind == "exponential") return make_exponential(d.mean);
    if (d.kind == "gamma") return make_gamma(d.shape, d.scale);
    if (d.kind == "geom_div") return make_geometric_divisible({build_law(d.children.at(0)), d.p});
    if (d.kind == "first_attempt")
        return make_first_attempt({build_law(d.children.at(0)), build_law(d.children.at(1)), d.alpha});
    if (d.kind == "scaled_common") {
        auto pair = build_scaled_common_pair(d);
        return d.component == "minus" ? std::move(pair.second) : std::move(pair.first);
    }
    throw parameter_error("unknown law kind '" + d.kind + "'");
}

/// Process configuration: either separate "plus"/"minus" descriptors or one
/// "pair" (scaled_common) descriptor, plus the starting probability "p".
inline ProcessSpec process_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw parameter_error("process config must be a JSON object");
    if (j.contains("schema") && j["schema"] != kProcessSchema)
        throw parameter_error(std::string("process config schema must be \"") + kProcessSchema + "\"");
    ProcessSpec spec;
    if (j.contains("pair")) {
        auto pair_desc = law_descriptor_from_json(j["pair"], false);
        auto pair = build_scaled_common_pair(pair_desc);
        spec.plus = std::move(pair.first);
        spec.minus = std::move(pair.second);
    } else {
        if (!j.contains("plus") || !j.contains("minus"))
            throw parameter_error("process config needs 'plus' and 'minus' law descriptors (or 'pair')");
        spec.plus = build_law(law_descriptor_from_json(j["plus"], false));
        spec.minus = build_law(law_descriptor_from_json(j["minus"], false));
    }
    spec.start_prob = j.value("p", 0.5);
    if (spec.start_prob < 0.0 || spec.start_prob > 1.0)
        throw parameter_error("start probability must lie in [0,1]");
    return spec;
}

}  // namespace switchkit
