#pragma once

// Schemas, elements, ground-truth mappings and the scenario file format.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "reflex_smas/similarity.hpp"

namespace reflex_smas {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Scenario content that parsed but violates an invariant. `field` names the
/// offending location, e.g. "expected[2][1]".
class ValidationError : public std::runtime_error {
public:
    ValidationError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Side { Source, Target };
enum class HeterogeneityBand { Low, Medium, High };

inline std::string_view band_name(HeterogeneityBand b) {
    switch (b) {
    case HeterogeneityBand::Low: return "low";
    case HeterogeneityBand::Medium: return "medium";
    case HeterogeneityBand::High: return "high";
    }
    return "unknown";
}

inline std::optional<HeterogeneityBand> parse_band(std::string_view s) {
    if (s == "low") return HeterogeneityBand::Low;
    if (s == "medium") return HeterogeneityBand::Medium;
    if (s == "high") return HeterogeneityBand::High;
    return std::nullopt;
}

struct SchemaElement {
    std::string id;
    std::string name;
    Side side = Side::Source;

    friend bool operator==(const SchemaElement&, const SchemaElement&) = default;
};

struct Schema {
    std::string label;
    Side side = Side::Source;
    std::vector<SchemaElement> elements;

    std::size_t size() const { return elements.size(); }

    std::optional<std::size_t> index_of(std::string_view id) const {
        for (std::size_t i = 0; i < elements.size(); ++i)
            if (elements[i].id == id) return i;
        return std::nullopt;
    }

    friend bool operator==(const Schema&, const Schema&) = default;
};

using IdPair = std::pair<std::string, std::string>; // (source id, target id)

struct GroundTruthMapping {
    std::set<IdPair> pairs;

    bool contains(const IdPair& p) const { return pairs.contains(p); }
    friend bool operator==(const GroundTruthMapping&, const GroundTruthMapping&) = default;
};

struct Scenario {
    std::string name;
    Schema source;
    Schema target;
    GroundTruthMapping expected;
    HeterogeneityBand band = HeterogeneityBand::Medium;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n\f\v");
    return std::string(s.substr(first, last - first + 1));
}

inline void validate_schema(const Schema& schema, Side side, const std::string& field) {
    if (schema.elements.empty()) throw ValidationError(field, "schema has no elements");
    std::set<std::string> seen;
    for (std::size_t i = 0; i < schema.elements.size(); ++i) {
        const auto& e = schema.elements[i];
        const std::string at = field + "[" + std::to_string(i) + "]";
        if (e.side != side) throw ValidationError(at, "element is on the wrong side");
        if (e.id.empty()) throw ValidationError(at + ".id", "empty id");
        if (!seen.insert(e.id).second) throw ValidationError(at + ".id", "duplicate id '" + e.id + "'");
        if (trim(e.name).empty()) throw ValidationError(at + ".name", "name is blank");
    }
}

} // namespace detail

/// Throws ValidationError on the first violated invariant.
inline void validate(const Scenario& s) {
    if (s.source.side != Side::Source) throw ValidationError("source", "schema is not a source schema");
    if (s.target.side != Side::Target) throw ValidationError("target", "schema is not a target schema");
    detail::validate_schema(s.source, Side::Source, "source");
    detail::validate_schema(s.target, Side::Target, "target");
    std::set<std::string> used_src, used_tgt;
    std::size_t i = 0;
    for (const auto& [src, tgt] : s.expected.pairs) {
        const std::string at = "expected[" + std::to_string(i++) + "]";
        if (!s.source.index_of(src)) throw ValidationError(at, "unknown source id '" + src + "'");
        if (!s.target.index_of(tgt)) throw ValidationError(at, "unknown target id '" + tgt + "'");
        if (!used_src.insert(src).second) throw ValidationError(at, "source id '" + src + "' mapped twice");
        if (!used_tgt.insert(tgt).second) throw ValidationError(at, "target id '" + tgt + "' mapped twice");
    }
    if (s.expected.pairs.size() > std::min(s.source.size(), s.target.size()))
        throw ValidationError("expected", "more pairs than the smaller schema has elements");
}

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<std::string_view> allowed,
                                const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ParseError(where + ": unknown key '" + key + "'");
    }
}

inline const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing key '" + key + "'");
    return *it;
}

inline Schema parse_schema(const nlohmann::json& arr, Side side, const std::string& field) {
    if (!arr.is_array()) throw ParseError(field + ": expected an array");
    Schema schema{field, side, {}};
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string at = field + "[" + std::to_string(i) + "]";
        const auto& e = arr[i];
        if (!e.is_object()) throw ParseError(at + ": expected an object");
        reject_unknown_keys(e, {"id", "name"}, at);
        const auto& id = require(e, "id", at);
        const auto& name = require(e, "name", at);
        if (!id.is_string() || !name.is_string()) throw ParseError(at + ": id and name must be strings");
        schema.elements.push_back({id.get<std::string>(), name.get<std::string>(), side});
    }
    return schema;
}

} // namespace detail

/// Parses and validates the JSON scenario format.
inline Scenario parse_scenario(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scenario: expected a JSON object");
    detail::reject_unknown_keys(doc, {"name", "source", "target", "expected", "band"}, "scenario");

    Scenario s;
    const auto& name = detail::require(doc, "name", "scenario");
    if (!name.is_string()) throw ParseError("name: expected a string");
    s.name = name.get<std::string>();
    s.source = detail::parse_schema(detail::require(doc, "source", "scenario"), Side::Source, "source");
    s.target = detail::parse_schema(detail::require(doc, "target", "scenario"), Side::Target, "target");

    const auto& expected = detail::require(doc, "expected", "scenario");
    if (!expected.is_array()) throw ParseError("expected: expected an array");
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const auto& p = expected[i];
        const std::string at = "expected[" + std::to_string(i) + "]";
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
            throw ParseError(at + ": expected [sourceId, targetId]");
        if (!s.expected.pairs.emplace(p[0].get<std::string>(), p[1].get<std::string>()).second)
            throw ValidationError(at, "duplicate pair");
    }

    const auto& band = detail::require(doc, "band", "scenario");
    const auto parsed = band.is_string() ? parse_band(band.get<std::string>()) : std::nullopt;
    if (!parsed) throw ParseError("band: expected one of low|medium|high");
    s.band = *parsed;

    validate(s);
    return s;
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open scenario file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

inline nlohmann::json to_json(const Scenario& s) {
    auto elements = [](const Schema& schema) {
        auto arr = nlohmann::json::array();
        for (const auto& e : schema.elements) arr.push_back({{"id", e.id}, {"name", e.name}});
        return arr;
    };
    auto expected = nlohmann::json::array();
    for (const auto& [src, tgt] : s.expected.pairs) expected.push_back({src, tgt});
    return {{"name", s.name},
            {"source", elements(s.source)},
            {"target", elements(s.target)},
            {"expected", expected},
            {"band", band_name(s.band)}};
}

inline std::string serialize_scenario(const Scenario& s) { return to_json(s).dump(2) + "\n"; }

inline HeterogeneityBand band_for_index(double h) {
    if (h <= 0.25) return HeterogeneityBand::Low;
    if (h <= 0.50) return HeterogeneityBand::Medium;
    return HeterogeneityBand::High;
}

/// 1 - mean normalized Levenshtein similarity over the ground-truth pairs,
/// comparing normalized names. 0 for a scenario with no expected pairs.
inline double heterogeneity_index(const Scenario& s) {
    if (s.expected.pairs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& [src, tgt] : s.expected.pairs) {
        const auto& a = s.source.elements[*s.source.index_of(src)].name;
        const auto& b = s.target.elements[*s.target.index_of(tgt)].name;
        total += levenshtein_similarity(normalize(a).joined(), normalize(b).joined());
    }
    return 1.0 - total / static_cast<double>(s.expected.pairs.size());
}

} // namespace reflex_smas
