#!/usr/bin/env python3
"""Regenerates include/reflex_smas/fixtures.hpp from data/fixtures/*.json."""
import pathlib

root = pathlib.Path(__file__).resolve().parent.parent
names = ["person", "order", "travel"]

parts = ["""#pragma once

// Built-in benchmark scenarios. Generated by tools/embed_fixtures.py from
// data/fixtures/; edit the JSON files and rerun the script.

#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reflex_smas/schema.hpp"

namespace reflex_smas {

namespace detail {
"""]
for n in names:
    text = (root / "data" / "fixtures" / f"{n}.json").read_text()
    parts.append(f'inline constexpr std::string_view k{n.capitalize()}Fixture = R"json({text})json";\n')
parts.append("""} // namespace detail

/// Raw JSON of the built-in fixtures, keyed by lowercase name.
inline std::vector<std::pair<std::string_view, std::string_view>> builtin_fixture_sources() {
    return {""" + ", ".join(f'{{"{n}", detail::k{n.capitalize()}Fixture}}' for n in names) + """};
}

inline const std::vector<Scenario>& builtin_fixtures() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> v;
        for (const auto& [name, text] : builtin_fixture_sources()) v.push_back(parse_scenario(text));
        return v;
    }();
    return all;
}

/// Case-insensitive lookup by scenario name.
inline std::optional<Scenario> find_fixture(std::string_view name) {
    auto lower = [](std::string_view s) {
        std::string out(s);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
        return out;
    };
    const std::string key = lower(name);
    for (const auto& s : builtin_fixtures())
        if (lower(s.name) == key) return s;
    return std::nullopt;
}

} // namespace reflex_smas
""")
(root / "include" / "reflex_smas" / "fixtures.hpp").write_text("".join(parts))
