#pragma once

// Label-level string similarity measures. Every measure maps a pair of
// tokenized names to [0,1] and scores identical inputs as 1.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace reflex_smas {

enum class MeasureId {
    LevenshteinNorm,
    JaroWinkler,
    BigramDice,
    TrigramJaccard,
    MongeElkanLevenshtein,
};

inline constexpr std::array<MeasureId, 5> kAllMeasures{
    MeasureId::LevenshteinNorm, MeasureId::JaroWinkler, MeasureId::BigramDice,
    MeasureId::TrigramJaccard, MeasureId::MongeElkanLevenshtein};

inline std::string_view measure_name(MeasureId m) {
    switch (m) {
    case MeasureId::LevenshteinNorm: return "levenshtein";
    case MeasureId::JaroWinkler: return "jaro-winkler";
    case MeasureId::BigramDice: return "bigram-dice";
    case MeasureId::TrigramJaccard: return "trigram-jaccard";
    case MeasureId::MongeElkanLevenshtein: return "monge-elkan";
    }
    return "unknown";
}

inline std::optional<MeasureId> parse_measure(std::string_view name) {
    for (MeasureId m : kAllMeasures) {
        if (measure_name(m) == name) return m;
    }
    return std::nullopt;
}

struct TokenizedName {
    std::string original;
    std::vector<std::string> tokens;

    /// Tokens concatenated without separators; the string the
    /// character-level measures operate on.
    std::string joined() const {
        std::string out;
        for (const auto& t : tokens) out += t;
        return out;
    }
};

namespace detail {

inline bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
inline bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }
// Bytes >= 0x80 are kept inside tokens so UTF-8 labels survive untouched.
inline bool is_word(unsigned char c) {
    return is_upper(c) || is_lower(c) || is_digit(c) || c >= 0x80;
}
inline char to_lower(unsigned char c) {
    return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
}

} // namespace detail

/// Splits a label into lowercase tokens at camelCase humps, letter/digit
/// boundaries and any non-alphanumeric ASCII separator.
inline TokenizedName normalize(std::string_view name) {
    using namespace detail;
    TokenizedName out{std::string(name), {}};
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.tokens.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < name.size(); ++i) {
        const auto c = static_cast<unsigned char>(name[i]);
        if (!is_word(c)) {
            flush();
            continue;
        }
        if (!cur.empty()) {
            const auto prev = static_cast<unsigned char>(name[i - 1]);
            const bool next_lower =
                i + 1 < name.size() && is_lower(static_cast<unsigned char>(name[i + 1]));
            const bool boundary =
                (is_lower(prev) && is_upper(c)) ||                  // fooBar
                (is_upper(prev) && is_upper(c) && next_lower) ||    // XMLHttp
                (is_digit(prev) != is_digit(c) && prev < 0x80 && c < 0x80);
            if (boundary) flush();
        }
        cur.push_back(to_lower(c));
    }
    flush();
    return out;
}

/// Two-row dynamic-programming edit distance (unit insert/delete/substitute).
inline std::size_t levenshtein_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline double levenshtein_similarity(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

inline double jaro_winkler_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;

    const std::size_t longest = std::max(a.size(), b.size());
    const std::size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;
    std::vector<bool> a_hit(a.size(), false), b_hit(b.size(), false);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(i + window + 1, b.size());
        for (std::size_t j = lo; j < hi; ++j) {
            if (b_hit[j] || a[i] != b[j]) continue;
            a_hit[i] = b_hit[j] = true;
            ++matches;
            break;
        }
    }
    if (matches == 0) return 0.0;

    std::size_t half_transpositions = 0;
    for (std::size_t i = 0, j = 0; i < a.size(); ++i) {
        if (!a_hit[i]) continue;
        while (!b_hit[j]) ++j;
        if (a[i] != b[j]) ++half_transpositions;
        ++j;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(half_transpositions / 2);
    const double jaro =
        (m / static_cast<double>(a.size()) + m / static_cast<double>(b.size()) + (m - t) / m) / 3.0;

    std::size_t prefix = 0;
    while (prefix < 4 && prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
    return std::min(1.0, jaro + static_cast<double>(prefix) * 0.1 * (1.0 - jaro));
}

namespace detail {

inline std::map<std::string_view, std::size_t> ngram_counts(std::string_view s, std::size_t n) {
    std::map<std::string_view, std::size_t> counts;
    if (s.size() < n) return counts;
    for (std::size_t i = 0; i + n <= s.size(); ++i) ++counts[s.substr(i, n)];
    return counts;
}

struct NgramOverlap {
    std::size_t shared = 0;   // multiset intersection
    std::size_t union_ = 0;   // multiset union
    std::size_t total_a = 0;
    std::size_t total_b = 0;
};

inline NgramOverlap ngram_overlap(std::string_view a, std::string_view b, std::size_t n) {
    const auto ca = ngram_counts(a, n);
    const auto cb = ngram_counts(b, n);
    NgramOverlap o;
    for (const auto& [g, k] : ca) {
        o.total_a += k;
        const auto it = cb.find(g);
        const std::size_t kb = it == cb.end() ? 0 : it->second;
        o.shared += std::min(k, kb);
        o.union_ += std::max(k, kb);
    }
    for (const auto& [g, k] : cb) {
        o.total_b += k;
        if (!ca.contains(g)) o.union_ += k;
    }
    return o;
}

} // namespace detail

inline double bigram_dice_similarity(std::string_view a, std::string_view b) {
    const auto o = detail::ngram_overlap(a, b, 2);
    if (o.total_a == 0 && o.total_b == 0) return 1.0;
    if (o.total_a == 0 || o.total_b == 0) return 0.0;
    return 2.0 * static_cast<double>(o.shared) / static_cast<double>(o.total_a + o.total_b);
}

inline double trigram_jaccard_similarity(std::string_view a, std::string_view b) {
    const auto o = detail::ngram_overlap(a, b, 3);
    if (o.total_a == 0 && o.total_b == 0) return 1.0;
    if (o.total_a == 0 || o.total_b == 0) return 0.0;
    return static_cast<double>(o.shared) / static_cast<double>(o.union_);
}

/// Mean over tokens of `a` of the best Levenshtein similarity against any
/// token of `b`. Not symmetric.
inline double monge_elkan_similarity(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    double total = 0.0;
    for (const auto& ta : a) {
        double best = 0.0;
        for (const auto& tb : b) best = std::max(best, levenshtein_similarity(ta, tb));
        total += best;
    }
    return total / static_cast<double>(a.size());
}

inline double score(MeasureId measure, const TokenizedName& a, const TokenizedName& b) {
    switch (measure) {
    case MeasureId::LevenshteinNorm: return levenshtein_similarity(a.joined(), b.joined());
    case MeasureId::JaroWinkler: return jaro_winkler_similarity(a.joined(), b.joined());
    case MeasureId::BigramDice: return bigram_dice_similarity(a.joined(), b.joined());
    case MeasureId::TrigramJaccard: return trigram_jaccard_similarity(a.joined(), b.joined());
    case MeasureId::MongeElkanLevenshtein: return monge_elkan_similarity(a.tokens, b.tokens);
    }
    return 0.0;
}

} // namespace reflex_smas
