#pragma once

// Every random decision in a simulation is drawn through this header:
// seeded streams, measure subsets, aggregation functions and thresholds.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "reflex_smas/similarity.hpp"

namespace reflex_smas {

class InvalidDrawSize : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class LengthMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Folds a sequence of words into one 64-bit key.
inline std::uint64_t mix_keys(std::initializer_list<std::uint64_t> keys) {
    std::uint64_t state = 0x6A09E667F3BCC909ULL;
    std::uint64_t h = 0;
    for (std::uint64_t k : keys) {
        state ^= k + 0x9E3779B97F4A7C15ULL + (state << 6) + (state >> 2);
        h = splitmix64(state);
    }
    return h;
}

/// xoshiro256** generator identified by (seed, stream_id). The output
/// sequence depends only on those two numbers, so any stream can be
/// regenerated for replay. Sub-streams derived with `fork` are keyed, not
/// sequential, so they do not depend on the order in which they are made.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id) {
        std::uint64_t sm = mix_keys({seed, stream_id});
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    RngStream fork(std::initializer_list<std::uint64_t> keys) const {
        std::uint64_t k = stream_id_;
        for (std::uint64_t x : keys) k = mix_keys({k, x});
        return RngStream(seed_, k);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("RngStream::below(0)");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t s_[4];
};

enum class AggregationKind { Max, Average, Weighted };

inline std::string_view aggregation_name(AggregationKind k) {
    switch (k) {
    case AggregationKind::Max: return "max";
    case AggregationKind::Average: return "average";
    case AggregationKind::Weighted: return "weighted";
    }
    return "unknown";
}

struct AggregationFn {
    AggregationKind kind = AggregationKind::Max;
    std::vector<double> weights; // only for Weighted; sums to 1

    static AggregationFn max() { return {AggregationKind::Max, {}}; }
    static AggregationFn average() { return {AggregationKind::Average, {}}; }
    static AggregationFn weighted(std::vector<double> w) {
        if (w.empty()) throw LengthMismatch("weighted aggregation needs at least one weight");
        double sum = 0.0;
        for (double x : w) {
            if (!(x >= 0.0)) throw std::invalid_argument("weights must be non-negative");
            sum += x;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("weights must sum to 1, got " + std::to_string(sum));
        return {AggregationKind::Weighted, std::move(w)};
    }

    friend bool operator==(const AggregationFn&, const AggregationFn&) = default;
};

struct ThresholdInterval {
    double lo = 0.45;
    double hi = 0.65;

    ThresholdInterval() = default;
    ThresholdInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (!(0.0 <= lo && lo <= hi && hi <= 1.0))
            throw std::invalid_argument("threshold interval must satisfy 0 <= lo <= hi <= 1");
    }
};

/// Uniform k-subset of `pool` without replacement, returned in pool order.
inline std::vector<MeasureId> draw_measures(RngStream& rng, std::span<const MeasureId> pool,
                                            std::size_t k) {
    if (k < 1 || k > pool.size())
        throw InvalidDrawSize("measures per draw must be in [1, " + std::to_string(pool.size()) +
                              "], got " + std::to_string(k));
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<MeasureId> out;
    out.reserve(k);
    for (std::size_t i : idx) out.push_back(pool[i]);
    return out;
}

inline AggregationFn draw_aggregation(RngStream& rng, std::size_t n_scores) {
    if (n_scores < 1) throw InvalidDrawSize("aggregation needs at least one score");
    switch (rng.below(3)) {
    case 0: return AggregationFn::max();
    case 1: return AggregationFn::average();
    default: break;
    }
    std::vector<double> w(n_scores);
    double sum = 0.0;
    for (double& x : w) {
        x = 1.0 - rng.uniform01(); // (0, 1]
        sum += x;
    }
    for (double& x : w) x /= sum;
    return AggregationFn{AggregationKind::Weighted, std::move(w)};
}

inline double aggregate(const AggregationFn& fn, std::span<const double> scores) {
    if (scores.empty()) throw LengthMismatch("cannot aggregate an empty score list");
    switch (fn.kind) {
    case AggregationKind::Max: return *std::max_element(scores.begin(), scores.end());
    case AggregationKind::Average: {
        // Constant inputs must come back unchanged, so clamp the rounding drift.
        const double mean =
            std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
        return std::clamp(mean, *lo, *hi);
    }
    case AggregationKind::Weighted: {
        if (fn.weights.size() != scores.size())
            throw LengthMismatch("weighted aggregation has " + std::to_string(fn.weights.size()) +
                                 " weights for " + std::to_string(scores.size()) + " scores");
        double dot = 0.0;
        for (std::size_t i = 0; i < scores.size(); ++i) dot += fn.weights[i] * scores[i];
        const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
        return std::clamp(dot, *lo, *hi);
    }
    }
    return 0.0;
}

/// Uniform in [lo, hi); exactly `lo` for a degenerate interval.
inline double draw_threshold(RngStream& rng, const ThresholdInterval& interval) {
    const double u = rng.uniform01();
    if (interval.lo == interval.hi) return interval.lo;
    const double t = interval.lo + u * (interval.hi - interval.lo);
    return t < interval.hi ? t : interval.lo;
}

} // namespace reflex_smas
