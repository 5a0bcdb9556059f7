#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace agora {

/// Seeded random stream with a platform-independent sequence.
/// std::mt19937_64 output is fixed by the standard; the bounded draw below
/// avoids std::uniform_int_distribution, whose algorithm is implementation-defined.
class SeededStream {
public:
    explicit SeededStream(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [lo, hi] (inclusive) by rejection sampling.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi) {
        if (hi <= lo) return lo;
        const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        const std::uint64_t limit = span == 0 ? 0 : (~std::uint64_t{0} / span) * span;
        std::uint64_t x = next();
        while (limit != 0 && x >= limit) x = next();
        return lo + static_cast<std::int64_t>(span == 0 ? x : x % span);
    }

    /// Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Independent stream for a named sub-purpose, derived from this stream's seed.
    static SeededStream derive(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ULL;
        for (unsigned char c : label) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return SeededStream(h);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace agora
