#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace agora::testkit {

/// One randomized Shape Factory session driven to its end.
struct SweepOutcome {
    std::uint64_t seed = 0;
    std::int64_t commits = 0;
    std::int64_t denials = 0;
    /// First conservation failure seen after any commit.
    std::optional<std::string> violation;
    /// fnv1a64 of the canonical final state.
    std::string final_digest;

    bool operator==(const SweepOutcome&) const = default;
};

SweepOutcome run_sweep_session(std::uint64_t seed, int steps);

/// Reference: one session after another.
std::vector<SweepOutcome> sweep_serial(const std::vector<std::uint64_t>& seeds, int steps);
/// Sessions distributed over OpenMP threads; results in seed order.
std::vector<SweepOutcome> sweep_parallel(const std::vector<std::uint64_t>& seeds, int steps);

}  // namespace agora::testkit
