#pragma once

#include <cstdint>

namespace damarl {

/// SplitMix64 finalizer; mixes a base seed with a stream tag and an index so
/// that per-episode, per-agent and per-trial generators are decorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream, std::uint64_t index = 0) {
    std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1) + 0xBF58476D1CE4E5B9ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

namespace seed_stream {
inline constexpr std::uint64_t kEpisode = 1;
inline constexpr std::uint64_t kActor = 2;
inline constexpr std::uint64_t kCritic = 3;
inline constexpr std::uint64_t kNoise = 4;
inline constexpr std::uint64_t kReplay = 5;
inline constexpr std::uint64_t kTrial = 6;
} // namespace seed_stream

} // namespace damarl
