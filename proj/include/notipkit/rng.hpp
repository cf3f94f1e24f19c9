#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace notip {

using Engine = std::mt19937_64;

// Stream tags keep randomization rounds that share a user seed statistically independent.
namespace stream {
inline constexpr std::uint64_t kGroundTruth = 0x7472757468ULL;
inline constexpr std::uint64_t kTrainData = 0x74726e64ULL;
inline constexpr std::uint64_t kInferData = 0x696e6664ULL;
inline constexpr std::uint64_t kTrainRandomization = 0x74726e72ULL;
inline constexpr std::uint64_t kInferRandomization = 0x696e6672ULL;
inline constexpr std::uint64_t kSingleTrainRound = 0x73676c31ULL;
inline constexpr std::uint64_t kSingleInferRound = 0x73676c32ULL;
}  // namespace stream

/// Mixes a base seed with a path of stream identifiers (splitmix64 finalizer chain).
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

Engine make_engine(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

}  // namespace notip
