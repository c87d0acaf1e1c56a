#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "cvas/linalg.hpp"

namespace cvas {

using Rng = std::mt19937_64;

// Independent seed streams: splitmix64 over (master, stream, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                          std::uint64_t index = 0) noexcept;

// Stream identifiers used by the pipeline, kept distinct so evaluation draws
// never share state with surrogate-training draws.
namespace seed_stream {
inline constexpr std::uint64_t kSampler = 1;
inline constexpr std::uint64_t kFidelity = 2;
inline constexpr std::uint64_t kSensitivity = 3;
inline constexpr std::uint64_t kFutureModels = 4;
inline constexpr std::uint64_t kSplit = 5;
}  // namespace seed_stream

// n points drawn uniformly from the closed L2 ball, one per row.
// Direction is a normalized Gaussian, radius is r * U^(1/d).
Matrix sample_uniform_ball(const Vector& center, double radius, std::size_t n,
                           Rng& rng);

}  // namespace cvas
