#pragma once

#include <cstdint>
#include <random>

namespace entgrowth {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Seed of the stream addressed by (master, major, minor). Streams are derived
// by hashing the address, so any sample can be regenerated without replaying
// the ones before it and the mapping does not depend on thread scheduling.
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t major, std::uint64_t minor = 0) noexcept;

inline Rng make_stream(std::uint64_t master, std::uint64_t major, std::uint64_t minor = 0) {
    return Rng(stream_seed(master, major, minor));
}

}  // namespace entgrowth
