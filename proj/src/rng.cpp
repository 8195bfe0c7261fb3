#include "entgrowth/rng.hpp"

namespace entgrowth {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t major, std::uint64_t minor) noexcept {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(major + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ splitmix64(minor + 0x2545f4914f6cdd1dULL));
    return h;
}

}  // namespace entgrowth
