#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace flowkit {

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Fisher-Yates with an explicit index draw. std::shuffle's output is not
// pinned by the standard, so reproducible splits need their own shuffle.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (size_t i = items.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(items[i - 1], items[j]);
    }
}

// Integer half-up rounding of fraction*n for exact, platform-free splits.
inline int64_t round_fraction(int64_t n, int64_t numer, int64_t denom) {
    return (n * numer + denom / 2) / denom;
}

std::string to_lower(std::string s);
std::string hex_code(uint32_t value);  // "0x1301" style, lowercase

// Runs fn(begin, end) over chunks of [0, n) on a small worker pool and
// waits for completion. Chunk boundaries are deterministic; fn must only
// write to disjoint state per index.
void parallel_for(size_t n, const std::function<void(size_t, size_t)>& fn);

}  // namespace flowkit
