#pragma once

#include <cstdint>
#include <string_view>

namespace hdgrag {

/// 64-bit FNV-1a. Offset basis 0xcbf29ce484222325, prime 0x100000001b3.
/// fnv1a64("") == 0xcbf29ce484222325, fnv1a64("a") == 0xaf63dc4c8601ec8c,
/// fnv1a64("foobar") == 0x85944171f73967e8.
constexpr uint64_t fnv1a64(std::string_view s) noexcept {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// SplitMix64 finalizer (Stafford variant 13).
constexpr uint64_t mix64(uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Per-stage seed derived from the global seed: mix64(seed ^ fnv1a64(stage)).
constexpr uint64_t derive_seed(uint64_t seed, std::string_view stage) noexcept {
    return mix64(seed ^ fnv1a64(stage));
}

} // namespace hdgrag
