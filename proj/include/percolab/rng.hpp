#pragma once

#include <cstdint>

// Counter-based randomness: every random decision is a pure hash of
// (seed, namespace, key words).  No generator state, so queries are
// order-independent and identical across thread counts.

namespace percolab {

inline constexpr std::uint64_t kHashGamma = 0x9e3779b97f4a7c15ull;

// splitmix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

// Key namespaces.  Distinct namespaces never share randomness.
enum : std::uint64_t {
    NS_LAYER = 1,        // layer type draws, keyed by layer index
    NS_EDGE = 2,         // bond states, keyed by canonical edge key
    NS_SITE = 3,         // site states, keyed by site code
    NS_CPL_LEVEL = 4,    // coupling: ladder edges parallel to the base
    NS_CPL_COPY = 5,     // coupling: split vertical copies
    NS_CPL_SITE = 6,     // coupling: parallel site copies
};

constexpr std::uint64_t hash_key(std::uint64_t seed, std::uint64_t ns,
                                 std::uint64_t a, std::uint64_t b = 0,
                                 std::uint64_t c = 0) {
    std::uint64_t h = mix64(seed + kHashGamma * (ns + 1));
    h = mix64(h ^ (a + kHashGamma));
    h = mix64(h ^ (b + 2 * kHashGamma));
    h = mix64(h ^ (c + 3 * kHashGamma));
    return h;
}

// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

constexpr double unit_at(std::uint64_t seed, std::uint64_t ns, std::uint64_t a,
                         std::uint64_t b = 0, std::uint64_t c = 0) {
    return to_unit(hash_key(seed, ns, a, b, c));
}

}  // namespace percolab
