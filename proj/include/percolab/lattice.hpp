#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

// Hexagonal space lattice: integer combinations of
//   u1 = (1, 0, 0),  u2 = (0, 1, 0),  u3 = (1/2, 1/2, 1/sqrt(2)).
// A site is stored by its coordinates (a1, a2, a3) in that basis; a3 is
// the layer index.  Within a layer the lattice is a copy of Z^2.

namespace percolab {

struct SiteH {
    std::int32_t a1 = 0;
    std::int32_t a2 = 0;
    std::int32_t a3 = 0;

    friend bool operator==(const SiteH&, const SiteH&) = default;
};

// Upward neighbors v + u3 - {0, u1, u2, u1 + u2}; every site has four.
inline std::array<SiteH, 4> neighbors_up(const SiteH& v) {
    return {SiteH{v.a1, v.a2, v.a3 + 1}, SiteH{v.a1 - 1, v.a2, v.a3 + 1},
            SiteH{v.a1, v.a2 - 1, v.a3 + 1}, SiteH{v.a1 - 1, v.a2 - 1, v.a3 + 1}};
}

// In-layer neighbors v +- u1, v +- u2.
inline std::array<SiteH, 4> neighbors_horizontal(const SiteH& v) {
    return {SiteH{v.a1 + 1, v.a2, v.a3}, SiteH{v.a1, v.a2 + 1, v.a3},
            SiteH{v.a1 - 1, v.a2, v.a3}, SiteH{v.a1, v.a2 - 1, v.a3}};
}

// Downward neighbors v - u3 + {0, u1, u2, u1 + u2}; mirror of
// neighbors_up.  Sites in the bottom layer have none.
inline std::vector<SiteH> neighbors_down(const SiteH& v) {
    if (v.a3 < 1) return {};
    return {SiteH{v.a1, v.a2, v.a3 - 1}, SiteH{v.a1 + 1, v.a2, v.a3 - 1},
            SiteH{v.a1, v.a2 + 1, v.a3 - 1}, SiteH{v.a1 + 1, v.a2 + 1, v.a3 - 1}};
}

// Coordinates of a1*u1 + a2*u2 + a3*u3 in R^3.
inline std::array<double, 3> cartesian(const SiteH& v) {
    return {v.a1 + 0.5 * v.a3, v.a2 + 0.5 * v.a3, v.a3 / std::sqrt(2.0)};
}

// Embeds the oriented first-octant lattice Z+^3 via the sublattice
// generated by w1 = u3, w2 = u3 - u1, w3 = u3 - u1 - u2.  Each w_i is an
// upward offset, so every oriented Z^3 edge maps to an upward edge here.
// Returns m1*w1 + m2*w2 + m3*w3 in u-coordinates.
inline SiteH embed_z3(const std::array<std::int64_t, 3>& m) {
    if (m[0] < 0 || m[1] < 0 || m[2] < 0)
        throw std::domain_error("embed_z3: coordinates must be non-negative");
    return SiteH{static_cast<std::int32_t>(-m[1] - m[2]),
                 static_cast<std::int32_t>(-m[2]),
                 static_cast<std::int32_t>(m[0] + m[1] + m[2])};
}

// Edge classes.  The environment assigns a probability per class (and,
// for upward edges, per layer).
enum class EdgeClass : std::uint8_t {
    Upward = 0,       // oriented, crosses from layer n to n+1
    Horizontal = 1,   // unoriented, inside a layer
    Vertical = 2,     // oriented fiber edge of a ladder
    ParallelCopy = 3, // one copy of a split vertical edge
};

// Canonical bond key: three words fed to the environment hash.  For an
// unoriented edge the endpoint codes are sorted so both traversal
// directions name the same bond; oriented edges keep (tail, head).
struct EdgeKey {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    std::uint64_t c = 0;  // class in the low byte, copy index above it

    friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

inline EdgeKey make_edge_key(std::uint64_t tail_code, std::uint64_t head_code,
                             EdgeClass cls, std::uint16_t copy, bool oriented) {
    EdgeKey k;
    if (oriented || tail_code <= head_code) {
        k.a = tail_code;
        k.b = head_code;
    } else {
        k.a = head_code;
        k.b = tail_code;
    }
    k.c = static_cast<std::uint64_t>(cls) | (static_cast<std::uint64_t>(copy) << 8);
    return k;
}

}  // namespace percolab
