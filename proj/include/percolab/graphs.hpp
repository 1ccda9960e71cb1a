#pragma once

#include <array>
#include <concepts>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <utility>
#include <variant>

#include "percolab/lattice.hpp"

// Graphs are implicit: a graph object only knows how to enumerate the
// out-edges of a site and how to pack a site into a 64-bit code.  Codes
// are the identity used for visited sets and for environment hashing, so
// two graphs sharing a packing (hex and its z2xz+ subgraph) see the same
// randomness for shared edges under one environment.

namespace percolab {

template <class S>
struct OutEdge {
    S head;
    EdgeClass cls;
    std::uint16_t copy = 0;  // 1..delta on split vertical edges, else 0
    bool oriented = true;    // unoriented edges are enumerated from both endpoints
};

template <class G>
concept GraphLike = requires(const G& g, const typename G::Site& v) {
    typename G::Site;
    { g.origin() } -> std::same_as<typename G::Site>;
    { g.encode(v) } -> std::same_as<std::uint64_t>;
    { g.height(v) } -> std::convertible_to<int>;
    { g.max_degree() } -> std::convertible_to<int>;
    g.for_out_edges(v, [](const OutEdge<typename G::Site>&) {});
};

// Graphs with square layers expose the in-layer l1 radius used by R_n,
// measured from the center of the site's layer.  Half-integer values are
// exact in a double.
template <class G>
concept HasLayerRadius = requires(const G& g, const typename G::Site& v) {
    { g.layer_radius(v) } -> std::convertible_to<double>;
};

// Graphs whose layers are planar integer grids also expose each site's
// in-layer cell; layer-local searches then track visits in a dense bit
// grid instead of a hashed set.
template <class G>
concept HasLayerCell = requires(const G& g, const typename G::Site& v) {
    { g.layer_cell(v) } -> std::convertible_to<std::array<std::int32_t, 2>>;
};

// Split graphs expose their copy count; everything else samples copies as
// plain edges.
template <class G>
concept HasSplitDelta = requires(const G& g) {
    { g.split_delta() } -> std::convertible_to<int>;
};

template <GraphLike G>
int split_delta_of(const G& g) {
    if constexpr (HasSplitDelta<G>)
        return g.split_delta();
    else
        return 1;
}

// 52-bit site packing shared by the hex-lattice graphs: layer in the top
// 12 bits, in-layer coordinates offset into 20 bits each.
inline std::uint64_t encode_hex_site(const SiteH& v) {
    constexpr std::int32_t B = 1 << 19;
    if (v.a1 <= -B || v.a1 >= B || v.a2 <= -B || v.a2 >= B || v.a3 < 0 ||
        v.a3 >= (1 << 12))
        throw std::out_of_range("hex site outside the 52-bit packing range");
    return (static_cast<std::uint64_t>(v.a3) << 40) |
           (static_cast<std::uint64_t>(v.a1 + B) << 20) |
           static_cast<std::uint64_t>(v.a2 + B);
}

// Upward edges only: transitive oriented graph with out-degree 4.  With
// with_horizontal set, the unoriented in-layer edges are added.
struct HexGraph {
    bool with_horizontal = false;

    using Site = SiteH;
    static constexpr int code_bits = 52;

    Site origin() const { return {}; }
    std::uint64_t encode(const Site& v) const { return encode_hex_site(v); }
    int height(const Site& v) const { return v.a3; }
    int max_degree() const { return with_horizontal ? 12 : 8; }
    // l1 distance from the vertical axis through the origin, in cartesian
    // coordinates; the layer-n sublattice is centered at (n/2, n/2).
    double layer_radius(const Site& v) const {
        return 0.5 * (std::abs(2 * v.a1 + v.a3) + std::abs(2 * v.a2 + v.a3));
    }
    std::array<std::int32_t, 2> layer_cell(const Site& v) const { return {v.a1, v.a2}; }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        for (const SiteH& w : neighbors_up(v))
            f(OutEdge<Site>{w, EdgeClass::Upward, 0, true});
        if (with_horizontal)
            for (const SiteH& w : neighbors_horizontal(v))
                f(OutEdge<Site>{w, EdgeClass::Horizontal, 0, false});
    }
};

// What remains of the hex lattice after deleting the three slanted upward
// bonds at every site: the straight vertical bond plus the horizontal
// ones, i.e. Z^2 x Z_+.  Site codes (and hence edge randomness) are shared
// with HexGraph, making this a subgraph of it under any fixed environment.
struct Z2ZPlusGraph {
    using Site = SiteH;
    static constexpr int code_bits = 52;

    Site origin() const { return {}; }
    std::uint64_t encode(const Site& v) const { return encode_hex_site(v); }
    int height(const Site& v) const { return v.a3; }
    int max_degree() const { return 6; }
    // Columns rise straight up, so layers share the origin's center.
    double layer_radius(const Site& v) const {
        return static_cast<double>(std::abs(v.a1) + std::abs(v.a2));
    }
    std::array<std::int32_t, 2> layer_cell(const Site& v) const { return {v.a1, v.a2}; }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        f(OutEdge<Site>{SiteH{v.a1, v.a2, v.a3 + 1}, EdgeClass::Upward, 0, true});
        for (const SiteH& w : neighbors_horizontal(v))
            f(OutEdge<Site>{w, EdgeClass::Horizontal, 0, false});
    }
};

// Oriented Z^d on the non-negative orthant, edges pointing away from the
// origin.  Height is the l1 norm.
template <int D>
struct OrientedZ {
    static_assert(D >= 1 && D <= 4);

    using Site = std::array<std::int32_t, D>;
    static constexpr int code_bits = 16 * D;

    Site origin() const { return {}; }
    std::uint64_t encode(const Site& v) const {
        std::uint64_t code = 0;
        for (int i = 0; i < D; ++i) {
            if (v[i] < 0 || v[i] >= (1 << 16))
                throw std::out_of_range("OrientedZ site outside the 16-bit packing range");
            code = (code << 16) | static_cast<std::uint64_t>(v[i]);
        }
        return code;
    }
    int height(const Site& v) const {
        int s = 0;
        for (int i = 0; i < D; ++i) s += v[i];
        return s;
    }
    int max_degree() const { return 2 * D; }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        for (int i = 0; i < D; ++i) {
            Site w = v;
            ++w[i];
            f(OutEdge<Site>{w, EdgeClass::Upward, 0, true});
        }
    }
};

// Unoriented Z^2; substrate for chi and for box-crossing estimates.  All
// edges use the horizontal class, so p_h is the relevant parameter.
struct UnorientedZ2 {
    using Site = std::array<std::int32_t, 2>;
    static constexpr int code_bits = 48;

    Site origin() const { return {}; }
    std::uint64_t encode(const Site& v) const {
        constexpr std::int32_t B = 1 << 23;
        if (v[0] <= -B || v[0] >= B || v[1] <= -B || v[1] >= B)
            throw std::out_of_range("UnorientedZ2 site outside the 24-bit packing range");
        return (static_cast<std::uint64_t>(v[0] + B) << 24) |
               static_cast<std::uint64_t>(v[1] + B);
    }
    int height(const Site&) const { return 0; }
    int max_degree() const { return 4; }
    double layer_radius(const Site& v) const {
        return static_cast<double>(std::abs(v[0]) + std::abs(v[1]));
    }
    std::array<std::int32_t, 2> layer_cell(const Site& v) const { return v; }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        f(OutEdge<Site>{{v[0] + 1, v[1]}, EdgeClass::Horizontal, 0, false});
        f(OutEdge<Site>{{v[0] - 1, v[1]}, EdgeClass::Horizontal, 0, false});
        f(OutEdge<Site>{{v[0], v[1] + 1}, EdgeClass::Horizontal, 0, false});
        f(OutEdge<Site>{{v[0], v[1] - 1}, EdgeClass::Horizontal, 0, false});
    }
};

// w x h grid with unoriented nearest-neighbor edges.  Open boundary by
// default; the torus variant wraps both directions and needs w,h >= 3 so
// wrap edges are not doubled.
struct FiniteGrid {
    std::int32_t w = 1;
    std::int32_t h = 1;
    bool torus = false;

    using Site = std::array<std::int32_t, 2>;
    static constexpr int code_bits = 40;

    FiniteGrid() = default;
    FiniteGrid(std::int32_t w_, std::int32_t h_, bool torus_ = false)
        : w(w_), h(h_), torus(torus_) {
        if (w < 1 || h < 1 || w >= (1 << 20) || h >= (1 << 20))
            throw std::domain_error("FiniteGrid: side lengths must be in [1, 2^20)");
        if (torus && (w < 3 || h < 3))
            throw std::domain_error("FiniteGrid: torus boundary needs w,h >= 3");
    }

    Site origin() const { return {}; }
    std::uint64_t encode(const Site& v) const {
        return (static_cast<std::uint64_t>(v[1]) << 20) | static_cast<std::uint64_t>(v[0]);
    }
    int height(const Site&) const { return 0; }
    int max_degree() const {
        auto dir = [this](std::int32_t n) { return torus ? 2 : (n > 2 ? 2 : (n > 1 ? 1 : 0)); };
        return dir(w) + dir(h);
    }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        auto emit = [&](std::int32_t x, std::int32_t y) {
            f(OutEdge<Site>{{x, y}, EdgeClass::Horizontal, 0, false});
        };
        if (v[0] + 1 < w) emit(v[0] + 1, v[1]);
        else if (torus) emit(0, v[1]);
        if (v[0] >= 1) emit(v[0] - 1, v[1]);
        else if (torus) emit(w - 1, v[1]);
        if (v[1] + 1 < h) emit(v[0], v[1] + 1);
        else if (torus) emit(v[0], 0);
        if (v[1] >= 1) emit(v[0], v[1] - 1);
        else if (torus) emit(v[0], h - 1);
    }
};

// Star K_{1,k}: hub 0 joined to leaves 1..k.
struct Star {
    std::int32_t leaves = 3;

    using Site = std::int32_t;
    static constexpr int code_bits = 32;

    Star() = default;
    explicit Star(std::int32_t k) : leaves(k) {
        if (k < 1) throw std::domain_error("Star: need at least one leaf");
    }

    Site origin() const { return 0; }
    std::uint64_t encode(const Site& v) const { return static_cast<std::uint64_t>(v); }
    int height(const Site&) const { return 0; }
    int max_degree() const { return leaves; }

    template <class F>
    void for_out_edges(const Site& v, F&& f) const {
        if (v == 0)
            for (std::int32_t i = 1; i <= leaves; ++i)
                f(OutEdge<Site>{i, EdgeClass::Horizontal, 0, false});
        else
            f(OutEdge<Site>{0, EdgeClass::Horizontal, 0, false});
    }
};

// Ladder graph base x fiber: stacked copies of the base joined by
// upward-oriented vertical edges.  fiber is the half-line when zmod == 0,
// otherwise the cycle Z_zmod.  Base edges keep class and orientation.
// Height adds the base height and the fiber level (cyclic fibers add
// nothing).
template <class B>
struct Ladder {
    B base;
    std::int32_t zmod = 0;

    using Site = std::pair<typename B::Site, std::int32_t>;
    static constexpr int fiber_bits = 12;
    static constexpr int code_bits = B::code_bits + fiber_bits;
    static_assert(code_bits <= 64, "base packing too wide for a ladder fiber");

    Ladder() = default;
    explicit Ladder(B b, std::int32_t zmod_ = 0) : base(std::move(b)), zmod(zmod_) {
        if (zmod != 0 && zmod < 2)
            throw std::domain_error("Ladder: cyclic fiber needs modulus >= 2");
        if (zmod >= (1 << fiber_bits))
            throw std::domain_error("Ladder: fiber modulus exceeds the 12-bit packing");
    }

    Site origin() const { return {base.origin(), 0}; }
    std::uint64_t encode(const Site& s) const {
        if (s.second < 0 || s.second >= (1 << fiber_bits))
            throw std::out_of_range("Ladder fiber level outside the 12-bit packing range");
        return (base.encode(s.first) << fiber_bits) | static_cast<std::uint64_t>(s.second);
    }
    int height(const Site& s) const {
        return base.height(s.first) + (zmod == 0 ? s.second : 0);
    }
    int max_degree() const { return base.max_degree() + 2; }

    template <class F>
    void for_out_edges(const Site& s, F&& f) const {
        base.for_out_edges(s.first, [&](const OutEdge<typename B::Site>& e) {
            f(OutEdge<Site>{{e.head, s.second}, e.cls, e.copy, e.oriented});
        });
        const std::int32_t up = zmod == 0 ? s.second + 1 : (s.second + 1) % zmod;
        f(OutEdge<Site>{{s.first, up}, EdgeClass::Vertical, 0, true});
    }
};

template <class B>
Ladder<B> make_ladder(B base, std::int32_t zmod = 0) {
    return Ladder<B>(std::move(base), zmod);
}

// The ladder with every vertical edge split into delta parallel copies
// sharing its endpoints.  A copy opens with probability
// 1 - (1-p)^(1/delta), so the bundle opens with the vertical edge's
// original probability.
template <class B>
struct ParallelSplit {
    Ladder<B> ladder;
    std::int32_t delta = 1;

    using Site = typename Ladder<B>::Site;
    static constexpr int code_bits = Ladder<B>::code_bits;

    ParallelSplit() = default;
    ParallelSplit(Ladder<B> l, std::int32_t d) : ladder(std::move(l)), delta(d) {
        if (d < 1) throw std::domain_error("ParallelSplit: copy count must be >= 1");
    }

    Site origin() const { return ladder.origin(); }
    std::uint64_t encode(const Site& s) const { return ladder.encode(s); }
    int height(const Site& s) const { return ladder.height(s); }
    int max_degree() const { return ladder.base.max_degree() + 2 * delta; }
    int split_delta() const { return delta; }

    template <class F>
    void for_out_edges(const Site& s, F&& f) const {
        ladder.base.for_out_edges(s.first, [&](const OutEdge<typename B::Site>& e) {
            f(OutEdge<Site>{{e.head, s.second}, e.cls, e.copy, e.oriented});
        });
        const std::int32_t up =
            ladder.zmod == 0 ? s.second + 1 : (s.second + 1) % ladder.zmod;
        for (std::int32_t j = 1; j <= delta; ++j)
            f(OutEdge<Site>{{s.first, up}, EdgeClass::ParallelCopy,
                            static_cast<std::uint16_t>(j), true});
    }
};

template <class B>
ParallelSplit<B> split_vertical(Ladder<B> ladder, std::int32_t delta) {
    return ParallelSplit<B>(std::move(ladder), delta);
}

using AnyGraph =
    std::variant<HexGraph, Z2ZPlusGraph, OrientedZ<1>, OrientedZ<2>, OrientedZ<3>,
                 OrientedZ<4>, UnorientedZ2, FiniteGrid, Star, Ladder<OrientedZ<1>>,
                 Ladder<OrientedZ<2>>, Ladder<OrientedZ<3>>, Ladder<UnorientedZ2>,
                 Ladder<FiniteGrid>, Ladder<Star>, Ladder<HexGraph>,
                 ParallelSplit<OrientedZ<2>>, ParallelSplit<FiniteGrid>,
                 ParallelSplit<Star>, ParallelSplit<HexGraph>>;

static_assert(GraphLike<HexGraph>);
static_assert(GraphLike<Z2ZPlusGraph>);
static_assert(GraphLike<OrientedZ<3>>);
static_assert(GraphLike<UnorientedZ2>);
static_assert(GraphLike<FiniteGrid>);
static_assert(GraphLike<Star>);
static_assert(GraphLike<Ladder<OrientedZ<2>>>);
static_assert(GraphLike<ParallelSplit<HexGraph>>);
static_assert(HasLayerRadius<HexGraph> && HasLayerRadius<Z2ZPlusGraph>);

}  // namespace percolab
