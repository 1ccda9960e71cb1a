#pragma once

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>

#include <json.hpp>

#include "percolab/graphs.hpp"

namespace percolab {

using json = nlohmann::json;

namespace detail {

template <class T>
struct OzDim {
    static constexpr int value = 0;
};
template <int D>
struct OzDim<OrientedZ<D>> {
    static constexpr int value = D;
};

template <class B>
inline constexpr bool kLadderBaseOk =
    std::is_same_v<B, OrientedZ<1>> || std::is_same_v<B, OrientedZ<2>> ||
    std::is_same_v<B, OrientedZ<3>> || std::is_same_v<B, UnorientedZ2> ||
    std::is_same_v<B, FiniteGrid> || std::is_same_v<B, Star> ||
    std::is_same_v<B, HexGraph>;

template <class T>
struct SplitOf {
    static constexpr bool ok = false;
};
template <>
struct SplitOf<Ladder<OrientedZ<2>>> {
    static constexpr bool ok = true;
    using type = ParallelSplit<OrientedZ<2>>;
};
template <>
struct SplitOf<Ladder<FiniteGrid>> {
    static constexpr bool ok = true;
    using type = ParallelSplit<FiniteGrid>;
};
template <>
struct SplitOf<Ladder<Star>> {
    static constexpr bool ok = true;
    using type = ParallelSplit<Star>;
};
template <>
struct SplitOf<Ladder<HexGraph>> {
    static constexpr bool ok = true;
    using type = ParallelSplit<HexGraph>;
};

template <class G>
json base_to_json(const G& g) {
    using T = std::decay_t<G>;
    if constexpr (std::is_same_v<T, HexGraph>) {
        return json{{"kind", g.with_horizontal ? "hex_h" : "hex_oriented"}};
    } else if constexpr (std::is_same_v<T, Z2ZPlusGraph>) {
        return json{{"kind", "z2xzplus"}};
    } else if constexpr (OzDim<T>::value > 0) {
        return json{{"kind", "oriented_z"}, {"d", OzDim<T>::value}};
    } else if constexpr (std::is_same_v<T, UnorientedZ2>) {
        return json{{"kind", "z2_unoriented"}};
    } else if constexpr (std::is_same_v<T, FiniteGrid>) {
        return json{{"kind", "finite_grid"},
                    {"w", g.w},
                    {"h", g.h},
                    {"boundary", g.torus ? "torus" : "open"}};
    } else if constexpr (std::is_same_v<T, Star>) {
        return json{{"kind", "star"}, {"leaves", g.leaves}};
    } else if constexpr (requires { g.ladder; g.delta; }) {
        json j{{"kind", "parallel_split"}, {"delta", g.delta}};
        j["base"] = base_to_json(g.ladder);
        return j;
    } else {
        json j{{"kind", "ladder"}};
        j["base"] = base_to_json(g.base);
        j["fiber"] = g.zmod == 0 ? json("zplus") : json{{"zmod", g.zmod}};
        return j;
    }
}

inline std::int64_t require_int(const json& j, const char* field, std::int64_t lo,
                                std::int64_t hi, const char* kind) {
    if (!j.contains(field))
        throw std::invalid_argument(std::string("graph spec \"") + kind +
                                    "\" is missing field \"" + field + "\"");
    const json& v = j.at(field);
    if (!v.is_number_integer())
        throw std::invalid_argument(std::string("graph spec field \"") + field +
                                    "\" must be an integer");
    const std::int64_t n = v.get<std::int64_t>();
    if (n < lo || n > hi)
        throw std::invalid_argument(std::string("graph spec field \"") + field +
                                    "\" is out of range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
    return n;
}

}  // namespace detail

inline json graph_to_json(const AnyGraph& g) {
    return std::visit([](const auto& gg) { return detail::base_to_json(gg); }, g);
}

inline std::string graph_kind_name(const AnyGraph& g) {
    return graph_to_json(g).at("kind").get<std::string>();
}

inline AnyGraph graph_from_shorthand(const std::string& s) {
    if (s == "hex" || s == "hex_oriented") return HexGraph{false};
    if (s == "hex_h") return HexGraph{true};
    if (s == "z2" || s == "z2_unoriented") return UnorientedZ2{};
    if (s == "z2xz" || s == "z2xzplus") return Z2ZPlusGraph{};
    if (s == "z1-oriented" || s == "oz1") return OrientedZ<1>{};
    if (s == "z2-oriented" || s == "oz2") return OrientedZ<2>{};
    if (s == "z3-oriented" || s == "oz3") return OrientedZ<3>{};
    if (s == "z4-oriented" || s == "oz4") return OrientedZ<4>{};
    throw std::invalid_argument(
        "unknown graph shorthand \"" + s +
        "\" (expected hex, hex_h, z2, z2xz, z1-oriented..z4-oriented, or a JSON spec)");
}

inline AnyGraph graph_from_json(const json& j);

namespace detail {

inline AnyGraph ladder_from_json(const json& j) {
    if (!j.contains("base"))
        throw std::invalid_argument("graph spec \"ladder\" is missing field \"base\"");
    AnyGraph base = graph_from_json(j.at("base"));
    std::int32_t zmod = 0;
    if (j.contains("fiber")) {
        const json& f = j.at("fiber");
        if (f.is_string()) {
            if (f.get<std::string>() != "zplus")
                throw std::invalid_argument(
                    "ladder fiber must be \"zplus\" or {\"zmod\": k}");
        } else if (f.is_object()) {
            zmod = static_cast<std::int32_t>(require_int(f, "zmod", 2, 4095, "ladder"));
        } else {
            throw std::invalid_argument("ladder fiber must be \"zplus\" or {\"zmod\": k}");
        }
    }
    return std::visit(
        [&](auto&& b) -> AnyGraph {
            using B = std::decay_t<decltype(b)>;
            if constexpr (kLadderBaseOk<B>) {
                return Ladder<B>(b, zmod);
            } else {
                const std::string got = base_to_json(b).at("kind");
                throw std::invalid_argument("ladder base kind is not supported: " + got);
            }
        },
        base);
}

inline AnyGraph split_from_json(const json& j) {
    if (!j.contains("base"))
        throw std::invalid_argument("graph spec \"parallel_split\" is missing field \"base\"");
    AnyGraph base = graph_from_json(j.at("base"));
    const auto delta =
        static_cast<std::int32_t>(require_int(j, "delta", 1, 64, "parallel_split"));
    return std::visit(
        [&](auto&& b) -> AnyGraph {
            using T = std::decay_t<decltype(b)>;
            if constexpr (SplitOf<T>::ok) {
                using S = typename SplitOf<T>::type;
                return S(b, delta);
            } else {
                const std::string got = base_to_json(b).at("kind");
                throw std::invalid_argument(
                    "parallel_split base must be a ladder over oriented_z d=2, finite_grid, "
                    "star, or hex, got: " +
                    got);
            }
        },
        base);
}

}  // namespace detail

inline AnyGraph graph_from_json(const json& j) {
    if (j.is_string()) return graph_from_shorthand(j.get<std::string>());
    if (!j.is_object())
        throw std::invalid_argument("graph spec must be a JSON object or a shorthand string");
    if (!j.contains("kind") || !j.at("kind").is_string())
        throw std::invalid_argument("graph spec needs a string field \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();

    if (kind == "hex" || kind == "hex_oriented") return HexGraph{false};
    if (kind == "hex_h" || kind == "hex_with_horizontal") return HexGraph{true};
    if (kind == "z2" || kind == "z2_unoriented") return UnorientedZ2{};
    if (kind == "z2xz" || kind == "z2xzplus") return Z2ZPlusGraph{};
    if (kind == "oriented_z") {
        switch (detail::require_int(j, "d", 1, 4, "oriented_z")) {
            case 1: return OrientedZ<1>{};
            case 2: return OrientedZ<2>{};
            case 3: return OrientedZ<3>{};
            default: return OrientedZ<4>{};
        }
    }
    if (kind == "finite_grid") {
        const auto w = static_cast<std::int32_t>(
            detail::require_int(j, "w", 1, (1 << 20) - 1, "finite_grid"));
        const auto h = static_cast<std::int32_t>(
            detail::require_int(j, "h", 1, (1 << 20) - 1, "finite_grid"));
        bool torus = false;
        if (j.contains("boundary")) {
            const json& b = j.at("boundary");
            if (!b.is_string() ||
                (b.get<std::string>() != "open" && b.get<std::string>() != "torus"))
                throw std::invalid_argument("finite_grid boundary must be \"open\" or \"torus\"");
            torus = b.get<std::string>() == "torus";
        }
        return FiniteGrid(w, h, torus);
    }
    if (kind == "star") {
        return Star(static_cast<std::int32_t>(
            detail::require_int(j, "leaves", 1, 1'000'000, "star")));
    }
    if (kind == "ladder") return detail::ladder_from_json(j);
    if (kind == "parallel_split") return detail::split_from_json(j);
    throw std::invalid_argument("unknown graph kind: \"" + kind + "\"");
}

// Accepts either a shorthand string or a JSON document.
inline AnyGraph parse_graph(const std::string& text) {
    std::size_t a = 0, b = text.size();
    while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
    const std::string body = text.substr(a, b - a);
    if (!body.empty() && (body.front() == '{' || body.front() == '"')) {
        json j;
        try {
            j = json::parse(body);
        } catch (const json::parse_error& e) {
            throw std::invalid_argument(std::string("graph spec is not valid JSON: ") +
                                        e.what());
        }
        return graph_from_json(j);
    }
    return graph_from_shorthand(body);
}

}  // namespace percolab
