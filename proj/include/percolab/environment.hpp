#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "percolab/lattice.hpp"
#include "percolab/rng.hpp"

// Layered random environment with parameters (delta, p_g, p_b, p_h):
// each layer is independently bad with probability delta; upward edges
// open with p_b in bad layers and p_g in good ones; horizontal edges open
// with p_h regardless of layer.  All draws are keyed hashes, so a fixed
// (params, seed) pair answers any query sequence identically.

namespace percolab {

struct EnvParams {
    double delta = 0.0;
    double p_g = 0.0;
    double p_b = 0.0;
    double p_h = 0.0;

    // Homogeneous Bernoulli(p) on every edge class.
    static EnvParams uniform(double p) { return {0.0, p, p, p}; }
};

enum class LayerType : std::uint8_t { Good = 0, Bad = 1 };

enum class SamplingMode : std::uint8_t { Bernoulli, UniformCoupled };

// A copy of a split vertical edge is open with 1-(1-p)^(1/delta), making
// the whole bundle open with probability p.
inline double split_copy_prob(double p, int delta) {
    if (delta < 1) throw std::domain_error("split_copy_prob: delta must be >= 1");
    if (delta == 1) return p;
    return 1.0 - std::pow(1.0 - p, 1.0 / static_cast<double>(delta));
}

class LayeredEnv {
public:
    LayeredEnv(EnvParams params, std::uint64_t seed,
               SamplingMode mode = SamplingMode::Bernoulli)
        : params_(params), seed_(seed), mode_(mode) {
        auto check = [](double p, const char* name) {
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument(std::string("LayeredEnv: ") + name +
                                            " must lie in [0,1]");
        };
        check(params.delta, "delta");
        check(params.p_g, "p_g");
        check(params.p_b, "p_b");
        check(params.p_h, "p_h");
        if (params.p_g < params.p_b)
            throw std::invalid_argument("LayeredEnv: model assumes p_g >= p_b");
    }

    const EnvParams& params() const { return params_; }
    std::uint64_t seed() const { return seed_; }
    SamplingMode mode() const { return mode_; }

    LayerType layer_type(int n) const {
        if (n < 0) throw std::invalid_argument("layer_type: layer index must be >= 0");
        return unit_at(seed_, NS_LAYER, static_cast<std::uint64_t>(n)) < params_.delta
                   ? LayerType::Bad
                   : LayerType::Good;
    }

    // Probability of the upward edge out of a layer-n site.
    double layer_prob(int n) const {
        return layer_type(n) == LayerType::Bad ? params_.p_b : params_.p_g;
    }

    // Probability of an edge by class.  Vertical ladder edges follow the
    // layer rule of their tail (identical to upward edges; homogeneous
    // environments make the distinction vacuous).  split_delta applies
    // only to parallel copies.
    double edge_prob(EdgeClass cls, int tail_height, int split_delta = 1) const {
        switch (cls) {
            case EdgeClass::Upward:
            case EdgeClass::Vertical:
                return layer_prob(tail_height);
            case EdgeClass::Horizontal:
                return params_.p_h;
            case EdgeClass::ParallelCopy:
                return split_copy_prob(layer_prob(tail_height), split_delta);
        }
        throw std::domain_error("edge_prob: unknown edge class");
    }

    // Latent uniform of a bond; openness thresholds this in both modes so
    // the open set is monotone in every probability parameter.
    double edge_unit(const EdgeKey& k) const {
        return unit_at(seed_, NS_EDGE, k.a, k.b, k.c);
    }

    // Equivalent to edge_unit(k) < prob (latents live in [0,1)); the
    // trivial probabilities skip the hash.
    bool open(const EdgeKey& k, double prob) const {
        if (prob <= 0.0) return false;
        if (prob >= 1.0) return true;
        return edge_unit(k) < prob;
    }

    bool open(const EdgeKey& k, EdgeClass cls, int tail_height, int split_delta = 1) const {
        return open(k, edge_prob(cls, tail_height, split_delta));
    }

    // Exposed only in UniformCoupled mode; open(k, p) == (latent < p).
    double latent_uniform(const EdgeKey& k) const {
        if (mode_ != SamplingMode::UniformCoupled)
            throw std::domain_error("latent_uniform: environment not in UniformCoupled mode");
        return edge_unit(k);
    }

    // Site states for site percolation; drawn from their own namespace.
    double site_unit(std::uint64_t site_code) const {
        return unit_at(seed_, NS_SITE, site_code);
    }

    bool site_open(std::uint64_t site_code, double prob) const {
        if (prob <= 0.0) return false;
        if (prob >= 1.0) return true;
        return site_unit(site_code) < prob;
    }

    // Probability that a site at the given height is open; layered site
    // environments reuse the good/bad layer draw.
    double site_prob(int height) const { return layer_prob(height); }

    // Raw keyed draw for processes that need randomness outside the edge
    // and site namespaces (the coupling uses the NS_CPL_* spaces).
    double unit(std::uint64_t ns, std::uint64_t a, std::uint64_t b = 0,
                std::uint64_t c = 0) const {
        return unit_at(seed_, ns, a, b, c);
    }

private:
    EnvParams params_;
    std::uint64_t seed_;
    SamplingMode mode_;
};

}  // namespace percolab
