#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "percolab/rng.hpp"

// Open-addressing set of 64-bit site codes; the visited-set workhorse of
// every exploration.  Linear probing, power-of-two capacity, grows at 70%
// load.  The all-ones word is reserved as the empty slot marker; site
// packings never produce it.

namespace percolab {

class CodeSet {
public:
    explicit CodeSet(std::size_t expected = 64) { reset_capacity(expected); }

    // Returns true if the code was newly inserted.
    bool insert(std::uint64_t code) {
        std::size_t i = static_cast<std::size_t>(mix64(code)) & mask_;
        while (slots_[i] != kEmpty) {
            if (slots_[i] == code) return false;
            i = (i + 1) & mask_;
        }
        slots_[i] = code;
        ++count_;
        if (count_ * 10 >= slots_.size() * 7) grow();
        return true;
    }

    bool contains(std::uint64_t code) const {
        std::size_t i = static_cast<std::size_t>(mix64(code)) & mask_;
        while (slots_[i] != kEmpty) {
            if (slots_[i] == code) return true;
            i = (i + 1) & mask_;
        }
        return false;
    }

    std::size_t size() const { return count_; }

    void clear() {
        std::fill(slots_.begin(), slots_.end(), kEmpty);
        count_ = 0;
    }

private:
    static constexpr std::uint64_t kEmpty = ~0ull;

    void reset_capacity(std::size_t expected) {
        std::size_t cap = 64;
        while (cap * 7 < expected * 10) cap <<= 1;
        slots_.assign(cap, kEmpty);
        mask_ = cap - 1;
        count_ = 0;
    }

    void grow() {
        std::vector<std::uint64_t> old = std::move(slots_);
        slots_.assign(old.size() * 2, kEmpty);
        mask_ = slots_.size() - 1;
        count_ = 0;
        for (std::uint64_t code : old)
            if (code != kEmpty) insert(code);
    }

    std::vector<std::uint64_t> slots_;
    std::size_t mask_ = 0;
    std::size_t count_ = 0;
};

// Dense bit grid over a growable box of integer cells; the visited-set
// fast path for layer-local searches whose footprint is one compact blob.
// A hashed set the size of a layer probes DRAM on every membership test;
// the grid stays cache-resident.  Coordinates are absolute, the box
// follows them, and the x origin moves by whole 64-bit words so growth
// copies rows without shifting.
class CellGrid {
public:
    CellGrid() = default;

    // Empty box of the given half-width centered on (cx, cy).  Storage is
    // reused, so a per-layer reset costs one fill.
    void reset(std::int32_t cx, std::int32_t cy, std::int32_t half) {
        half = std::max(half, 64);
        wbits_ = (2 * half + 63) & ~63;
        hbits_ = 2 * half;
        x0_ = cx - half;
        y0_ = cy - half;
        bits_.assign(words_per_row() * static_cast<std::size_t>(hbits_), 0);
    }

    // Persisted box size for re-centering on the next blob.
    std::int32_t half_extent() const { return std::max(wbits_, hbits_) / 2; }

    bool contains(std::int32_t x, std::int32_t y) const {
        const auto dx = static_cast<std::uint64_t>(static_cast<std::int64_t>(x) - x0_);
        const auto dy = static_cast<std::uint64_t>(static_cast<std::int64_t>(y) - y0_);
        if (dx >= static_cast<std::uint64_t>(wbits_) ||
            dy >= static_cast<std::uint64_t>(hbits_))
            return false;
        return (bits_[dy * words_per_row() + (dx >> 6)] >> (dx & 63)) & 1ull;
    }

    // Grows the box to cover the cell; true if the bit was newly set.
    bool insert(std::int32_t x, std::int32_t y) {
        auto dx = static_cast<std::int64_t>(x) - x0_;
        auto dy = static_cast<std::int64_t>(y) - y0_;
        if (dx < 0 || dx >= wbits_ || dy < 0 || dy >= hbits_) {
            grow_to(x, y);
            dx = static_cast<std::int64_t>(x) - x0_;
            dy = static_cast<std::int64_t>(y) - y0_;
        }
        std::uint64_t& word = bits_[static_cast<std::size_t>(dy) * words_per_row() +
                                    (static_cast<std::size_t>(dx) >> 6)];
        const std::uint64_t m = 1ull << (dx & 63);
        if (word & m) return false;
        word |= m;
        return true;
    }

private:
    std::size_t words_per_row() const { return static_cast<std::size_t>(wbits_) >> 6; }

    // Doubles the crossed sides.  The new x origin keeps the old one's
    // word alignment.
    void grow_to(std::int32_t x, std::int32_t y) {
        if (wbits_ == 0) {
            reset(x, y, 64);
            return;
        }
        std::int64_t nx0 = x0_;
        std::int64_t nx1 = static_cast<std::int64_t>(x0_) + wbits_;
        std::int64_t ny0 = y0_;
        std::int64_t ny1 = static_cast<std::int64_t>(y0_) + hbits_;
        if (x < nx0) nx0 = x0_ - ((x0_ - static_cast<std::int64_t>(x) + wbits_ + 63) & ~63ll);
        if (x >= nx1) nx1 = static_cast<std::int64_t>(x) + 1 + wbits_;
        if (y < ny0) ny0 = static_cast<std::int64_t>(y) - hbits_;
        if (y >= ny1) ny1 = static_cast<std::int64_t>(y) + 1 + hbits_;
        const auto nwbits = static_cast<std::int32_t>((nx1 - nx0 + 63) & ~63ll);
        const auto nhbits = static_cast<std::int32_t>(ny1 - ny0);

        const std::size_t nwords = static_cast<std::size_t>(nwbits) >> 6;
        std::vector<std::uint64_t> nb(nwords * static_cast<std::size_t>(nhbits), 0);
        const auto xoff = static_cast<std::size_t>((x0_ - nx0) >> 6);
        const auto yoff = static_cast<std::size_t>(y0_ - ny0);
        for (std::int32_t r = 0; r < hbits_; ++r)
            std::copy(bits_.begin() + static_cast<std::size_t>(r) * words_per_row(),
                      bits_.begin() + static_cast<std::size_t>(r + 1) * words_per_row(),
                      nb.begin() + (yoff + r) * nwords + xoff);
        bits_.swap(nb);
        x0_ = static_cast<std::int32_t>(nx0);
        y0_ = static_cast<std::int32_t>(ny0);
        wbits_ = nwbits;
        hbits_ = nhbits;
    }

    std::vector<std::uint64_t> bits_;
    std::int32_t x0_ = 0, y0_ = 0;      // inclusive lower corner
    std::int32_t wbits_ = 0, hbits_ = 0;  // box size in bits; wbits_ is a word multiple
};

}  // namespace percolab
