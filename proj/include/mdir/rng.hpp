#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace mdir {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
//
// A stream is addressed by (seed, stream id). Replicate b of a resampling run
// draws from stream b, so the numbers it sees depend only on (seed, b) and not
// on which thread ran it or in which order. That is what makes results
// bit-identical for any worker count.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          prefix_{static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    std::uint32_t next_u32() {
        if (have_ == 0) refill();
        return buf_[4 - have_--];
    }

    std::uint64_t next_u64() {
        std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // Uniform on [0,1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n). Lemire's multiply-reject method.
    std::uint64_t below(std::uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            std::uint64_t t = (-n) % n;
            while (lo < t) {
                m = static_cast<unsigned __int128>(next_u64()) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    double exponential(double rate) { return -std::log1p(-next_double()) / rate; }

private:
    void refill() {
        std::uint32_t c0 = prefix_[0], c1 = prefix_[1];
        std::uint32_t c2 = static_cast<std::uint32_t>(block_);
        std::uint32_t c3 = static_cast<std::uint32_t>(block_ >> 32);
        std::uint32_t k0 = key_[0], k1 = key_[1];
        for (int r = 0; r < 10; ++r) {
            std::uint64_t p0 = 0xD2511F53ULL * c0;
            std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            std::uint32_t n0 = static_cast<std::uint32_t>(p1 >> 32) ^ c1 ^ k0;
            std::uint32_t n1 = static_cast<std::uint32_t>(p1);
            std::uint32_t n2 = static_cast<std::uint32_t>(p0 >> 32) ^ c3 ^ k1;
            std::uint32_t n3 = static_cast<std::uint32_t>(p0);
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9U;
            k1 += 0xBB67AE85U;
        }
        buf_ = {c0, c1, c2, c3};
        ++block_;
        have_ = 4;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> prefix_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int have_ = 0;
};

// In-place Fisher-Yates shuffle driven by one stream.
template <class T>
void shuffle(std::vector<T>& v, RngStream& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// 64-bit mix (splitmix64 finalizer). Used to derive sub-seeds, e.g. the seed
// of a nested permutation run from (study seed, replicate index).
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
    return mix64(seed ^ mix64(salt));
}

}  // namespace mdir
