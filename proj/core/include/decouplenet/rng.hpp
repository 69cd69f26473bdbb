#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace dcn {

// Counter-based pseudo-random generator (Philox-4x32, 10 rounds).
//
// A generator is addressed by a (seed, stream) pair: the seed keys the block
// cipher, the stream occupies the upper half of the 128-bit counter, and the
// draw index occupies the lower half.  Identical (seed, stream) pairs yield
// identical draw sequences on every platform; distinct streams are
// statistically independent, which makes replications and per-model sampling
// reproducible regardless of execution order.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    // Next 64 uniform bits.
    std::uint64_t next() noexcept {
        if (idx_ == 0) {
            const auto w = block(seed_, block_++, stream_);
            out_[0] = (static_cast<std::uint64_t>(w[1]) << 32) | w[0];
            out_[1] = (static_cast<std::uint64_t>(w[3]) << 32) | w[2];
            idx_ = 2;
        }
        return out_[2 - idx_--];
    }

    // Uniform draw strictly inside (0,1): (k + 1/2) / 2^52 with k on 52 bits.
    double uniform_open() noexcept {
        return (static_cast<double>(next() >> 12) + 0.5) * 0x1p-52;
    }

    // Standard exponential via inversion.
    double exponential() noexcept { return -std::log(uniform_open()); }

    // Uniform integer in [0, n), n >= 1 (Lemire's multiply-shift rejection).
    std::uint64_t below(std::uint64_t n) noexcept {
        std::uint64_t x = next();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto lo = static_cast<std::uint64_t>(m);
        if (lo < n) {
            const std::uint64_t t = (-n) % n;
            while (lo < t) {
                x = next();
                m = static_cast<__uint128_t>(x) * n;
                lo = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Independent generator addressed by (seed, h(stream, tag)).  Pure: the
    // parent state is untouched, so derived streams can be set up in any
    // order.  Never replays this generator's sequence.
    Rng derive(std::uint64_t tag) const noexcept {
        return Rng(seed_, mix(mix(stream_) ^ (tag * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL)));
    }

    // Fresh child stream; consecutive calls yield distinct children.
    Rng split() noexcept { return derive(0x8000000000000000ULL ^ ++split_count_); }

private:
    static std::uint64_t mix(std::uint64_t z) noexcept { // splitmix64 finalizer
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::array<std::uint32_t, 4> block(std::uint64_t key, std::uint64_t ctr_lo,
                                              std::uint64_t ctr_hi) noexcept {
        auto k0 = static_cast<std::uint32_t>(key);
        auto k1 = static_cast<std::uint32_t>(key >> 32);
        auto c0 = static_cast<std::uint32_t>(ctr_lo);
        auto c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
        auto c2 = static_cast<std::uint32_t>(ctr_hi);
        auto c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            const std::uint64_t p0 = 0xD2511F53ULL * c0;
            const std::uint64_t p1 = 0xCD9E8D57ULL * c2;
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
        }
        return {c0, c1, c2, c3};
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::uint64_t split_count_ = 0;
    std::uint64_t out_[2] = {0, 0};
    int idx_ = 0;
};

} // namespace dcn
