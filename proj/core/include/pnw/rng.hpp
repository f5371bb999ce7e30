#pragma once

// Counter-based random streams (Philox4x32-10).
//
// Every Monte Carlo consumer takes an explicit Stream; replicas get disjoint
// streams derived from (seed, stream id), so runs are reproducible and safe
// to parallelize without shared state. The seed is recorded verbatim in all
// experiment outputs.

#include <array>
#include <cmath>
#include <cstdint>
#include <complex>
#include <numbers>

namespace pnw {

namespace detail {

// One Philox 4x32 round. Multipliers and Weyl constants are the published ones.
struct PhiloxState {
    std::array<std::uint32_t, 4> ctr;
    std::array<std::uint32_t, 2> key;
};

inline void philox_round(PhiloxState& s) {
    constexpr std::uint64_t M0 = 0xD2511F53ull;
    constexpr std::uint64_t M1 = 0xCD9E8D57ull;
    const std::uint64_t p0 = M0 * s.ctr[0];
    const std::uint64_t p1 = M1 * s.ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    s.ctr = {hi1 ^ s.ctr[1] ^ s.key[0], lo1, hi0 ^ s.ctr[3] ^ s.key[1], lo0};
}

inline void philox_bump(PhiloxState& s) {
    s.key[0] += 0x9E3779B9u;
    s.key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    PhiloxState s{ctr, key};
    philox_round(s);
    for (int r = 1; r < 10; ++r) {
        philox_bump(s);
        philox_round(s);
    }
    return s.ctr;
}

// splitmix64 finalizer; used only to derive child stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

} // namespace detail

class Stream {
  public:
    Stream() : Stream(0, 0) {}
    Stream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), id_(stream_id), block_(0), pos_(4), have_cached_(false), cached_(0) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t id() const { return id_; }

    // Child stream with an independent counter space; deterministic in (k, this id).
    Stream fork(std::uint64_t k) const {
        return Stream(seed_, detail::mix64(id_ ^ detail::mix64(k)));
    }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t lo = next_u32();
        const std::uint64_t hi = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform on (0, 1]: 53-bit resolution, never zero, so ln(u) is always finite.
    double uniform01() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value of each pair is cached.
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double t = 2.0 * std::numbers::pi * uniform01();
        cached_ = r * std::sin(t);
        have_cached_ = true;
        return r * std::cos(t);
    }

    // Circularly symmetric complex Gaussian with E|z|^2 = var, E[z^2] = 0.
    std::complex<double> cgaussian(double var) {
        const double s = std::sqrt(var * 0.5);
        const double r = std::sqrt(-2.0 * std::log(uniform01()));
        const double t = 2.0 * std::numbers::pi * uniform01();
        return {s * r * std::cos(t), s * r * std::sin(t)};
    }

  private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
            static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)};
        const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed_),
                                                  static_cast<std::uint32_t>(seed_ >> 32)};
        buf_ = detail::philox4x32_10(ctr, key);
        ++block_;
        pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t block_;
    std::array<std::uint32_t, 4> buf_{};
    int pos_;
    bool have_cached_;
    double cached_;
};

} // namespace pnw
