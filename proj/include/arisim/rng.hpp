#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

// Counter-based random streams. Every stream is addressed by
// (seed, realization index, purpose tag, lane) so any realization can be
// generated on any thread, in any order, with identical results.

namespace arisim {

namespace philox {

// Philox4x32-10 block cipher (Salmon et al., "Parallel random numbers:
// as easy as 1, 2, 3").
inline std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                          std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t mul0 = 0xD2511F53u;
    constexpr std::uint32_t mul1 = 0xCD9E8D57u;
    constexpr std::uint32_t weyl0 = 0x9E3779B9u;
    constexpr std::uint32_t weyl1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(mul0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(mul1) * ctr[2];
        const std::array<std::uint32_t, 4> next = {
            std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
            std::uint32_t(p1),
            std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
            std::uint32_t(p0),
        };
        ctr = next;
        key[0] += weyl0;
        key[1] += weyl1;
    }
    return ctr;
}

} // namespace philox

// Purpose tags keep draws for different quantities in disjoint streams even
// when they share a realization index.
enum class StreamTag : std::uint16_t {
    Angles = 1,
    ChannelH2 = 2,
    ChannelHk = 3,
    ChannelDk = 4,
    PhaseNoise = 5,
    PilotThermal = 6,
    PilotStatic = 7,
    GaInit = 8,
    GaSelect = 9,
    RandomPhase = 10,
    ConfigDraw = 11,
    DataThermal = 12,
    DataStatic = 13,
};

// Sequential view of one (seed, index, tag, lane) stream. Values are produced
// four at a time from the Philox block and buffered.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t index, StreamTag tag,
              std::uint16_t lane = 0)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
          base_{0u, std::uint32_t(index), std::uint32_t(index >> 32),
                (std::uint32_t(tag) << 16) | lane} {}

    std::uint32_t next_u32() {
        if (pos_ == 4) {
            auto ctr = base_;
            ctr[0] = block_;
            buf_ = philox::block(ctr, key_);
            ++block_;
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform on (0,1); never returns 0 or 1, so log() is safe.
    double uniform() {
        return (double(next_u32()) + 0.5) * 0x1p-32;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; pairs are buffered.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> base_;
    std::uint32_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// One draw from the Von Mises distribution with mean 0 and concentration v,
// using the Best-Fisher rejection scheme. v = 0 degenerates to the circular
// uniform on [-pi, pi).
inline double von_mises(RngStream& rng, double v) {
    if (v <= 0.0) {
        return rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    const double b = 1.0 + std::sqrt(1.0 + 4.0 * v * v);
    const double rho0 = (b - std::sqrt(2.0 * b)) / (2.0 * v);
    const double r = (1.0 + rho0 * rho0) / (2.0 * rho0);
    for (;;) {
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double z = std::cos(std::numbers::pi * u1);
        const double f = (1.0 + r * z) / (r + z);
        const double c = v * (r - f);
        if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
            const double u3 = rng.uniform();
            return (u3 < 0.5 ? -1.0 : 1.0) * std::acos(f);
        }
    }
}

} // namespace arisim
