#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "arisim/config.hpp"
#include "arisim/geometry.hpp"
#include "arisim/rng.hpp"

// i.i.d. channel / noise realizations for the Monte Carlo oracle. Every draw
// is fully determined by (seed, realization index, purpose tag), so results
// do not depend on thread count or evaluation order.

namespace arisim {

struct ChannelRealization {
    // H2 is M x N row-major.
    std::vector<cd> H2;
    std::vector<std::vector<cd>> h; // K x N user-RIS channels
    std::vector<std::vector<cd>> d; // K x M direct channels
    std::vector<double> theta_noise; // N phase-noise draws for this block
    std::uint64_t index = 0;
};

inline void fill_cgauss(std::vector<cd>& out, RngStream& rng, double variance) {
    const double s = std::sqrt(0.5 * variance);
    for (auto& x : out) {
        const double re = rng.normal();
        const double im = rng.normal();
        x = cd(s * re, s * im);
    }
}

// theta[i] ~ VonMises(0, v), i.i.d.
inline std::vector<double> sample_von_mises(double v, int n, RngStream& rng) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (auto& t : out) t = von_mises(rng, v);
    return out;
}

// Complex Gaussian noise with the requested per-entry variance, keyed by
// (seed, idx, tag, lane).
inline std::vector<cd> sample_noise(const ValidatedConfig& vcfg, int count,
                                    std::uint64_t idx, StreamTag tag, double variance,
                                    std::uint16_t lane = 0) {
    RngStream rng(vcfg.cfg.seed, idx, tag, lane);
    std::vector<cd> out(static_cast<std::size_t>(count));
    fill_cgauss(out, rng, variance);
    return out;
}

// One coherence-block realization: Rician H2 and h_k, Rayleigh d_k, and the
// block's phase-noise draws.
inline ChannelRealization sample_realization(const ValidatedConfig& vcfg,
                                             const PathLossSet& pl, const LoSCache& los,
                                             std::uint64_t idx) {
    const SystemConfig& cfg = vcfg.cfg;
    const int M = cfg.M, N = cfg.N, K = cfg.K;
    ChannelRealization r;
    r.index = idx;

    // H2 = sqrt(beta/(delta+1)) (sqrt(delta) a_M a_N^H + H2_tilde)
    {
        RngStream rng(cfg.seed, idx, StreamTag::ChannelH2);
        r.H2.resize(std::size_t(M) * std::size_t(N));
        fill_cgauss(r.H2, rng, 1.0);
        const double sc = std::sqrt(pl.beta / (cfg.delta + 1.0));
        const double sd = std::sqrt(cfg.delta);
        for (int m = 0; m < M; ++m)
            for (int n = 0; n < N; ++n) {
                auto& x = r.H2[std::size_t(m) * std::size_t(N) + std::size_t(n)];
                x = sc * (sd * los.a_M[std::size_t(m)] * std::conj(los.a_N[std::size_t(n)]) + x);
            }
    }

    // h_k = sqrt(alpha_k/(eps_k+1)) (sqrt(eps_k) hbar_k + h_tilde)
    r.h.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
        RngStream rng(cfg.seed, idx, StreamTag::ChannelHk, std::uint16_t(k));
        auto& hk = r.h[std::size_t(k)];
        hk.resize(std::size_t(N));
        fill_cgauss(hk, rng, 1.0);
        const double eps = vcfg.epsilon[std::size_t(k)];
        const double sc = std::sqrt(pl.alpha[std::size_t(k)] / (eps + 1.0));
        const double se = std::sqrt(eps);
        for (int n = 0; n < N; ++n)
            hk[std::size_t(n)] = sc * (se * los.hbar[std::size_t(k)][std::size_t(n)] +
                                       hk[std::size_t(n)]);
    }

    // d_k = sqrt(gamma_k) d_tilde
    r.d.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
        RngStream rng(cfg.seed, idx, StreamTag::ChannelDk, std::uint16_t(k));
        auto& dk = r.d[std::size_t(k)];
        dk.resize(std::size_t(M));
        fill_cgauss(dk, rng, pl.gamma[std::size_t(k)]);
    }

    // one phase-noise draw per coherence block
    {
        RngStream rng(cfg.seed, idx, StreamTag::PhaseNoise);
        if (std::isinf(vcfg.v_eff))
            r.theta_noise.assign(std::size_t(N), 0.0);
        else
            r.theta_noise = sample_von_mises(vcfg.v_eff, N, rng);
    }
    return r;
}

} // namespace arisim
