#pragma once

#include <complex>
#include <numbers>
#include <vector>

#include "arisim/config.hpp"
#include "arisim/rng.hpp"

// Deterministic line-of-sight structure: USPA steering vectors, the cached
// LoS components, and the phase-shift dependent scalars f_k and F_ki.

namespace arisim {

using cd = std::complex<double>;

struct AngleSet {
    double phi_r_a = 0.0, phi_r_e = 0.0;         // AoA at the BS from the RIS
    double varphi_t_a = 0.0, varphi_t_e = 0.0;   // AoD from the RIS to the BS
    std::vector<double> varphi_kr_a, varphi_kr_e; // per-user AoA at the RIS
};

struct PhaseVector {
    std::vector<double> theta; // length N, radians in [0, 2pi)
};

// Azimuths uniform in [0,2pi), elevations uniform in [0,pi), drawn from the
// stream keyed (seed, 0, Angles). Pure function of (seed, K).
inline AngleSet generate_angles(std::uint64_t seed, int K) {
    RngStream rng(seed, 0, StreamTag::Angles);
    constexpr double pi = std::numbers::pi;
    AngleSet a;
    a.phi_r_a = rng.uniform(0.0, 2.0 * pi);
    a.phi_r_e = rng.uniform(0.0, pi);
    a.varphi_t_a = rng.uniform(0.0, 2.0 * pi);
    a.varphi_t_e = rng.uniform(0.0, pi);
    a.varphi_kr_a.resize(std::size_t(K));
    a.varphi_kr_e.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
        a.varphi_kr_a[std::size_t(k)] = rng.uniform(0.0, 2.0 * pi);
        a.varphi_kr_e[std::size_t(k)] = rng.uniform(0.0, pi);
    }
    return a;
}

// USPA steering vector. Entry i (0-based) of a sqrt(X) x sqrt(X) grid:
// exp{ j 2 pi (d/lambda) ( floor(i/sqrt(X)) sin(theta_e) sin(theta_a)
//                          + (i mod sqrt(X)) cos(theta_e) ) }
inline std::vector<cd> array_response(int X, double theta_a, double theta_e,
                                      double d_over_lambda) {
    if (!is_perfect_square(X))
        throw ConfigError(ConfigErrorKind::NonSquareArray,
                          "array size " + std::to_string(X) + " is not a perfect square");
    const int side = int(std::lround(std::sqrt(double(X))));
    const double c = 2.0 * std::numbers::pi * d_over_lambda;
    const double row_f = std::sin(theta_e) * std::sin(theta_a);
    const double col_f = std::cos(theta_e);
    std::vector<cd> out(static_cast<std::size_t>(X));
    for (int i = 0; i < X; ++i) {
        const double ph = c * (double(i / side) * row_f + double(i % side) * col_f);
        out[std::size_t(i)] = std::polar(1.0, ph);
    }
    return out;
}

// Immutable per-experiment cache: a_M, a_N, the per-user RIS responses
// hbar_k, and the phase-offset table xi[k][n] = arg(hbar_k[n]) - arg(a_N[n]).
struct LoSCache {
    std::vector<cd> a_M;
    std::vector<cd> a_N;
    std::vector<std::vector<cd>> hbar;   // K x N
    std::vector<std::vector<double>> xi; // K x N
    int M = 0, N = 0, K = 0;
};

inline LoSCache build_los_cache(const ValidatedConfig& v, const AngleSet& ang) {
    const SystemConfig& cfg = v.cfg;
    LoSCache los;
    los.M = cfg.M;
    los.N = cfg.N;
    los.K = cfg.K;
    los.a_M = array_response(cfg.M, ang.phi_r_a, ang.phi_r_e, cfg.d_over_lambda);
    los.a_N = array_response(cfg.N, ang.varphi_t_a, ang.varphi_t_e, cfg.d_over_lambda);
    los.hbar.resize(std::size_t(cfg.K));
    los.xi.resize(std::size_t(cfg.K));
    for (int k = 0; k < cfg.K; ++k) {
        los.hbar[std::size_t(k)] = array_response(cfg.N, ang.varphi_kr_a[std::size_t(k)],
                                                  ang.varphi_kr_e[std::size_t(k)],
                                                  cfg.d_over_lambda);
        auto& xk = los.xi[std::size_t(k)];
        xk.resize(std::size_t(cfg.N));
        for (int n = 0; n < cfg.N; ++n) {
            xk[std::size_t(n)] = std::arg(los.hbar[std::size_t(k)][std::size_t(n)]) -
                                 std::arg(los.a_N[std::size_t(n)]);
        }
    }
    return los;
}

// f_k(Phi) = a_N^H Phi hbar_k = sum_n exp(j(xi_n^k + theta_n)).  |f_k| <= N.
inline cd f_k(const PhaseVector& phase, const LoSCache& los, int k) {
    const auto& xk = los.xi[std::size_t(k)];
    cd acc(0.0, 0.0);
    for (std::size_t n = 0; n < xk.size(); ++n)
        acc += std::polar(1.0, xk[n] + phase.theta[n]);
    return acc;
}

// F_ki = sum_n e^{j(xi_n^k + theta_n)} e^{j(xi_n^i + theta_n)}  (plain
// product, not a conjugate product; symmetric in k and i).
inline cd F_ki(const PhaseVector& phase, const LoSCache& los, int k, int i) {
    const auto& xk = los.xi[std::size_t(k)];
    const auto& xi_ = los.xi[std::size_t(i)];
    cd acc(0.0, 0.0);
    for (std::size_t n = 0; n < xk.size(); ++n)
        acc += std::polar(1.0, xk[n] + xi_[n] + 2.0 * phase.theta[n]);
    return acc;
}

inline PhaseVector random_phase(std::uint64_t seed, int N, std::uint64_t index = 0) {
    RngStream rng(seed, index, StreamTag::RandomPhase);
    PhaseVector p;
    p.theta.resize(std::size_t(N));
    for (auto& t : p.theta) t = rng.uniform(0.0, 2.0 * std::numbers::pi);
    return p;
}

inline PhaseVector zero_phase(int N) {
    PhaseVector p;
    p.theta.assign(std::size_t(N), 0.0);
    return p;
}

// Phase shifts aligned to user k: theta_n = -xi_n^k (mod 2pi) maximizes
// |f_k| at N.
inline PhaseVector aligned_phase(const LoSCache& los, int k) {
    PhaseVector p;
    p.theta.resize(std::size_t(los.N));
    constexpr double two_pi = 2.0 * std::numbers::pi;
    for (int n = 0; n < los.N; ++n) {
        double t = -los.xi[std::size_t(k)][std::size_t(n)];
        t = std::fmod(t, two_pi);
        if (t < 0.0) t += two_pi;
        p.theta[std::size_t(n)] = t;
    }
    return p;
}

} // namespace arisim
