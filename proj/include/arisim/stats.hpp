#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "arisim/config.hpp"

// Closed-form scalar statistics: phase-noise characteristic values, the
// power model, and every per-user coefficient of the LMMSE estimator and
// the rate expressions.

namespace arisim {

// First and second circular moments of the Von Mises phase noise:
// rho = I1(v)/I0(v), l = I2(v)/I0(v).
struct PhaseNoiseChar {
    double rho = 0.0;
    double l = 0.0;
};

namespace detail {

// Modified Bessel functions of the first kind, orders 0..2, as ratios.
// Power series below v = 20 (all-positive terms, no cancellation),
// asymptotic expansion above; the common exp(v)/sqrt(2 pi v) factor cancels
// in the ratios.
inline double bessel_i_series(int order, double v) {
    const double half = 0.5 * v;
    double term = 1.0;
    for (int m = 1; m <= order; ++m) term *= half / double(m);
    double sum = term;
    const double q = half * half;
    for (int m = 1; m < 400; ++m) {
        term *= q / (double(m) * double(m + order));
        sum += term;
        if (term < sum * 1e-17) break;
    }
    return sum;
}

inline double bessel_i_asymptotic_scaled(int order, double v) {
    // I_n(v) * sqrt(2 pi v) * exp(-v) = sum_j (-1)^j a_j(n) / (8v)^j
    const double mu = 4.0 * double(order) * double(order);
    double term = 1.0;
    double sum = 1.0;
    double best = 1.0;
    for (int j = 1; j < 40; ++j) {
        const double f = (mu - double(2 * j - 1) * double(2 * j - 1)) / (8.0 * v * double(j));
        term *= -f;
        if (std::abs(term) > best) break; // asymptotic series started diverging
        best = std::abs(term);
        sum += term;
        if (std::abs(term) < 1e-17) break;
    }
    return sum;
}

} // namespace detail

inline PhaseNoiseChar phase_noise_char(double v) {
    PhaseNoiseChar c;
    if (v <= 0.0) return c; // I1(0) = I2(0) = 0
    if (std::isinf(v)) {
        c.rho = 1.0;
        c.l = 1.0;
        return c;
    }
    if (v <= 20.0) {
        const double i0 = detail::bessel_i_series(0, v);
        c.rho = detail::bessel_i_series(1, v) / i0;
        c.l = detail::bessel_i_series(2, v) / i0;
    } else {
        const double i0 = detail::bessel_i_asymptotic_scaled(0, v);
        c.rho = detail::bessel_i_asymptotic_scaled(1, v) / i0;
        c.l = detail::bessel_i_asymptotic_scaled(2, v) / i0;
    }
    return c;
}

// Power budget after the equal-split scheme: K p = (P_total - P_cir)/2 and
// xi^{-1} P_A = K p for the active RIS; a passive RIS spends only switch
// power and keeps eta = 1; without a RIS the whole budget goes to the users.
struct PowerBudget {
    double p = 0.0;     // per-user transmit power, watts
    double P_A = 0.0;   // RIS amplification power, watts
    double P_cir = 0.0; // N (P_SC + P_DC), watts
    double P_total = 0.0;
};

inline PowerBudget power_split(const ValidatedConfig& v, const PathLossSet& pl) {
    const SystemConfig& cfg = v.cfg;
    PowerBudget b;
    b.P_total = v.P_total_w;
    switch (cfg.mode) {
    case Mode::ActiveRIS: {
        b.P_cir = double(cfg.N) * (v.P_SC_w + v.P_DC_w);
        if (b.P_total <= b.P_cir)
            throw ConfigError(ConfigErrorKind::InfeasiblePower,
                              "P_total does not cover the RIS circuit power");
        const double kp = 0.5 * (b.P_total - b.P_cir);
        b.p = kp / double(cfg.K);
        b.P_A = cfg.xi * kp;
        break;
    }
    case Mode::PassiveRIS: {
        b.P_cir = double(cfg.N) * v.P_SC_w;
        if (b.P_total <= b.P_cir)
            throw ConfigError(ConfigErrorKind::InfeasiblePower,
                              "P_p does not cover the passive RIS switch power");
        b.p = (b.P_total - b.P_cir) / double(cfg.K);
        // eta = 1: amplification power exactly balances the incident power.
        double sum_pa = 0.0;
        for (double a : pl.alpha) sum_pa += b.p * a;
        b.P_A = double(cfg.N) * (sum_pa + v.sigma_e2_eff);
        break;
    }
    case Mode::NoRIS: {
        b.P_cir = 0.0;
        b.p = b.P_total / double(cfg.K);
        b.P_A = 0.0;
        break;
    }
    }
    return b;
}

// Every closed-form constant of the estimator and the rate expressions,
// for one scenario. All powers linear watts.
struct ChannelStats {
    // shared
    double Delta = 0.0;          // P_A / (sum_k p alpha_k + sigma_e^2)
    double eta = 0.0;            // sqrt(Delta / N)
    double varpi = 0.0;          // Delta beta sigma_e^2 / (tau p (delta+1))
    double varpi_over_Delta = 0.0; // beta sigma_e^2 / (tau p (delta+1)), finite at Delta = 0
    double s2_taup = 0.0;        // sigma^2 / (tau p)
    double rho = 0.0, l = 0.0;
    double sigma2 = 0.0, sigma_e2 = 0.0;
    double delta = 0.0;
    double p = 0.0;
    double beta_pl = 0.0; // RIS-BS path loss
    double beta_over_delta1() const { return beta_pl / (delta + 1.0); }
    // per user
    std::vector<double> eps;
    std::vector<double> alpha;
    std::vector<double> gamma;
    std::vector<double> c;  // beta alpha_k / ((delta+1)(eps_k+1))
    std::vector<double> a1, a2, a3, a4, a5, a6;
    std::vector<double> m, n;
    std::vector<double> e1, e2, e3;
};

inline ChannelStats compute_stats(const ValidatedConfig& v, const PathLossSet& pl,
                                  const PowerBudget& b) {
    const SystemConfig& cfg = v.cfg;
    const int K = cfg.K;
    const double M = double(cfg.M);
    const double N = double(cfg.N);
    const double delta = cfg.delta;
    const double taup = double(cfg.tau) * b.p;
    const PhaseNoiseChar pn = phase_noise_char(v.v_eff);

    ChannelStats st;
    st.rho = pn.rho;
    st.l = pn.l;
    st.sigma2 = v.sigma2_w;
    st.sigma_e2 = v.sigma_e2_eff;
    st.delta = delta;
    st.p = b.p;

    double sum_pa = 0.0;
    for (double a : pl.alpha) sum_pa += b.p * a;
    st.Delta = b.P_A / (sum_pa + st.sigma_e2);
    st.eta = std::sqrt(st.Delta / N);
    st.varpi_over_Delta = pl.beta * st.sigma_e2 / (taup * (delta + 1.0));
    st.varpi = st.Delta * st.varpi_over_Delta;
    st.s2_taup = st.sigma2 / taup;

    st.eps = v.epsilon;
    st.alpha = pl.alpha;
    st.gamma = pl.gamma;
    st.beta_pl = pl.beta;
    st.c.resize(std::size_t(K));
    st.a1.resize(std::size_t(K));
    st.a2.resize(std::size_t(K));
    st.a3.resize(std::size_t(K));
    st.a4.resize(std::size_t(K));
    st.a5.resize(std::size_t(K));
    st.a6.resize(std::size_t(K));
    st.m.resize(std::size_t(K));
    st.n.resize(std::size_t(K));
    st.e1.resize(std::size_t(K));
    st.e2.resize(std::size_t(K));
    st.e3.resize(std::size_t(K));

    const double s = st.s2_taup + st.varpi;
    for (std::size_t k = 0; k < std::size_t(K); ++k) {
        const double eps = st.eps[k];
        const double gam = pl.gamma[k];
        const double c = pl.beta * pl.alpha[k] / ((delta + 1.0) * (eps + 1.0));
        st.c[k] = c;
        const double a1 = st.Delta * c * delta * (eps * (1.0 - st.rho * st.rho) + 1.0);
        const double a2 = st.Delta * c * (eps + 1.0) + gam;
        st.a1[k] = a1;
        st.a2[k] = a2;
        const double m = a1 + st.varpi * delta;
        const double n = a2 + s;
        st.m[k] = m;
        st.n[k] = n;
        st.a3[k] = (s * a1 - st.varpi * delta * a2) / (n * n + M * m * n);
        st.a4[k] = a2 / n;
        st.a5[k] = (a1 * s * s + M * a1 * st.varpi * delta * n + st.varpi * delta * a2 * a2) /
                   (n * (n + M * m));
        st.a6[k] = a2 * s / n;
        st.e1[k] = st.a3[k] + st.a4[k];
        st.e2[k] = M * st.a3[k] + st.a4[k];
        st.e3[k] = M * st.a3[k] * st.a3[k] + 2.0 * st.a3[k] * st.a4[k] + st.a4[k] * st.a4[k];
    }
    return st;
}

// Closed-form NMSE_k; cross-checked against the MSE-matrix trace form
// (a5 + a6)/(a1 + a2), which must agree to 1e-12 relative.
inline std::vector<double> nmse_closed_form(const ChannelStats& st, int M) {
    std::vector<double> out(st.a1.size());
    const double s = st.s2_taup + st.varpi;
    const double wd = st.varpi * st.delta;
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double a1 = st.a1[k], a2 = st.a2[k], n = st.n[k];
        const double num = (s + double(M) * wd) * s * (a1 + a2) +
                           (wd + s) * (a2 * a2 + double(M) * a1 * a2);
        const double den = n * (n + double(M) * (a1 + wd)) * (a1 + a2);
        const double nmse = num / den;
        const double alt = (st.a5[k] + st.a6[k]) / (a1 + a2);
        if (std::abs(nmse - alt) > 1e-12 * std::max(std::abs(nmse), 1.0))
            throw std::logic_error("NMSE forms disagree: " + std::to_string(nmse) + " vs " +
                                   std::to_string(alt));
        out[k] = nmse;
    }
    return out;
}

} // namespace arisim
