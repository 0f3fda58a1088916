#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "arisim/config.hpp"
#include "arisim/geometry.hpp"
#include "arisim/stats.hpp"

// Closed-form SINR of the two-timescale uplink: desired signal, leakage,
// interference and noise terms per user, the per-user/sum/min rates, and the
// dominant-term power-scaling evaluators. Everything here is O(K^2) scalars
// plus O(N) for the phase sums; the antenna count M only ever enters as a
// scalar.

namespace arisim {

struct SinrComponents {
    double E_signal = 0.0;
    double E_leak = 0.0;
    double E_noise = 0.0;
    double E_s_noise = 0.0;
    double E_t_noise = 0.0;
    std::vector<double> I; // I[i], i != k meaningful
};

struct RateReport {
    std::vector<double> sinr;
    std::vector<double> rate; // bits/s/Hz
    double sum_rate = 0.0;
    double min_rate = 0.0;
    double chi = 0.0;
    std::vector<SinrComponents> components;
};

// E{ ||qhat_k||^2 }; also the static-noise kernel of the SINR denominator.
inline double static_noise_kernel(const ChannelStats& st, const LoSCache& los,
                                  const PhaseVector& phase, int k) {
    const double M = double(los.M), N = double(los.N);
    const std::size_t uk = std::size_t(k);
    const double fk2 = std::norm(f_k(phase, los, k));
    const double D = st.Delta, c = st.c[uk], eps = st.eps[uk], gam = st.gamma[uk];
    const double rho2 = st.rho * st.rho, del = st.delta;
    const double e1 = st.e1[uk], e2 = st.e2[uk];
    return M * (D * c * del * e2 * (eps * (1.0 - rho2) + 1.0) +
                D * c * (eps + 1.0) * e1 + gam * e1) +
           (M / N) * fk2 * D * c * del * eps * rho2;
}

// |E{ qhat_k^H q_k }|^2 = (E{||qhat_k||^2})^2 by LMMSE orthogonality.
inline double desired_signal(const ChannelStats& st, const LoSCache& los,
                             const PhaseVector& phase, int k) {
    const double kernel = static_noise_kernel(st, los, phase, k);
    return kernel * kernel;
}

// E{ ||qhat_k^H H_2 Phi Theta||^2 }, the amplified-thermal-noise kernel.
inline double thermal_noise_term(const ChannelStats& st, const LoSCache& los,
                                 const PhaseVector& phase, int k) {
    const double M = double(los.M), N = double(los.N);
    const std::size_t uk = std::size_t(k);
    const double fk2 = std::norm(f_k(phase, los, k));
    const double D = st.Delta, c = st.c[uk], eps = st.eps[uk], gam = st.gamma[uk];
    const double rho2 = st.rho * st.rho, del = st.delta;
    const double e1 = st.e1[uk], e2 = st.e2[uk], e3 = st.e3[uk];
    const double a3 = st.a3[uk], a4 = st.a4[uk];
    const double w = st.varpi_over_Delta;
    const double nk_full = D * c * (eps + 1.0) + st.varpi + st.s2_taup + gam;

    const double grp1 = (M * M * N * D * del * del * e2 * e2 + M * N * D * del * e2 * e2 +
                         2.0 * M * M * D * del * e1 * e2) *
                        (c * (eps * (1.0 - rho2) + 1.0) + w);
    const double grp2 = M * M * D * e1 * e1 * c * (eps + 1.0);
    const double grp3 = (2.0 * M * M * N * del * a3 * a4 + M * N * (del * a4 * a4 + e3) +
                         M * M * M * N * del * a3 * a3) *
                        nk_full;
    const double grp4 = fk2 * D * c * del * eps * rho2 *
                        (M * M * del + 2.0 * (M * M / N) * e1 + M);
    return st.beta_over_delta1() * (grp1 + grp2 + grp3 + grp4);
}

// E{ |qhat_k^H q_i|^2 } for i != k.
inline double interference_term(const ChannelStats& st, const LoSCache& los,
                                const PhaseVector& phase, int k, int i) {
    const double M = double(los.M), N = double(los.N);
    const std::size_t uk = std::size_t(k), ui = std::size_t(i);
    const cd fk = f_k(phase, los, k), fi = f_k(phase, los, i);
    const double fk2 = std::norm(fk), fi2 = std::norm(fi);
    const cd Fki = F_ki(phase, los, k, i);

    cd hh(0.0, 0.0); // hbar_k^H hbar_i
    for (int n = 0; n < los.N; ++n)
        hh += std::conj(los.hbar[uk][std::size_t(n)]) * los.hbar[ui][std::size_t(n)];
    const double hh2 = std::norm(hh);
    const double re_hh_ff = std::real(hh * std::conj(fi) * fk);
    const double re_F_ff = std::real(std::conj(Fki) * fk * fi);

    const double D = st.Delta, w = st.varpi_over_Delta, vp = st.varpi, s2tp = st.s2_taup;
    const double rho2 = st.rho * st.rho, rho4 = rho2 * rho2, l = st.l;
    const double del = st.delta;
    const double ck = st.c[uk], ek = st.eps[uk], gk = st.gamma[uk];
    const double ci = st.c[ui], ei = st.eps[ui], gi = st.gamma[ui];
    const double e1 = st.e1[uk], e2 = st.e2[uk], e3 = st.e3[uk];
    const double M2 = M * M, N2 = N * N;

    double I = 0.0;
    I += (M2 / N2) * hh2 * D * D * ck * ek * ci * ei *
         (del * e2 * (1.0 - rho2) + e1) * (del * e2 * (1.0 - rho2) + e1);
    I += (M2 / N2) * std::norm(Fki) * D * D * ck * del * del * ek * ci * ei * e2 * e2 *
         (l - rho2) * (l - rho2);
    I += (M2 / N2) * fk2 * fi2 * D * D * rho4 * ck * del * del * ek * ci * ei;
    I += 2.0 * (M2 / N2) * D * D * rho2 * ci * del *
         (ck * del * ek * ei * e2 * (2.0 * rho2 - 1.0 - l) * (fk2 + fi2 * e2) +
          fk2 * ck * ek * e1 + fi2 * ei * e1 * e2 * (ck + w));
    I += (M2 / N) * D * D * rho2 * ci * del * del *
         (ck * ek * ei * (1.0 - rho2) * (fk2 + fi2 * e2 * e2) + fk2 * ck * ek +
          fi2 * ei * e2 * e2 * (ck + w));
    I += (M / N) * D * rho2 * del *
         (D * ck * ek * ci * ei * (fk2 + fi2 * e2 * e2) + ck * ek * fk2 * (D * ci + gi) +
          fi2 * ci * ei * e2 * e2 * (s2tp + vp + gk + D * ck));
    I += M2 * D * D * ci * del * del * e2 * e2 *
         (ck * (1.0 - rho2) * (ei + ek + ei * ek * (1.0 - rho2)) + ck +
          w * (1.0 + ei * (1.0 - rho2)));
    I += (M2 / N) * D * D * ci * e1 * (ck + w) * (2.0 * del * e2 + e1);
    I += (M2 / N) * D * D * ci *
         (ck * ek * del * del * ei * e2 * e2 *
              (4.0 * rho2 + 4.0 * l * rho2 - l * l - 1.0 - 6.0 * rho4) +
          e1 * (ei * (ck + w) + ck * ek) * (2.0 * del * e2 * (1.0 - rho2) + e1));
    I += M * (D * D * ck * ci *
                  ((ek * ei + ek + ei + 1.0) * (2.0 * del * e2 * e2 + e3) -
                   rho2 * del * e2 * e2 * (2.0 * ek * ei + ek + ei)) +
              vp * ((del * e2 * e2 + e3) * gi + D * ci * (ei + 1.0) * (2.0 * del * e2 * e2 + e3) -
                    D * del * e2 * e2 * ci * ei * rho2) +
              (s2tp + gk) * (D * ci * (ei + 1.0) * (del * e2 * e2 + e3) -
                             D * del * e2 * e2 * ci * ei * rho2 + e3 * gi) +
              D * ck * gi * (ek + 1.0) * (del * e2 * e2 + e3) -
              D * del * e2 * e2 * ck * gi * ek * rho2);
    I += 2.0 * (M2 / N2) * re_hh_ff * D * D * rho2 * ck * del * ek * ci * ei *
         (del * e2 * (1.0 - rho2) + e1);
    I += 2.0 * (M2 / N2) * re_F_ff * D * D * rho2 * (l - rho2) * ck * del * del * ek * ci * ei * e2;
    return I;
}

// Var{ qhat_k^H q_k } = E{|qhat_k^H q_k|^2} - |E{qhat_k^H q_k}|^2.
// Derived by conditioning on (h_tilde, Theta, pilot thermal noise): given
// those, the estimate/channel pair is jointly Gaussian and the conditional
// second moment is exact, leaving low-order moments of the conditioned
// variables. Every summand is confirmed against a moment-matched enumeration
// oracle at machine precision (see tests). The l^2 term comes out of the
// second circular moment of the block's phase noise with no geometry factor;
// include_conj_phase_term=false zeroes it for sensitivity checks.
inline double leakage_term(const ChannelStats& st, const LoSCache& los,
                           const PhaseVector& phase, int k,
                           bool include_conj_phase_term = true) {
    const double M = double(los.M), N = double(los.N);
    const std::size_t uk = std::size_t(k);
    const cd fk = f_k(phase, los, k);
    const double fk2 = std::norm(fk);
    const cd Fkk = F_ki(phase, los, k, k);

    const double D = st.Delta, w = st.varpi_over_Delta, vp = st.varpi, s2tp = st.s2_taup;
    const double rho2 = st.rho * st.rho, rho4 = rho2 * rho2, l = st.l;
    const double del = st.delta;
    const double c = st.c[uk], eps = st.eps[uk], gam = st.gamma[uk];
    const double e1 = st.e1[uk], e2 = st.e2[uk], e3 = st.e3[uk];
    const double M2 = M * M, N2 = N * N;
    const double one_m_rho2 = 1.0 - rho2;

    double L = 0.0;
    L += M2 * D * D * c * del * del * e2 * e2 * (eps * one_m_rho2 + 1.0) *
         (c * (eps * one_m_rho2 + 1.0) + w);
    L += (M2 / N) * D * D * 2.0 * c * c * del * e1 * e2 * (1.0 - e2);
    L += 2.0 * (M / N2) * fk2 * D * D * rho2 * c * c * del * eps * e2 * (1.0 + e2);
    L += (M2 / N) * D * D * c *
         (e1 * (eps * (2.0 * c + w) * (2.0 * del * e2 * one_m_rho2 + e1) + e1 * (c + w) +
                2.0 * del * e2 * (c * e2 + w)) +
          c * del * del * e2 * e2 *
              (eps * eps * (4.0 * l * rho2 + 4.0 * rho2 - l * l - 6.0 * rho4 - 1.0) - l * l));
    L += 2.0 * (M2 / N2) * fk2 * D * D * c * del * eps * rho2 *
         (c * (1.0 + e2) * (del * eps * (2.0 * rho2 - 1.0 - l) * e2 + e1) + w * e1 * e2);
    L += (M2 / N2) * D * D * c * c * del * del * eps * eps * e2 * (l - rho2) *
         (std::norm(Fkk) * e2 * (l - rho2) + 2.0 * std::real(fk * fk * std::conj(Fkk)) * rho2);
    if (include_conj_phase_term) {
        L += (M2 / N) * D * D * c * c * del * del * e2 * e2 * l * l;
    }
    L += (M / N) * fk2 * D * c * del * eps * rho2 *
         (D * c * (eps + 1.0) * (e2 * e2 + 1.0) + gam + (vp + s2tp + gam) * e2 * e2);
    L += (M / N) * D * D * c * c *
         ((2.0 * eps + 1.0) * (2.0 * del * e2 * e2 + e3) - 4.0 * del * eps * rho2 * e2 * e2);
    L += M * (D * c * (D * c * (eps + 1.0) + 2.0 * gam + s2tp) *
                  ((del * e2 * e2 + e3) * (eps + 1.0) - del * eps * rho2 * e2 * e2) +
              D * c * (eps + 1.0) *
                  (D * c * del * e2 * e2 * (eps * one_m_rho2 + 1.0) + vp * e3) +
              vp * del * e2 * e2 * (D * c * (2.0 * eps + 2.0 - eps * rho2) + gam) +
              gam * e3 * (s2tp + gam + vp));
    L += (M2 / N) * fk2 * D * D * c * del * del * eps * rho2 *
         (c * (e2 * e2 + 1.0) * (1.0 + eps * one_m_rho2) + w * e2 * e2);
    return L;
}

inline SinrComponents sinr_components(const ValidatedConfig& vcfg, const ChannelStats& st,
                                      const LoSCache& los, const PhaseVector& phase, int k) {
    SinrComponents sc;
    sc.E_s_noise = static_noise_kernel(st, los, phase, k);
    sc.E_signal = sc.E_s_noise * sc.E_s_noise;
    sc.E_t_noise = thermal_noise_term(st, los, phase, k);
    const double eta2 = st.Delta / double(los.N);
    sc.E_noise = st.sigma2 * sc.E_s_noise + eta2 * st.sigma_e2 * sc.E_t_noise;
    sc.E_leak = leakage_term(st, los, phase, k, vcfg.cfg.leak_conj_phase_term);
    sc.I.assign(std::size_t(los.K), 0.0);
    for (int i = 0; i < los.K; ++i)
        if (i != k) sc.I[std::size_t(i)] = interference_term(st, los, phase, k, i);
    return sc;
}

inline RateReport sinr_report(const ValidatedConfig& vcfg, const ChannelStats& st,
                              const LoSCache& los, const PhaseVector& phase,
                              const PowerBudget& budget) {
    RateReport r;
    r.chi = vcfg.chi();
    const int K = los.K;
    r.sinr.resize(std::size_t(K));
    r.rate.resize(std::size_t(K));
    r.components.resize(std::size_t(K));
    for (int k = 0; k < K; ++k) {
        SinrComponents sc = sinr_components(vcfg, st, los, phase, k);
        double interf = 0.0;
        for (double x : sc.I) interf += x;
        const double p = budget.p;
        const double den = p * sc.E_leak + p * interf + sc.E_noise;
        r.sinr[std::size_t(k)] = p * sc.E_signal / den;
        r.rate[std::size_t(k)] = r.chi * std::log2(1.0 + r.sinr[std::size_t(k)]);
        r.components[std::size_t(k)] = std::move(sc);
    }
    r.sum_rate = 0.0;
    r.min_rate = r.rate.empty() ? 0.0 : r.rate[0];
    for (double x : r.rate) {
        r.sum_rate += x;
        r.min_rate = std::min(r.min_rate, x);
    }
    return r;
}

// ---- power scaling laws ----

enum class ScalingRegime { RicRic, RicRay, RayRay };

class RegimeMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Dominant-term rate for user k with p = E_u / M^a, per the three regimes.
// Uses the same ChannelStats (computed at the scaled p and target M) as the
// full-theory evaluation it approximates.
inline double scaling_dominant_rate(const ValidatedConfig& vcfg, const ChannelStats& st,
                                    const LoSCache& los, const PhaseVector& phase,
                                    ScalingRegime regime, double a, double E_u, double M,
                                    int k) {
    const double N = double(los.N);
    const std::size_t uk = std::size_t(k);
    const double chi = vcfg.chi();
    const double D = st.Delta, rho2 = st.rho * st.rho, del = st.delta;
    const double sigma2 = st.sigma2, sigma_e2 = st.sigma_e2;
    const double tau = double(vcfg.cfg.tau);
    const double M2ma = std::pow(M, 2.0 - a);
    const double M2 = M * M;

    switch (regime) {
    case ScalingRegime::RicRic: {
        if (!(del > 0.0))
            throw RegimeMismatch("RicRic regime requires delta > 0");
        for (double e : st.eps)
            if (!(e > 0.0)) throw RegimeMismatch("RicRic regime requires epsilon_k > 0");
        const double fk2 = std::norm(f_k(phase, los, k));
        const double ck = st.c[uk], ek = st.eps[uk];
        const double ds = (fk2 * fk2 / (N * N)) * D * D * ck * ck * del * del * ek * ek *
                          rho2 * rho2;
        const double le = (fk2 / N) * D * D * ck * ck * del * del * ek * rho2 *
                          (ek * (1.0 - rho2) + 1.0);
        double in_sum = 0.0;
        for (int i = 0; i < los.K; ++i) {
            if (i == k) continue;
            const std::size_t ui = std::size_t(i);
            const double fi2 = std::norm(f_k(phase, los, i));
            in_sum += (fk2 / N) * D * D * ck * del * del * ek * st.c[ui] * rho2 *
                      (st.eps[ui] * (1.0 - rho2 + rho2 * fi2 / N) + 1.0);
        }
        const double tn = st.beta_over_delta1() * D * D * fk2 * ck * del * del * ek * rho2 / N;
        const double sn = (fk2 / N) * D * ck * del * ek * rho2;
        const double num = E_u * M2ma * ds;
        const double den = E_u * M2ma * le + E_u * M2ma * in_sum + sigma_e2 * M2 * tn +
                           sigma2 * M * sn;
        return chi * std::log2(1.0 + num / den);
    }
    case ScalingRegime::RicRay: {
        if (!(del > 0.0))
            throw RegimeMismatch("RicRay regime requires delta > 0");
        for (double e : st.eps)
            if (e != 0.0) throw RegimeMismatch("RicRay regime requires epsilon_k = 0");
        const double ck = st.c[uk], gk = st.gamma[uk];
        const double e1 = st.e1[uk], e2 = st.e2[uk];
        const double common = del * del * e2 * e2 +
                              (2.0 * del * e1 * e2 + e1 * e1) / N;
        const double ds = (D * ck * (del * e2 + e1) + gk * e1) *
                          (D * ck * (del * e2 + e1) + gk * e1);
        const double le = D * D * sigma_e2 * st.beta_pl * ck / (tau * E_u * (del + 1.0)) * common;
        double in_sum = 0.0;
        for (int i = 0; i < los.K; ++i) {
            if (i == k) continue;
            in_sum += D * D * sigma_e2 * st.beta_pl * st.c[std::size_t(i)] /
                      (tau * E_u * (del + 1.0)) * common;
        }
        const double tn = D * D * del * sigma_e2 * st.beta_pl * st.beta_pl * e2 /
                          (tau * E_u * (del + 1.0) * (del + 1.0)) *
                          (del * e2 + 2.0 * e1 / N);
        const double sn = D * ck * del * e2 + D * ck * e1 + gk * e1;
        const double num = E_u * M2ma * ds;
        const double den = E_u * M2 * le + E_u * M2 * in_sum +
                           sigma_e2 * std::pow(M, 2.0 + a) * tn + sigma2 * M * sn;
        return chi * std::log2(1.0 + num / den);
    }
    case ScalingRegime::RayRay: {
        if (del != 0.0)
            throw RegimeMismatch("RayRay regime requires delta = 0");
        for (double e : st.eps)
            if (e != 0.0) throw RegimeMismatch("RayRay regime requires epsilon_k = 0");
        const double alpha_k = st.alpha[uk];
        const double gk = st.gamma[uk];
        const double e1 = st.e1[uk];
        const double ds = e1 * e1 * (D * st.beta_pl * alpha_k + gk) *
                          (D * st.beta_pl * alpha_k + gk);
        const double le = e1 * e1 * D * D * sigma_e2 * st.beta_pl * st.beta_pl * alpha_k /
                          (N * tau * E_u);
        double in_sum = 0.0;
        for (int i = 0; i < los.K; ++i) {
            if (i == k) continue;
            in_sum += e1 * e1 * D * D * sigma_e2 * st.beta_pl * st.beta_pl *
                      st.alpha[std::size_t(i)] / (N * tau * E_u);
        }
        const double tn1 = e1 * e1 * D * D * st.beta_pl * st.beta_pl * alpha_k / N;
        const double tn2 = D * e1 * e1 * st.beta_pl *
                           (D * sigma_e2 * st.beta_pl + sigma2) / (tau * E_u);
        const double sn = e1 * (D * st.beta_pl * alpha_k + gk);
        const double num = E_u * M2ma * ds;
        const double den = E_u * M2 * le + E_u * M2 * in_sum +
                           sigma_e2 * M * (M * tn1 + std::pow(M, a) * tn2) +
                           sigma2 * M * sn;
        return chi * std::log2(1.0 + num / den);
    }
    }
    return 0.0;
}

} // namespace arisim
