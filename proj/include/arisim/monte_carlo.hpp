#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <thread>
#include <vector>

#include "arisim/config.hpp"
#include "arisim/geometry.hpp"
#include "arisim/rate.hpp"
#include "arisim/sampler.hpp"
#include "arisim/stats.hpp"

// Brute-force oracle: simulates pilots, applies the LMMSE estimator, and
// estimates every expectation of the SINR and the NMSE empirically.
// Realizations are processed in fixed-size blocks; block partial sums are
// merged in block order, so results are bitwise identical for any thread
// count.

namespace arisim {

struct OracleEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

namespace detail {

constexpr std::uint64_t kBlockSize = 256;

// Runs fn(begin, end, acc) over [0, n) split into fixed blocks; returns the
// per-block accumulators in block order.
template <class Accum, class Fn>
std::vector<Accum> run_blocks(std::uint64_t n, int threads, Fn&& fn) {
    const std::uint64_t n_blocks = (n + kBlockSize - 1) / kBlockSize;
    std::vector<Accum> acc(n_blocks);
    if (threads < 1) threads = 1;
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            const std::uint64_t begin = b * kBlockSize;
            const std::uint64_t end = std::min(n, begin + kBlockSize);
            fn(begin, end, acc[b]);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(std::size_t(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return acc;
}

inline OracleEstimate estimate_from_sums(double sum, double sum_sq, std::uint64_t n) {
    OracleEstimate e;
    e.n = n;
    e.mean = sum / double(n);
    const double var = std::max(0.0, sum_sq / double(n) - e.mean * e.mean);
    e.std_error = std::sqrt(var / double(n));
    return e;
}

} // namespace detail

// q_k = eta H2 Phi Theta h_k + d_k for one realization.
inline std::vector<cd> aggregated_channel(const ChannelRealization& real,
                                          const PhaseVector& phase, double eta, int M,
                                          int N, int k) {
    std::vector<cd> w(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n)
        w[std::size_t(n)] = eta *
                            std::polar(1.0, phase.theta[std::size_t(n)] +
                                                real.theta_noise[std::size_t(n)]) *
                            real.h[std::size_t(k)][std::size_t(n)];
    std::vector<cd> q(real.d[std::size_t(k)]);
    for (int m = 0; m < M; ++m) {
        cd acc(0.0, 0.0);
        const cd* row = &real.H2[std::size_t(m) * std::size_t(N)];
        for (int n = 0; n < N; ++n) acc += row[std::size_t(n)] * w[std::size_t(n)];
        q[std::size_t(m)] += acc;
    }
    return q;
}

// y_p^k = q_k + (eta/sqrt(tau p)) H2 Phi Theta (V s_k) + (1/sqrt(tau p)) N s_k.
// The pilot projections V s_k and N s_k are single Gaussian vectors thanks to
// the orthonormal pilots.
inline std::vector<cd> simulate_pilot_observation(const ValidatedConfig& vcfg,
                                                  const ChannelRealization& real,
                                                  const PowerBudget& budget,
                                                  const PhaseVector& phase, double eta,
                                                  const std::vector<cd>& q_k, int k) {
    const int M = vcfg.cfg.M, N = vcfg.cfg.N;
    const double taup = double(vcfg.cfg.tau) * budget.p;
    const double inv_sq = 1.0 / std::sqrt(taup);

    std::vector<cd> y(q_k);
    if (vcfg.sigma_e2_eff > 0.0) {
        auto vs = sample_noise(vcfg, N, real.index, StreamTag::PilotThermal,
                               vcfg.sigma_e2_eff, std::uint16_t(k));
        for (int n = 0; n < N; ++n)
            vs[std::size_t(n)] *= eta * inv_sq *
                                  std::polar(1.0, phase.theta[std::size_t(n)] +
                                                      real.theta_noise[std::size_t(n)]);
        for (int m = 0; m < M; ++m) {
            cd acc(0.0, 0.0);
            const cd* row = &real.H2[std::size_t(m) * std::size_t(N)];
            for (int n = 0; n < N; ++n) acc += row[std::size_t(n)] * vs[std::size_t(n)];
            y[std::size_t(m)] += acc;
        }
    }
    auto ns = sample_noise(vcfg, M, real.index, StreamTag::PilotStatic, vcfg.sigma2_w,
                           std::uint16_t(k));
    for (int m = 0; m < M; ++m) y[std::size_t(m)] += inv_sq * ns[std::size_t(m)];
    return y;
}

// qhat_k = A_k y + B_k applied as scalars: A_k y = a3 a_M (a_M^H y) + a4 y and
// B_k = eta rho sqrt(c_k delta eps_k) (1 - e2) f_k a_M. No M x M matrix is
// ever formed.
inline std::vector<cd> lmmse_estimate(const std::vector<cd>& y, const ChannelStats& st,
                                      const LoSCache& los, const PhaseVector& phase, int k) {
    const int M = los.M;
    const std::size_t uk = std::size_t(k);
    cd aHy(0.0, 0.0);
    for (int m = 0; m < M; ++m) aHy += std::conj(los.a_M[std::size_t(m)]) * y[std::size_t(m)];
    const cd mean_coef = st.eta * st.rho *
                         std::sqrt(st.c[uk] * st.delta * st.eps[uk]) *
                         (1.0 - st.e2[uk]) * f_k(phase, los, k);
    std::vector<cd> qhat(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
        qhat[std::size_t(m)] = st.a3[uk] * los.a_M[std::size_t(m)] * aHy +
                               st.a4[uk] * y[std::size_t(m)] +
                               mean_coef * los.a_M[std::size_t(m)];
    return qhat;
}

struct UserEmpirical {
    OracleEstimate e_signal; // |E{qhat^H q}|^2, delta-method s.e.
    OracleEstimate e_leak;   // Var{qhat^H q}, delta-method s.e.
    std::vector<OracleEstimate> interference; // E{|qhat_k^H q_i|^2}
    OracleEstimate t_noise;  // E{||qhat^H H2 Phi Theta||^2}
    OracleEstimate s_noise;  // E{||qhat||^2}
    OracleEstimate nmse;     // E{||q - qhat||^2} / Tr Cov
    cd mean_z{0.0, 0.0};
    cd orth{0.0, 0.0};       // E{qhat^H (q - qhat)}; ~0 by orthogonality
    double orth_se = 0.0;
    double sinr = 0.0;
    double rate = 0.0;
};

struct EmpiricalSinr {
    std::vector<UserEmpirical> users;
    double sum_rate = 0.0;
    double min_rate = 0.0;
    std::uint64_t n_samples = 0;
};

namespace detail {

struct UserSums {
    double re_z = 0, im_z = 0, z2 = 0, z4 = 0;
    double re2 = 0, im2 = 0, re_im = 0, z2_re = 0, z2_im = 0;
    double t = 0, t2 = 0, s = 0, s2 = 0, err = 0, err2 = 0;
    double orth_re = 0, orth_im = 0, orth_re2 = 0, orth_im2 = 0;
    std::vector<double> u, u2;
};

struct SinrSums {
    std::vector<UserSums> user;
};

} // namespace detail

// Streams n_samples realizations and estimates every SINR expectation.
inline EmpiricalSinr empirical_sinr(const ValidatedConfig& vcfg, const PathLossSet& pl,
                                    const LoSCache& los, const PhaseVector& phase,
                                    const PowerBudget& budget, const ChannelStats& st,
                                    std::uint64_t n_samples, int threads = 1) {
    const int M = vcfg.cfg.M, N = vcfg.cfg.N, K = vcfg.cfg.K;
    const double eta = st.eta;

    auto blocks = detail::run_blocks<detail::SinrSums>(
        n_samples, threads,
        [&](std::uint64_t begin, std::uint64_t end, detail::SinrSums& acc) {
            acc.user.resize(std::size_t(K));
            for (auto& u : acc.user) {
                u.u.assign(std::size_t(K), 0.0);
                u.u2.assign(std::size_t(K), 0.0);
            }
            std::vector<std::vector<cd>> q(static_cast<std::size_t>(K)), qhat(static_cast<std::size_t>(K));
            for (std::uint64_t idx = begin; idx < end; ++idx) {
                const ChannelRealization real = sample_realization(vcfg, pl, los, idx);
                for (int k = 0; k < K; ++k)
                    q[std::size_t(k)] = aggregated_channel(real, phase, eta, M, N, k);
                for (int k = 0; k < K; ++k) {
                    const auto y = simulate_pilot_observation(vcfg, real, budget, phase,
                                                              eta, q[std::size_t(k)], k);
                    qhat[std::size_t(k)] = lmmse_estimate(y, st, los, phase, k);
                }
                for (int k = 0; k < K; ++k) {
                    auto& u = acc.user[std::size_t(k)];
                    const auto& qh = qhat[std::size_t(k)];
                    cd z(0.0, 0.0), orth(0.0, 0.0);
                    double s = 0.0, err = 0.0;
                    for (int m = 0; m < M; ++m) {
                        const cd qc = std::conj(qh[std::size_t(m)]);
                        z += qc * q[std::size_t(k)][std::size_t(m)];
                        s += std::norm(qh[std::size_t(m)]);
                        const cd e = q[std::size_t(k)][std::size_t(m)] - qh[std::size_t(m)];
                        err += std::norm(e);
                        orth += qc * e;
                    }
                    // ||qhat^H H2 Phi Theta||^2 = ||H2^H qhat|| ^2: unit-modulus
                    // diagonals do not change entry magnitudes.
                    double t = 0.0;
                    for (int n = 0; n < N; ++n) {
                        cd col(0.0, 0.0);
                        for (int m = 0; m < M; ++m)
                            col += std::conj(real.H2[std::size_t(m) * std::size_t(N) +
                                                     std::size_t(n)]) *
                                   qh[std::size_t(m)];
                        t += std::norm(col);
                    }
                    const double zr = z.real(), zi = z.imag(), z2 = std::norm(z);
                    u.re_z += zr;
                    u.im_z += zi;
                    u.z2 += z2;
                    u.z4 += z2 * z2;
                    u.re2 += zr * zr;
                    u.im2 += zi * zi;
                    u.re_im += zr * zi;
                    u.z2_re += z2 * zr;
                    u.z2_im += z2 * zi;
                    u.t += t;
                    u.t2 += t * t;
                    u.s += s;
                    u.s2 += s * s;
                    u.err += err;
                    u.err2 += err * err;
                    u.orth_re += orth.real();
                    u.orth_im += orth.imag();
                    u.orth_re2 += orth.real() * orth.real();
                    u.orth_im2 += orth.imag() * orth.imag();
                    for (int i = 0; i < K; ++i) {
                        if (i == k) continue;
                        cd zi_(0.0, 0.0);
                        for (int m = 0; m < M; ++m)
                            zi_ += std::conj(qh[std::size_t(m)]) *
                                   q[std::size_t(i)][std::size_t(m)];
                        const double v = std::norm(zi_);
                        u.u[std::size_t(i)] += v;
                        u.u2[std::size_t(i)] += v * v;
                    }
                }
            }
        });

    // merge in block order
    detail::SinrSums total;
    total.user.resize(std::size_t(K));
    for (auto& u : total.user) {
        u.u.assign(std::size_t(K), 0.0);
        u.u2.assign(std::size_t(K), 0.0);
    }
    for (const auto& b : blocks) {
        for (int k = 0; k < K; ++k) {
            auto& d = total.user[std::size_t(k)];
            const auto& s = b.user[std::size_t(k)];
            d.re_z += s.re_z; d.im_z += s.im_z; d.z2 += s.z2; d.z4 += s.z4;
            d.re2 += s.re2; d.im2 += s.im2; d.re_im += s.re_im;
            d.z2_re += s.z2_re; d.z2_im += s.z2_im;
            d.t += s.t; d.t2 += s.t2; d.s += s.s; d.s2 += s.s2;
            d.err += s.err; d.err2 += s.err2;
            d.orth_re += s.orth_re; d.orth_im += s.orth_im;
            d.orth_re2 += s.orth_re2; d.orth_im2 += s.orth_im2;
            for (int i = 0; i < K; ++i) {
                d.u[std::size_t(i)] += s.u[std::size_t(i)];
                d.u2[std::size_t(i)] += s.u2[std::size_t(i)];
            }
        }
    }

    EmpiricalSinr out;
    out.n_samples = n_samples;
    out.users.resize(std::size_t(K));
    const double n = double(n_samples);
    const double chi = vcfg.chi();
    for (int k = 0; k < K; ++k) {
        const auto& u = total.user[std::size_t(k)];
        auto& r = out.users[std::size_t(k)];
        const double x = u.re_z / n, y = u.im_z / n, m2 = u.z2 / n;
        const double var_re = std::max(0.0, u.re2 / n - x * x);
        const double var_im = std::max(0.0, u.im2 / n - y * y);
        const double cov_ri = u.re_im / n - x * y;
        const double var_m2 = std::max(0.0, u.z4 / n - m2 * m2);
        const double cov_m2re = u.z2_re / n - m2 * x;
        const double cov_m2im = u.z2_im / n - m2 * y;

        r.mean_z = cd(x, y);
        r.e_signal.n = n_samples;
        r.e_signal.mean = x * x + y * y;
        r.e_signal.std_error = std::sqrt(std::max(
            0.0, (4 * x * x * var_re + 4 * y * y * var_im + 8 * x * y * cov_ri) / n));

        r.e_leak.n = n_samples;
        r.e_leak.mean = m2 - x * x - y * y;
        r.e_leak.std_error = std::sqrt(std::max(
            0.0, (var_m2 + 4 * x * x * var_re + 4 * y * y * var_im -
                  4 * x * cov_m2re - 4 * y * cov_m2im + 8 * x * y * cov_ri) /
                     n));

        r.t_noise = detail::estimate_from_sums(u.t, u.t2, n_samples);
        r.s_noise = detail::estimate_from_sums(u.s, u.s2, n_samples);

        const double trace_cov = double(M) * (st.a1[std::size_t(k)] + st.a2[std::size_t(k)]);
        r.nmse = detail::estimate_from_sums(u.err, u.err2, n_samples);
        r.nmse.mean /= trace_cov;
        r.nmse.std_error /= trace_cov;

        r.orth = cd(u.orth_re / n, u.orth_im / n);
        const double vre = std::max(0.0, u.orth_re2 / n - r.orth.real() * r.orth.real());
        const double vim = std::max(0.0, u.orth_im2 / n - r.orth.imag() * r.orth.imag());
        r.orth_se = std::sqrt((vre + vim) / n);

        r.interference.assign(std::size_t(K), OracleEstimate{});
        double interf = 0.0;
        for (int i = 0; i < K; ++i) {
            if (i == k) continue;
            r.interference[std::size_t(i)] =
                detail::estimate_from_sums(u.u[std::size_t(i)], u.u2[std::size_t(i)],
                                           n_samples);
            interf += r.interference[std::size_t(i)].mean;
        }

        const double eta2 = st.Delta / double(N);
        const double p = budget.p;
        const double den = p * r.e_leak.mean + p * interf +
                           eta2 * st.sigma_e2 * r.t_noise.mean + st.sigma2 * r.s_noise.mean;
        r.sinr = p * r.e_signal.mean / den;
        r.rate = chi * std::log2(1.0 + r.sinr);
    }
    out.sum_rate = 0.0;
    out.min_rate = out.users.empty() ? 0.0 : out.users[0].rate;
    for (const auto& r : out.users) {
        out.sum_rate += r.rate;
        out.min_rate = std::min(out.min_rate, r.rate);
    }
    return out;
}

// Estimation-only driver: samples pilots, applies the LMMSE estimator and
// returns per-user empirical NMSE = E{||q - qhat||^2} / Tr Cov (much cheaper
// than the full SINR pipeline).
inline std::vector<OracleEstimate> empirical_nmse(const ValidatedConfig& vcfg,
                                                  const PathLossSet& pl, const LoSCache& los,
                                                  const PhaseVector& phase,
                                                  const PowerBudget& budget,
                                                  const ChannelStats& st,
                                                  std::uint64_t n_samples, int threads = 1) {
    const int M = vcfg.cfg.M, N = vcfg.cfg.N, K = vcfg.cfg.K;
    struct Acc {
        std::vector<double> err, err2;
    };
    auto blocks = detail::run_blocks<Acc>(
        n_samples, threads, [&](std::uint64_t begin, std::uint64_t end, Acc& acc) {
            acc.err.assign(std::size_t(K), 0.0);
            acc.err2.assign(std::size_t(K), 0.0);
            for (std::uint64_t idx = begin; idx < end; ++idx) {
                const ChannelRealization real = sample_realization(vcfg, pl, los, idx);
                for (int k = 0; k < K; ++k) {
                    const auto q = aggregated_channel(real, phase, st.eta, M, N, k);
                    const auto y =
                        simulate_pilot_observation(vcfg, real, budget, phase, st.eta, q, k);
                    const auto qhat = lmmse_estimate(y, st, los, phase, k);
                    double err = 0.0;
                    for (int m = 0; m < M; ++m)
                        err += std::norm(q[std::size_t(m)] - qhat[std::size_t(m)]);
                    acc.err[std::size_t(k)] += err;
                    acc.err2[std::size_t(k)] += err * err;
                }
            }
        });
    std::vector<OracleEstimate> out(static_cast<std::size_t>(K));
    std::vector<double> err(std::size_t(K), 0.0), err2(std::size_t(K), 0.0);
    for (const auto& b : blocks)
        for (int k = 0; k < K; ++k) {
            err[std::size_t(k)] += b.err[std::size_t(k)];
            err2[std::size_t(k)] += b.err2[std::size_t(k)];
        }
    for (int k = 0; k < K; ++k) {
        const double trace_cov = double(M) * (st.a1[std::size_t(k)] + st.a2[std::size_t(k)]);
        out[std::size_t(k)] =
            detail::estimate_from_sums(err[std::size_t(k)], err2[std::size_t(k)], n_samples);
        out[std::size_t(k)].mean /= trace_cov;
        out[std::size_t(k)].std_error /= trace_cov;
    }
    return out;
}

// ---- identity checks used by `validate` ----

struct DeviationReport {
    double max_abs_dev = 0.0;    // worst |empirical - expected|
    double max_dev_over_se = 0.0; // worst |dev| / std_error
};

// E{ Theta hbar hbar^H Theta^H } = rho^2 hbar hbar^H + (1 - rho^2) I.
inline DeviationReport check_phase_noise_moment(const ValidatedConfig& vcfg, const LoSCache& los,
                                    std::uint64_t n_samples, int threads = 1) {
    const int N = vcfg.cfg.N;
    const PhaseNoiseChar pn = phase_noise_char(vcfg.v_eff);
    const auto& hbar = los.hbar[0];

    struct Acc {
        std::vector<cd> sum;
        std::vector<double> sum2;
    };
    auto blocks = detail::run_blocks<Acc>(
        n_samples, threads, [&](std::uint64_t begin, std::uint64_t end, Acc& acc) {
            acc.sum.assign(std::size_t(N) * std::size_t(N), cd(0, 0));
            acc.sum2.assign(std::size_t(N) * std::size_t(N), 0.0);
            for (std::uint64_t idx = begin; idx < end; ++idx) {
                RngStream rng(vcfg.cfg.seed, idx, StreamTag::PhaseNoise);
                const auto th = sample_von_mises(vcfg.v_eff, N, rng);
                for (int a = 0; a < N; ++a)
                    for (int b = 0; b < N; ++b) {
                        const cd v = std::polar(1.0, th[std::size_t(a)]) *
                                     hbar[std::size_t(a)] * std::conj(hbar[std::size_t(b)]) *
                                     std::polar(1.0, -th[std::size_t(b)]);
                        acc.sum[std::size_t(a) * std::size_t(N) + std::size_t(b)] += v;
                        acc.sum2[std::size_t(a) * std::size_t(N) + std::size_t(b)] +=
                            std::norm(v);
                    }
            }
        });
    Acc total;
    total.sum.assign(std::size_t(N) * std::size_t(N), cd(0, 0));
    total.sum2.assign(std::size_t(N) * std::size_t(N), 0.0);
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < total.sum.size(); ++i) {
            total.sum[i] += b.sum[i];
            total.sum2[i] += b.sum2[i];
        }

    DeviationReport rep;
    const double n = double(n_samples);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            const std::size_t id = std::size_t(a) * std::size_t(N) + std::size_t(b);
            const cd mean = total.sum[id] / n;
            const double var = std::max(0.0, total.sum2[id] / n - std::norm(mean));
            // floor absorbs fp noise on deterministic entries (the diagonal)
            const double se = std::sqrt(var / n) + 1e-12 * (1.0 + std::abs(mean));
            cd expect = pn.rho * pn.rho * hbar[std::size_t(a)] *
                        std::conj(hbar[std::size_t(b)]);
            if (a == b) expect += (1.0 - pn.rho * pn.rho);
            const double dev = std::abs(mean - expect);
            rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
            rep.max_dev_over_se = std::max(rep.max_dev_over_se, dev / se);
        }
    return rep;
}

// E{ X D X^H } = v_x Tr{D} I for X with i.i.d. zero-mean entries.
inline DeviationReport check_gaussian_quadratic_moment(std::uint64_t seed, int M, int N, double v_x,
                                    std::uint64_t n_samples, int threads = 1) {
    // deterministic complex test matrix D
    std::vector<cd> D(std::size_t(N) * std::size_t(N));
    {
        RngStream rng(seed, 0, StreamTag::ConfigDraw, 7);
        for (auto& d : D) d = cd(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    }
    cd trD(0.0, 0.0);
    for (int n = 0; n < N; ++n) trD += D[std::size_t(n) * std::size_t(N) + std::size_t(n)];

    struct Acc {
        std::vector<cd> sum;
        std::vector<double> sum2;
    };
    auto blocks = detail::run_blocks<Acc>(
        n_samples, threads, [&](std::uint64_t begin, std::uint64_t end, Acc& acc) {
            acc.sum.assign(std::size_t(M) * std::size_t(M), cd(0, 0));
            acc.sum2.assign(std::size_t(M) * std::size_t(M), 0.0);
            std::vector<cd> X(std::size_t(M) * std::size_t(N));
            std::vector<cd> XD(std::size_t(M) * std::size_t(N));
            for (std::uint64_t idx = begin; idx < end; ++idx) {
                RngStream rng(seed, idx, StreamTag::ChannelH2, 3);
                fill_cgauss(X, rng, v_x);
                for (int m = 0; m < M; ++m)
                    for (int nb = 0; nb < N; ++nb) {
                        cd accv(0.0, 0.0);
                        for (int na = 0; na < N; ++na)
                            accv += X[std::size_t(m) * std::size_t(N) + std::size_t(na)] *
                                    D[std::size_t(na) * std::size_t(N) + std::size_t(nb)];
                        XD[std::size_t(m) * std::size_t(N) + std::size_t(nb)] = accv;
                    }
                for (int a = 0; a < M; ++a)
                    for (int b = 0; b < M; ++b) {
                        cd accv(0.0, 0.0);
                        for (int nb = 0; nb < N; ++nb)
                            accv += XD[std::size_t(a) * std::size_t(N) + std::size_t(nb)] *
                                    std::conj(X[std::size_t(b) * std::size_t(N) +
                                                std::size_t(nb)]);
                        acc.sum[std::size_t(a) * std::size_t(M) + std::size_t(b)] += accv;
                        acc.sum2[std::size_t(a) * std::size_t(M) + std::size_t(b)] +=
                            std::norm(accv);
                    }
            }
        });
    Acc total;
    total.sum.assign(std::size_t(M) * std::size_t(M), cd(0, 0));
    total.sum2.assign(std::size_t(M) * std::size_t(M), 0.0);
    for (const auto& b : blocks)
        for (std::size_t i = 0; i < total.sum.size(); ++i) {
            total.sum[i] += b.sum[i];
            total.sum2[i] += b.sum2[i];
        }
    DeviationReport rep;
    const double n = double(n_samples);
    for (int a = 0; a < M; ++a)
        for (int b = 0; b < M; ++b) {
            const std::size_t id = std::size_t(a) * std::size_t(M) + std::size_t(b);
            const cd mean = total.sum[id] / n;
            const double var = std::max(0.0, total.sum2[id] / n - std::norm(mean));
            const double se = std::sqrt(var / n) + 1e-12 * (1.0 + std::abs(mean));
            const cd expect = (a == b) ? v_x * trD : cd(0.0, 0.0);
            const double dev = std::abs(mean - expect);
            rep.max_abs_dev = std::max(rep.max_abs_dev, dev);
            rep.max_dev_over_se = std::max(rep.max_dev_over_se, dev / se);
        }
    return rep;
}

// Empirical mean of y_p^k against eta rho sqrt(c delta eps) f_k a_M,
// and the covariance of q_k along / orthogonal to a_M.
struct ObservationMomentReport {
    double mean_dev_over_se = 0.0;
    double var_am_dev_over_se = 0.0;   // a_M-direction variance vs a1 M + a2
    double var_orth_dev_over_se = 0.0; // orthogonal direction vs a2
};

inline ObservationMomentReport check_observation_moments(const ValidatedConfig& vcfg, const PathLossSet& pl,
                                 const LoSCache& los, const PhaseVector& phase,
                                 const PowerBudget& budget, const ChannelStats& st,
                                 int k, std::uint64_t n_samples, int threads = 1) {
    const int M = vcfg.cfg.M, N = vcfg.cfg.N;
    const std::size_t uk = std::size_t(k);

    // unit vector along a_M and one orthogonal to it (from the canonical basis)
    std::vector<cd> u1(static_cast<std::size_t>(M)), u2(static_cast<std::size_t>(M));
    const double inv_sqM = 1.0 / std::sqrt(double(M));
    for (int m = 0; m < M; ++m) u1[std::size_t(m)] = los.a_M[std::size_t(m)] * inv_sqM;
    // u2 = (e_0 - <u1,e_0> u1) normalized
    {
        const cd c0 = std::conj(u1[0]);
        double nrm2 = 0.0;
        for (int m = 0; m < M; ++m) {
            u2[std::size_t(m)] = (m == 0 ? cd(1.0, 0.0) : cd(0.0, 0.0)) -
                                 c0 * u1[std::size_t(m)];
            nrm2 += std::norm(u2[std::size_t(m)]);
        }
        const double inv = 1.0 / std::sqrt(nrm2);
        for (auto& x : u2) x *= inv;
    }

    struct Acc {
        cd sum_y_u1{0, 0};
        double p1 = 0, p1_2 = 0, p2 = 0, p2_2 = 0;
        double yre2 = 0, yim2 = 0; // for mean s.e.
    };
    const cd mean_u1 = st.eta * st.rho * std::sqrt(st.c[uk] * st.delta * st.eps[uk]) *
                       f_k(phase, los, k) * std::sqrt(double(M));
    auto blocks = detail::run_blocks<Acc>(
        n_samples, threads, [&](std::uint64_t begin, std::uint64_t end, Acc& acc) {
            for (std::uint64_t idx = begin; idx < end; ++idx) {
                const ChannelRealization real = sample_realization(vcfg, pl, los, idx);
                const auto q = aggregated_channel(real, phase, st.eta, M, N, k);
                const auto y =
                    simulate_pilot_observation(vcfg, real, budget, phase, st.eta, q, k);
                cd yu1(0, 0);
                for (int m = 0; m < M; ++m)
                    yu1 += std::conj(u1[std::size_t(m)]) * y[std::size_t(m)];
                acc.sum_y_u1 += yu1;
                acc.yre2 += yu1.real() * yu1.real();
                acc.yim2 += yu1.imag() * yu1.imag();
                // centered projections of q_k (its mean lies along a_M)
                cd q1(0, 0), q2(0, 0);
                for (int m = 0; m < M; ++m) {
                    q1 += std::conj(u1[std::size_t(m)]) * q[std::size_t(m)];
                    q2 += std::conj(u2[std::size_t(m)]) * q[std::size_t(m)];
                }
                q1 -= mean_u1;
                const double p1 = std::norm(q1), p2 = std::norm(q2);
                acc.p1 += p1;
                acc.p1_2 += p1 * p1;
                acc.p2 += p2;
                acc.p2_2 += p2 * p2;
            }
        });
    Acc total;
    for (const auto& b : blocks) {
        total.sum_y_u1 += b.sum_y_u1;
        total.p1 += b.p1;
        total.p1_2 += b.p1_2;
        total.p2 += b.p2;
        total.p2_2 += b.p2_2;
        total.yre2 += b.yre2;
        total.yim2 += b.yim2;
    }
    const double n = double(n_samples);
    ObservationMomentReport rep;
    {
        const cd mean = total.sum_y_u1 / n;
        const double vre = std::max(0.0, total.yre2 / n - mean.real() * mean.real());
        const double vim = std::max(0.0, total.yim2 / n - mean.imag() * mean.imag());
        const double se = std::sqrt((vre + vim) / n);
        rep.mean_dev_over_se = std::abs(mean - mean_u1) / se;
    }
    {
        const auto est1 = detail::estimate_from_sums(total.p1, total.p1_2, n_samples);
        const double expect1 = st.a1[uk] * double(M) + st.a2[uk];
        rep.var_am_dev_over_se = std::abs(est1.mean - expect1) / est1.std_error;
        const auto est2 = detail::estimate_from_sums(total.p2, total.p2_2, n_samples);
        const double expect2 = st.a2[uk];
        rep.var_orth_dev_over_se = std::abs(est2.mean - expect2) / est2.std_error;
    }
    return rep;
}

} // namespace arisim
