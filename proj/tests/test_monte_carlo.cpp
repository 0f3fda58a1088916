#include "doctest.h"

#include <cmath>

#include "arisim/experiments.hpp"
#include "arisim/monte_carlo.hpp"

using namespace arisim;

namespace {

struct Scenario {
    ValidatedConfig v;
    PathLossSet pl;
    LoSCache los;
    PowerBudget budget;
    ChannelStats st;
    PhaseVector phase;
};

Scenario make(SystemConfig cfg) {
    Scenario s;
    s.v = validate(cfg);
    s.pl = derive_pathloss(s.v);
    s.los = build_los_cache(s.v, generate_angles(cfg.seed, cfg.K));
    s.budget = power_split(s.v, s.pl);
    s.st = compute_stats(s.v, s.pl, s.budget);
    s.phase = random_phase(cfg.seed + 1, cfg.N);
    return s;
}

SystemConfig mc_cfg() {
    SystemConfig cfg;
    cfg.M = 16;
    cfg.N = 16;
    cfg.K = 2;
    cfg.delta = 1.0;
    cfg.epsilon_scalar = 1.5;
    cfg.seed = 2024;
    return cfg;
}

} // namespace

TEST_CASE("phase-noise and Gaussian quadratic moment identities hold empirically") {
    auto s = make(mc_cfg());
    auto r3 = check_phase_noise_moment(s.v, s.los, 20000, 2);
    CHECK(r3.max_dev_over_se < family_bound(256));
    auto r4 = check_gaussian_quadratic_moment(7, 8, 6, 1.3, 20000, 2);
    CHECK(r4.max_dev_over_se < family_bound(64));
}

TEST_CASE("pilot observation mean and covariance projections") {
    auto s = make(mc_cfg());
    auto rep = check_observation_moments(s.v, s.pl, s.los, s.phase, s.budget, s.st, 0, 30000, 2);
    const double bound = family_bound(3);
    CHECK(rep.mean_dev_over_se < bound);
    CHECK(rep.var_am_dev_over_se < bound);
    CHECK(rep.var_orth_dev_over_se < bound);
}

TEST_CASE("noiseless pilot returns the aggregated channel") {
    SystemConfig cfg = mc_cfg();
    cfg.sigma2_dBm = -1000.0; // ~1e-103 W
    auto s = make(cfg);
    s.v.sigma_e2_eff = 0.0;
    auto real = sample_realization(s.v, s.pl, s.los, 3);
    auto q = aggregated_channel(real, s.phase, s.st.eta, cfg.M, cfg.N, 0);
    auto y = simulate_pilot_observation(s.v, real, s.budget, s.phase, s.st.eta, q, 0);
    for (int m = 0; m < cfg.M; ++m)
        CHECK(std::abs(y[std::size_t(m)] - q[std::size_t(m)]) < 1e-40);
}

TEST_CASE("LMMSE estimator: orthogonality and delta = 0 structure") {
    auto s = make(mc_cfg());
    auto emp = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 20000, 2);
    for (int k = 0; k < s.v.cfg.K; ++k) {
        const auto& u = emp.users[std::size_t(k)];
        CHECK(std::abs(u.orth.real()) < 4.0 * u.orth_se);
        CHECK(std::abs(u.orth.imag()) < 4.0 * u.orth_se);
    }

    // delta = 0: B_k = 0 and A_k diagonal, so qhat = a4 * y exactly
    SystemConfig cfg = mc_cfg();
    cfg.delta = 0.0;
    auto s0 = make(cfg);
    auto real = sample_realization(s0.v, s0.pl, s0.los, 11);
    auto q = aggregated_channel(real, s0.phase, s0.st.eta, cfg.M, cfg.N, 0);
    auto y = simulate_pilot_observation(s0.v, real, s0.budget, s0.phase, s0.st.eta, q, 0);
    auto qhat = lmmse_estimate(y, s0.st, s0.los, s0.phase, 0);
    for (int m = 0; m < cfg.M; ++m)
        CHECK(std::abs(qhat[std::size_t(m)] - s0.st.a4[0] * y[std::size_t(m)]) <
              1e-18 * std::abs(s0.st.a4[0]));
}

TEST_CASE("empirical NMSE tracks the closed form, including its v dependence") {
    for (double v : {0.0, 2.0, 100.0}) {
        SystemConfig cfg = mc_cfg();
        cfg.v = v;
        auto s = make(cfg);
        auto closed = nmse_closed_form(s.st, cfg.M);
        auto emp = empirical_nmse(s.v, s.pl, s.los, s.phase, s.budget, s.st, 40000, 2);
        for (int k = 0; k < cfg.K; ++k) {
            const auto& e = emp[std::size_t(k)];
            const double dev = std::abs(e.mean - closed[std::size_t(k)]);
            CHECK(dev < std::max(4.0 * e.std_error, 0.01 * closed[std::size_t(k)]));
        }
    }
}

TEST_CASE("doubling the sample count shrinks the standard error as 1/sqrt(2)") {
    auto s = make(mc_cfg());
    auto a = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 8000, 2);
    auto b = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 16000, 2);
    const double ratio = b.users[0].s_noise.std_error / a.users[0].s_noise.std_error;
    CHECK(ratio == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
}

TEST_CASE("accumulation is bitwise identical across thread counts") {
    auto s = make(mc_cfg());
    auto a = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 6000, 1);
    auto b = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 6000, 3);
    for (int k = 0; k < s.v.cfg.K; ++k) {
        CHECK(a.users[std::size_t(k)].e_signal.mean == b.users[std::size_t(k)].e_signal.mean);
        CHECK(a.users[std::size_t(k)].e_leak.mean == b.users[std::size_t(k)].e_leak.mean);
        CHECK(a.users[std::size_t(k)].t_noise.mean == b.users[std::size_t(k)].t_noise.mean);
        CHECK(a.users[std::size_t(k)].rate == b.users[std::size_t(k)].rate);
    }
}

TEST_CASE("closed-form SINR components match the Monte Carlo oracle") {
    auto s = make(mc_cfg());
    auto emp = empirical_sinr(s.v, s.pl, s.los, s.phase, s.budget, s.st, 30000, 2);
    std::size_t m = 0;
    double worst = 0.0;
    for (int k = 0; k < s.v.cfg.K; ++k) {
        auto sc = sinr_components(s.v, s.st, s.los, s.phase, k);
        const auto& u = emp.users[std::size_t(k)];
        auto dev = [&](double cf, const OracleEstimate& e) {
            worst = std::max(worst, std::abs(cf - e.mean) / e.std_error);
            ++m;
        };
        dev(sc.E_signal, u.e_signal);
        dev(sc.E_leak, u.e_leak);
        dev(sc.E_s_noise, u.s_noise);
        dev(sc.E_t_noise, u.t_noise);
        for (int i = 0; i < s.v.cfg.K; ++i)
            if (i != k) dev(sc.I[std::size_t(i)], u.interference[std::size_t(i)]);
    }
    CHECK(worst < family_bound(m));
}
