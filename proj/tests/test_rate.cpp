#include "doctest.h"

#include <cmath>

#include "arisim/monte_carlo.hpp"
#include "arisim/rate.hpp"

using namespace arisim;

namespace {

struct Scenario {
    ValidatedConfig v;
    PathLossSet pl;
    LoSCache los;
    PowerBudget budget;
    ChannelStats st;
};

Scenario make(SystemConfig cfg) {
    Scenario s;
    s.v = validate(cfg);
    s.pl = derive_pathloss(s.v);
    s.los = build_los_cache(s.v, generate_angles(cfg.seed, cfg.K));
    s.budget = power_split(s.v, s.pl);
    s.st = compute_stats(s.v, s.pl, s.budget);
    return s;
}

SystemConfig small_cfg() {
    SystemConfig cfg;
    cfg.M = 16;
    cfg.N = 16;
    cfg.K = 3;
    cfg.delta = 1.0;
    cfg.epsilon_scalar = 1.5;
    cfg.seed = 99;
    return cfg;
}

} // namespace

TEST_CASE("desired signal equals the squared kernel for random configurations") {
    RngStream rng(5150, 0, StreamTag::ConfigDraw);
    SystemConfig base = small_cfg();
    auto s = make(base);
    for (int t = 0; t < 100; ++t) {
        SystemConfig cfg = base;
        cfg.delta = rng.uniform(0.0, 10.0);
        cfg.epsilon_scalar = rng.uniform(0.0, 10.0);
        cfg.v = rng.uniform(0.0, 20.0);
        auto vc = validate(cfg);
        auto st = compute_stats(vc, s.pl, s.budget);
        PhaseVector ph = random_phase(17, cfg.N, std::uint64_t(t));
        for (int k = 0; k < cfg.K; ++k) {
            const double kern = static_noise_kernel(st, s.los, ph, k);
            const double sig = desired_signal(st, s.los, ph, k);
            CHECK(std::abs(sig - kern * kern) <= 1e-12 * std::abs(sig));
        }
    }
}

TEST_CASE("gamma-only degenerate: kernel reduces to M gamma e1") {
    SystemConfig cfg = small_cfg();
    auto s = make(cfg);
    auto pl = s.pl;
    for (auto& a : pl.alpha) a = 1e-30; // c_k ~ 0
    auto st = compute_stats(s.v, pl, s.budget);
    PhaseVector ph = random_phase(3, cfg.N);
    for (int k = 0; k < cfg.K; ++k) {
        const double expect = double(cfg.M) * pl.gamma[std::size_t(k)] * st.e1[std::size_t(k)];
        CHECK(static_noise_kernel(st, s.los, ph, k) ==
              doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("delta = 0: kernel, thermal, leak and full SINR are phase independent") {
    SystemConfig cfg = small_cfg();
    cfg.delta = 0.0;
    auto s = make(cfg);
    PhaseVector p1 = random_phase(11, cfg.N, 0), p2 = random_phase(11, cfg.N, 1);
    for (int k = 0; k < cfg.K; ++k) {
        const double expect = double(cfg.M) * s.st.e1[std::size_t(k)] *
                              (s.st.Delta * s.st.c[std::size_t(k)] *
                                   (s.st.eps[std::size_t(k)] + 1.0) +
                               s.st.gamma[std::size_t(k)]);
        CHECK(static_noise_kernel(s.st, s.los, p1, k) ==
              doctest::Approx(expect).epsilon(1e-12));
        CHECK(thermal_noise_term(s.st, s.los, p1, k) ==
              doctest::Approx(thermal_noise_term(s.st, s.los, p2, k)).epsilon(1e-12));
        CHECK(leakage_term(s.st, s.los, p1, k) ==
              doctest::Approx(leakage_term(s.st, s.los, p2, k)).epsilon(1e-12));
    }
    auto r1 = sinr_report(s.v, s.st, s.los, p1, s.budget);
    auto r2 = sinr_report(s.v, s.st, s.los, p2, s.budget);
    for (int k = 0; k < cfg.K; ++k)
        CHECK(r1.sinr[std::size_t(k)] ==
              doctest::Approx(r2.sinr[std::size_t(k)]).epsilon(1e-12));
}

TEST_CASE("passive baseline: thermal contribution to the noise term vanishes") {
    SystemConfig cfg = small_cfg();
    cfg.mode = Mode::PassiveRIS;
    auto s = make(cfg);
    PhaseVector ph = random_phase(4, cfg.N);
    for (int k = 0; k < cfg.K; ++k) {
        auto sc = sinr_components(s.v, s.st, s.los, ph, k);
        CHECK(sc.E_noise == doctest::Approx(s.st.sigma2 * sc.E_s_noise).epsilon(1e-14));
    }
}

TEST_CASE("interference is symmetric for fully symmetric users") {
    SystemConfig cfg = small_cfg();
    cfg.K = 2;
    auto v = validate(cfg);
    auto pl = derive_pathloss(v);
    pl.gamma[1] = pl.gamma[0];
    auto angles = generate_angles(cfg.seed, cfg.K);
    angles.varphi_kr_a[1] = angles.varphi_kr_a[0];
    angles.varphi_kr_e[1] = angles.varphi_kr_e[0];
    auto los = build_los_cache(v, angles);
    auto budget = power_split(v, pl);
    auto st = compute_stats(v, pl, budget);
    PhaseVector ph = random_phase(6, cfg.N);
    CHECK(interference_term(st, los, ph, 0, 1) ==
          doctest::Approx(interference_term(st, los, ph, 1, 0)).epsilon(1e-12));
}

TEST_CASE("components are nonnegative across random scenarios") {
    RngStream rng(616, 0, StreamTag::ConfigDraw);
    SystemConfig base = small_cfg();
    auto s0 = make(base);
    for (int t = 0; t < 50; ++t) {
        SystemConfig cfg = base;
        cfg.delta = rng.uniform(0.0, 16.0);
        cfg.epsilon_scalar = rng.uniform(0.0, 16.0);
        cfg.v = rng.uniform(0.0, 50.0);
        auto vc = validate(cfg);
        auto st = compute_stats(vc, s0.pl, s0.budget);
        PhaseVector ph = random_phase(23, cfg.N, std::uint64_t(t));
        for (int k = 0; k < cfg.K; ++k) {
            auto sc = sinr_components(vc, st, s0.los, ph, k);
            CHECK(sc.E_signal >= 0.0);
            CHECK(sc.E_leak >= 0.0);
            CHECK(sc.E_noise >= 0.0);
            CHECK(sc.E_t_noise >= 0.0);
            for (int i = 0; i < cfg.K; ++i)
                if (i != k) CHECK(sc.I[std::size_t(i)] >= 0.0);
        }
    }
}

TEST_CASE("phase noise monotonicity of the beamformed desired signal") {
    // With the phases aligned to user 0, the coherent |f|^2 rho^2 part
    // dominates and less phase noise means more desired-signal power. (At
    // unaligned phases the eps(1-rho^2) covariance part can win, so the
    // ordering is a property of the beamformed configuration only.)
    SystemConfig cfg = small_cfg();
    auto s = make(cfg);
    PhaseVector ph = aligned_phase(s.los, 0);
    auto signal_at = [&](double v) {
        SystemConfig c = cfg;
        c.v = v;
        auto st = compute_stats(validate(c), s.pl, s.budget);
        return desired_signal(st, s.los, ph, 0);
    };
    const double s0 = signal_at(0.0);
    const double s2 = signal_at(2.0);
    const double sinf = signal_at(1e12);
    CHECK(s0 < s2);
    CHECK(s2 < sinf);
}

TEST_CASE("SINR scales to zero with p; K = 1 has no interference") {
    SystemConfig cfg = small_cfg();
    auto s = make(cfg);
    PhaseVector ph = random_phase(9, cfg.N);
    PowerBudget tiny = s.budget;
    tiny.p = 1e-18; // data-phase power only; estimator statistics unchanged
    auto r = sinr_report(s.v, s.st, s.los, ph, tiny);
    for (double x : r.sinr) CHECK(x < 1e-6);

    SystemConfig one = cfg;
    one.K = 1;
    auto s1 = make(one);
    auto r1 = sinr_report(s1.v, s1.st, s1.los, random_phase(2, one.N), s1.budget);
    CHECK(r1.components[0].I.size() == 1);
    CHECK(r1.components[0].I[0] == 0.0);
    CHECK(r1.min_rate == r1.sum_rate);
}

TEST_CASE("rate report consistency and chi conventions") {
    SystemConfig cfg = small_cfg();
    auto s = make(cfg);
    auto r = sinr_report(s.v, s.st, s.los, random_phase(13, cfg.N), s.budget);
    double sum = 0.0, mn = r.rate[0];
    for (std::size_t k = 0; k < r.rate.size(); ++k) {
        CHECK(r.rate[k] ==
              doctest::Approx(r.chi * std::log2(1.0 + r.sinr[k])).epsilon(1e-14));
        sum += r.rate[k];
        mn = std::min(mn, r.rate[k]);
    }
    CHECK(r.sum_rate == doctest::Approx(sum).epsilon(1e-14));
    CHECK(r.min_rate == doctest::Approx(mn).epsilon(1e-14));
    CHECK(r.chi == doctest::Approx((196.0 - 8.0) / 196.0).epsilon(1e-14));

    SystemConfig alt = cfg;
    alt.chi_convention = ChiConvention::Tau;
    CHECK(validate(alt).chi() == doctest::Approx((196.0 - 8.0) / 8.0).epsilon(1e-14));
}

TEST_CASE("scaling laws: decay, phase independence, thermal-noise cause") {
    SystemConfig cfg = small_cfg();
    cfg.K = 2;
    auto s = make(cfg);
    const double eu = dbm_to_watts(10.0);

    auto rate_at = [&](SystemConfig c, ScalingRegime regime, double a, double m) {
        c.M = int(m);
        auto v = validate(c);
        auto pl = derive_pathloss(v);
        auto los = build_los_cache(v, generate_angles(c.seed, c.K));
        PowerBudget b = s.budget;
        b.p = eu / std::pow(m, a);
        auto st = compute_stats(v, pl, b);
        PhaseVector ph = random_phase(31, c.N);
        double sum = 0.0;
        for (int k = 0; k < c.K; ++k)
            sum += scaling_dominant_rate(v, st, los, ph, regime, a, eu, m, k);
        return sum;
    };

    const double r256 = rate_at(cfg, ScalingRegime::RicRic, 1.0, 256.0);
    const double r1024 = rate_at(cfg, ScalingRegime::RicRic, 1.0, 1024.0);
    const double r4096 = rate_at(cfg, ScalingRegime::RicRic, 1.0, 4096.0);
    CHECK(r1024 < r256);
    CHECK(r4096 < r1024);

    SystemConfig ray = cfg;
    ray.delta = 0.0;
    ray.epsilon.clear();
    ray.epsilon_scalar = 0.0;
    {
        ray.M = 256;
        auto v = validate(ray);
        auto pl = derive_pathloss(v);
        auto los = build_los_cache(v, generate_angles(ray.seed, ray.K));
        PowerBudget b = s.budget;
        b.p = eu / 256.0;
        auto st = compute_stats(v, pl, b);
        const double ra = scaling_dominant_rate(v, st, los, random_phase(1, ray.N, 0),
                                                ScalingRegime::RayRay, 1.0, eu, 256.0, 0);
        const double rb = scaling_dominant_rate(v, st, los, random_phase(1, ray.N, 1),
                                                ScalingRegime::RayRay, 1.0, eu, 256.0, 0);
        CHECK(ra == doctest::Approx(rb).epsilon(1e-12));
    }

    CHECK_THROWS_AS(rate_at(cfg, ScalingRegime::RicRay, 1.0, 256.0), RegimeMismatch);
    CHECK_THROWS_AS(rate_at(cfg, ScalingRegime::RayRay, 1.0, 256.0), RegimeMismatch);

    // sigma_e^2 = 0 kills the thermal term; the rate stops collapsing for a < 1
    SystemConfig quiet = cfg;
    quiet.mode = Mode::PassiveRIS;
    const double q1 = rate_at(quiet, ScalingRegime::RicRic, 0.5, 256.0);
    const double q2 = rate_at(quiet, ScalingRegime::RicRic, 0.5, 1024.0);
    const double q3 = rate_at(quiet, ScalingRegime::RicRic, 0.5, 4096.0);
    CHECK(q2 >= q1 - 1e-12);
    CHECK(q3 >= q2 - 1e-12);
}

#include "exact_oracle.hpp"

TEST_CASE("kernel, signal, leakage and interference against the exact oracle") {
    // N = 4 without RIS thermal noise, N = 1 with it (enumeration sizes)
    struct Case {
        int N;
        double delta, eps, v;
        bool with_thermal;
        int phase_kind; // 0 random, 1 aligned
    };
    const Case cases[] = {
        {4, 1.0, 1.5, 2.0, false, 0},  {4, 0.0, 1.5, 2.0, false, 0},
        {4, 4.0, 0.5, 0.0, false, 0},  {4, 1.0, 1.5, 1e9, false, 1},
        {4, 2.0, 3.0, 0.7, false, 0},  {1, 1.0, 1.5, 2.0, true, 0},
        {1, 4.0, 1.5, 1e9, true, 0},   {1, 1.0, 6.0, 0.0, true, 0},
    };
    for (const auto& c : cases) {
        SystemConfig cfg;
        cfg.M = 16;
        cfg.N = c.N;
        cfg.K = 2;
        cfg.delta = c.delta;
        cfg.epsilon_scalar = c.eps;
        cfg.v = c.v;
        cfg.seed = 4242;
        auto v = validate(cfg);
        if (!c.with_thermal) v.sigma_e2_eff = 0.0;
        auto pl = derive_pathloss(v);
        auto los = build_los_cache(v, generate_angles(cfg.seed, cfg.K));
        auto budget = power_split(v, pl);
        auto st = compute_stats(v, pl, budget);
        PhaseVector phase =
            c.phase_kind == 1 ? aligned_phase(los, 0) : random_phase(7, cfg.N);

        auto m = exact_oracle::self_moments(v, pl, los, phase, budget, st, 0);
        const double kern = static_noise_kernel(st, los, phase, 0);
        CHECK(kern == doctest::Approx(m.e_z).epsilon(1e-9));
        CHECK(desired_signal(st, los, phase, 0) ==
              doctest::Approx(m.e_z * m.e_z).epsilon(1e-9));
        CHECK(leakage_term(st, los, phase, 0) == doctest::Approx(m.leak()).epsilon(1e-8));
        const double iki = exact_oracle::interference(v, pl, los, phase, budget, st, 0, 1);
        CHECK(interference_term(st, los, phase, 0, 1) ==
              doctest::Approx(iki).epsilon(1e-9));
    }
}
