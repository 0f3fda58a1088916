#include "doctest.h"

#include <cmath>
#include <complex>

#include "arisim/rng.hpp"

using namespace arisim;

// Reference vectors from the Random123 known-answer tests for philox4x32-10.
TEST_CASE("philox4x32-10 known-answer vectors") {
    {
        auto out = philox::block({0u, 0u, 0u, 0u}, {0u, 0u});
        CHECK(out[0] == 0x6627e8d5u);
        CHECK(out[1] == 0xe169c58du);
        CHECK(out[2] == 0xbc57ac4cu);
        CHECK(out[3] == 0x9b00dbd8u);
    }
    {
        auto out = philox::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                                 {0xffffffffu, 0xffffffffu});
        CHECK(out[0] == 0x408f276du);
        CHECK(out[1] == 0x41c83b0eu);
        CHECK(out[2] == 0xa20bc7c6u);
        CHECK(out[3] == 0x6d5451fdu);
    }
    {
        auto out = philox::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                 {0xa4093822u, 0x299f31d0u});
        CHECK(out[0] == 0xd16cfe09u);
        CHECK(out[1] == 0x94fdccebu);
        CHECK(out[2] == 0x5001e420u);
        CHECK(out[3] == 0x24126ea1u);
    }
}

TEST_CASE("streams are deterministic and tag-separated") {
    RngStream a(42, 7, StreamTag::ChannelH2);
    RngStream b(42, 7, StreamTag::ChannelH2);
    RngStream c(42, 7, StreamTag::ChannelHk);
    RngStream d(42, 8, StreamTag::ChannelH2);
    bool all_eq = true, any_ne_tag = false, any_ne_idx = false;
    for (int i = 0; i < 64; ++i) {
        const auto x = a.next_u32();
        all_eq = all_eq && (x == b.next_u32());
        any_ne_tag = any_ne_tag || (x != c.next_u32());
        any_ne_idx = any_ne_idx || (x != d.next_u32());
    }
    CHECK(all_eq);
    CHECK(any_ne_tag);
    CHECK(any_ne_idx);
}

TEST_CASE("normal draws have unit variance and zero mean") {
    RngStream rng(123, 0, StreamTag::ChannelDk);
    const int n = 200000;
    double sum = 0, sum2 = 0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.normal();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("von mises circular moments match the Bessel ratio") {
    // v=0: uniform, zero resultant
    {
        RngStream rng(5, 0, StreamTag::PhaseNoise);
        std::complex<double> r(0, 0);
        const int n = 100000;
        for (int i = 0; i < n; ++i) r += std::polar(1.0, von_mises(rng, 0.0));
        CHECK(std::abs(r) / double(n) < 0.02);
    }
    // huge v: concentrated at zero
    {
        RngStream rng(5, 1, StreamTag::PhaseNoise);
        std::complex<double> r(0, 0);
        const int n = 10000;
        for (int i = 0; i < n; ++i) r += std::polar(1.0, von_mises(rng, 1e6));
        CHECK(std::abs(r / double(n) - 1.0) < 1e-4);
    }
    // v=2: resultant length I1(2)/I0(2) ~= 0.697775
    {
        RngStream rng(5, 2, StreamTag::PhaseNoise);
        double re = 0;
        const int n = 1000000;
        for (int i = 0; i < n; ++i) re += std::cos(von_mises(rng, 2.0));
        const double mean = re / n;
        // var of cos(theta) = (1 + l)/2 - rho^2 ~= 0.164; 3 s.e.
        const double se = std::sqrt(0.164 / double(n));
        CHECK(std::abs(mean - 0.6977746579640078) < 3.0 * se);
    }
}
