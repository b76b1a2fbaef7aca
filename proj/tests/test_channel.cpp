#include "support.hpp"

#include "wbloc/channel.hpp"
#include "wbloc/error.hpp"
#include "wbloc/experiments.hpp"
#include "wbloc/rng.hpp"

#include <doctest.h>

#include <numeric>

using namespace wbloc;
using namespace wbloc::test;

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff})
          == PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0})
          == PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("random streams are keyed by seed, cell and replication")
{
    auto first = [](RandomStream s) {
        std::vector<std::uint32_t> v;
        for (int i = 0; i < 16; ++i) v.push_back(s.next_u32());
        return v;
    };
    CHECK(first(RandomStream(7, 2, 3)) == first(RandomStream(7, 2, 3)));
    CHECK(first(RandomStream(7, 2, 3)) != first(RandomStream(8, 2, 3)));
    CHECK(first(RandomStream(7, 2, 3)) != first(RandomStream(7, 3, 3)));
    CHECK(first(RandomStream(7, 2, 3)) != first(RandomStream(7, 2, 4)));
}

TEST_CASE("distribution moments")
{
    RandomStream rng(42);
    const int n = 200000;
    std::vector<double> u(n), z(n), e(n), g(n);
    for (int i = 0; i < n; ++i) {
        u[i] = rng.uniform();
        z[i] = rng.normal();
        e[i] = rng.exponential(4.0);
        g[i] = rng.gamma(2.5, 0.5);
        REQUIRE(u[i] > 0.0);
        REQUIRE(u[i] < 1.0);
    }
    const auto su = summarize(u);
    const auto sz = summarize(z);
    const auto se = summarize(e);
    const auto sg = summarize(g);
    CHECK(std::abs(su.mean - 0.5) < 3 * su.standard_error);
    CHECK(std::abs(sz.mean) < 3 * sz.standard_error);
    CHECK(std::abs(se.mean - 0.25) < 3 * se.standard_error);
    CHECK(std::abs(sg.mean - 1.25) < 3 * sg.standard_error);

    std::vector<double> z2(n);
    for (int i = 0; i < n; ++i) z2[i] = z[i] * z[i];
    const auto sz2 = summarize(z2);
    CHECK(std::abs(sz2.mean - 1.0) < 3 * sz2.standard_error);
}

TEST_CASE("Nakagami with m = 1 is Rayleigh: mean square equals the spread")
{
    RandomStream rng(9);
    for (double m : {0.5, 1.0, 3.0}) {
        std::vector<double> sq(100000);
        for (double& v : sq) {
            const double a = rng.nakagami(m, 2.0);
            v = a * a;
        }
        const auto s = summarize(sq);
        CHECK(std::abs(s.mean - 2.0) < 3 * s.standard_error);
        if (m == 1.0) {
            // Exponential squared magnitude: variance equals mean squared.
            CHECK(s.standard_error * std::sqrt(double(sq.size())) == doctest::Approx(2.0).epsilon(0.03));
        }
    }
}

TEST_CASE("propagation delay")
{
    CHECK(propagation_delay(299.792458, 0.0) == doctest::Approx(1e-6).epsilon(1e-15));
    CHECK(propagation_delay(299.792458, 0.299792458) - propagation_delay(299.792458, 0.0)
          == doctest::Approx(1e-9).epsilon(1e-9));
    const double offset = kSpeedOfLight * 1e-9;
    for (double d : {1.0, 10.0, 300.0}) {
        for (double b : {0.0, 0.5, 7.0}) {
            CHECK(propagation_delay(d, b, offset) - propagation_delay(d, b)
                  == doctest::Approx(1e-9).epsilon(1e-6));
        }
    }
}

TEST_CASE("first contiguous cluster")
{
    const std::vector<double> a{10e-9, 12e-9, 20e-9};
    CHECK(first_contiguous_cluster(a, 4e-9) == 2);
    const std::vector<double> b{10e-9};
    CHECK(first_contiguous_cluster(b, 4e-9) == 1);
    const std::vector<double> c{10e-9, 13.9e-9, 17.8e-9};
    CHECK(first_contiguous_cluster(c, 4e-9) == 3);
    // A gap of exactly the pulse duration separates the paths.
    const std::vector<double> d{0.0, 4e-9};
    CHECK(first_contiguous_cluster(d, 4e-9) == 1);

    std::mt19937_64 gen(1);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> delays{0.0};
        for (int l = 1; l < 12; ++l) delays.push_back(delays.back() + uniform(gen, 0.1e-9, 6e-9));
        std::size_t prev = 0;
        for (double ts = 0.5e-9; ts < 8e-9; ts += 0.5e-9) {
            const std::size_t n = first_contiguous_cluster(delays, ts);
            CHECK(n >= prev);
            prev = n;
        }
    }
}

TEST_CASE("channel validation")
{
    CHECK_NOTHROW(validate_channel({{{0.0, 1.0}, {0.3, -0.5}}}, Sight::LOS, 0));
    CHECK_NOTHROW(validate_channel({{{0.2, 1.0}}}, Sight::NLOS, 0));
    CHECK_THROWS_AS(validate_channel({}, Sight::LOS, 0), InvalidChannel);
    CHECK_THROWS_AS(validate_channel({{{0.1, 1.0}}}, Sight::LOS, 0), InvalidChannel);
    CHECK_THROWS_AS(validate_channel({{{0.0, 1.0}}}, Sight::NLOS, 0), InvalidChannel);
    CHECK_THROWS_AS(validate_channel({{{0.0, 1.0}, {0.0, 1.0}}}, Sight::LOS, 0), InvalidChannel);
    CHECK_THROWS_AS(validate_channel({{{0.0, 1.0}, {0.3, 0.0}}}, Sight::LOS, 0), InvalidChannel);
    CHECK_THROWS_AS(validate_channel({{{0.0, std::nan("")}}}, Sight::LOS, 0), InvalidChannel);

    const NetworkTopology t({0, 0}, {{Vec2(1, 0), Sight::LOS}, {Vec2(0, 1), Sight::LOS}});
    CHECK_THROWS_AS(validate_channels({{{{0.0, 1.0}}}}, t), InvalidChannel);
}

TEST_CASE("power delay profile sums to the received power")
{
    ChannelModelParams p;
    const std::vector<double> biases{0.0, 0.5, 1.7, 3.0, 9.0};
    const auto q = power_delay_profile(p, biases, -7.0);
    CHECK(std::accumulate(q.begin(), q.end(), 0.0) == doctest::Approx(db_to_linear(-7.0)).epsilon(1e-14));
    for (std::size_t l = 1; l < q.size(); ++l) CHECK(q[l] < q[l - 1]);
    CHECK(q[1] / q[0] == doctest::Approx(std::exp(-0.5 / (kSpeedOfLight * p.decay_s))));
    CHECK(mean_rss_db(p, 10.0) == doctest::Approx(-20.0));
}

TEST_CASE("sampled channels respect the structural invariants")
{
    ChannelModelParams p;
    p.path_count = 20;
    p.shadowing_db = 4.0;
    RandomStream rng(123);
    for (int i = 0; i < 500; ++i) {
        const Sight sight = i % 2 ? Sight::NLOS : Sight::LOS;
        const auto s = sample_channel(p, 10.0, sight, rng);
        REQUIRE(s.channel.size() == 20);
        CHECK_NOTHROW(validate_channel(s.channel, sight, 0));
        if (sight == Sight::LOS) CHECK(s.channel.paths[0].bias_m == 0.0);
        else CHECK(s.channel.paths[0].bias_m > 0.0);
    }

    // Huge arrival rates pile every path onto the first.
    p.arrival_rate_hz = 1e18;
    const auto dense = sample_channel(p, 10.0, Sight::LOS, rng);
    CHECK(dense.channel.paths.back().bias_m < 1e-6);
}

TEST_CASE("sampled inter-arrival gaps and path powers match the model")
{
    ChannelModelParams p;
    p.path_count = 4;
    p.arrival_rate_hz = 1e9;
    p.nakagami_m = 1.0;
    RandomStream rng(77);
    const int n = 40000;
    std::vector<double> gaps, power_ratio;
    for (int i = 0; i < n; ++i) {
        const auto s = sample_channel(p, 5.0, Sight::LOS, rng);
        const auto& ch = s.channel.paths;
        gaps.push_back(ch[1].bias_m - ch[0].bias_m);
        std::vector<double> b;
        for (const Path& x : ch) b.push_back(x.bias_m);
        const auto q = power_delay_profile(p, b, s.rss_db);
        power_ratio.push_back(ch[2].amplitude * ch[2].amplitude / q[2]);
    }
    const auto sg = summarize(gaps);
    CHECK(std::abs(sg.mean - kSpeedOfLight / p.arrival_rate_hz) < 3 * sg.standard_error);
    const auto sp = summarize(power_ratio);
    CHECK(std::abs(sp.mean - 1.0) < 3 * sp.standard_error);
}

TEST_CASE("invalid model parameters are rejected")
{
    RandomStream rng(1);
    ChannelModelParams p;
    p.arrival_rate_hz = 0.0;
    CHECK_THROWS_AS(sample_channel(p, 10.0, Sight::LOS, rng), InvalidChannel);
    p = {};
    p.nakagami_m = 0.2;
    CHECK_THROWS_AS(sample_channel(p, 10.0, Sight::LOS, rng), InvalidChannel);
    p = {};
    p.path_count = 0;
    CHECK_THROWS_AS(sample_channel(p, 10.0, Sight::LOS, rng), InvalidChannel);
}
