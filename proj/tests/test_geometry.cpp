#include "support.hpp"

#include "wbloc/error.hpp"
#include "wbloc/geometry.hpp"

#include <doctest.h>

using namespace wbloc;
using namespace wbloc::test;

namespace {

double angle_of(const Vec2& agent, const Vec2& anchor)
{
    return NetworkTopology(agent, {{anchor, Sight::LOS}}).angle(0);
}

} // namespace

TEST_CASE("angle from anchor to agent")
{
    CHECK(angle_of({1, 0}, {0, 0}) == 0.0);
    CHECK(angle_of({0, 1}, {0, 0}) == doctest::Approx(kPi / 2));
    CHECK(angle_of({-1, -1}, {0, 0}) == doctest::Approx(-3 * kPi / 4));
    CHECK(angle_of({-1, 0}, {0, 0}) == doctest::Approx(kPi));
}

TEST_CASE("distance")
{
    CHECK(NetworkTopology({3, 4}, {{Vec2(0, 0), Sight::LOS}}).distance(0) == 5.0);

    std::mt19937_64 gen(3);
    for (int i = 0; i < 100; ++i) {
        const Vec2 anchor(uniform(gen, -50, 50), uniform(gen, -50, 50));
        const double r = uniform(gen, 0.1, 100);
        const double phi = uniform(gen, -kPi, kPi);
        const Vec2 agent = anchor + r * unit_direction(phi);
        const NetworkTopology t(agent, {{anchor, Sight::NLOS}});
        CHECK(rel_close(t.distance(0), r, 1e-12));
        CHECK((anchor + t.distance(0) * t.direction(0) - agent).norm() <= 1e-12 * (1 + agent.norm()));

        const Vec2 shift(uniform(gen, -1e3, 1e3), uniform(gen, -1e3, 1e3));
        const NetworkTopology moved(agent + shift, {{anchor + shift, Sight::NLOS}});
        CHECK(rel_close(moved.distance(0), t.distance(0), 1e-10));
    }
}

TEST_CASE("coincident agent and anchor is degenerate")
{
    const NetworkTopology t({1, 2}, {{Vec2(5, 5), Sight::LOS}, {Vec2(1, 2), Sight::LOS}});
    CHECK_THROWS_AS(t.distance(1), DegenerateGeometry);
    CHECK_THROWS_AS(t.angle(1), DegenerateGeometry);
    try {
        t.validate();
        FAIL("validate accepted a coincident anchor");
    } catch (const DegenerateGeometry& e) {
        CHECK(std::string(e.what()).find('1') != std::string::npos);
    }
    CHECK_NOTHROW(t.distance(0));
}

TEST_CASE("ranging direction matrix examples")
{
    CHECK(ranging_direction_matrix(0.0).isApprox(Mat2{{1, 0}, {0, 0}}));
    CHECK((ranging_direction_matrix(kPi / 4) - Mat2{{0.5, 0.5}, {0.5, 0.5}}).norm() < 1e-15);
    CHECK((ranging_direction_matrix(kPi / 2) - Mat2{{0, 0}, {0, 1}}).norm() < 1e-15);
}

TEST_CASE("ranging direction matrix is a rank-one projector")
{
    std::mt19937_64 gen(5);
    for (int i = 0; i < 200; ++i) {
        const double phi = uniform(gen, -10, 10);
        const Mat2 r = ranging_direction_matrix(phi);
        CHECK(r(0, 1) == r(1, 0));
        CHECK(r.trace() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(std::abs(r.determinant()) < 1e-15);
        CHECK((r * r - r).norm() < 1e-15);
        const Eigen::SelfAdjointEigenSolver<Mat2> es(r);
        CHECK(std::abs(es.eigenvalues()(0)) < 1e-15);
        CHECK(es.eigenvalues()(1) == doctest::Approx(1.0));
        // The unit eigenvector is the ranging direction, up to sign.
        CHECK(std::abs(es.eigenvectors().col(1).dot(unit_direction(phi))) == doctest::Approx(1.0));
        CHECK((ranging_direction_matrix(phi + kPi) - r).norm() < 1e-14);
    }
}

TEST_CASE("bearing")
{
    CHECK(bearing({0, 0}, {0, 2}) == doctest::Approx(kPi / 2));
    CHECK(bearing({1, 1}, {0, 0}) == doctest::Approx(-3 * kPi / 4));
}
