#pragma once

#include "wbloc/linalg.hpp"

#include <cstddef>
#include <vector>

namespace wbloc {

enum class Sight { LOS, NLOS };

const char* to_string(Sight s);

struct Anchor {
    Vec2 position = Vec2::Zero();
    Sight sight = Sight::LOS;
};

// Unit vector (cos phi, sin phi).
Vec2 unit_direction(double phi);

// Ranging direction matrix q q^T for q = unit_direction(phi).
Mat2 ranging_direction_matrix(double phi);

// Agent plus anchors. Anchors keep the caller's order everywhere; any
// LOS-first ordering needed internally is a permutation held elsewhere.
class NetworkTopology {
public:
    NetworkTopology() = default;
    NetworkTopology(Vec2 agent, std::vector<Anchor> anchors);

    const Vec2& agent() const noexcept { return agent_; }
    const std::vector<Anchor>& anchors() const noexcept { return anchors_; }
    std::size_t size() const noexcept { return anchors_.size(); }
    const Anchor& anchor(std::size_t k) const { return anchors_.at(k); }

    // Distance anchor -> agent. Throws DegenerateGeometry if zero.
    double distance(std::size_t k) const;
    // Angle of the anchor-to-agent direction, in (-pi, pi].
    double angle(std::size_t k) const;
    Vec2 direction(std::size_t k) const { return unit_direction(angle(k)); }

    // Copy with the agent moved (used for prior-mean evaluation).
    NetworkTopology with_agent(const Vec2& agent) const;

    // Throws DegenerateGeometry naming the first coincident anchor.
    void validate() const;

private:
    Vec2 agent_ = Vec2::Zero();
    std::vector<Anchor> anchors_;
};

// Angle of the vector from `from` to `to`, in (-pi, pi].
double bearing(const Vec2& from, const Vec2& to);

} // namespace wbloc
