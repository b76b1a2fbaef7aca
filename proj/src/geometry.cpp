#include "wbloc/geometry.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"

#include <cmath>
#include <string>

namespace wbloc {

const char* to_string(Sight s)
{
    return s == Sight::LOS ? "LOS" : "NLOS";
}

Vec2 unit_direction(double phi)
{
    return {std::cos(phi), std::sin(phi)};
}

Mat2 ranging_direction_matrix(double phi)
{
    const Vec2 q = unit_direction(phi);
    return q * q.transpose();
}

double bearing(const Vec2& from, const Vec2& to)
{
    const Vec2 d = to - from;
    double phi = std::atan2(d.y(), d.x());
    // atan2 returns [-pi, pi]; fold -pi onto pi.
    if (phi == -kPi) phi = kPi;
    return phi;
}

NetworkTopology::NetworkTopology(Vec2 agent, std::vector<Anchor> anchors)
    : agent_(std::move(agent)), anchors_(std::move(anchors))
{
}

double NetworkTopology::distance(std::size_t k) const
{
    const double d = (agent_ - anchors_.at(k).position).norm();
    if (!(d > 0.0)) {
        throw DegenerateGeometry("anchor " + std::to_string(k) + " coincides with the agent");
    }
    return d;
}

double NetworkTopology::angle(std::size_t k) const
{
    distance(k);
    return bearing(anchors_[k].position, agent_);
}

NetworkTopology NetworkTopology::with_agent(const Vec2& agent) const
{
    return NetworkTopology(agent, anchors_);
}

void NetworkTopology::validate() const
{
    if (!agent_.allFinite()) throw ConfigError("agent position is not finite");
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
        if (!anchors_[k].position.allFinite()) {
            throw ConfigError("anchor " + std::to_string(k) + " position is not finite");
        }
        distance(k);
    }
}

} // namespace wbloc
