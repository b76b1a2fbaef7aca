#include "wbloc/array.hpp"

#include "wbloc/error.hpp"
#include "wbloc/priors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace wbloc {

Mat2 rotation(double phi)
{
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Mat2 r;
    r << c, -s, s, c;
    return r;
}

namespace {

// d/dphi of rotation(phi).
Mat2 rotation_rate(double phi)
{
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    Mat2 r;
    r << -s, -c, c, -s;
    return r;
}

Vec2 local_offset(const ArrayGeometry& g, std::size_t n)
{
    return g.elements.at(n) - g.centroid() - g.reference_offset;
}

} // namespace

Vec2 ArrayGeometry::centroid() const
{
    Vec2 c = Vec2::Zero();
    for (const Vec2& e : elements) c += e;
    return elements.empty() ? c : Vec2(c / static_cast<double>(elements.size()));
}

void ArrayGeometry::validate() const
{
    if (elements.size() < 2) throw ConfigError("array needs at least two elements");
    bool spread = false;
    for (const Vec2& e : elements) {
        if (!e.allFinite()) throw ConfigError("array element coordinates must be finite");
        spread = spread || (e - elements.front()).norm() > 0.0;
    }
    if (!spread) throw ConfigError("array elements all coincide");
    if (!std::isfinite(orientation) || !reference_offset.allFinite()) {
        throw ConfigError("array orientation and reference offset must be finite");
    }
}

ArrayGeometry ArrayGeometry::uniform_linear(std::size_t count, double spacing)
{
    ArrayGeometry g;
    const double mid = 0.5 * static_cast<double>(count - 1);
    for (std::size_t n = 0; n < count; ++n) g.elements.emplace_back((static_cast<double>(n) - mid) * spacing, 0.0);
    return g;
}

Vec2 reference_position(const ArrayGeometry& geometry, const Vec2& center)
{
    return center + rotation(geometry.orientation) * geometry.reference_offset;
}

Vec2 element_position(const ArrayGeometry& geometry, const Vec2& center, std::size_t n)
{
    return center + rotation(geometry.orientation) * (geometry.elements.at(n) - geometry.centroid());
}

Vec2 element_offset(const ArrayGeometry& geometry, std::size_t n)
{
    return rotation(geometry.orientation) * local_offset(geometry, n);
}

Vec2 element_offset_rate(const ArrayGeometry& geometry, std::size_t n)
{
    return rotation_rate(geometry.orientation) * local_offset(geometry, n);
}

double orientation_sensitivity(const ArrayGeometry& geometry, std::size_t n, double angle_nk)
{
    return element_offset_rate(geometry, n).dot(unit_direction(angle_nk));
}

ArrayScene far_field_scene(const ArrayGeometry& geometry, const Vec2& center, std::span<const RangingInfo> anchors)
{
    geometry.validate();
    ArrayScene s{geometry, center, {}};
    s.links.assign(geometry.size(), std::vector<RangingInfo>(anchors.begin(), anchors.end()));
    return s;
}

ArrayScene near_field_scene(const ArrayGeometry& geometry, const Vec2& center, std::span<const Anchor> anchors,
                            const std::vector<std::vector<double>>& intensities)
{
    geometry.validate();
    if (intensities.size() != geometry.size()) {
        throw ConfigError("intensity table must have one row per array element");
    }
    ArrayScene s{geometry, center, {}};
    s.links.resize(geometry.size());
    for (std::size_t n = 0; n < geometry.size(); ++n) {
        if (intensities[n].size() != anchors.size()) {
            throw ConfigError("intensity table row " + std::to_string(n) + " must have one entry per anchor");
        }
        const Vec2 pos = element_position(geometry, center, n);
        for (std::size_t k = 0; k < anchors.size(); ++k) {
            if ((pos - anchors[k].position).norm() == 0.0) {
                throw DegenerateGeometry("array element " + std::to_string(n) + " coincides with anchor "
                                         + std::to_string(k));
            }
            s.links[n].push_back({intensities[n][k], bearing(anchors[k].position, pos)});
        }
    }
    return s;
}

ArraySums array_sums(const ArrayScene& scene)
{
    ArraySums s;
    for (std::size_t n = 0; n < scene.links.size(); ++n) {
        const Vec2 rate = element_offset_rate(scene.geometry, n);
        for (const RangingInfo& link : scene.links[n]) {
            const Vec2 q = unit_direction(link.angle);
            const double h = rate.dot(q);
            const double l = link.intensity;
            s.position += l * q * q.transpose();
            s.coupling += l * h * q;
            s.orientation += l * h * h;
            s.offset_position += l * q;
            s.offset_orientation += l * h;
            s.total += l;
        }
    }
    return s;
}

ArrayBound array_efim(const ArrayScene& scene, const Mat2& position_prior, double orientation_prior)
{
    if (!(orientation_prior >= 0.0)) throw InvalidPrior("orientation prior must be >= 0 or inf");
    ArrayBound out;
    out.sums = array_sums(scene);
    const ArraySums& s = out.sums;

    out.joint.topLeftCorner<2, 2>() = s.position + position_prior;
    out.joint.block<2, 1>(0, 2) = s.coupling;
    out.joint.block<1, 2>(2, 0) = s.coupling.transpose();
    out.joint(2, 2) = s.orientation + orientation_prior;

    const bool aware = std::isinf(orientation_prior);
    Mat2 position_info = s.position;
    const double orient_total = s.orientation + orientation_prior;
    if (!aware && orient_total > 0.0) position_info -= s.coupling * s.coupling.transpose() / orient_total;
    out.position = add_position_prior(position_info, position_prior);

    if (aware) {
        out.orientation_info = std::numeric_limits<double>::infinity();
        out.soeb = 0.0;
        return out;
    }
    // Orientation information after eliminating the unknown position axes.
    std::vector<int> unknown;
    for (int i = 0; i < 2; ++i) {
        if (!std::isinf(position_prior(i, i))) unknown.push_back(i);
    }
    double info = orient_total;
    if (unknown.size() == 2) {
        const Mat2 p = s.position + position_prior;
        Eigen::LLT<Mat2> llt(p);
        if (llt.info() != Eigen::Success) throw UnlocalizableGeometry("array position information is singular");
        info -= s.coupling.dot(llt.solve(s.coupling));
    } else if (unknown.size() == 1) {
        const int i = unknown.front();
        const double p = s.position(i, i) + position_prior(i, i);
        if (!(p > 0.0)) throw UnlocalizableGeometry("array position information is zero along the unknown axis");
        info -= s.coupling(i) * s.coupling(i) / p;
    }
    if (!(info > 4.0 * std::numeric_limits<double>::epsilon() * orient_total)) {
        throw UnlocalizableGeometry("array orientation is unidentifiable");
    }
    out.orientation_info = info;
    out.soeb = 1.0 / info;
    return out;
}

OrientationCenter orientation_center(const ArrayScene& scene)
{
    const ArraySums s = array_sums(scene);
    trace_of_inverse(s.position); // throws when singular
    const Vec2 rate = s.position.ldlt().solve(s.coupling);
    // The offset turns rigidly with the array: g = rotation(-pi/2) * dg/dphi.
    const Vec2 g(rate.y(), -rate.x());
    OrientationCenter c;
    c.position = reference_position(scene.geometry, scene.center) + g;
    c.reference_offset = scene.geometry.reference_offset + rotation(-scene.geometry.orientation) * g;
    return c;
}

ArrayScene with_reference(const ArrayScene& scene, const Vec2& reference_offset)
{
    ArrayScene s = scene;
    s.geometry.reference_offset = reference_offset;
    return s;
}

SpebDecomposition speb_soeb_decomposition(const ArrayScene& scene, double orientation_prior)
{
    const Mat2 none = Mat2::Zero();
    const ArrayBound here = array_efim(scene, none, orientation_prior);
    const OrientationCenter center = orientation_center(scene);
    const ArrayBound there = array_efim(with_reference(scene, center.reference_offset), none, orientation_prior);

    SpebDecomposition d;
    d.direct = here.position.speb;
    d.speb_at_center = there.position.speb;
    d.soeb = here.soeb;
    d.distance_to_center = (reference_position(scene.geometry, scene.center) - center.position).norm();
    d.decomposed = d.speb_at_center + d.distance_to_center * d.distance_to_center * d.soeb;
    return d;
}

} // namespace wbloc
