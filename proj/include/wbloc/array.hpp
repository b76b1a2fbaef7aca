#pragma once

#include "wbloc/fim.hpp"
#include "wbloc/geometry.hpp"
#include "wbloc/linalg.hpp"

#include <span>
#include <vector>

namespace wbloc {

Mat2 rotation(double phi);

// Rigid antenna array. Element coordinates live in the array frame and are
// rotated by `orientation`. The reference point is the element centroid
// shifted by `reference_offset` (array frame).
struct ArrayGeometry {
    std::vector<Vec2> elements;
    double orientation = 0.0;
    Vec2 reference_offset = Vec2::Zero();

    std::size_t size() const noexcept { return elements.size(); }
    Vec2 centroid() const;
    // Requires at least two elements, not all at one point.
    void validate() const;

    // Evenly spaced elements along the array-frame x axis, centred on 0.
    static ArrayGeometry uniform_linear(std::size_t count, double spacing);
};

// World position of the reference point for an array whose centroid is at `center`.
Vec2 reference_position(const ArrayGeometry& geometry, const Vec2& center);
// World position of element n.
Vec2 element_position(const ArrayGeometry& geometry, const Vec2& center, std::size_t n);
// Element position relative to the reference point, and its derivative in orientation.
Vec2 element_offset(const ArrayGeometry& geometry, std::size_t n);
Vec2 element_offset_rate(const ArrayGeometry& geometry, std::size_t n);

// Sensitivity of element n's range to anchor k with respect to orientation:
// d(offset)/d(orientation) projected on the anchor-to-element direction.
double orientation_sensitivity(const ArrayGeometry& geometry, std::size_t n, double angle_nk);

// Ranging information per (element, anchor) plus the array itself.
struct ArrayScene {
    ArrayGeometry geometry;
    Vec2 center = Vec2::Zero();
    std::vector<std::vector<RangingInfo>> links; // links[n][k]
};

// Far field: every element sees anchor k at the same angle and intensity.
ArrayScene far_field_scene(const ArrayGeometry& geometry, const Vec2& center, std::span<const RangingInfo> anchors);

// Near field: angles from the actual element positions; intensities[n][k].
ArrayScene near_field_scene(const ArrayGeometry& geometry, const Vec2& center, std::span<const Anchor> anchors,
                            const std::vector<std::vector<double>>& intensities);

// Sums over elements and anchors that make up the joint information:
// position block, position-orientation coupling, orientation information,
// and the offset couplings used by the clock module.
struct ArraySums {
    Mat2 position = Mat2::Zero();   // sum lambda q q^T
    Vec2 coupling = Vec2::Zero();   // sum lambda h q
    double orientation = 0.0;       // sum lambda h^2
    Vec2 offset_position = Vec2::Zero(); // sum lambda q
    double offset_orientation = 0.0;     // sum lambda h
    double total = 0.0;                  // sum lambda
};

ArraySums array_sums(const ArrayScene& scene);

struct ArrayBound {
    Mat3 joint = Mat3::Zero();      // (p_x, p_y, orientation) with finite priors added
    PositionBound position;         // after eliminating orientation
    double orientation_info = 0.0;  // equivalent orientation information (inf when known)
    double soeb = 0.0;              // rad^2
    ArraySums sums;
};

// Orientation prior 0 is orientation-unaware, +inf orientation-aware.
ArrayBound array_efim(const ArrayScene& scene, const Mat2& position_prior, double orientation_prior);

// Reference point at which position and orientation information decouple.
// Returned in world coordinates, along with the matching array-frame offset.
struct OrientationCenter {
    Vec2 position = Vec2::Zero();
    Vec2 reference_offset = Vec2::Zero();
};
OrientationCenter orientation_center(const ArrayScene& scene);

// Scene with the same physical array but a different reference offset.
ArrayScene with_reference(const ArrayScene& scene, const Vec2& reference_offset);

// SPEB at the scene's reference point computed directly and through the
// orientation-center decomposition SPEB(p*) + |p - p*|^2 SOEB. No position
// prior; the orientation prior is applied in both.
struct SpebDecomposition {
    double direct = 0.0;
    double decomposed = 0.0;
    double speb_at_center = 0.0;
    double soeb = 0.0;
    double distance_to_center = 0.0;
};
SpebDecomposition speb_soeb_decomposition(const ArrayScene& scene, double orientation_prior);

} // namespace wbloc
