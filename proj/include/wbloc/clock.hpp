#pragma once

#include "wbloc/array.hpp"
#include "wbloc/fim.hpp"
#include "wbloc/prior_spec.hpp"

#include <span>

namespace wbloc {

// The agent clock runs with an unknown offset common to all anchors, carried
// as a range offset B in meters. Offset information is in 1/m^2; the square
// timing error bound (STEB) is reported in m^2 and converted with
// steb_seconds2 when needed.
struct OffsetBound {
    PositionBound position;
    Vec2 offset_coupling = Vec2::Zero(); // sum lambda q
    double offset_info = 0.0;            // equivalent information of B (inf when known)
    double steb_m2 = 0.0;
};

double steb_seconds2(double steb_m2);

// Position and offset EFIs from per-anchor ranging information.
OffsetBound efim_with_offset(std::span<const RangingInfo> ranging, const Mat2& position_prior, double offset_prior);

// Same, computing the ranging information from channels and priors.
OffsetBound efim_with_offset(const NetworkTopology& topology, const MultipathChannel& channel,
                             const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                             ParameterModel model = ParameterModel::Full);

struct ArrayOffsetBound {
    Eigen::Matrix4d joint = Eigen::Matrix4d::Zero(); // (p_x, p_y, orientation, B), finite priors added
    PositionBound position;
    double orientation_info = 0.0;
    double soeb = 0.0;
    double offset_info = 0.0;
    double steb_m2 = 0.0;
};

// Joint position/orientation/offset information of an antenna array.
// Infinite priors remove the corresponding parameter.
ArrayOffsetBound array_efim_with_offset(const ArrayScene& scene, const Mat2& position_prior,
                                        double orientation_prior, double offset_prior);

// Far-field closed forms at the array center, used as a cross-check of
// array_efim_with_offset.
struct FarFieldOffsetForms {
    Mat2 position_efim = Mat2::Zero();
    double orientation_info = 0.0;
    double offset_info = 0.0;
};
FarFieldOffsetForms far_field_offset_forms(const ArrayScene& scene, const Mat2& position_prior,
                                           double orientation_prior, double offset_prior);

} // namespace wbloc
