#include "wbloc/clock.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"
#include "wbloc/priors.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace wbloc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Equivalent information of parameter `target` in a joint matrix whose
// known parameters (flagged) are dropped and whose other unknowns are
// eliminated. Diagonal entries of known parameters are ignored.
double equivalent_scalar_info(const Eigen::MatrixXd& joint, std::span<const bool> known, Eigen::Index target,
                              const char* what)
{
    std::vector<Eigen::Index> order{target};
    for (Eigen::Index i = 0; i < joint.rows(); ++i) {
        if (i != target && !known[static_cast<std::size_t>(i)]) order.push_back(i);
    }
    const Eigen::MatrixXd sub = select_symmetric(joint, order);
    double info = 0.0;
    try {
        info = efim_reduce(sub, 1)(0, 0);
    } catch (const SingularNuisance&) {
        throw UnlocalizableGeometry(std::string("information for the remaining parameters is singular when reducing ")
                                    + what);
    }
    return info;
}

Eigen::MatrixXd finite_part(Eigen::MatrixXd m)
{
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (std::isinf(m(i, i))) m(i, i) = 0.0;
    }
    return m;
}

double inverse_or_throw(double info, double scale, const char* what)
{
    if (!(info > 4.0 * std::numeric_limits<double>::epsilon() * scale)) {
        throw UnlocalizableGeometry(std::string(what) + " is unidentifiable");
    }
    return 1.0 / info;
}

} // namespace

double steb_seconds2(double steb_m2)
{
    return steb_m2 / (kSpeedOfLight * kSpeedOfLight);
}

OffsetBound efim_with_offset(std::span<const RangingInfo> ranging, const Mat2& position_prior, double offset_prior)
{
    if (!(offset_prior >= 0.0)) throw InvalidPrior("offset prior must be >= 0 or inf");
    OffsetBound out;
    const Mat2 a = efim_from_ranging(ranging);
    double total = 0.0;
    for (const RangingInfo& r : ranging) {
        out.offset_coupling += r.intensity * unit_direction(r.angle);
        total += r.intensity;
    }
    if (!(total > 0.0)) throw DegenerateGeometry("all ranging information intensities are zero");

    if (std::isinf(offset_prior)) {
        out.position = add_position_prior(a, position_prior);
        out.offset_info = kInf;
        out.steb_m2 = 0.0;
        return out;
    }
    const double offset_total = total + offset_prior;
    const Vec2& qb = out.offset_coupling;
    out.position = add_position_prior(a - qb * qb.transpose() / offset_total, position_prior);

    Eigen::Matrix3d joint;
    joint.topLeftCorner<2, 2>() = a + position_prior;
    joint.block<2, 1>(0, 2) = qb;
    joint.block<1, 2>(2, 0) = qb.transpose();
    joint(2, 2) = offset_total;
    const std::array<bool, 3> known{std::isinf(position_prior(0, 0)), std::isinf(position_prior(1, 1)), false};
    out.offset_info = equivalent_scalar_info(finite_part(joint), known, 2, "the clock offset");
    out.steb_m2 = inverse_or_throw(out.offset_info, offset_total, "clock offset");
    return out;
}

OffsetBound efim_with_offset(const NetworkTopology& topology, const MultipathChannel& channel,
                             const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                             ParameterModel model)
{
    const auto ranging = ranging_with_prior(topology, channel, waveform, noise_psd, priors, model);
    return efim_with_offset(ranging, priors.position, priors.offset);
}

ArrayOffsetBound array_efim_with_offset(const ArrayScene& scene, const Mat2& position_prior,
                                        double orientation_prior, double offset_prior)
{
    if (!(orientation_prior >= 0.0)) throw InvalidPrior("orientation prior must be >= 0 or inf");
    if (!(offset_prior >= 0.0)) throw InvalidPrior("offset prior must be >= 0 or inf");
    const ArraySums s = array_sums(scene);
    if (!(s.total > 0.0)) throw DegenerateGeometry("all ranging information intensities are zero");

    ArrayOffsetBound out;
    Eigen::Matrix4d& j = out.joint;
    j.topLeftCorner<2, 2>() = s.position + position_prior;
    j.block<2, 1>(0, 2) = s.coupling;
    j.block<2, 1>(0, 3) = s.offset_position;
    j(2, 2) = s.orientation + orientation_prior;
    j(2, 3) = s.offset_orientation;
    j(3, 3) = s.total + offset_prior;
    j.block<1, 2>(2, 0) = s.coupling.transpose();
    j.block<1, 2>(3, 0) = s.offset_position.transpose();
    j(3, 2) = j(2, 3);

    const std::array<bool, 4> known{std::isinf(position_prior(0, 0)), std::isinf(position_prior(1, 1)),
                                    std::isinf(orientation_prior), std::isinf(offset_prior)};
    const Eigen::MatrixXd finite = finite_part(j);

    // Position: eliminate the unknown nuisances among orientation and offset.
    std::vector<Eigen::Index> order{0, 1};
    for (Eigen::Index i = 2; i < 4; ++i) {
        if (!known[static_cast<std::size_t>(i)]) order.push_back(i);
    }
    Eigen::MatrixXd raw = select_symmetric(finite, order);
    raw.topLeftCorner(2, 2) = s.position; // position prior is added with known-axis handling below
    ReduceOptions opt;
    opt.context = "array position with clock offset";
    out.position = add_position_prior(efim_reduce(raw, 2, opt), position_prior);

    if (known[2]) {
        out.orientation_info = kInf;
        out.soeb = 0.0;
    } else {
        out.orientation_info = equivalent_scalar_info(finite, known, 2, "the orientation");
        out.soeb = inverse_or_throw(out.orientation_info, finite(2, 2), "array orientation");
    }
    if (known[3]) {
        out.offset_info = kInf;
        out.steb_m2 = 0.0;
    } else {
        out.offset_info = equivalent_scalar_info(finite, known, 3, "the clock offset");
        out.steb_m2 = inverse_or_throw(out.offset_info, finite(3, 3), "clock offset");
    }
    return out;
}

FarFieldOffsetForms far_field_offset_forms(const ArrayScene& scene, const Mat2& position_prior,
                                           double orientation_prior, double offset_prior)
{
    if (scene.links.empty()) throw ConfigError("array scene has no elements");
    const auto elements = static_cast<double>(scene.links.size());
    Mat2 a = Mat2::Zero();
    Vec2 qb = Vec2::Zero();
    double total = 0.0;
    for (const RangingInfo& r : scene.links.front()) {
        const Vec2 q = unit_direction(r.angle);
        a += elements * r.intensity * q * q.transpose();
        qb += elements * r.intensity * q;
        total += elements * r.intensity;
    }
    FarFieldOffsetForms f;
    const Mat2 a_prior = a + position_prior;
    f.position_efim = a_prior;
    if (!std::isinf(offset_prior)) f.position_efim -= qb * qb.transpose() / (total + offset_prior);
    f.orientation_info = array_sums(scene).orientation + orientation_prior;
    f.offset_info = total + offset_prior - qb.dot(a_prior.ldlt().solve(qb));
    return f;
}

} // namespace wbloc
