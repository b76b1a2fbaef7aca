#include "wbloc/priors.hpp"

#include "wbloc/error.hpp"
#include "wbloc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wbloc {

namespace {

bool valid_information(double v)
{
    return v >= 0.0; // rejects NaN and negatives, admits +inf
}

} // namespace

ChannelPrior ChannelPrior::diagonal(std::span<const double> bias_info, std::span<const double> amplitude_info,
                                    Sight sight)
{
    if (bias_info.size() != amplitude_info.size() || bias_info.empty()) {
        throw InvalidPrior("bias and amplitude prior lists must have one entry per path");
    }
    const ChannelLayout layout{bias_info.size(), sight};
    ChannelPrior p;
    p.kappa = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(layout.dimension()),
                                    static_cast<Eigen::Index>(layout.dimension()));
    for (std::size_t j = 0; j < layout.paths; ++j) {
        const auto ia = static_cast<Eigen::Index>(layout.amplitude_index(j));
        p.kappa(ia, ia) = amplitude_info[j];
        if (layout.has_bias(j)) {
            const auto ib = static_cast<Eigen::Index>(layout.bias_index(j));
            p.kappa(ib, ib) = bias_info[j];
        }
    }
    return p;
}

bool ChannelPrior::is_zero() const
{
    return distance == 0.0 && (distance_kappa.size() == 0 || distance_kappa.isZero(0.0))
           && (kappa.size() == 0 || kappa.isZero(0.0));
}

double ChannelPrior::kappa_at(std::size_t i, std::size_t j) const
{
    if (kappa.size() == 0) return 0.0;
    return kappa(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

double ChannelPrior::distance_kappa_at(std::size_t i) const
{
    if (distance_kappa.size() == 0) return 0.0;
    return distance_kappa(static_cast<Eigen::Index>(i));
}

void ChannelPrior::validate(const ChannelLayout& layout, std::size_t anchor_index) const
{
    const std::string where = "anchor " + std::to_string(anchor_index) + " channel prior: ";
    const auto dim = static_cast<Eigen::Index>(layout.dimension());
    if (!std::isfinite(distance) || distance < 0.0) throw InvalidPrior(where + "distance information must be finite and >= 0");
    if (kappa.size() != 0 && (kappa.rows() != dim || kappa.cols() != dim)) {
        throw InvalidPrior(where + "channel block must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (distance_kappa.size() != 0 && distance_kappa.size() != dim) {
        throw InvalidPrior(where + "distance-channel block must have " + std::to_string(dim) + " entries");
    }
    if (distance_kappa.size() != 0 && !distance_kappa.allFinite()) {
        throw InvalidPrior(where + "distance-channel block must be finite");
    }

    // Finite-diagonal parameters plus the distance form the block that must be PSD.
    std::vector<Eigen::Index> keep{0};
    for (Eigen::Index i = 0; i < dim; ++i) {
        const double d = kappa_at(static_cast<std::size_t>(i), static_cast<std::size_t>(i));
        if (!valid_information(d)) throw InvalidPrior(where + "diagonal entries must be >= 0 or inf");
        for (Eigen::Index j = 0; j < dim; ++j) {
            if (i == j) continue;
            const double a = kappa_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
            const double b = kappa_at(static_cast<std::size_t>(j), static_cast<std::size_t>(i));
            if (!std::isfinite(a)) throw InvalidPrior(where + "off-diagonal entries must be finite");
            if (std::abs(a - b) > 1e-10 * std::max({1.0, std::abs(a), std::abs(b)})) {
                throw InvalidPrior(where + "channel block is not symmetric");
            }
        }
        if (std::isfinite(d)) keep.push_back(i + 1);
    }
    Eigen::MatrixXd full(dim + 1, dim + 1);
    full(0, 0) = distance;
    for (Eigen::Index i = 0; i < dim; ++i) {
        full(0, i + 1) = full(i + 1, 0) = distance_kappa_at(static_cast<std::size_t>(i));
        for (Eigen::Index j = 0; j < dim; ++j) {
            full(i + 1, j + 1) = kappa_at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        }
    }
    if (!is_psd(select_symmetric(full, keep), 1e-10)) throw InvalidPrior(where + "prior information is not PSD");
}

void PriorSpec::validate(std::span<const ChannelLayout> layouts) const
{
    if (!channel.empty() && channel.size() != layouts.size()) {
        throw InvalidPrior("channel priors given for " + std::to_string(channel.size()) + " anchors, scene has "
                           + std::to_string(layouts.size()));
    }
    for (std::size_t k = 0; k < channel.size(); ++k) channel[k].validate(layouts[k], k);

    if (!valid_information(position(0, 0)) || !valid_information(position(1, 1))) {
        throw InvalidPrior("position prior diagonal must be >= 0 or inf");
    }
    if (!std::isfinite(position(0, 1)) || position(0, 1) != position(1, 0)) {
        throw InvalidPrior("position prior off-diagonal must be finite and symmetric");
    }
    if (position.allFinite() && !is_psd(position)) throw InvalidPrior("position prior is not PSD");
    if (!valid_information(orientation)) throw InvalidPrior("orientation prior must be >= 0 or inf");
    if (!valid_information(offset)) throw InvalidPrior("offset prior must be >= 0 or inf");
}

double rii_with_prior(const AnchorChannel& channel, Sight sight, const Waveform& waveform, double noise_psd,
                      const ChannelPrior& prior, ParameterModel model)
{
    const ChannelLayout layout{channel.size(), sight};
    prior.validate(layout, 0);
    // A lone path has no amplitude-delay coupling, so both models agree with the no-prior form.
    if (prior.is_zero() && (model == ParameterModel::Full || channel.size() == 1)) return rii_no_prior(channel, sight, waveform, noise_psd);
    const Eigen::MatrixXd info = anchor_information(channel, sight, waveform, noise_psd, &prior, model);
    ReduceOptions opt;
    opt.context = "ranging information";
    const double lambda = efim_reduce(info, 1, opt)(0, 0);
    // Round-off can leave a tiny negative value when the distance is unidentifiable.
    return std::max(lambda, 0.0);
}

std::vector<RangingInfo> ranging_with_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                            const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                            ParameterModel model)
{
    topology.validate();
    validate_channels(channel, topology);
    std::vector<RangingInfo> out(topology.size());
    const ChannelPrior none;
    for (std::size_t k = 0; k < topology.size(); ++k) {
        const ChannelPrior* cp = priors.channel_prior(k);
        const ChannelLayout layout{channel[k].size(), topology.anchor(k).sight};
        if (cp) cp->validate(layout, k);
        if ((!cp || cp->is_zero()) && (model == ParameterModel::Full || channel[k].size() == 1)) {
            out[k] = {rii_no_prior(channel[k], topology.anchor(k).sight, waveform, noise_psd), topology.angle(k)};
            continue;
        }
        const Eigen::MatrixXd info = anchor_information(channel[k], topology.anchor(k).sight, waveform, noise_psd,
                                                        cp ? cp : &none, model);
        ReduceOptions opt;
        opt.context = "anchor " + std::to_string(k);
        out[k] = {std::max(efim_reduce(info, 1, opt)(0, 0), 0.0), topology.angle(k)};
    }
    return out;
}

PositionBound efim_with_channel_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                      const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                      ParameterModel model)
{
    const auto ranging = ranging_with_prior(topology, channel, waveform, noise_psd, priors, model);
    return bound_from_ranging(ranging);
}

PositionBound add_position_prior(const Mat2& efim, const Mat2& position_prior)
{
    PositionBound out;
    out.efim = efim + position_prior;
    const bool known_x = std::isinf(position_prior(0, 0));
    const bool known_y = std::isinf(position_prior(1, 1));
    if (known_x && known_y) {
        out.speb = 0.0;
    } else if (known_x || known_y) {
        const int free = known_x ? 1 : 0;
        const double info = out.efim(free, free);
        if (!(info > 0.0)) throw UnlocalizableGeometry("position information is zero along the unknown axis");
        out.speb = 1.0 / info;
    } else {
        out.speb = trace_of_inverse(out.efim);
    }
    return out;
}

PositionBound efim_with_position_prior(const NetworkTopology& topology_at_mean, const MultipathChannel& channel,
                                       const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                       ParameterModel model)
{
    const auto ranging = ranging_with_prior(topology_at_mean, channel, waveform, noise_psd, priors, model);
    return add_position_prior(efim_from_ranging(ranging), priors.position);
}

} // namespace wbloc
