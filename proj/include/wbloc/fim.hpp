#pragma once

#include "wbloc/channel.hpp"
#include "wbloc/geometry.hpp"
#include "wbloc/linalg.hpp"
#include "wbloc/prior_spec.hpp"
#include "wbloc/waveform.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace wbloc {

// Full: delays and amplitudes unknown. Partial: amplitudes known.
enum class ParameterModel { Full, Partial };

// Information block for one anchor's received waveform, in delay/scaled-
// amplitude coordinates (tau_1, alpha_1 / c, tau_2, alpha_2 / c, ...) with
// delays in seconds.
Eigen::MatrixXd psi_block(const AnchorChannel& channel, const Waveform& waveform, double noise_psd);

// Same information in range/amplitude coordinates (c tau_1, alpha_1, ...),
// i.e. psi_block / c^2, which is the form used for all assembly.
Eigen::MatrixXd range_information(const AnchorChannel& channel, const Waveform& waveform, double noise_psd);

// Information one anchor carries about (distance, free channel parameters),
// including its channel prior when given. Channel parameters with infinite
// prior information, and amplitudes under the partial model, are dropped.
// `free_params` receives their ChannelLayout indices.
Eigen::MatrixXd anchor_information(const AnchorChannel& channel, Sight sight, const Waveform& waveform,
                                   double noise_psd, const ChannelPrior* prior, ParameterModel model,
                                   std::vector<std::size_t>* free_params = nullptr);

struct FimOptions {
    ParameterModel model = ParameterModel::Full;
    bool clock_offset = false;         // adds a common range offset parameter after position
    const PriorSpec* priors = nullptr; // channel, position and offset priors
};

// Full Fisher information for (position, [offset], channel parameters) in
// meters. Channel blocks follow LOS anchors first, each group in input order;
// `anchor_order` holds that permutation and `labels` names every parameter.
struct FullFim {
    Eigen::MatrixXd info;
    std::vector<std::string> labels;
    std::vector<std::size_t> anchor_order;
};

// Assembled directly as T J_eta T^T + J_prior from the per-anchor psi
// blocks, independent of the per-anchor reduction used elsewhere.
FullFim full_fim(const NetworkTopology& topology, const MultipathChannel& channel, const Waveform& waveform,
                 double noise_psd, const FimOptions& options = {});

struct PocDetail {
    double chi = 0.0;
    std::size_t cluster_size = 0;
    bool rank_deficient = false; // rank-revealing solve was needed
};

// Path-overlap coefficient of the first path: the share of its delay
// information lost to overlapping paths of the first cluster. In [0, 1],
// independent of amplitudes and zero for an isolated first path.
double poc(const AnchorChannel& channel, const Waveform& waveform);
PocDetail poc_detail(const AnchorChannel& channel, const Waveform& waveform);

// Ranging information intensity without priors, in 1/m^2. NLOS anchors
// contribute nothing.
double rii_no_prior(const AnchorChannel& channel, Sight sight, const Waveform& waveform, double noise_psd);

// Per-anchor ranging information and the anchor-to-agent angle.
struct RangingInfo {
    double intensity = 0.0; // 1/m^2
    double angle = 0.0;     // rad
};

struct PositionBound {
    Mat2 efim = Mat2::Zero();
    double speb = 0.0; // m^2
};

// Sum of intensity * q q^T.
Mat2 efim_from_ranging(std::span<const RangingInfo> ranging);
PositionBound bound_from_ranging(std::span<const RangingInfo> ranging);

// Closed-form SPEB 2 sum(lambda) / sum_k sum_m lambda_k lambda_m sin^2(phi_k - phi_m).
double speb_closed_form(std::span<const RangingInfo> ranging);

std::vector<RangingInfo> ranging_no_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                          const Waveform& waveform, double noise_psd);

PositionBound efim_position_no_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                     const Waveform& waveform, double noise_psd);

} // namespace wbloc
