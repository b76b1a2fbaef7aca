#pragma once

#include "wbloc/channel.hpp"
#include "wbloc/fim.hpp"
#include "wbloc/prior_spec.hpp"
#include "wbloc/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace wbloc {

// Ranging information intensity of one anchor with its channel prior, in
// 1/m^2: the equivalent information of the distance after eliminating the
// channel parameters. Reduces to rii_no_prior for a zero prior.
double rii_with_prior(const AnchorChannel& channel, Sight sight, const Waveform& waveform, double noise_psd,
                      const ChannelPrior& prior, ParameterModel model = ParameterModel::Full);

// Ranging information of every anchor (NLOS included) under the priors.
std::vector<RangingInfo> ranging_with_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                            const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                            ParameterModel model = ParameterModel::Full);

// Position EFIM sum lambda_k q_k q_k^T with channel priors. The position
// prior is ignored here.
PositionBound efim_with_channel_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                      const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                      ParameterModel model = ParameterModel::Full);

// Adds the position prior to a position EFIM. Coordinates with infinite
// prior information are known and contribute nothing to the SPEB.
PositionBound add_position_prior(const Mat2& efim, const Mat2& position_prior);

// With a position prior the channel statistics are evaluated at the prior
// mean, so `topology_at_mean` must place the agent there.
PositionBound efim_with_position_prior(const NetworkTopology& topology_at_mean, const MultipathChannel& channel,
                                       const Waveform& waveform, double noise_psd, const PriorSpec& priors,
                                       ParameterModel model = ParameterModel::Full);

// Density used for the increments b_l - b_{l-1} when estimating channel
// priors by Monte Carlo. The exponential density is not differentiable at
// zero, so it is smoothed with a Gaussian of the given width.
struct BiasDensity {
    enum class Kind { SmoothedExponential, Gaussian };
    Kind kind = Kind::SmoothedExponential;
    double smoothing_m = 0.0; // SmoothedExponential: Gaussian kernel width, must be > 0
    double mean_m = 0.0;      // Gaussian: increment mean
    double stddev_m = 0.0;    // Gaussian: increment standard deviation
};

struct PriorEstimatorOptions {
    std::size_t samples = 1000;
    BiasDensity bias;
    std::size_t quadrature_nodes = 32; // Gauss-Hermite nodes over the shadowing term
};

struct PriorEstimate {
    ChannelPrior prior;
    Eigen::MatrixXd information;    // over (distance, channel parameters)
    Eigen::MatrixXd standard_error; // per entry, same shape
    std::size_t used = 0;
    std::size_t excluded = 0;       // draws with non-finite log-density or score
    double clipped = 0.0;           // negative eigenvalue mass removed by the PSD projection
};

// Monte Carlo estimate of the channel-prior Fisher information for one
// anchor at a given distance: outer products of finite-difference scores of
// the channel log-density, averaged over draws from the same model.
PriorEstimate estimate_channel_prior_fim(const ChannelModelParams& params, double distance_m, Sight sight,
                                         const PriorEstimatorOptions& options, RandomStream& rng);

} // namespace wbloc
