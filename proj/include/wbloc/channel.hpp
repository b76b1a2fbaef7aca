#pragma once

#include "wbloc/geometry.hpp"
#include "wbloc/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace wbloc {

// One multipath component as seen by one anchor. The bias is the excess
// propagation distance in meters; the amplitude is unitless.
struct Path {
    double bias_m = 0.0;
    double amplitude = 0.0;
};

// Paths received from one anchor, earliest first.
struct AnchorChannel {
    std::vector<Path> paths;
    std::size_t size() const noexcept { return paths.size(); }
};

using MultipathChannel = std::vector<AnchorChannel>;

// Rejects empty channels, non-finite values, zero amplitudes, unsorted or
// repeated biases, a nonzero first bias for LOS and a non-positive first
// bias for NLOS.
void validate_channel(const AnchorChannel& channel, Sight sight, std::size_t anchor_index);
void validate_channels(const MultipathChannel& channel, const NetworkTopology& topology);

// Arrival time (distance + bias + clock offset) / c, in seconds.
double propagation_delay(double distance_m, double bias_m, double offset_m = 0.0);

// Number of leading paths forming the first contiguous cluster: paths
// 1..n with every consecutive gap below `pulse_duration`. Delays must be
// sorted ascending; the result is at least 1 for a non-empty list.
std::size_t first_contiguous_cluster(std::span<const double> delays, double pulse_duration);
std::size_t first_contiguous_cluster(const AnchorChannel& channel, double pulse_duration);

// Statistical channel model: Poisson arrivals, log-normal shadowed path
// loss, exponential power delay profile and Nakagami fading with random
// sign.
struct ChannelModelParams {
    double arrival_rate_hz = 0.5e9;     // mean inter-arrival 2 ns
    double path_loss_exponent = 2.0;
    double reference_power_db = 0.0;    // received power at 1 m
    double shadowing_db = 0.0;          // log-normal standard deviation
    double decay_s = 20e-9;             // power delay profile decay constant
    double nakagami_m = 1.0;
    std::size_t path_count = 5;

    void validate() const;
};

struct ChannelSample {
    AnchorChannel channel;
    double rss_db = 0.0;
};

// Draws biases, received power and amplitudes for one anchor.
ChannelSample sample_channel(const ChannelModelParams& params, double distance_m, Sight sight,
                             RandomStream& rng);

// Mean RSS in dB at a given distance (no shadowing).
double mean_rss_db(const ChannelModelParams& params, double distance_m);

// Second moments of the path amplitudes: exponential decay in excess delay,
// normalized to sum to 10^(rss_db / 10).
std::vector<double> power_delay_profile(const ChannelModelParams& params, std::span<const double> biases_m,
                                        double rss_db);

} // namespace wbloc
