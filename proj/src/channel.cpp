#include "wbloc/channel.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"

#include <cmath>
#include <string>

namespace wbloc {

void validate_channel(const AnchorChannel& channel, Sight sight, std::size_t anchor_index)
{
    const std::string where = "anchor " + std::to_string(anchor_index) + ": ";
    if (channel.paths.empty()) throw InvalidChannel(where + "channel has no paths");
    for (std::size_t l = 0; l < channel.size(); ++l) {
        const Path& p = channel.paths[l];
        if (!std::isfinite(p.bias_m) || !std::isfinite(p.amplitude)) {
            throw InvalidChannel(where + "path " + std::to_string(l) + " has non-finite values");
        }
        if (p.amplitude == 0.0) {
            throw InvalidChannel(where + "path " + std::to_string(l) + " has zero amplitude");
        }
        if (l > 0 && !(p.bias_m > channel.paths[l - 1].bias_m)) {
            throw InvalidChannel(where + "path biases must be strictly increasing");
        }
    }
    const double first = channel.paths.front().bias_m;
    if (sight == Sight::LOS && first != 0.0) {
        throw InvalidChannel(where + "LOS first-path bias must be zero");
    }
    if (sight == Sight::NLOS && !(first > 0.0)) {
        throw InvalidChannel(where + "NLOS first-path bias must be positive");
    }
}

void validate_channels(const MultipathChannel& channel, const NetworkTopology& topology)
{
    if (channel.size() != topology.size()) {
        throw InvalidChannel("channel has " + std::to_string(channel.size()) + " anchors, topology has "
                             + std::to_string(topology.size()));
    }
    for (std::size_t k = 0; k < channel.size(); ++k) {
        validate_channel(channel[k], topology.anchor(k).sight, k);
    }
}

double propagation_delay(double distance_m, double bias_m, double offset_m)
{
    return (distance_m + bias_m + offset_m) / kSpeedOfLight;
}

std::size_t first_contiguous_cluster(std::span<const double> delays, double pulse_duration)
{
    if (delays.empty()) return 0;
    std::size_t n = 1;
    while (n < delays.size() && delays[n] - delays[n - 1] < pulse_duration) ++n;
    return n;
}

std::size_t first_contiguous_cluster(const AnchorChannel& channel, double pulse_duration)
{
    std::vector<double> delays;
    delays.reserve(channel.size());
    for (const Path& p : channel.paths) delays.push_back(p.bias_m / kSpeedOfLight);
    return first_contiguous_cluster(delays, pulse_duration);
}

void ChannelModelParams::validate() const
{
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw InvalidChannel(msg);
    };
    require(arrival_rate_hz > 0.0 && std::isfinite(arrival_rate_hz), "arrival rate must be positive");
    require(std::isfinite(path_loss_exponent), "path-loss exponent must be finite");
    require(std::isfinite(reference_power_db), "reference power must be finite");
    require(shadowing_db >= 0.0 && std::isfinite(shadowing_db), "shadowing deviation must be non-negative");
    require(decay_s > 0.0, "power-delay decay constant must be positive");
    require(nakagami_m >= 0.5 && std::isfinite(nakagami_m), "Nakagami m must be at least 0.5");
    require(path_count >= 1, "path count must be at least one");
}

double mean_rss_db(const ChannelModelParams& params, double distance_m)
{
    if (!(distance_m > 0.0)) throw DegenerateGeometry("RSS requested at non-positive distance");
    return params.reference_power_db - 10.0 * params.path_loss_exponent * std::log10(distance_m);
}

std::vector<double> power_delay_profile(const ChannelModelParams& params, std::span<const double> biases_m,
                                        double rss_db)
{
    // The common factor exp(-d / (c gamma)) cancels in the normalization,
    // so only excess delays relative to the first path enter.
    std::vector<double> q(biases_m.size());
    const double ref = biases_m.empty() ? 0.0 : biases_m.front();
    double total = 0.0;
    for (std::size_t l = 0; l < q.size(); ++l) {
        q[l] = std::exp(-(biases_m[l] - ref) / (kSpeedOfLight * params.decay_s));
        total += q[l];
    }
    const double power = db_to_linear(rss_db);
    for (double& v : q) v *= power / total;
    return q;
}

ChannelSample sample_channel(const ChannelModelParams& params, double distance_m, Sight sight, RandomStream& rng)
{
    params.validate();
    const double rate_per_m = params.arrival_rate_hz / kSpeedOfLight;

    std::vector<double> biases(params.path_count);
    double b = 0.0;
    for (std::size_t l = 0; l < biases.size(); ++l) {
        if (l > 0 || sight == Sight::NLOS) {
            // Guard the (measure-zero) event of a zero gap so biases stay strictly increasing.
            double gap = 0.0;
            do {
                gap = rng.exponential(rate_per_m);
            } while (!(b + gap > b));
            b += gap;
        }
        biases[l] = b;
    }

    ChannelSample out;
    out.rss_db = mean_rss_db(params, distance_m) + params.shadowing_db * rng.normal();
    const auto spread = power_delay_profile(params, biases, out.rss_db);
    out.channel.paths.resize(biases.size());
    for (std::size_t l = 0; l < biases.size(); ++l) {
        if (!(spread[l] > 0.0)) throw NumericalError("path power underflow in power delay profile");
        double mag = 0.0;
        do {
            mag = rng.nakagami(params.nakagami_m, spread[l]);
        } while (mag == 0.0);
        out.channel.paths[l] = {biases[l], rng.sign() * mag};
    }
    return out;
}

} // namespace wbloc
