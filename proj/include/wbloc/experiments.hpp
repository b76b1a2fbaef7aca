#pragma once

#include "wbloc/array.hpp"
#include "wbloc/channel.hpp"
#include "wbloc/fim.hpp"
#include "wbloc/geometry.hpp"
#include "wbloc/result_table.hpp"
#include "wbloc/waveform.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wbloc {

// Sample count, mean and standard error of the mean.
struct McStat {
    std::size_t count = 0;
    double mean = 0.0;
    double standard_error = 0.0;
};
McStat summarize(std::span<const double> samples);

unsigned default_threads();

// Calls body(i) for every i in [0, count) on up to `threads` workers
// (0 = hardware concurrency). Results must be written by index. If any call
// throws, the exception from the lowest index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// `count` LOS anchors evenly spaced on a circle around `center`, the first
// at angle `first_angle`.
std::vector<Anchor> anchors_on_circle(std::size_t count, double radius_m, const Vec2& center = Vec2::Zero(),
                                      double first_angle = 0.0);

// ---- Path separation (two-path channels) ----

// Diagonal channel prior applied to every anchor: information on the two
// amplitudes and on the second bias.
struct ChannelPriorVariant {
    std::string column;
    double amplitude1 = 0.0;
    double amplitude2 = 0.0;
    double bias2 = 0.0; // 1/m^2
};

std::vector<ChannelPriorVariant> amplitude_prior_variants(); // (0,0), (inf,0), (0,inf), (inf,inf)
std::vector<ChannelPriorVariant> bias_prior_variants();      // 0, 20, inf

struct PathSeparationConfig {
    NetworkTopology topology;
    Waveform waveform = Waveform::canonical();
    double noise_psd = 1.0;
    double snr1_db = 0.0;
    double snr2_db = -3.0;
    std::vector<double> separations_ns;
    std::vector<ChannelPriorVariant> variants;
    unsigned threads = 0;
};

// Same two-path channel at every anchor, amplitudes set from the SNRs.
AnchorChannel two_path_channel(double separation_s, double snr1_db, double snr2_db, const Waveform& waveform,
                               double noise_psd);

// Columns: speb_full, speb_partial, speb_nonoverlap, chi, then one column
// per variant.
ResultTable path_separation_sweep(const PathSeparationConfig& config);

// ---- Path-overlap statistics over random channels ----

struct PocStudyConfig {
    Waveform waveform = Waveform::canonical();
    ChannelModelParams model;     // arrival rate and path count are replaced per cell
    double distance_m = 10.0;
    std::vector<std::size_t> path_counts;
    std::vector<double> inter_arrival_ns;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// One row per inter-arrival time; per path count L the columns
// chi_mean_L<L>, chi_se_L<L> (when replications > 1) and n_L<L>.
ResultTable average_poc_study(const PocStudyConfig& config);

struct RaoConfig {
    Waveform waveform = Waveform::canonical();
    ChannelModelParams model;
    double distance_m = 10.0;
    std::size_t path_count = 50;
    std::vector<double> inter_arrival_ns;
    std::vector<double> thresholds;
    std::size_t replications = 1000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// One row per threshold; per inter-arrival time T the columns pout_<T>ns,
// pout_se_<T>ns (when replications > 1) and n_<T>ns.
ResultTable rao_curve(const RaoConfig& config);

// ---- Antenna array reference point ----

struct UlaReferenceConfig {
    std::vector<RangingInfo> anchors; // far-field intensity and angle per anchor
    ArrayGeometry geometry;
    Vec2 center = Vec2::Zero();
    Vec2 reference_direction = Vec2::UnitX(); // array frame, reference = distance * direction
    std::vector<double> reference_distances_m;
    std::vector<double> orientation_priors;   // SPEB columns, no position prior
    std::vector<double> position_priors;      // SOEB columns, no orientation prior
};

// Columns: speb_xiphi<X> per orientation prior, soeb_xip<X> per position
// prior, speb_decomposed (orientation-unaware) and center_distance_m.
ResultTable ula_reference_sweep(const UlaReferenceConfig& config);

// ---- Clock offset versus anchor placement ----

struct OffsetAnchorConfig {
    double radius_m = 10.0;
    Vec2 center = Vec2::Zero();
    std::vector<double> anchor_angles; // placement angles on the circle
    std::vector<double> intensities;   // ranging information per anchor, 1/m^2
    std::size_t moved_anchor = 0;
    std::vector<double> moved_angles;
    std::vector<double> offset_priors;
    Mat2 position_prior = Mat2::Zero();
};

// Columns: speb_xiB<X> per offset prior, speb_nooffset, steb_xiB<X> per
// offset prior (m^2).
ResultTable offset_anchor_sweep(const OffsetAnchorConfig& config);

// Column-name form of a prior value: shortest decimal or "inf".
std::string prior_token(double value);

} // namespace wbloc
