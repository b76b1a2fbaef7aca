#include "wbloc/experiments.hpp"

#include "wbloc/clock.hpp"
#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"
#include "wbloc/priors.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace wbloc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Runs one table cell. Degenerate or numerical failures become error
// markers; configuration errors abort the sweep.
template <class F>
Cell guarded(F&& compute)
{
    try {
        return Cell{compute()};
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        return CellError{e.what()};
    }
}

[[noreturn]] void rethrow_at(const Error& e, std::size_t row)
{
    throw Error(e.kind(), "grid index " + std::to_string(row) + ": " + e.what());
}

// Evaluates every row, tagging configuration errors with the row index.
template <class F>
void fill_rows(ResultTable& table, std::span<const double> grid, unsigned threads, F&& row_cells)
{
    std::vector<std::vector<Cell>> rows(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        try {
            rows[i] = row_cells(i);
        } catch (const Error& e) {
            rethrow_at(e, i);
        }
    });
    for (std::size_t i = 0; i < grid.size(); ++i) table.add_row(grid[i], std::move(rows[i]));
}

McStat finite_summary(std::span<const double> samples)
{
    std::vector<double> ok;
    ok.reserve(samples.size());
    for (double v : samples) {
        if (std::isfinite(v)) ok.push_back(v);
    }
    return summarize(ok);
}

void require_positive_grid(std::span<const double> grid, const char* what)
{
    if (grid.empty()) throw ConfigError(std::string(what) + " grid is empty");
    for (double v : grid) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " values must be finite and > 0");
    }
}

// chi of `replications` random LOS channels drawn with the given mean
// inter-arrival; draws that fail numerically are NaN.
void draw_poc(const Waveform& waveform, ChannelModelParams model, double distance_m, std::size_t paths,
              double inter_arrival_ns, std::uint64_t seed, std::uint32_t cell, std::span<double> out,
              std::size_t first_rep)
{
    model.arrival_rate_hz = 1e9 / inter_arrival_ns;
    model.path_count = paths;
    for (std::size_t r = 0; r < out.size(); ++r) {
        RandomStream rng(seed, cell, static_cast<std::uint32_t>(first_rep + r));
        try {
            const ChannelSample s = sample_channel(model, distance_m, Sight::LOS, rng);
            out[r] = poc(s.channel, waveform);
        } catch (const ConfigError&) {
            throw;
        } catch (const Error&) {
            out[r] = kNaN;
        }
    }
}

} // namespace

McStat summarize(std::span<const double> samples)
{
    McStat s;
    s.count = samples.size();
    if (s.count == 0) return s;
    // Welford update keeps the variance accurate for tightly clustered samples.
    double mean = 0.0;
    double m2 = 0.0;
    std::size_t n = 0;
    for (double v : samples) {
        ++n;
        const double delta = v - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (v - mean);
    }
    s.mean = mean;
    s.standard_error = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1) / static_cast<double>(n)) : 0.0;
    return s;
}

unsigned default_threads()
{
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body)
{
    if (count == 0) return;
    const std::size_t workers = std::min<std::size_t>(count, threads == 0 ? default_threads() : threads);
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::size_t failed_index = count;
    std::exception_ptr failure;

    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                body(i);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (i < failed_index) {
                    failed_index = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<Anchor> anchors_on_circle(std::size_t count, double radius_m, const Vec2& center, double first_angle)
{
    std::vector<Anchor> anchors;
    for (std::size_t k = 0; k < count; ++k) {
        const double a = first_angle + 2.0 * kPi * static_cast<double>(k) / static_cast<double>(count);
        anchors.push_back({center + radius_m * unit_direction(a), Sight::LOS});
    }
    return anchors;
}

std::string prior_token(double value)
{
    return format_number(value);
}

std::vector<ChannelPriorVariant> amplitude_prior_variants()
{
    const double inf = kInfiniteInformation;
    return {{"speb_xia1_0_xia2_0", 0.0, 0.0, 0.0},
            {"speb_xia1_inf_xia2_0", inf, 0.0, 0.0},
            {"speb_xia1_0_xia2_inf", 0.0, inf, 0.0},
            {"speb_xia1_inf_xia2_inf", inf, inf, 0.0}};
}

std::vector<ChannelPriorVariant> bias_prior_variants()
{
    return {{"speb_xib2_0", 0.0, 0.0, 0.0},
            {"speb_xib2_20", 0.0, 0.0, 20.0},
            {"speb_xib2_inf", 0.0, 0.0, kInfiniteInformation}};
}

AnchorChannel two_path_channel(double separation_s, double snr1_db, double snr2_db, const Waveform& waveform,
                               double noise_psd)
{
    AnchorChannel ch;
    ch.paths.push_back({0.0, amplitude_for_snr(waveform, db_to_linear(snr1_db), noise_psd)});
    ch.paths.push_back({separation_s * kSpeedOfLight, amplitude_for_snr(waveform, db_to_linear(snr2_db), noise_psd)});
    return ch;
}

ResultTable path_separation_sweep(const PathSeparationConfig& config)
{
    config.topology.validate();
    for (const Anchor& a : config.topology.anchors()) {
        if (a.sight != Sight::LOS) throw ConfigError("path separation sweep expects LOS anchors");
    }
    require_positive_grid(config.separations_ns, "separation");

    std::vector<std::string> columns{"speb_full", "speb_partial", "speb_nonoverlap", "chi"};
    for (const auto& v : config.variants) columns.push_back(v.column);
    ResultTable table("separation_ns", columns);

    const std::size_t anchors = config.topology.size();
    const Waveform& w = config.waveform;
    const double n0 = config.noise_psd;

    fill_rows(table, config.separations_ns, config.threads, [&](std::size_t i) {
        const AnchorChannel two = two_path_channel(config.separations_ns[i] * 1e-9, config.snr1_db, config.snr2_db,
                                                   w, n0);
        const MultipathChannel channel(anchors, two);
        validate_channels(channel, config.topology);
        const MultipathChannel first_only(anchors, AnchorChannel{{two.paths.front()}});

        std::vector<Cell> cells;
        cells.push_back(guarded([&] { return efim_position_no_prior(config.topology, channel, w, n0).speb; }));
        cells.push_back(guarded([&] {
            return efim_with_channel_prior(config.topology, channel, w, n0, PriorSpec{}, ParameterModel::Partial)
                .speb;
        }));
        cells.push_back(guarded([&] { return efim_position_no_prior(config.topology, first_only, w, n0).speb; }));
        cells.push_back(guarded([&] { return poc(two, w); }));
        for (const auto& v : config.variants) {
            cells.push_back(guarded([&] {
                const std::array<double, 2> bias{0.0, v.bias2};
                const std::array<double, 2> amp{v.amplitude1, v.amplitude2};
                PriorSpec priors;
                priors.channel.assign(anchors, ChannelPrior::diagonal(bias, amp, Sight::LOS));
                return efim_with_channel_prior(config.topology, channel, w, n0, priors).speb;
            }));
        }
        return cells;
    });
    return table;
}

ResultTable average_poc_study(const PocStudyConfig& config)
{
    config.model.validate();
    require_positive_grid(config.inter_arrival_ns, "inter-arrival");
    if (config.path_counts.empty()) throw ConfigError("path count list is empty");
    if (config.replications == 0) throw ConfigError("replications must be >= 1");
    const bool with_se = config.replications > 1;

    std::vector<std::string> columns;
    for (std::size_t l : config.path_counts) {
        if (l == 0) throw ConfigError("path counts must be >= 1");
        const std::string tag = "L" + std::to_string(l);
        columns.push_back("chi_mean_" + tag);
        if (with_se) columns.push_back("chi_se_" + tag);
        columns.push_back("n_" + tag);
    }
    ResultTable table("inter_arrival_ns", columns);

    const std::size_t grid = config.inter_arrival_ns.size();
    const std::size_t cells = grid * config.path_counts.size();
    std::vector<double> chi(cells * config.replications);
    parallel_for(cells, config.threads, [&](std::size_t c) {
        const std::size_t li = c / grid;
        const std::size_t gi = c % grid;
        std::span<double> out(chi.data() + c * config.replications, config.replications);
        draw_poc(config.waveform, config.model, config.distance_m, config.path_counts[li],
                 config.inter_arrival_ns[gi], config.seed, static_cast<std::uint32_t>(c), out, 0);
    });

    for (std::size_t gi = 0; gi < grid; ++gi) {
        std::vector<Cell> row;
        for (std::size_t li = 0; li < config.path_counts.size(); ++li) {
            const std::size_t c = li * grid + gi;
            const McStat s = finite_summary({chi.data() + c * config.replications, config.replications});
            if (s.count == 0) {
                row.emplace_back(CellError{"no valid replications"});
                if (with_se) row.emplace_back(CellError{"no valid replications"});
            } else {
                row.emplace_back(s.mean);
                if (with_se) row.emplace_back(s.standard_error);
            }
            row.emplace_back(static_cast<double>(s.count));
        }
        table.add_row(config.inter_arrival_ns[gi], std::move(row));
    }
    return table;
}

ResultTable rao_curve(const RaoConfig& config)
{
    config.model.validate();
    require_positive_grid(config.inter_arrival_ns, "inter-arrival");
    if (config.thresholds.empty()) throw ConfigError("threshold grid is empty");
    for (double t : config.thresholds) {
        if (!std::isfinite(t)) throw ConfigError("thresholds must be finite");
    }
    if (config.replications == 0) throw ConfigError("replications must be >= 1");
    if (config.path_count == 0) throw ConfigError("path count must be >= 1");
    const bool with_se = config.replications > 1;

    std::vector<std::string> columns;
    for (double ia : config.inter_arrival_ns) {
        const std::string tag = prior_token(ia) + "ns";
        columns.push_back("pout_" + tag);
        if (with_se) columns.push_back("pout_se_" + tag);
        columns.push_back("n_" + tag);
    }
    ResultTable table("chi_threshold", columns);

    // Work items are (curve, block of replications) for load balance.
    constexpr std::size_t kBlock = 50;
    const std::size_t reps = config.replications;
    const std::size_t blocks = (reps + kBlock - 1) / kBlock;
    const std::size_t curves = config.inter_arrival_ns.size();
    std::vector<double> chi(curves * reps);
    parallel_for(curves * blocks, config.threads, [&](std::size_t item) {
        const std::size_t curve = item / blocks;
        const std::size_t first = (item % blocks) * kBlock;
        const std::size_t n = std::min(kBlock, reps - first);
        draw_poc(config.waveform, config.model, config.distance_m, config.path_count,
                 config.inter_arrival_ns[curve], config.seed, static_cast<std::uint32_t>(curve),
                 {chi.data() + curve * reps + first, n}, first);
    });

    for (double threshold : config.thresholds) {
        std::vector<Cell> row;
        for (std::size_t curve = 0; curve < curves; ++curve) {
            std::size_t valid = 0;
            std::size_t outages = 0;
            for (std::size_t r = 0; r < reps; ++r) {
                const double x = chi[curve * reps + r];
                if (!std::isfinite(x)) continue;
                ++valid;
                if (x > threshold) ++outages;
            }
            if (valid == 0) {
                row.emplace_back(CellError{"no valid replications"});
                if (with_se) row.emplace_back(CellError{"no valid replications"});
            } else {
                const double p = static_cast<double>(outages) / static_cast<double>(valid);
                row.emplace_back(p);
                if (with_se) row.emplace_back(std::sqrt(p * (1.0 - p) / static_cast<double>(valid)));
            }
            row.emplace_back(static_cast<double>(valid));
        }
        table.add_row(threshold, std::move(row));
    }
    return table;
}

ResultTable ula_reference_sweep(const UlaReferenceConfig& config)
{
    config.geometry.validate();
    if (config.anchors.empty()) throw ConfigError("array sweep needs at least one anchor");
    if (config.reference_distances_m.empty()) throw ConfigError("reference distance grid is empty");
    const double dir_norm = config.reference_direction.norm();
    if (!(dir_norm > 0.0) || !std::isfinite(dir_norm)) throw ConfigError("reference direction must be nonzero");
    const Vec2 dir = config.reference_direction / dir_norm;
    for (double x : config.orientation_priors) {
        if (!(x >= 0.0)) throw InvalidPrior("orientation priors must be >= 0 or inf");
    }
    for (double x : config.position_priors) {
        if (!(x >= 0.0)) throw InvalidPrior("position priors must be >= 0 or inf");
    }

    std::vector<std::string> columns;
    for (double x : config.orientation_priors) columns.push_back("speb_xiphi" + prior_token(x));
    for (double x : config.position_priors) columns.push_back("soeb_xip" + prior_token(x));
    columns.push_back("speb_decomposed");
    columns.push_back("center_distance_m");
    ResultTable table("ref_distance_m", columns);

    const ArrayScene base = far_field_scene(config.geometry, config.center, config.anchors);
    fill_rows(table, config.reference_distances_m, 1, [&](std::size_t i) {
        const ArrayScene scene = with_reference(base, config.reference_distances_m[i] * dir);
        std::vector<Cell> cells;
        for (double xi : config.orientation_priors) {
            cells.push_back(guarded([&] { return array_efim(scene, Mat2::Zero(), xi).position.speb; }));
        }
        for (double xi : config.position_priors) {
            cells.push_back(guarded([&] { return array_efim(scene, xi * Mat2::Identity(), 0.0).soeb; }));
        }
        cells.push_back(guarded([&] { return speb_soeb_decomposition(scene, 0.0).decomposed; }));
        cells.push_back(guarded([&] { return speb_soeb_decomposition(scene, 0.0).distance_to_center; }));
        return cells;
    });
    return table;
}

ResultTable offset_anchor_sweep(const OffsetAnchorConfig& config)
{
    const std::size_t anchors = config.anchor_angles.size();
    if (anchors == 0) throw ConfigError("offset sweep needs at least one anchor");
    if (config.intensities.size() != anchors) throw ConfigError("offset sweep needs one intensity per anchor");
    if (config.moved_anchor >= anchors) throw ConfigError("moved anchor index out of range");
    if (config.moved_angles.empty()) throw ConfigError("anchor angle grid is empty");
    if (!(config.radius_m > 0.0)) throw ConfigError("circle radius must be > 0");
    for (double l : config.intensities) {
        if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("intensities must be finite and >= 0");
    }

    std::vector<std::string> columns;
    for (double xi : config.offset_priors) columns.push_back("speb_xiB" + prior_token(xi));
    columns.push_back("speb_nooffset");
    for (double xi : config.offset_priors) columns.push_back("steb_xiB" + prior_token(xi));
    ResultTable table("phi1_rad", columns);

    fill_rows(table, config.moved_angles, 1, [&](std::size_t i) {
        std::vector<double> angles = config.anchor_angles;
        angles[config.moved_anchor] = config.moved_angles[i];
        std::vector<Anchor> placed;
        for (double a : angles) placed.push_back({config.center + config.radius_m * unit_direction(a), Sight::LOS});
        const NetworkTopology topo(config.center, placed);
        topo.validate();
        std::vector<RangingInfo> ranging;
        for (std::size_t k = 0; k < anchors; ++k) ranging.push_back({config.intensities[k], topo.angle(k)});

        std::vector<OffsetBound> bounds(config.offset_priors.size());
        std::vector<std::string> failures(config.offset_priors.size());
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            try {
                bounds[j] = efim_with_offset(ranging, config.position_prior, config.offset_priors[j]);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                failures[j] = e.what();
            }
        }
        std::vector<Cell> cells;
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            cells.push_back(failures[j].empty() ? Cell{bounds[j].position.speb} : Cell{CellError{failures[j]}});
        }
        cells.push_back(guarded(
            [&] { return add_position_prior(efim_from_ranging(ranging), config.position_prior).speb; }));
        for (std::size_t j = 0; j < bounds.size(); ++j) {
            cells.push_back(failures[j].empty() ? Cell{bounds[j].steb_m2} : Cell{CellError{failures[j]}});
        }
        return cells;
    });
    return table;
}

} // namespace wbloc
