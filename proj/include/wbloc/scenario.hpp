#pragma once

#include "wbloc/array.hpp"
#include "wbloc/channel.hpp"
#include "wbloc/experiments.hpp"
#include "wbloc/fim.hpp"
#include "wbloc/geometry.hpp"
#include "wbloc/prior_spec.hpp"
#include "wbloc/result_table.hpp"
#include "wbloc/waveform.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wbloc {

enum class ChannelMode { Explicit, Generated, Intensity };

struct ArraySpec {
    ArrayGeometry geometry;
    bool far_field = true;
};

struct OffsetSpec {
    bool enabled = false;
    bool report_seconds = false; // STEB in s^2 instead of m^2
};

// Re-evaluates the scenario with one dotted-path value replaced per row.
struct ScanSpec {
    std::string variable;
    std::vector<double> values;
};

using ExperimentSpec = std::variant<std::monostate, PathSeparationConfig, PocStudyConfig, RaoConfig,
                                    UlaReferenceConfig, OffsetAnchorConfig, ScanSpec>;

struct LoadOptions {
    std::vector<std::string> overrides;  // "dotted.path=value"
    std::optional<std::uint64_t> seed;   // replaces channel and experiment seeds
    std::filesystem::path base_dir;      // resolves relative file references
    unsigned threads = 0;
};

// A parsed and validated scenario document.
struct Scenario {
    std::string source; // canonical JSON after overrides
    LoadOptions options;
    NetworkTopology topology;
    Waveform waveform = Waveform::canonical();
    double noise_psd = 1.0;
    ParameterModel model = ParameterModel::Full;
    ChannelMode channel_mode = ChannelMode::Explicit;
    MultipathChannel channel;                          // Explicit and Generated modes
    std::vector<double> intensities;                   // Intensity mode, per anchor (1/m^2)
    std::vector<std::vector<double>> element_intensities; // Intensity mode, near-field arrays [n][k]
    PriorSpec priors;
    std::optional<ArraySpec> array;
    OffsetSpec offset;
    ExperimentSpec experiment;
};


// Parses JSON text. Unknown keys, bad values and broken invariants raise the
// matching error kind.
Scenario parse_scenario(const std::string& text, const LoadOptions& options = {});

// `reference` is a file path or "builtin:NAME".
Scenario load_scenario(const std::string& reference, LoadOptions options = {});

std::vector<std::string> builtin_names();
std::string builtin_description(const std::string& name);
std::string builtin_source(const std::string& name);

struct EvalReport {
    double speb_m2 = 0.0;
    std::optional<double> soeb_rad2;
    std::optional<double> steb;     // m^2, or s^2 when steb_seconds
    bool steb_seconds = false;
    std::vector<double> intensities; // per anchor, 1/m^2
    Eigen::VectorXd efim_eigenvalues;
};

EvalReport evaluate(const Scenario& scenario);

// key=value lines for the report.
std::string format_report(const EvalReport& report);

// Runs the scenario's experiment. Throws ConfigError when it has none.
ResultTable run_experiment(const Scenario& scenario);

} // namespace wbloc
