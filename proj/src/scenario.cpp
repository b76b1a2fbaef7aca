#include "wbloc/scenario.hpp"

#include "wbloc/clock.hpp"
#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"
#include "wbloc/priors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace wbloc {

namespace {

using json = nlohmann::json;

// ---- value readers ----

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, const std::string& where)
{
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

// Numbers may be JSON numbers or strings: "inf", decimal text, or multiples
// of pi such as "pi", "3pi/2", "0.5*pi".
double parse_number_text(const std::string& raw, const std::string& where)
{
    std::string s;
    for (char c : raw) {
        if (c != ' ') s += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (s == "inf" || s == "+inf" || s == "infinity") return kInfiniteInformation;
    static const std::regex pi_form(R"(^([+-]?[0-9]*\.?[0-9]*)\*?pi(/([0-9]*\.?[0-9]+))?$)");
    std::smatch m;
    if (std::regex_match(s, m, pi_form)) {
        const std::string coef = m[1].str();
        double k = 1.0;
        if (coef == "-") {
            k = -1.0;
        } else if (!coef.empty() && coef != "+") {
            k = parse_number_text(coef, where);
        }
        const double den = m[3].matched ? parse_number_text(m[3].str(), where) : 1.0;
        if (den == 0.0) throw ConfigError(where + ": division by zero in '" + raw + "'");
        return k * kPi / den;
    }
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last) throw ConfigError(where + ": cannot read '" + raw + "' as a number");
    return v;
}

double number(const json& v, const std::string& where)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return parse_number_text(v.get<std::string>(), where);
    throw ConfigError(where + ": expected a number");
}

double finite_number(const json& v, const std::string& where)
{
    const double x = number(v, where);
    if (!std::isfinite(x)) throw ConfigError(where + ": must be finite");
    return x;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where)
{
    return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

std::size_t count_value(const json& v, const std::string& where)
{
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

std::uint64_t seed_value(const json& v, const std::string& where)
{
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(where + ": expected a non-negative integer seed");
    return v.get<std::uint64_t>();
}

Vec2 vec2(const json& v, const std::string& where)
{
    if (!v.is_array() || v.size() != 2) throw ConfigError(where + ": expected [x, y]");
    return {finite_number(v[0], where + "[0]"), finite_number(v[1], where + "[1]")};
}

// Rounds to 12 significant digits so stepped grids print as 0.3, not
// 0.30000000000000004.
double tidy(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 12);
    double out = v;
    std::from_chars(buf, res.ptr, out);
    return out;
}

// A list of values, or a grid object {start, stop, step | count}.
std::vector<double> number_list(const json& v, const std::string& where)
{
    std::vector<double> out;
    if (v.is_array()) {
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], where + "[" + std::to_string(i) + "]"));
        return out;
    }
    if (!v.is_object()) throw ConfigError(where + ": expected a list or a grid object");
    check_keys(v, {"start", "stop", "step", "count"}, where);
    if (!v.contains("start") || !v.contains("stop")) throw ConfigError(where + ": grid needs start and stop");
    if (v.contains("step") == v.contains("count")) throw ConfigError(where + ": grid needs exactly one of step or count");
    const double start = finite_number(v.at("start"), where + ".start");
    const double stop = finite_number(v.at("stop"), where + ".stop");
    if (v.contains("step")) {
        const double step = finite_number(v.at("step"), where + ".step");
        if (!(step > 0.0) || stop < start) throw ConfigError(where + ": need step > 0 and stop >= start");
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n > 1000000) throw ConfigError(where + ": grid too large");
        for (std::size_t i = 0; i < n; ++i) out.push_back(tidy(start + static_cast<double>(i) * step));
    } else {
        const std::size_t n = count_value(v.at("count"), where + ".count");
        if (n == 0) throw ConfigError(where + ": count must be >= 1");
        if (n == 1) return {start};
        for (std::size_t i = 0; i + 1 < n; ++i) {
            out.push_back(start + (stop - start) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        out.push_back(stop);
    }
    return out;
}

Mat2 position_prior(const json& v, const std::string& where)
{
    Mat2 m = Mat2::Zero();
    if (v.is_number() || v.is_string()) {
        const double g = number(v, where);
        m(0, 0) = m(1, 1) = g;
    } else if (v.is_array() && v.size() == 2 && !v[0].is_array()) {
        m(0, 0) = number(v[0], where + "[0]");
        m(1, 1) = number(v[1], where + "[1]");
    } else if (v.is_array() && v.size() == 2 && v[0].is_array() && v[0].size() == 2 && v[1].size() == 2) {
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) m(i, j) = number(v[i][j], where);
        }
    } else {
        throw ConfigError(where + ": expected a scalar, a diagonal [a, b] or a 2x2 matrix");
    }
    return m;
}

// ---- overrides ----

void apply_override(json& doc, const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' must look like key=value");
    const std::string path = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;

    std::vector<std::string> keys;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
        if (part.empty()) throw ConfigError("override path '" + path + "' has an empty segment");
        keys.push_back(part);
    }
    json* node = &doc;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        const std::string& key = keys[i];
        json* next = nullptr;
        if (node->is_array()) {
            std::size_t idx = 0;
            const auto res = std::from_chars(key.data(), key.data() + key.size(), idx);
            if (res.ec != std::errc{} || res.ptr != key.data() + key.size() || idx >= node->size()) {
                throw ConfigError("override path '" + path + "': '" + key + "' is not a valid index");
            }
            next = &(*node)[idx];
        } else if (node->is_object() || node->is_null()) {
            next = &(*node)[key];
        } else {
            throw ConfigError("override path '" + path + "' descends into a scalar");
        }
        node = next;
    }
    *node = value;
}

// ---- sections ----

NetworkTopology parse_topology(const json& doc)
{
    if (!doc.contains("topology")) throw ConfigError("topology: section is required");
    const json& t = doc.at("topology");
    check_keys(t, {"agent", "anchors"}, "topology");
    const Vec2 agent = t.contains("agent") ? vec2(t.at("agent"), "topology.agent") : Vec2::Zero();
    if (!t.contains("anchors") || !t.at("anchors").is_array() || t.at("anchors").empty()) {
        throw ConfigError("topology.anchors: at least one anchor is required");
    }
    std::vector<Anchor> anchors;
    for (std::size_t k = 0; k < t.at("anchors").size(); ++k) {
        const std::string where = "topology.anchors[" + std::to_string(k) + "]";
        const json& a = t.at("anchors")[k];
        check_keys(a, {"position", "sight"}, where);
        if (!a.contains("position")) throw ConfigError(where + ": position is required");
        Anchor anchor{vec2(a.at("position"), where + ".position"), Sight::LOS};
        if (a.contains("sight")) {
            const std::string s = a.at("sight").is_string() ? a.at("sight").get<std::string>() : "";
            if (s == "LOS" || s == "los") {
                anchor.sight = Sight::LOS;
            } else if (s == "NLOS" || s == "nlos") {
                anchor.sight = Sight::NLOS;
            } else {
                throw ConfigError(where + ".sight: expected LOS or NLOS");
            }
        }
        anchors.push_back(anchor);
    }
    NetworkTopology topo(agent, std::move(anchors));
    topo.validate();
    return topo;
}

Waveform parse_waveform(const json& doc, const std::filesystem::path& base_dir)
{
    if (!doc.contains("waveform")) return Waveform::canonical();
    const json& w = doc.at("waveform");
    check_keys(w, {"family", "order", "sigma_s", "support_s", "energy_fraction", "energy", "csv", "samples",
                   "interval_s"},
               "waveform");
    const std::string family = w.value("family", std::string("canonical"));
    const double energy = number_or(w, "energy", 1.0, "waveform");
    if (family == "canonical") {
        return Waveform::canonical().with_energy(energy);
    }
    if (family == "gaussian_derivative") {
        const int order = w.contains("order") ? static_cast<int>(count_value(w.at("order"), "waveform.order")) : 2;
        const double support = number_or(w, "support_s", 4e-9, "waveform");
        if (w.contains("sigma_s")) {
            return Waveform::gaussian_derivative(order, number(w.at("sigma_s"), "waveform.sigma_s"), support, energy);
        }
        return Waveform::gaussian_derivative_with_support(order, support,
                                                          number_or(w, "energy_fraction", 0.9999, "waveform"), energy);
    }
    if (family == "sampled") {
        if (w.contains("csv")) {
            std::filesystem::path p = w.at("csv").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            return w.contains("energy") ? Waveform::from_csv(p).with_energy(energy) : Waveform::from_csv(p);
        }
        if (!w.contains("samples") || !w.contains("interval_s")) {
            throw ConfigError("waveform: sampled family needs csv, or samples and interval_s");
        }
        const Waveform s = Waveform::sampled(number_list(w.at("samples"), "waveform.samples"),
                                             number(w.at("interval_s"), "waveform.interval_s"));
        return w.contains("energy") ? s.with_energy(energy) : s;
    }
    throw ConfigError("waveform.family: unknown family '" + family + "'");
}

ChannelModelParams parse_model_params(const json& p, const std::string& where)
{
    check_keys(p, {"arrival_rate_hz", "inter_arrival_ns", "path_loss_exponent", "reference_power_db", "shadowing_db",
                   "decay_s", "nakagami_m", "path_count"},
               where);
    ChannelModelParams m;
    if (p.contains("arrival_rate_hz") && p.contains("inter_arrival_ns")) {
        throw ConfigError(where + ": give arrival_rate_hz or inter_arrival_ns, not both");
    }
    if (p.contains("inter_arrival_ns")) m.arrival_rate_hz = 1e9 / number(p.at("inter_arrival_ns"), where);
    m.arrival_rate_hz = number_or(p, "arrival_rate_hz", m.arrival_rate_hz, where);
    m.path_loss_exponent = number_or(p, "path_loss_exponent", m.path_loss_exponent, where);
    m.reference_power_db = number_or(p, "reference_power_db", m.reference_power_db, where);
    m.shadowing_db = number_or(p, "shadowing_db", m.shadowing_db, where);
    m.decay_s = number_or(p, "decay_s", m.decay_s, where);
    m.nakagami_m = number_or(p, "nakagami_m", m.nakagami_m, where);
    if (p.contains("path_count")) m.path_count = count_value(p.at("path_count"), where + ".path_count");
    m.validate();
    return m;
}

struct ChannelSection {
    std::optional<ChannelModelParams> generator;
    std::optional<std::uint64_t> seed;
};

ChannelSection parse_channel(const json& doc, Scenario& s)
{
    if (!doc.contains("channel")) throw ConfigError("channel: section is required");
    const json& c = doc.at("channel");
    check_keys(c, {"mode", "noise_psd", "model", "anchors", "params", "seed", "rii", "rii_elements"}, "channel");
    s.noise_psd = number_or(c, "noise_psd", 1.0, "channel");
    if (!(s.noise_psd > 0.0) || !std::isfinite(s.noise_psd)) throw ConfigError("channel.noise_psd: must be > 0");
    const std::string model = c.value("model", std::string("full"));
    if (model == "full") {
        s.model = ParameterModel::Full;
    } else if (model == "partial") {
        s.model = ParameterModel::Partial;
    } else {
        throw ConfigError("channel.model: expected full or partial");
    }

    ChannelSection out;
    const std::string mode = c.value("mode", std::string("explicit"));
    const std::size_t n = s.topology.size();
    if (mode == "explicit") {
        s.channel_mode = ChannelMode::Explicit;
        if (!c.contains("anchors") || !c.at("anchors").is_array() || c.at("anchors").size() != n) {
            throw ConfigError("channel.anchors: need one entry per anchor (" + std::to_string(n) + ")");
        }
        for (std::size_t k = 0; k < n; ++k) {
            const std::string where = "channel.anchors[" + std::to_string(k) + "]";
            const json& a = c.at("anchors")[k];
            check_keys(a, {"paths"}, where);
            if (!a.contains("paths") || !a.at("paths").is_array()) throw ConfigError(where + ": paths list is required");
            AnchorChannel ch;
            for (std::size_t l = 0; l < a.at("paths").size(); ++l) {
                const std::string pw = where + ".paths[" + std::to_string(l) + "]";
                const json& p = a.at("paths")[l];
                check_keys(p, {"bias_m", "bias_ns", "amplitude", "snr_db"}, pw);
                if (p.contains("bias_m") == p.contains("bias_ns")) throw ConfigError(pw + ": give exactly one of bias_m or bias_ns");
                if (p.contains("amplitude") == p.contains("snr_db")) {
                    throw ConfigError(pw + ": give exactly one of amplitude or snr_db");
                }
                Path path;
                path.bias_m = p.contains("bias_m") ? finite_number(p.at("bias_m"), pw + ".bias_m")
                                                   : finite_number(p.at("bias_ns"), pw + ".bias_ns") * 1e-9 * kSpeedOfLight;
                path.amplitude = p.contains("amplitude")
                                     ? finite_number(p.at("amplitude"), pw + ".amplitude")
                                     : amplitude_for_snr(s.waveform, db_to_linear(finite_number(p.at("snr_db"), pw)),
                                                         s.noise_psd);
                ch.paths.push_back(path);
            }
            s.channel.push_back(std::move(ch));
        }
        validate_channels(s.channel, s.topology);
    } else if (mode == "generated") {
        s.channel_mode = ChannelMode::Generated;
        out.generator = parse_model_params(c.value("params", json::object()), "channel.params");
        if (s.options.seed) {
            out.seed = s.options.seed;
        } else if (c.contains("seed")) {
            out.seed = seed_value(c.at("seed"), "channel.seed");
        } else {
            throw ConfigError("channel.seed: a seed is required for generated channels");
        }
        for (std::size_t k = 0; k < n; ++k) {
            RandomStream rng(*out.seed, static_cast<std::uint32_t>(k), 0);
            s.channel.push_back(sample_channel(*out.generator, s.topology.distance(k), s.topology.anchor(k).sight, rng).channel);
        }
        validate_channels(s.channel, s.topology);
    } else if (mode == "rii") {
        s.channel_mode = ChannelMode::Intensity;
        if (!c.contains("rii")) throw ConfigError("channel.rii: required in rii mode");
        const json& r = c.at("rii");
        if (r.is_array()) {
            s.intensities = number_list(r, "channel.rii");
            if (s.intensities.size() != n) throw ConfigError("channel.rii: need one value per anchor");
        } else {
            s.intensities.assign(n, number(r, "channel.rii"));
        }
        for (double l : s.intensities) {
            if (!(l >= 0.0) || !std::isfinite(l)) throw ConfigError("channel.rii: values must be finite and >= 0");
        }
        if (c.contains("rii_elements")) {
            const json& e = c.at("rii_elements");
            if (!e.is_array()) throw ConfigError("channel.rii_elements: expected one row per array element");
            for (std::size_t i = 0; i < e.size(); ++i) {
                s.element_intensities.push_back(number_list(e[i], "channel.rii_elements[" + std::to_string(i) + "]"));
            }
        }
    } else {
        throw ConfigError("channel.mode: expected explicit, generated or rii");
    }
    if (s.channel_mode != ChannelMode::Explicit && c.contains("anchors")) {
        throw ConfigError("channel.anchors: only used in explicit mode");
    }
    return out;
}

ChannelPrior parse_channel_prior(const json& p, const std::string& where, std::size_t paths, Sight sight)
{
    check_keys(p, {"bias", "amplitude", "kappa", "distance", "distance_kappa"}, where);
    const bool diagonal = p.contains("bias") || p.contains("amplitude");
    if (diagonal && p.contains("kappa")) throw ConfigError(where + ": use bias/amplitude lists or kappa, not both");
    ChannelPrior prior;
    if (diagonal) {
        const std::vector<double> bias = p.contains("bias") ? number_list(p.at("bias"), where + ".bias")
                                                            : std::vector<double>(paths, 0.0);
        const std::vector<double> amp = p.contains("amplitude") ? number_list(p.at("amplitude"), where + ".amplitude")
                                                                : std::vector<double>(paths, 0.0);
        if (bias.size() != paths || amp.size() != paths) {
            throw InvalidPrior(where + ": bias and amplitude lists need one entry per path (" + std::to_string(paths) + ")");
        }
        prior = ChannelPrior::diagonal(bias, amp, sight);
    } else if (p.contains("kappa")) {
        const json& k = p.at("kappa");
        if (!k.is_array()) throw ConfigError(where + ".kappa: expected a square matrix");
        const auto dim = static_cast<Eigen::Index>(k.size());
        prior.kappa.resize(dim, dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (!k[i].is_array() || static_cast<Eigen::Index>(k[i].size()) != dim) {
                throw ConfigError(where + ".kappa: expected a square matrix");
            }
            for (Eigen::Index j = 0; j < dim; ++j) prior.kappa(i, j) = number(k[i][j], where + ".kappa");
        }
    }
    prior.distance = number_or(p, "distance", 0.0, where);
    if (p.contains("distance_kappa")) {
        const auto v = number_list(p.at("distance_kappa"), where + ".distance_kappa");
        prior.distance_kappa = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    return prior;
}

void parse_priors(const json& doc, Scenario& s)
{
    if (!doc.contains("priors")) return;
    const json& p = doc.at("priors");
    check_keys(p, {"position", "orientation", "offset", "channel"}, "priors");
    if (p.contains("position")) s.priors.position = position_prior(p.at("position"), "priors.position");
    s.priors.orientation = number_or(p, "orientation", 0.0, "priors");
    if (p.contains("offset")) {
        const json& o = p.at("offset");
        if (o.is_object() && o.contains("per_anchor")) {
            throw ConfigError("priors.offset: per-anchor clock offsets are not supported; the offset is common to all anchors");
        }
        check_keys(o, {"xi"}, "priors.offset");
        if (o.contains("xi")) {
            if (o.at("xi").is_array() || o.at("xi").is_object()) {
                throw ConfigError("priors.offset.xi: per-anchor clock offsets are not supported; give one value");
            }
            s.priors.offset = number(o.at("xi"), "priors.offset.xi");
        }
    }
    if (p.contains("channel")) {
        if (s.channel_mode == ChannelMode::Intensity) {
            throw ConfigError("priors.channel: channel priors need an explicit or generated channel");
        }
        const json& c = p.at("channel");
        const std::size_t n = s.topology.size();
        if (c.is_array() && c.size() != n) throw ConfigError("priors.channel: need one entry per anchor");
        for (std::size_t k = 0; k < n; ++k) {
            const json& entry = c.is_array() ? c[k] : c;
            const std::string where = c.is_array() ? "priors.channel[" + std::to_string(k) + "]" : "priors.channel";
            s.priors.channel.push_back(parse_channel_prior(entry, where, s.channel[k].size(), s.topology.anchor(k).sight));
        }
    }
    std::vector<ChannelLayout> layouts;
    for (std::size_t k = 0; k < s.channel.size(); ++k) layouts.push_back({s.channel[k].size(), s.topology.anchor(k).sight});
    s.priors.validate(layouts);
}

void parse_array(const json& doc, Scenario& s)
{
    if (!doc.contains("array")) return;
    const json& a = doc.at("array");
    check_keys(a, {"elements", "ula", "orientation_rad", "reference_offset_m", "far_field"}, "array");
    ArraySpec spec;
    if (a.contains("elements") == a.contains("ula")) throw ConfigError("array: give exactly one of elements or ula");
    if (a.contains("ula")) {
        const json& u = a.at("ula");
        check_keys(u, {"count", "spacing_m"}, "array.ula");
        if (!u.contains("count") || !u.contains("spacing_m")) throw ConfigError("array.ula: count and spacing_m are required");
        spec.geometry = ArrayGeometry::uniform_linear(count_value(u.at("count"), "array.ula.count"),
                                                      finite_number(u.at("spacing_m"), "array.ula.spacing_m"));
    } else {
        const json& e = a.at("elements");
        if (!e.is_array()) throw ConfigError("array.elements: expected a list of [x, y]");
        for (std::size_t i = 0; i < e.size(); ++i) {
            spec.geometry.elements.push_back(vec2(e[i], "array.elements[" + std::to_string(i) + "]"));
        }
    }
    spec.geometry.orientation = number_or(a, "orientation_rad", 0.0, "array");
    if (a.contains("reference_offset_m")) spec.geometry.reference_offset = vec2(a.at("reference_offset_m"), "array.reference_offset_m");
    if (a.contains("far_field")) {
        if (!a.at("far_field").is_boolean()) throw ConfigError("array.far_field: expected true or false");
        spec.far_field = a.at("far_field").get<bool>();
    }
    spec.geometry.validate();
    if (!spec.far_field) {
        if (s.channel_mode != ChannelMode::Intensity || s.element_intensities.empty()) {
            throw ConfigError("array: near-field arrays need channel.mode rii with rii_elements");
        }
    }
    s.array = std::move(spec);
}

void parse_offset(const json& doc, Scenario& s)
{
    if (!doc.contains("offset")) return;
    const json& o = doc.at("offset");
    if (o.is_object() && o.contains("per_anchor")) {
        throw ConfigError("offset: per-anchor clock offsets are not supported; the offset is common to all anchors");
    }
    check_keys(o, {"enabled", "report_units"}, "offset");
    if (o.contains("enabled")) {
        if (!o.at("enabled").is_boolean()) throw ConfigError("offset.enabled: expected true or false");
        s.offset.enabled = o.at("enabled").get<bool>();
    }
    const std::string units = o.value("report_units", std::string("m2"));
    if (units == "m2") {
        s.offset.report_seconds = false;
    } else if (units == "s2") {
        s.offset.report_seconds = true;
    } else {
        throw ConfigError("offset.report_units: expected m2 or s2");
    }
}

std::vector<RangingInfo> scene_ranging(const Scenario& s)
{
    if (s.channel_mode == ChannelMode::Intensity) {
        std::vector<RangingInfo> out;
        for (std::size_t k = 0; k < s.topology.size(); ++k) out.push_back({s.intensities[k], s.topology.angle(k)});
        return out;
    }
    return ranging_with_prior(s.topology, s.channel, s.waveform, s.noise_psd, s.priors, s.model);
}

std::uint64_t experiment_seed(const json& e, const Scenario& s, const std::string& where)
{
    if (s.options.seed) return *s.options.seed;
    if (!e.contains("seed")) throw ConfigError(where + ".seed: a seed is required for Monte Carlo experiments");
    return seed_value(e.at("seed"), where + ".seed");
}

void parse_experiment(const json& doc, Scenario& s, const ChannelSection& channel)
{
    if (!doc.contains("experiment")) return;
    const json& e = doc.at("experiment");
    const std::string where = "experiment";
    if (!e.is_object() || !e.contains("kind") || !e.at("kind").is_string()) throw ConfigError("experiment.kind: required");
    const std::string kind = e.at("kind").get<std::string>();
    unsigned threads = s.options.threads;
    if (e.contains("threads")) threads = static_cast<unsigned>(count_value(e.at("threads"), "experiment.threads"));
    auto required = [&](const char* key) -> const json& {
        if (!e.contains(key)) throw ConfigError(where + "." + key + ": required for " + kind);
        return e.at(key);
    };
    auto replications = [&] {
        const std::size_t r = e.contains("replications") ? count_value(e.at("replications"), "experiment.replications") : 1000;
        if (r == 0) throw ConfigError("experiment.replications: must be >= 1");
        return r;
    };

    if (kind == "path_separation") {
        check_keys(e, {"kind", "threads", "separations_ns", "snr_db", "variants"}, where);
        PathSeparationConfig c;
        c.topology = s.topology;
        c.waveform = s.waveform;
        c.noise_psd = s.noise_psd;
        c.threads = threads;
        c.separations_ns = number_list(required("separations_ns"), "experiment.separations_ns");
        if (e.contains("snr_db")) {
            const auto snr = number_list(e.at("snr_db"), "experiment.snr_db");
            if (snr.size() != 2) throw ConfigError("experiment.snr_db: expected [first, second]");
            c.snr1_db = snr[0];
            c.snr2_db = snr[1];
        }
        if (e.contains("variants")) {
            const json& v = e.at("variants");
            if (v.is_string()) {
                const std::string name = v.get<std::string>();
                if (name == "amplitude") {
                    c.variants = amplitude_prior_variants();
                } else if (name == "bias") {
                    c.variants = bias_prior_variants();
                } else if (name != "none") {
                    throw ConfigError("experiment.variants: expected none, amplitude, bias or a list");
                }
            } else if (v.is_array()) {
                for (std::size_t i = 0; i < v.size(); ++i) {
                    const std::string vw = "experiment.variants[" + std::to_string(i) + "]";
                    check_keys(v[i], {"column", "amplitude", "bias2"}, vw);
                    ChannelPriorVariant var;
                    var.column = v[i].value("column", std::string());
                    if (var.column.empty()) throw ConfigError(vw + ".column: required");
                    if (v[i].contains("amplitude")) {
                        const auto a = number_list(v[i].at("amplitude"), vw + ".amplitude");
                        if (a.size() != 2) throw ConfigError(vw + ".amplitude: expected [first, second]");
                        var.amplitude1 = a[0];
                        var.amplitude2 = a[1];
                    }
                    var.bias2 = number_or(v[i], "bias2", 0.0, vw);
                    c.variants.push_back(var);
                }
            } else {
                throw ConfigError("experiment.variants: expected a name or a list");
            }
        }
        s.experiment = std::move(c);
    } else if (kind == "average_poc") {
        check_keys(e, {"kind", "threads", "path_counts", "inter_arrival_ns", "replications", "seed", "distance_m"}, where);
        PocStudyConfig c;
        c.waveform = s.waveform;
        if (channel.generator) c.model = *channel.generator;
        c.threads = threads;
        const json& counts = required("path_counts");
        if (!counts.is_array()) throw ConfigError("experiment.path_counts: expected a list");
        for (std::size_t i = 0; i < counts.size(); ++i) c.path_counts.push_back(count_value(counts[i], "experiment.path_counts"));
        c.inter_arrival_ns = number_list(required("inter_arrival_ns"), "experiment.inter_arrival_ns");
        c.replications = replications();
        c.seed = experiment_seed(e, s, where);
        c.distance_m = number_or(e, "distance_m", c.distance_m, where);
        s.experiment = std::move(c);
    } else if (kind == "rao") {
        check_keys(e, {"kind", "threads", "path_count", "inter_arrival_ns", "thresholds", "replications", "seed",
                       "distance_m"},
                   where);
        RaoConfig c;
        c.waveform = s.waveform;
        if (channel.generator) c.model = *channel.generator;
        c.threads = threads;
        if (e.contains("path_count")) c.path_count = count_value(e.at("path_count"), "experiment.path_count");
        c.inter_arrival_ns = number_list(required("inter_arrival_ns"), "experiment.inter_arrival_ns");
        c.thresholds = number_list(required("thresholds"), "experiment.thresholds");
        c.replications = replications();
        c.seed = experiment_seed(e, s, where);
        c.distance_m = number_or(e, "distance_m", c.distance_m, where);
        s.experiment = std::move(c);
    } else if (kind == "ula_reference") {
        check_keys(e, {"kind", "threads", "reference_distances_m", "reference_direction", "orientation_priors",
                       "position_priors"},
                   where);
        if (!s.array || !s.array->far_field) throw ConfigError("experiment: ula_reference needs a far-field array section");
        UlaReferenceConfig c;
        c.anchors = scene_ranging(s);
        c.geometry = s.array->geometry;
        c.center = s.topology.agent();
        if (e.contains("reference_direction")) c.reference_direction = vec2(e.at("reference_direction"), "experiment.reference_direction");
        c.reference_distances_m = number_list(required("reference_distances_m"), "experiment.reference_distances_m");
        c.orientation_priors = e.contains("orientation_priors")
                                   ? number_list(e.at("orientation_priors"), "experiment.orientation_priors")
                                   : std::vector<double>{0.0, 20.0, 200.0, kInfiniteInformation};
        c.position_priors = e.contains("position_priors")
                                ? number_list(e.at("position_priors"), "experiment.position_priors")
                                : std::vector<double>{0.0, 10.0, 100.0, kInfiniteInformation};
        s.experiment = std::move(c);
    } else if (kind == "offset_anchor") {
        check_keys(e, {"kind", "threads", "radius_m", "anchor_angles_rad", "moved_anchor", "angles_rad", "offset_priors"},
                   where);
        if (s.channel_mode != ChannelMode::Intensity) throw ConfigError("experiment: offset_anchor needs channel.mode rii");
        OffsetAnchorConfig c;
        c.center = s.topology.agent();
        c.radius_m = e.contains("radius_m") ? finite_number(e.at("radius_m"), "experiment.radius_m") : s.topology.distance(0);
        if (e.contains("anchor_angles_rad")) {
            c.anchor_angles = number_list(e.at("anchor_angles_rad"), "experiment.anchor_angles_rad");
        } else {
            for (std::size_t k = 0; k < s.topology.size(); ++k) {
                c.anchor_angles.push_back(bearing(c.center, s.topology.anchor(k).position));
            }
        }
        c.intensities = s.intensities;
        if (c.intensities.size() != c.anchor_angles.size()) {
            throw ConfigError("experiment.anchor_angles_rad: need one angle per anchor");
        }
        if (e.contains("moved_anchor")) c.moved_anchor = count_value(e.at("moved_anchor"), "experiment.moved_anchor");
        c.moved_angles = number_list(required("angles_rad"), "experiment.angles_rad");
        c.offset_priors = e.contains("offset_priors") ? number_list(e.at("offset_priors"), "experiment.offset_priors")
                                                      : std::vector<double>{0.0, 10.0, 100.0, kInfiniteInformation};
        c.position_prior = s.priors.position;
        s.experiment = std::move(c);
    } else if (kind == "scan") {
        check_keys(e, {"kind", "threads", "variable", "values"}, where);
        ScanSpec c;
        const json& var = required("variable");
        if (!var.is_string() || var.get<std::string>().empty()) throw ConfigError("experiment.variable: expected a dotted path");
        c.variable = var.get<std::string>();
        if (c.variable.rfind("experiment", 0) == 0) throw ConfigError("experiment.variable: cannot scan the experiment section");
        c.values = number_list(required("values"), "experiment.values");
        if (c.values.empty()) throw ConfigError("experiment.values: empty");
        s.experiment = std::move(c);
    } else {
        throw ConfigError("experiment.kind: unknown kind '" + kind + "'");
    }
}

// ---- builtins ----

struct Builtin {
    const char* description;
    const char* source;
};

const std::map<std::string, Builtin>& builtins()
{
    static const std::map<std::string, Builtin> table{
        {"symmetric4",
         {"four anchors on a 10 m circle, ranging information 10 per anchor",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [0, 10]}, {"position": [-10, 0]}, {"position": [0, -10]}]},
  "channel": {"mode": "rii", "rii": 10},
  "experiment": {"kind": "scan", "variable": "channel.rii", "values": [1, 2, 5, 10, 20, 50, 100]}
})"}},
        {"fig4",
         {"SPEB versus two-path separation: full, partial and non-overlap models",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [0, 10]}, {"position": [-10, 0]}, {"position": [0, -10]}]},
  "waveform": {"family": "canonical"},
  "channel": {"mode": "explicit", "noise_psd": 1, "anchors": [
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]}]},
  "experiment": {"kind": "path_separation", "separations_ns": {"start": 0.1, "stop": 8, "step": 0.1},
                 "snr_db": [0, -3], "variants": "none"}
})"}},
        {"fig5a",
         {"SPEB versus path separation with amplitude priors",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [0, 10]}, {"position": [-10, 0]}, {"position": [0, -10]}]},
  "waveform": {"family": "canonical"},
  "channel": {"mode": "explicit", "noise_psd": 1, "anchors": [
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]}]},
  "experiment": {"kind": "path_separation", "separations_ns": {"start": 0.1, "stop": 8, "step": 0.1},
                 "snr_db": [0, -3], "variants": "amplitude"}
})"}},
        {"fig5b",
         {"SPEB versus path separation with second-path bias priors",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [0, 10]}, {"position": [-10, 0]}, {"position": [0, -10]}]},
  "waveform": {"family": "canonical"},
  "channel": {"mode": "explicit", "noise_psd": 1, "anchors": [
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]},
    {"paths": [{"bias_ns": 0, "snr_db": 0}, {"bias_ns": 1, "snr_db": -3}]}]},
  "experiment": {"kind": "path_separation", "separations_ns": {"start": 0.1, "stop": 8, "step": 0.1},
                 "snr_db": [0, -3], "variants": "bias"}
})"}},
        {"fig6",
         {"mean path-overlap coefficient versus inter-arrival time for L = 2, 3, 5, 50",
          R"({
  "topology": {"agent": [0, 0], "anchors": [{"position": [10, 0]}]},
  "waveform": {"family": "canonical"},
  "channel": {"mode": "generated", "seed": 1, "params": {"inter_arrival_ns": 2, "path_count": 50}},
  "experiment": {"kind": "average_poc", "path_counts": [2, 3, 5, 50],
                 "inter_arrival_ns": [0.5, 1, 1.4, 1.6, 2, 2.5, 3, 3.5, 4, 5, 6, 7, 8, 10],
                 "replications": 1000, "seed": 1}
})"}},
        {"rao",
         {"ranging-ability outage versus overlap threshold, L = 50",
          R"({
  "topology": {"agent": [0, 0], "anchors": [{"position": [10, 0]}]},
  "waveform": {"family": "canonical"},
  "channel": {"mode": "generated", "seed": 1, "params": {"inter_arrival_ns": 2, "path_count": 50}},
  "experiment": {"kind": "rao", "path_count": 50, "inter_arrival_ns": [3.5, 2.5, 2, 1.6, 1.4],
                 "thresholds": {"start": 0, "stop": 1, "count": 41}, "replications": 1000, "seed": 1}
})"}},
        {"fig7_8",
         {"SPEB and SOEB versus array reference point, six anchors, 4-element ULA",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [5, 8.660254037844386]}, {"position": [-5, 8.660254037844386]},
    {"position": [-10, 0]}, {"position": [-5, -8.660254037844386]}, {"position": [5, -8.660254037844386]}]},
  "channel": {"mode": "rii", "rii": 10},
  "array": {"ula": {"count": 4, "spacing_m": 0.5}, "orientation_rad": 0, "far_field": true},
  "experiment": {"kind": "ula_reference", "reference_distances_m": {"start": 0, "stop": 2, "step": 0.1},
                 "orientation_priors": [0, 20, 200, "inf"], "position_priors": [0, 10, 100, "inf"]}
})"}},
        {"fig9_10",
         {"SPEB and STEB with a clock offset versus the position of anchor 1",
          R"({
  "topology": {"agent": [0, 0], "anchors": [
    {"position": [10, 0]}, {"position": [0, 10]}, {"position": [-10, 0]}, {"position": [0, -10]}]},
  "channel": {"mode": "rii", "rii": 10},
  "priors": {"offset": {"xi": 0}},
  "offset": {"enabled": true, "report_units": "m2"},
  "experiment": {"kind": "offset_anchor", "radius_m": 10, "anchor_angles_rad": [0, "pi/2", "pi", "3pi/2"],
                 "moved_anchor": 0, "angles_rad": {"start": 0, "stop": "pi", "count": 37},
                 "offset_priors": [0, 10, 100, "inf"]}
})"}},
    };
    return table;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read scenario file " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

Eigen::VectorXd eigenvalues(const Mat2& m)
{
    if (m.allFinite()) return Eigen::SelfAdjointEigenSolver<Mat2>(m).eigenvalues();
    // Known axes carry infinite information.
    Eigen::VectorXd v(2);
    for (int i = 0; i < 2; ++i) v(i) = std::isinf(m(i, i)) ? kInfiniteInformation : m(i, i);
    std::sort(v.data(), v.data() + 2);
    return v;
}

} // namespace

Scenario parse_scenario(const std::string& text, const LoadOptions& options)
{
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("scenario is not valid JSON");
    if (!doc.is_object()) throw ConfigError("scenario must be a JSON object");
    for (const std::string& o : options.overrides) apply_override(doc, o);
    check_keys(doc, {"topology", "waveform", "channel", "priors", "array", "offset", "experiment"}, "scenario");

    Scenario s;
    s.options = options;
    s.options.overrides.clear();
    s.source = doc.dump(2);
    s.topology = parse_topology(doc);
    s.waveform = parse_waveform(doc, options.base_dir);
    const ChannelSection channel = parse_channel(doc, s);
    parse_priors(doc, s);
    parse_array(doc, s);
    parse_offset(doc, s);
    parse_experiment(doc, s, channel);
    return s;
}

Scenario load_scenario(const std::string& reference, LoadOptions options)
{
    constexpr std::string_view prefix = "builtin:";
    if (reference.rfind(prefix, 0) == 0) {
        return parse_scenario(builtin_source(reference.substr(prefix.size())), options);
    }
    const std::filesystem::path path(reference);
    if (options.base_dir.empty()) options.base_dir = path.parent_path();
    return parse_scenario(read_file(path), options);
}

std::vector<std::string> builtin_names()
{
    std::vector<std::string> names;
    for (const auto& [name, b] : builtins()) names.push_back(name);
    return names;
}

std::string builtin_description(const std::string& name)
{
    const auto it = builtins().find(name);
    if (it == builtins().end()) throw ConfigError("unknown builtin scenario '" + name + "'");
    return it->second.description;
}

std::string builtin_source(const std::string& name)
{
    const auto it = builtins().find(name);
    if (it == builtins().end()) throw ConfigError("unknown builtin scenario '" + name + "'");
    return it->second.source;
}

EvalReport evaluate(const Scenario& s)
{
    EvalReport r;
    const std::vector<RangingInfo> ranging = scene_ranging(s);
    for (const RangingInfo& x : ranging) r.intensities.push_back(x.intensity);
    const double steb_scale = s.offset.report_seconds ? 1.0 / (kSpeedOfLight * kSpeedOfLight) : 1.0;
    r.steb_seconds = s.offset.report_seconds;

    if (s.array) {
        const ArrayScene scene = s.array->far_field
                                     ? far_field_scene(s.array->geometry, s.topology.agent(), ranging)
                                     : near_field_scene(s.array->geometry, s.topology.agent(), s.topology.anchors(),
                                                        s.element_intensities);
        if (s.offset.enabled) {
            const ArrayOffsetBound b = array_efim_with_offset(scene, s.priors.position, s.priors.orientation, s.priors.offset);
            r.speb_m2 = b.position.speb;
            r.soeb_rad2 = b.soeb;
            r.steb = b.steb_m2 * steb_scale;
            r.efim_eigenvalues = eigenvalues(b.position.efim);
        } else {
            const ArrayBound b = array_efim(scene, s.priors.position, s.priors.orientation);
            r.speb_m2 = b.position.speb;
            r.soeb_rad2 = b.soeb;
            r.efim_eigenvalues = eigenvalues(b.position.efim);
        }
    } else if (s.offset.enabled) {
        const OffsetBound b = efim_with_offset(ranging, s.priors.position, s.priors.offset);
        r.speb_m2 = b.position.speb;
        r.steb = b.steb_m2 * steb_scale;
        r.efim_eigenvalues = eigenvalues(b.position.efim);
    } else {
        const PositionBound b = add_position_prior(efim_from_ranging(ranging), s.priors.position);
        r.speb_m2 = b.speb;
        r.efim_eigenvalues = eigenvalues(b.efim);
    }
    return r;
}

std::string format_report(const EvalReport& r)
{
    std::string out = "speb_m2=" + format_number(r.speb_m2) + "\n";
    if (r.soeb_rad2) out += "soeb_rad2=" + format_number(*r.soeb_rad2) + "\n";
    if (r.steb) out += std::string(r.steb_seconds ? "steb_s2=" : "steb_m2=") + format_number(*r.steb) + "\n";
    out += "efim_eigenvalues=";
    for (Eigen::Index i = 0; i < r.efim_eigenvalues.size(); ++i) {
        out += (i ? "," : "") + format_number(r.efim_eigenvalues(i));
    }
    out += "\nrii=";
    for (std::size_t k = 0; k < r.intensities.size(); ++k) out += (k ? "," : "") + format_number(r.intensities[k]);
    out += "\n";
    return out;
}

ResultTable run_experiment(const Scenario& s)
{
    return std::visit(
        [&](const auto& spec) -> ResultTable {
            using T = std::decay_t<decltype(spec)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                throw ConfigError("scenario has no experiment section");
            } else if constexpr (std::is_same_v<T, PathSeparationConfig>) {
                return path_separation_sweep(spec);
            } else if constexpr (std::is_same_v<T, PocStudyConfig>) {
                return average_poc_study(spec);
            } else if constexpr (std::is_same_v<T, RaoConfig>) {
                return rao_curve(spec);
            } else if constexpr (std::is_same_v<T, UlaReferenceConfig>) {
                return ula_reference_sweep(spec);
            } else if constexpr (std::is_same_v<T, OffsetAnchorConfig>) {
                return offset_anchor_sweep(spec);
            } else {
                // Column set follows the base scenario.
                std::vector<std::string> columns{"speb_m2"};
                if (s.array) columns.push_back("soeb_rad2");
                if (s.offset.enabled) columns.push_back(s.offset.report_seconds ? "steb_s2" : "steb_m2");
                ResultTable table(spec.variable, columns);
                json base = json::parse(s.source);
                base.erase("experiment");
                for (std::size_t i = 0; i < spec.values.size(); ++i) {
                    LoadOptions opts = s.options;
                    opts.overrides = {spec.variable + "=" + json(spec.values[i]).dump()};
                    if (std::isinf(spec.values[i])) opts.overrides = {spec.variable + "=inf"};
                    std::vector<Cell> cells;
                    try {
                        const Scenario row = parse_scenario(base.dump(), opts);
                        const EvalReport r = evaluate(row);
                        cells.emplace_back(r.speb_m2);
                        if (s.array) cells.emplace_back(r.soeb_rad2.value_or(0.0));
                        if (s.offset.enabled) cells.emplace_back(r.steb.value_or(0.0));
                    } catch (const ConfigError& e) {
                        throw ConfigError("grid index " + std::to_string(i) + ": " + e.what());
                    } catch (const Error& e) {
                        cells.assign(columns.size(), CellError{e.what()});
                    }
                    table.add_row(spec.values[i], std::move(cells));
                }
                return table;
            }
        },
        s.experiment);
}

} // namespace wbloc
