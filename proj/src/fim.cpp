#include "wbloc/fim.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wbloc {

namespace {

constexpr double kC = kSpeedOfLight;

void check_noise(double noise_psd)
{
    if (!(noise_psd > 0.0) || !std::isfinite(noise_psd)) {
        throw InvalidNoise("noise spectral density must be positive and finite");
    }
}

bool is_free(const ChannelLayout& layout, std::size_t i, const ChannelPrior* prior, ParameterModel model)
{
    if (model == ParameterModel::Partial && !layout.is_bias(i)) return false;
    if (prior && !prior->is_zero() && std::isinf(prior->kappa_at(i, i))) return false;
    return true;
}

std::vector<std::size_t> free_indices(const ChannelLayout& layout, const ChannelPrior* prior, ParameterModel model)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layout.dimension(); ++i) {
        if (is_free(layout, i, prior, model)) out.push_back(i);
    }
    return out;
}

// Column of the eta-vector (tau_j, alpha_j) driven by channel parameter i.
Eigen::Index eta_column(const ChannelLayout& layout, std::size_t i)
{
    const auto j = static_cast<Eigen::Index>(layout.path_of(i));
    return layout.is_bias(i) ? 2 * j : 2 * j + 1;
}

} // namespace

Eigen::MatrixXd psi_block(const AnchorChannel& channel, const Waveform& waveform, double noise_psd)
{
    check_noise(noise_psd);
    const auto n = static_cast<Eigen::Index>(channel.size());
    Eigen::MatrixXd psi(2 * n, 2 * n);
    const double k = 2.0 / noise_psd;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double ai = channel.paths[static_cast<std::size_t>(i)].amplitude;
        const double bi = channel.paths[static_cast<std::size_t>(i)].bias_m;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double aj = channel.paths[static_cast<std::size_t>(j)].amplitude;
            const double lag = (bi - channel.paths[static_cast<std::size_t>(j)].bias_m) / kC;
            const double r = waveform.autocorrelation(lag);
            const AutocorrelationDerivatives d = waveform.autocorrelation_derivatives(lag);
            psi(2 * i, 2 * j) = k * ai * aj * d.negated_second;
            psi(2 * i, 2 * j + 1) = k * ai * kC * d.first;
            psi(2 * i + 1, 2 * j + 1) = k * kC * kC * r;
        }
    }
    // The (alpha_i, tau_j) entries mirror (tau_j, alpha_i).
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) psi(2 * i + 1, 2 * j) = psi(2 * j, 2 * i + 1);
    }
    return psi;
}

Eigen::MatrixXd range_information(const AnchorChannel& channel, const Waveform& waveform, double noise_psd)
{
    return psi_block(channel, waveform, noise_psd) / (kC * kC);
}

Eigen::MatrixXd anchor_information(const AnchorChannel& channel, Sight sight, const Waveform& waveform,
                                   double noise_psd, const ChannelPrior* prior, ParameterModel model,
                                   std::vector<std::size_t>* free_params)
{
    const ChannelLayout layout{channel.size(), sight};
    const std::vector<std::size_t> free = free_indices(layout, prior, model);
    const Eigen::MatrixXd psi = range_information(channel, waveform, noise_psd);
    const auto n_local = static_cast<Eigen::Index>(free.size() + 1);

    // Jacobian of (range_j, alpha_j) with respect to (distance, free params).
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_local, psi.rows());
    for (std::size_t j = 0; j < channel.size(); ++j) g(0, 2 * static_cast<Eigen::Index>(j)) = 1.0;
    for (std::size_t a = 0; a < free.size(); ++a) {
        g(static_cast<Eigen::Index>(a) + 1, eta_column(layout, free[a])) = 1.0;
    }
    Eigen::MatrixXd info = g * psi * g.transpose();

    if (prior && !prior->is_zero()) {
        info(0, 0) += prior->distance;
        for (std::size_t a = 0; a < free.size(); ++a) {
            const auto ia = static_cast<Eigen::Index>(a) + 1;
            const double x = prior->distance_kappa_at(free[a]);
            info(0, ia) += x;
            info(ia, 0) += x;
            for (std::size_t b = 0; b < free.size(); ++b) {
                info(ia, static_cast<Eigen::Index>(b) + 1) += prior->kappa_at(free[a], free[b]);
            }
        }
    }
    if (free_params) *free_params = free;
    return 0.5 * (info + info.transpose());
}

FullFim full_fim(const NetworkTopology& topology, const MultipathChannel& channel, const Waveform& waveform,
                 double noise_psd, const FimOptions& options)
{
    topology.validate();
    validate_channels(channel, topology);
    const PriorSpec* priors = options.priors;
    if (priors && !priors->position.allFinite()) {
        throw ConfigError("full FIM needs a finite position prior");
    }
    const bool with_offset = options.clock_offset && !(priors && std::isinf(priors->offset));

    FullFim out;
    for (std::size_t k = 0; k < topology.size(); ++k) {
        if (topology.anchor(k).sight == Sight::LOS) out.anchor_order.push_back(k);
    }
    for (std::size_t k = 0; k < topology.size(); ++k) {
        if (topology.anchor(k).sight == Sight::NLOS) out.anchor_order.push_back(k);
    }

    out.labels = {"p_x", "p_y"};
    if (with_offset) out.labels.emplace_back("B");
    const Eigen::Index offset_row = with_offset ? 2 : -1;

    struct Block {
        std::size_t anchor;
        ChannelLayout layout;
        std::vector<std::size_t> free;
        Eigen::Index theta_start;
        Eigen::Index eta_start;
    };
    std::vector<Block> blocks;
    Eigen::Index eta_dim = 0;
    for (std::size_t k : out.anchor_order) {
        const ChannelLayout layout{channel[k].size(), topology.anchor(k).sight};
        const ChannelPrior* cp = priors ? priors->channel_prior(k) : nullptr;
        Block b{k, layout, free_indices(layout, cp, options.model), static_cast<Eigen::Index>(out.labels.size()),
                eta_dim};
        for (std::size_t i : b.free) {
            out.labels.push_back("a" + std::to_string(k) + (layout.is_bias(i) ? ".b" : ".alpha")
                                 + std::to_string(layout.path_of(i) + 1));
        }
        eta_dim += 2 * static_cast<Eigen::Index>(layout.paths);
        blocks.push_back(std::move(b));
    }
    const auto theta_dim = static_cast<Eigen::Index>(out.labels.size());

    Eigen::MatrixXd j_eta = Eigen::MatrixXd::Zero(eta_dim, eta_dim);
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(theta_dim, eta_dim);
    for (const Block& b : blocks) {
        const auto n = static_cast<Eigen::Index>(2 * b.layout.paths);
        j_eta.block(b.eta_start, b.eta_start, n, n) = psi_block(channel[b.anchor], waveform, noise_psd);
        const Vec2 q = topology.direction(b.anchor);
        for (std::size_t j = 0; j < b.layout.paths; ++j) {
            const Eigen::Index tau_col = b.eta_start + 2 * static_cast<Eigen::Index>(j);
            t(0, tau_col) = q.x() / kC;
            t(1, tau_col) = q.y() / kC;
            if (with_offset) t(offset_row, tau_col) = 1.0 / kC;
        }
        for (std::size_t a = 0; a < b.free.size(); ++a) {
            t(b.theta_start + static_cast<Eigen::Index>(a), b.eta_start + eta_column(b.layout, b.free[a])) = 1.0 / kC;
        }
    }
    out.info = t * j_eta * t.transpose();

    if (priors) {
        out.info.topLeftCorner<2, 2>() += priors->position;
        if (with_offset) out.info(offset_row, offset_row) += priors->offset;
        for (const Block& b : blocks) {
            const ChannelPrior* cp = priors->channel_prior(b.anchor);
            if (!cp || cp->is_zero()) continue;
            const Vec2 q = topology.direction(b.anchor);
            out.info.topLeftCorner<2, 2>() += cp->distance * q * q.transpose();
            for (std::size_t a = 0; a < b.free.size(); ++a) {
                const Eigen::Index ia = b.theta_start + static_cast<Eigen::Index>(a);
                const Vec2 cross = q * cp->distance_kappa_at(b.free[a]);
                out.info.block<2, 1>(0, ia) += cross;
                out.info.block<1, 2>(ia, 0) += cross.transpose();
                for (std::size_t c = 0; c < b.free.size(); ++c) {
                    out.info(ia, b.theta_start + static_cast<Eigen::Index>(c)) += cp->kappa_at(b.free[a], b.free[c]);
                }
            }
        }
    }
    out.info = 0.5 * (out.info + out.info.transpose());
    return out;
}

PocDetail poc_detail(const AnchorChannel& channel, const Waveform& waveform)
{
    PocDetail out;
    if (channel.paths.empty()) throw InvalidChannel("overlap coefficient of an empty channel");
    out.cluster_size = first_contiguous_cluster(channel, waveform.duration());
    const auto n = static_cast<Eigen::Index>(out.cluster_size);
    if (n == 1) return out;

    // Amplitude-free information of the first cluster in the order
    // (tau_1, alpha_1, ..., tau_n, alpha_n), scaled to unit diagonal.
    const double s_tau = 1.0 / std::sqrt(waveform.curvature() * waveform.energy());
    const double s_amp = 1.0 / std::sqrt(waveform.energy());
    Eigen::MatrixXd m(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double bi = channel.paths[static_cast<std::size_t>(i)].bias_m;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double lag = (bi - channel.paths[static_cast<std::size_t>(j)].bias_m) / kC;
            const AutocorrelationDerivatives d = waveform.autocorrelation_derivatives(lag);
            m(2 * i, 2 * j) = d.negated_second * s_tau * s_tau;
            m(2 * i, 2 * j + 1) = d.first * s_tau * s_amp;
            m(2 * j + 1, 2 * i) = m(2 * i, 2 * j + 1);
            m(2 * i + 1, 2 * j + 1) = waveform.autocorrelation(lag) * s_amp * s_amp;
        }
    }
    const Eigen::Index r = 2 * n - 1;
    const Eigen::MatrixXd upsilon = m.bottomRightCorner(r, r);
    const Eigen::VectorXd t = m.block(1, 0, r, 1);

    double chi = 0.0;
    const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(r);
    Eigen::LLT<Eigen::MatrixXd> llt(upsilon);
    bool ok = llt.info() == Eigen::Success;
    if (ok) {
        const Eigen::VectorXd piv = llt.matrixL().toDenseMatrix().diagonal();
        ok = piv.cwiseAbs2().minCoeff() > tol;
    }
    if (ok) {
        chi = t.dot(llt.solve(t));
    } else {
        // Numerically dependent delay/amplitude directions (very dense
        // clusters): project on the resolvable subspace.
        out.rank_deficient = true;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(upsilon);
        const Eigen::VectorXd& ev = eig.eigenvalues();
        const double cutoff = tol * ev.cwiseAbs().maxCoeff();
        const Eigen::VectorXd proj = eig.eigenvectors().transpose() * t;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            if (ev(i) > cutoff) chi += proj(i) * proj(i) / ev(i);
        }
    }
    if (!std::isfinite(chi)) throw NumericalError("overlap coefficient is not finite");
    out.chi = std::clamp(chi, 0.0, 1.0);
    return out;
}

double poc(const AnchorChannel& channel, const Waveform& waveform)
{
    return poc_detail(channel, waveform).chi;
}

double rii_no_prior(const AnchorChannel& channel, Sight sight, const Waveform& waveform, double noise_psd)
{
    if (sight == Sight::NLOS) return 0.0;
    if (channel.paths.empty()) throw InvalidChannel("ranging information of an empty channel");
    const double snr = path_snr(waveform, channel.paths.front().amplitude, noise_psd);
    return 2.0 * waveform.curvature() / (kC * kC) * (1.0 - poc(channel, waveform)) * snr;
}

Mat2 efim_from_ranging(std::span<const RangingInfo> ranging)
{
    Mat2 j = Mat2::Zero();
    for (const RangingInfo& r : ranging) j += r.intensity * ranging_direction_matrix(r.angle);
    return j;
}

PositionBound bound_from_ranging(std::span<const RangingInfo> ranging)
{
    PositionBound b;
    b.efim = efim_from_ranging(ranging);
    b.speb = trace_of_inverse(b.efim);
    return b;
}

double speb_closed_form(std::span<const RangingInfo> ranging)
{
    double total = 0.0;
    double cross = 0.0;
    for (const RangingInfo& a : ranging) {
        total += a.intensity;
        for (const RangingInfo& b : ranging) {
            const double s = std::sin(a.angle - b.angle);
            cross += a.intensity * b.intensity * s * s;
        }
    }
    // sin(pi) is not exactly zero, so collinear layouts leave round-off in `cross`.
    if (!(cross > 8.0 * std::numeric_limits<double>::epsilon() * total * total)) {
        throw UnlocalizableGeometry("anchor layout gives no two independent ranging directions");
    }
    return 2.0 * total / cross;
}

std::vector<RangingInfo> ranging_no_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                          const Waveform& waveform, double noise_psd)
{
    topology.validate();
    validate_channels(channel, topology);
    std::vector<RangingInfo> out(topology.size());
    for (std::size_t k = 0; k < topology.size(); ++k) {
        out[k] = {rii_no_prior(channel[k], topology.anchor(k).sight, waveform, noise_psd), topology.angle(k)};
    }
    return out;
}

PositionBound efim_position_no_prior(const NetworkTopology& topology, const MultipathChannel& channel,
                                     const Waveform& waveform, double noise_psd)
{
    const auto ranging = ranging_no_prior(topology, channel, waveform, noise_psd);
    return bound_from_ranging(ranging);
}

} // namespace wbloc
