#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"
#include "wbloc/linalg.hpp"
#include "wbloc/priors.hpp"

#include <cmath>
#include <limits>

namespace wbloc {

namespace {

struct GaussHermite {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights; // normalized to sum to one
};

// Golub-Welsch for the weight exp(-x^2).
GaussHermite gauss_hermite(std::size_t n)
{
    const auto m = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index k = 1; k < m; ++k) {
        jac(k, k - 1) = jac(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jac);
    GaussHermite gh;
    gh.nodes = eig.eigenvalues();
    gh.weights = eig.eigenvectors().row(0).transpose().cwiseAbs2();
    return gh;
}

double log_erfc(double z)
{
    if (z < 20.0) return std::log(std::erfc(z));
    // Asymptotic expansion; erfc underflows well before this matters.
    const double z2 = z * z;
    return -z2 - std::log(z * std::sqrt(kPi)) + std::log1p(-0.5 / z2 + 0.75 / (z2 * z2));
}

class ChannelLogDensity {
public:
    ChannelLogDensity(const ChannelModelParams& params, Sight sight, const PriorEstimatorOptions& options)
        : params_(params), sight_(sight), bias_(options.bias), gh_(gauss_hermite(options.quadrature_nodes))
    {
    }

    // x = (distance, channel parameters in ChannelLayout order).
    double operator()(const Eigen::VectorXd& x) const
    {
        const ChannelLayout layout{params_.path_count, sight_};
        std::vector<double> biases(layout.paths, 0.0);
        std::vector<double> amps(layout.paths, 0.0);
        for (std::size_t j = 0; j < layout.paths; ++j) {
            if (layout.has_bias(j)) biases[j] = x(static_cast<Eigen::Index>(layout.bias_index(j)) + 1);
            amps[j] = x(static_cast<Eigen::Index>(layout.amplitude_index(j)) + 1);
        }

        double log_b = 0.0;
        double prev = 0.0;
        for (std::size_t j = 0; j < layout.paths; ++j) {
            if (layout.has_bias(j)) log_b += log_increment(biases[j] - prev);
            prev = biases[j];
        }

        const double mean_db = mean_rss_db(params_, x(0));
        if (params_.shadowing_db == 0.0) return log_b + log_amplitudes(biases, amps, mean_db);

        // log E_P[prod_l g(alpha_l | P)] by Gauss-Hermite over the shadowing.
        std::vector<double> terms(static_cast<std::size_t>(gh_.nodes.size()));
        double peak = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < gh_.nodes.size(); ++i) {
            const double p = mean_db + std::numbers::sqrt2 * params_.shadowing_db * gh_.nodes(i);
            terms[static_cast<std::size_t>(i)] = std::log(gh_.weights(i)) + log_amplitudes(biases, amps, p);
            peak = std::max(peak, terms[static_cast<std::size_t>(i)]);
        }
        double acc = 0.0;
        for (double t : terms) acc += std::exp(t - peak);
        return log_b + peak + std::log(acc);
    }

private:
    double log_increment(double gap) const
    {
        if (bias_.kind == BiasDensity::Kind::Gaussian) {
            const double z = (gap - bias_.mean_m) / bias_.stddev_m;
            return -0.5 * z * z - std::log(bias_.stddev_m * std::sqrt(2.0 * kPi));
        }
        // Exponential convolved with a zero-mean Gaussian of width w.
        const double r = params_.arrival_rate_hz / kSpeedOfLight;
        const double w = bias_.smoothing_m;
        return std::log(r / 2.0) + 0.5 * r * (r * w * w - 2.0 * gap)
               + log_erfc((r * w * w - gap) / (std::numbers::sqrt2 * w));
    }

    double log_amplitudes(const std::vector<double>& biases, const std::vector<double>& amps, double rss_db) const
    {
        const auto spread = power_delay_profile(params_, biases, rss_db);
        const double m = params_.nakagami_m;
        double acc = 0.0;
        for (std::size_t j = 0; j < amps.size(); ++j) {
            const double a = std::abs(amps[j]);
            acc += std::log(2.0) - std::lgamma(m) + m * std::log(m / spread[j]) + (2.0 * m - 1.0) * std::log(a)
                   - m * a * a / spread[j];
        }
        return acc;
    }

    ChannelModelParams params_;
    Sight sight_;
    BiasDensity bias_;
    GaussHermite gh_;
};

Eigen::VectorXd draw_parameters(const ChannelModelParams& params, double distance, Sight sight,
                                const BiasDensity& bias, RandomStream& rng)
{
    const ChannelLayout layout{params.path_count, sight};
    Eigen::VectorXd x(static_cast<Eigen::Index>(layout.dimension()) + 1);
    x(0) = distance;
    const double rate = params.arrival_rate_hz / kSpeedOfLight;
    std::vector<double> biases(layout.paths, 0.0);
    double b = 0.0;
    for (std::size_t j = 0; j < layout.paths; ++j) {
        if (layout.has_bias(j)) {
            b += bias.kind == BiasDensity::Kind::Gaussian ? bias.mean_m + bias.stddev_m * rng.normal()
                                                         : rng.exponential(rate) + bias.smoothing_m * rng.normal();
            x(static_cast<Eigen::Index>(layout.bias_index(j)) + 1) = b;
        }
        biases[j] = b;
    }
    const double rss = mean_rss_db(params, distance) + params.shadowing_db * rng.normal();
    const auto spread = power_delay_profile(params, biases, rss);
    for (std::size_t j = 0; j < layout.paths; ++j) {
        x(static_cast<Eigen::Index>(layout.amplitude_index(j)) + 1)
            = rng.sign() * rng.nakagami(params.nakagami_m, spread[j]);
    }
    return x;
}

} // namespace

PriorEstimate estimate_channel_prior_fim(const ChannelModelParams& params, double distance_m, Sight sight,
                                         const PriorEstimatorOptions& options, RandomStream& rng)
{
    params.validate();
    if (!(distance_m > 0.0)) throw DegenerateGeometry("prior estimation at non-positive distance");
    if (options.samples < 2) throw ConfigError("prior estimation needs at least two samples");
    if (options.quadrature_nodes < 1) throw ConfigError("quadrature needs at least one node");
    if (options.bias.kind == BiasDensity::Kind::SmoothedExponential && !(options.bias.smoothing_m > 0.0)) {
        throw ConfigError("exponential bias density needs a positive smoothing width");
    }
    if (options.bias.kind == BiasDensity::Kind::Gaussian && !(options.bias.stddev_m > 0.0)) {
        throw ConfigError("Gaussian bias density needs a positive standard deviation");
    }

    const ChannelLogDensity log_density(params, sight, options);
    const auto dim = static_cast<Eigen::Index>(ChannelLayout{params.path_count, sight}.dimension()) + 1;
    const double step = std::cbrt(std::numeric_limits<double>::epsilon());

    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(dim, dim);
    PriorEstimate out;
    Eigen::VectorXd score(dim);
    for (std::size_t s = 0; s < options.samples; ++s) {
        Eigen::VectorXd x = draw_parameters(params, distance_m, sight, options.bias, rng);
        bool finite = std::isfinite(log_density(x));
        for (Eigen::Index i = 0; i < dim && finite; ++i) {
            const double h = step * std::max(std::abs(x(i)), 1e-6);
            const double keep = x(i);
            x(i) = keep + h;
            const double up = log_density(x);
            x(i) = keep - h;
            const double down = log_density(x);
            x(i) = keep;
            score(i) = (up - down) / (2.0 * h);
            finite = std::isfinite(score(i));
        }
        if (!finite) {
            ++out.excluded;
            continue;
        }
        ++out.used;
        const Eigen::MatrixXd outer = score * score.transpose();
        const Eigen::MatrixXd delta = outer - mean;
        mean += delta / static_cast<double>(out.used);
        m2 += delta.cwiseProduct(outer - mean);
    }
    if (out.used < 2) throw NumericalError("prior estimation: fewer than two usable draws");

    const auto n = static_cast<double>(out.used);
    out.standard_error = (m2 / (n - 1.0) / n).cwiseSqrt();
    out.information = project_psd(mean, &out.clipped);
    out.prior.distance = out.information(0, 0);
    out.prior.distance_kappa = out.information.block(0, 1, 1, dim - 1);
    out.prior.kappa = out.information.bottomRightCorner(dim - 1, dim - 1);
    return out;
}

} // namespace wbloc
