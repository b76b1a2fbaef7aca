#pragma once

// Shared helpers for the unit and acceptance tests: golden constants from the
// quadrature oracle in tests/oracles, brute-force reference computations and
// random scene generators.

#include "wbloc/channel.hpp"
#include "wbloc/constants.hpp"
#include "wbloc/geometry.hpp"
#include "wbloc/waveform.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace wbloc::test {

// Produced by tests/oracles/golden_values.py (mpmath time-domain quadrature).
namespace golden {
inline constexpr double kSigma = 5.6114941109438683e-10;
inline constexpr double kBeta = 448447517.80396618;
inline constexpr double kCurvature = 7.9393141293902273e18; // 4 pi^2 beta^2
inline constexpr double kR1ns = -0.60363639018123817;        // R(1 ns) / E
inline constexpr double kDR1ns = -393047184.51470926;        // R'(1 ns) / E
inline constexpr double kNegD2R1ns = -5.4165639346869523e18; // -R''(1 ns) / E
inline constexpr double kTail = 5.03011e-4;                  // R(T_s) / E before truncation
inline constexpr double kChi1ns = 0.48511288139536324;       // two paths 1 ns apart
inline constexpr double kInvLambda0 = 0.0056601563062592021; // c^2 / (8 pi^2 beta^2), m^2
} // namespace golden

inline bool rel_close(double a, double b, double tol)
{
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    return (a - b).norm() / std::max(a.norm(), b.norm());
}

// Composite Simpson rule on [a, b] with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n)
{
    const double h = (b - a) / n;
    double sum = f(a) + f(b);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

// Unnormalized order-2 Gaussian derivative pulse and its time derivative.
inline double mexican_hat(double t, double sigma)
{
    const double x = t / sigma;
    return (x * x - 1.0) * std::exp(-0.5 * x * x);
}
inline double mexican_hat_rate(double t, double sigma)
{
    const double x = t / sigma;
    return (3.0 * x - x * x * x) * std::exp(-0.5 * x * x) / sigma;
}

// Information block of a multipath channel computed by direct quadrature of
// the signal derivatives (tau_l, alpha_l / c), unit-energy pulse of the given
// sigma. Independent of the library's closed-form autocorrelation.
inline Eigen::MatrixXd psi_by_quadrature(const std::vector<double>& delays, const std::vector<double>& amps,
                                         double sigma, double noise_psd)
{
    const double energy = simpson([&](double t) { return std::pow(mexican_hat(t, sigma), 2); }, -15 * sigma,
                                  15 * sigma, 20000);
    const double norm = 1.0 / std::sqrt(energy);
    const auto n = static_cast<Eigen::Index>(delays.size());
    // Derivative of r(t) = sum a_l s(t - tau_l) w.r.t. tau_l and alpha_l / c.
    auto deriv = [&](Eigen::Index p, double t) {
        const auto l = static_cast<std::size_t>(p / 2);
        if (p % 2 == 0) return -amps[l] * norm * mexican_hat_rate(t - delays[l], sigma);
        return kSpeedOfLight * norm * mexican_hat(t - delays[l], sigma);
    };
    const double lo = *std::min_element(delays.begin(), delays.end()) - 15 * sigma;
    const double hi = *std::max_element(delays.begin(), delays.end()) + 15 * sigma;
    Eigen::MatrixXd psi(2 * n, 2 * n);
    for (Eigen::Index i = 0; i < 2 * n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            psi(i, j) = psi(j, i) =
                2.0 / noise_psd * simpson([&](double t) { return deriv(i, t) * deriv(j, t); }, lo, hi, 40000);
        }
    }
    return psi;
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, std::mt19937_64& gen, double ridge = 0.1)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) a(i, j) = nd(gen);
    }
    return a * a.transpose() + ridge * Eigen::MatrixXd::Identity(n, n);
}

inline double uniform(std::mt19937_64& gen, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(gen);
}

// Random LOS channel with `paths` paths and minimum spacing `min_gap_m`.
inline AnchorChannel random_channel(std::mt19937_64& gen, std::size_t paths, Sight sight, double mean_gap_m,
                                    double min_gap_m = 0.01)
{
    AnchorChannel ch;
    double bias = sight == Sight::LOS ? 0.0 : uniform(gen, min_gap_m, 2 * mean_gap_m);
    for (std::size_t l = 0; l < paths; ++l) {
        if (l > 0) bias += min_gap_m + std::exponential_distribution<double>(1.0 / mean_gap_m)(gen);
        double amp = uniform(gen, 0.2, 1.5);
        if (gen() % 2) amp = -amp;
        ch.paths.push_back({bias, amp});
    }
    return ch;
}

// Random topology: agent at origin, anchors at distance 5..50 m.
inline NetworkTopology random_topology(std::mt19937_64& gen, std::size_t anchors, Sight sight = Sight::LOS)
{
    std::vector<Anchor> list;
    for (std::size_t k = 0; k < anchors; ++k) {
        const double a = uniform(gen, -kPi, kPi);
        const double r = uniform(gen, 5.0, 50.0);
        list.push_back({r * unit_direction(a), sight});
    }
    return NetworkTopology(Vec2::Zero(), list);
}

} // namespace wbloc::test
