#include "wbloc/waveform.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>
#include <string>

namespace wbloc {

namespace {

// Physicists' Hermite polynomials H_0..H_kmax at u.
std::vector<double> hermite(int kmax, double u)
{
    std::vector<double> h(static_cast<std::size_t>(kmax) + 1);
    h[0] = 1.0;
    if (kmax >= 1) h[1] = 2.0 * u;
    for (int k = 1; k < kmax; ++k) h[k + 1] = 2.0 * u * h[k] - 2.0 * k * h[k - 1];
    return h;
}

double factorial(int n)
{
    return std::tgamma(static_cast<double>(n) + 1.0);
}

// Squared Gaussian-derivative shape in units of sigma: H_n(x / sqrt2)^2 e^{-x^2}.
double shape_energy_density(int order, double x)
{
    const double h = hermite(order, x / std::numbers::sqrt2).back();
    return h * h * std::exp(-x * x);
}

double simpson(int order, double upper, int panels)
{
    const double h = upper / panels;
    double acc = shape_energy_density(order, 0.0) + shape_energy_density(order, upper);
    for (int i = 1; i < panels; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * shape_energy_density(order, i * h);
    }
    return acc * h / 3.0;
}

void check_positive(double v, const char* what)
{
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidWaveform(std::string(what) + " must be positive and finite");
    }
}

} // namespace

Waveform Waveform::gaussian_derivative(int order, double sigma_s, double support_s, double energy)
{
    if (order < 0 || order > 20) throw InvalidWaveform("Gaussian derivative order must be in [0, 20]");
    check_positive(sigma_s, "pulse sigma");
    check_positive(support_s, "pulse support");
    check_positive(energy, "pulse energy");

    Waveform w;
    w.family_ = PulseFamily::GaussianDerivative;
    w.order_ = order;
    w.sigma_ = sigma_s;
    w.duration_ = support_s;
    w.energy_ = energy;
    w.beta_ = std::sqrt((2.0 * order + 1.0) / (8.0 * kPi * kPi * sigma_s * sigma_s));
    w.r0_hermite_ = hermite(2 * order, 0.0).back();
    // Energy of the unit-amplitude n-th derivative.
    const double unit_energy = std::sqrt(kPi) * sigma_s * std::pow(2.0 * sigma_s, -2.0 * order)
                               * factorial(2 * order) / factorial(order);
    w.amplitude_ = std::sqrt(energy / unit_energy);
    return w;
}

Waveform Waveform::gaussian_derivative_with_support(int order, double support_s, double energy_fraction,
                                                    double energy)
{
    if (!(energy_fraction > 0.0 && energy_fraction < 1.0)) {
        throw InvalidWaveform("energy fraction must lie in (0, 1)");
    }
    check_positive(support_s, "pulse support");
    if (order < 0 || order > 20) throw InvalidWaveform("Gaussian derivative order must be in [0, 20]");

    // Solve for the half-width X (in units of sigma) holding the requested
    // share of the energy, then sigma = support / (2 X).
    const double upper = 12.0 + 3.0 * std::sqrt(static_cast<double>(order));
    const double total = simpson(order, upper, 20000);
    double lo = 0.0;
    double hi = upper;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (simpson(order, mid, 8000) / total < energy_fraction) lo = mid;
        else hi = mid;
    }
    const double half_width = 0.5 * (lo + hi);
    return gaussian_derivative(order, 0.5 * support_s / half_width, support_s, energy);
}

const Waveform& Waveform::canonical()
{
    static const Waveform pulse = gaussian_derivative_with_support(2, 4e-9, 0.9999, 1.0);
    return pulse;
}

Waveform Waveform::sampled(std::vector<double> samples, double interval_s)
{
    check_positive(interval_s, "sample interval");
    if (samples.size() < 2) throw InvalidWaveform("sampled pulse needs at least two samples");
    for (double s : samples) {
        if (!std::isfinite(s)) throw InvalidWaveform("sampled pulse contains non-finite values");
    }
    const std::size_t n = samples.size();

    // Zero-padded spectrum: gives the linear autocorrelation exactly and a
    // dense frequency grid for the bandwidth quadrature.
    std::size_t m = 1;
    while (m < 16 * n) m <<= 1;
    std::vector<double> padded(m, 0.0);
    std::copy(samples.begin(), samples.end(), padded.begin());
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, padded);

    double num = 0.0;
    double den = 0.0;
    std::vector<std::complex<double>> power(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double p = std::norm(spectrum[k]);
        power[k] = p;
        // Signed frequency index on [-m/2, m/2).
        const double idx = k < m / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(m);
        const double f = idx / (static_cast<double>(m) * interval_s);
        num += f * f * p;
        den += p;
    }
    if (!(den > 0.0)) throw InvalidWaveform("sampled pulse has zero energy");

    std::vector<double> corr;
    fft.inv(corr, power);
    auto lags = std::make_shared<std::vector<double>>(n + 1, 0.0);
    for (std::size_t k = 0; k < n; ++k) (*lags)[k] = interval_s * corr[k];
    (*lags)[n] = 0.0;

    Waveform w;
    w.family_ = PulseFamily::Sampled;
    w.interval_ = interval_s;
    w.duration_ = static_cast<double>(n) * interval_s;
    w.beta_ = std::sqrt(num / den);
    w.energy_ = (*lags)[0];
    if (1.0 / interval_s < kMinOversampling * w.beta_) {
        std::ostringstream msg;
        msg << "sampled pulse is undersampled: rate " << 1.0 / interval_s << " Hz below " << kMinOversampling
            << " x effective bandwidth " << w.beta_ << " Hz";
        throw InvalidWaveform(msg.str());
    }
    w.samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
    w.lag_products_ = std::move(lags);
    return w;
}

Waveform Waveform::from_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidWaveform("cannot open pulse file " + path.string());
    std::vector<double> times;
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        double t = 0.0;
        double v = 0.0;
        if (!(fields >> t >> v)) {
            if (times.empty()) continue; // header row
            throw InvalidWaveform(path.string() + ":" + std::to_string(lineno) + ": expected time_s,amplitude");
        }
        times.push_back(t);
        values.push_back(v);
    }
    if (times.size() < 2) throw InvalidWaveform(path.string() + ": fewer than two samples");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    for (std::size_t i = 1; i < times.size(); ++i) {
        if (std::abs(times[i] - times[i - 1] - dt) > 1e-6 * dt) {
            throw InvalidWaveform(path.string() + ": time grid is not uniform at row " + std::to_string(i + 1));
        }
    }
    return sampled(std::move(values), dt);
}

Waveform Waveform::with_energy(double energy) const
{
    check_positive(energy, "pulse energy");
    if (family_ == PulseFamily::GaussianDerivative) {
        return gaussian_derivative(order_, sigma_, duration_, energy);
    }
    const double k = std::sqrt(energy / energy_);
    std::vector<double> s = *samples_;
    for (double& v : s) v *= k;
    return sampled(std::move(s), interval_);
}

double Waveform::curvature() const noexcept
{
    return 4.0 * kPi * kPi * beta_ * beta_;
}

double Waveform::autocorrelation(double lag) const
{
    const double a = std::abs(lag);
    if (a >= duration_) return 0.0;
    if (family_ == PulseFamily::GaussianDerivative) {
        const double u = a / (2.0 * sigma_);
        const double h = hermite(2 * order_, u).back();
        return energy_ * h * std::exp(-u * u) / r0_hermite_;
    }
    const double x = a / interval_;
    const auto k = static_cast<std::size_t>(x);
    const double frac = x - static_cast<double>(k);
    const auto& c = *lag_products_;
    return (1.0 - frac) * c[k] + frac * c[k + 1];
}

AutocorrelationDerivatives Waveform::autocorrelation_derivatives(double lag) const
{
    if (std::abs(lag) >= duration_) return {};
    if (family_ == PulseFamily::GaussianDerivative) {
        const double u = lag / (2.0 * sigma_);
        const auto h = hermite(2 * order_ + 2, u);
        const double g = energy_ * std::exp(-u * u) / r0_hermite_;
        const double hs = 2.0 * sigma_;
        return {-h[2 * order_ + 1] * g / hs, -h[2 * order_ + 2] * g / (hs * hs)};
    }
    const double dt = interval_;
    const double rp = autocorrelation(lag + dt);
    const double rm = autocorrelation(lag - dt);
    const double r0 = autocorrelation(lag);
    return {(rp - rm) / (2.0 * dt), -(rp - 2.0 * r0 + rm) / (dt * dt)};
}

double Waveform::value(double t) const
{
    if (family_ == PulseFamily::GaussianDerivative) {
        if (std::abs(t) >= 0.5 * duration_) return 0.0;
        const double r = std::numbers::sqrt2 * sigma_;
        const double h = hermite(order_, t / r).back();
        const double sign = order_ % 2 ? -1.0 : 1.0;
        return amplitude_ * sign * std::pow(r, -order_) * h * std::exp(-t * t / (2.0 * sigma_ * sigma_));
    }
    if (t < 0.0 || t >= duration_) return 0.0;
    return (*samples_)[static_cast<std::size_t>(t / interval_)];
}

namespace {

void check_noise(double noise_psd)
{
    if (!(noise_psd > 0.0) || !std::isfinite(noise_psd)) {
        throw InvalidNoise("noise spectral density must be positive and finite");
    }
}

} // namespace

double path_snr(const Waveform& w, double amplitude, double noise_psd)
{
    check_noise(noise_psd);
    return amplitude * amplitude * w.energy() / noise_psd;
}

double amplitude_for_snr(const Waveform& w, double snr_linear, double noise_psd)
{
    check_noise(noise_psd);
    if (!(snr_linear >= 0.0)) throw InvalidChannel("SNR must be non-negative");
    return std::sqrt(snr_linear * noise_psd / w.energy());
}

} // namespace wbloc
