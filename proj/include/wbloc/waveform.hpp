#pragma once

#include <filesystem>
#include <memory>
#include <vector>

namespace wbloc {

enum class PulseFamily { GaussianDerivative, Sampled };

// Autocorrelation slope R'(lag) and negated curvature -R''(lag).
struct AutocorrelationDerivatives {
    double first = 0.0;
    double negated_second = 0.0;
};

// A real, finite-duration, energy-normalizable pulse s(t).
//
// Times are in seconds. The autocorrelation R(lag) = int s(t) s(t - lag) dt is
// even, equals energy() at lag 0 and is exactly zero for |lag| >= duration().
// For the Gaussian-derivative family the closed form is used inside the
// support and truncated outside it; the truncated tail of the canonical pulse
// is about 5e-4 of R(0).
class Waveform {
public:
    // n-th derivative of a Gaussian with standard deviation `sigma_s`,
    // scaled to the requested energy and truncated at `support_s`.
    static Waveform gaussian_derivative(int order, double sigma_s, double support_s, double energy = 1.0);

    // As above, with sigma chosen so that `energy_fraction` of the pulse
    // energy lies within a centred window of width `support_s`.
    static Waveform gaussian_derivative_with_support(int order, double support_s,
                                                     double energy_fraction = 0.9999,
                                                     double energy = 1.0);

    // Order-2 Gaussian derivative with 99.99% of its energy inside 4 ns
    // (sigma = 0.561149411 ns, effective bandwidth 448.4475 MHz), unit energy.
    static const Waveform& canonical();

    // Uniformly sampled pulse on [0, samples.size() * interval_s). Samples
    // outside that window are zero.
    static Waveform sampled(std::vector<double> samples, double interval_s);

    // Two-column CSV (time_s, amplitude) with a uniform time grid.
    static Waveform from_csv(const std::filesystem::path& path);

    // Same shape rescaled to the requested energy.
    Waveform with_energy(double energy) const;

    PulseFamily family() const noexcept { return family_; }
    double duration() const noexcept { return duration_; }
    double energy() const noexcept { return energy_; }
    double effective_bandwidth() const noexcept { return beta_; }
    // 4 pi^2 beta^2: curvature of the normalized autocorrelation at zero lag.
    double curvature() const noexcept;
    int order() const noexcept { return order_; }
    double sigma() const noexcept { return sigma_; }

    double autocorrelation(double lag) const;
    AutocorrelationDerivatives autocorrelation_derivatives(double lag) const;

    // Pulse value at time t (Gaussian family is centred at t = 0).
    double value(double t) const;

private:
    Waveform() = default;

    PulseFamily family_ = PulseFamily::GaussianDerivative;
    double duration_ = 0.0;
    double energy_ = 0.0;
    double beta_ = 0.0;
    // Gaussian family
    int order_ = 0;
    double sigma_ = 0.0;
    double amplitude_ = 0.0;
    double r0_hermite_ = 0.0; // H_{2n}(0)
    // Sampled family
    double interval_ = 0.0;
    std::shared_ptr<const std::vector<double>> samples_;
    std::shared_ptr<const std::vector<double>> lag_products_; // dt * sum s_i s_{i+m}
};

// Per-path SNR alpha^2 E_s / N0.
double path_snr(const Waveform& w, double amplitude, double noise_psd);

// Amplitude giving the requested linear SNR.
double amplitude_for_snr(const Waveform& w, double snr_linear, double noise_psd);

// Minimum ratio of sampling rate to effective bandwidth accepted for
// sampled pulses.
inline constexpr double kMinOversampling = 16.0;

} // namespace wbloc
