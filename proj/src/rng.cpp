#include "wbloc/rng.hpp"

#include "wbloc/constants.hpp"
#include "wbloc/error.hpp"

#include <cmath>

namespace wbloc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

} // namespace

PhiloxBlock philox4x32(PhiloxBlock ctr, PhiloxKey key)
{
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint32_t cell, std::uint32_t replication)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      counter_{0u, 0u, replication, cell}
{
}

std::uint32_t RandomStream::next_u32()
{
    if (used_ == 4) {
        buffer_ = philox4x32(counter_, key_);
        if (++counter_[0] == 0) ++counter_[1];
        used_ = 0;
    }
    return buffer_[static_cast<std::size_t>(used_++)];
}

double RandomStream::uniform()
{
    const std::uint64_t a = next_u32() >> 5; // 27 bits
    const std::uint64_t b = next_u32() >> 6; // 26 bits
    return (static_cast<double>((a << 26) | b) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal()
{
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double theta = 2.0 * kPi * uniform();
    spare_normal_ = r * std::sin(theta);
    has_spare_normal_ = true;
    return r * std::cos(theta);
}

double RandomStream::exponential(double rate)
{
    if (!(rate > 0.0)) throw ConfigError("exponential rate must be positive");
    return -std::log(uniform()) / rate;
}

double RandomStream::gamma(double shape, double scale)
{
    if (!(shape > 0.0) || !(scale > 0.0)) throw ConfigError("gamma shape and scale must be positive");
    if (shape < 1.0) {
        // Boost to shape + 1, then scale down by U^(1/shape).
        const double g = gamma(shape + 1.0, 1.0);
        return scale * g * std::pow(uniform(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze method.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = 0.0;
        double v = 0.0;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform();
        if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
    }
}

double RandomStream::nakagami(double m, double spread)
{
    if (!(m >= 0.5)) throw ConfigError("Nakagami shape m must be at least 0.5");
    if (spread == 0.0) return 0.0;
    return std::sqrt(gamma(m, spread / m));
}

double RandomStream::sign()
{
    return (next_u32() & 1u) ? 1.0 : -1.0;
}

} // namespace wbloc
