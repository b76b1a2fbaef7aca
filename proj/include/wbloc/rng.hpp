#pragma once

#include <array>
#include <cstdint>

namespace wbloc {

using PhiloxBlock = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds.
PhiloxBlock philox4x32(PhiloxBlock counter, PhiloxKey key);

// Counter-based random stream. The (seed, cell, replication) triple fully
// determines the sequence, so results do not depend on thread scheduling.
// All distributions are implemented here so output is identical across
// standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint32_t cell = 0, std::uint32_t replication = 0);

    std::uint32_t next_u32();
    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform();
    double normal();
    double exponential(double rate);
    // Gamma with the given shape and scale (mean shape * scale).
    double gamma(double shape, double scale);
    // Nakagami magnitude with shape m and second moment `spread`.
    double nakagami(double m, double spread);
    // +1 or -1 with equal probability.
    double sign();

private:
    PhiloxKey key_;
    PhiloxBlock counter_;
    PhiloxBlock buffer_{};
    int used_ = 4;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

} // namespace wbloc
