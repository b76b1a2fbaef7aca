#pragma once

#include <cmath>
#include <limits>
#include <numbers>

namespace wbloc {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s
inline constexpr double kPi = std::numbers::pi;

// Information value meaning "parameter known exactly". Parameters carrying
// it are eliminated from information matrices rather than added as a number.
inline constexpr double kInfiniteInformation = std::numeric_limits<double>::infinity();

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace wbloc
