#pragma once

#include <stdexcept>
#include <string>

namespace wbloc {

// Failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
    Config,             // malformed input, unknown keys, out-of-range values
    DegenerateGeometry, // coincident agent/anchor, unlocalizable anchor layout
    Numerical,          // singular nuisance block, non-finite intermediate
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct InvalidWaveform : ConfigError {
    using ConfigError::ConfigError;
};

struct InvalidChannel : ConfigError {
    using ConfigError::ConfigError;
};

struct InvalidPrior : ConfigError {
    using ConfigError::ConfigError;
};

struct InvalidNoise : ConfigError {
    using ConfigError::ConfigError;
};

struct DegenerateGeometry : Error {
    explicit DegenerateGeometry(const std::string& what) : Error(ErrorKind::DegenerateGeometry, what) {}
};

struct UnlocalizableGeometry : DegenerateGeometry {
    using DegenerateGeometry::DegenerateGeometry;
};

struct NumericalError : Error {
    explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct SingularNuisance : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace wbloc
