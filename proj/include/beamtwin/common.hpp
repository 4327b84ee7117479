#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace beamtwin {

inline constexpr double kPi = 3.14159265358979323846;

// Raised when an argument violates an operation's precondition.
struct InvalidInputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a config file is malformed or internally inconsistent.
struct InvalidConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a real-measurement or enumeration budget would be exceeded.
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an object is used before it is ready (e.g. untrained twin).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an input is technically valid but statistically unusable.
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wrap an angle into (-pi, pi].
inline double wrap_phase(double x) {
    double r = std::fmod(x + kPi, 2.0 * kPi);
    if (r <= 0.0) r += 2.0 * kPi;
    return r - kPi;
}

inline double to_db(double linear) { return 10.0 * std::log10(linear); }
inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

// splitmix64 finalizer; used to derive decorrelated per-stream seeds from one
// experiment seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// FNV-1a 64-bit, stable across platforms (std::hash is not).
inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Full-precision decimal form that round-trips to the same double.
std::string format_double(double v);

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace beamtwin
