#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "kernid/signal.hpp"

namespace kernid {

enum class NoiseKind { uniform, gaussian };

/// Bundle of synthetic observations on one measurement grid.
struct MeasurementSet {
    std::optional<Signal> K;
    std::optional<Signal> Yf;
    std::optional<Signal> y_xi;
    std::optional<Signal> y_eta;
    double noise_level = 0.0;
    std::uint64_t seed = 0;
    std::string input_descriptor;

    void validate() const;
};

/// Keep every k-th sample so that the output step is 1/rate. The fine step
/// must divide the measurement step to within 1e-12 relative; no
/// interpolation is performed.
Signal downsample(const Signal& fine, double rate);

/// Multiplicative relative noise: v -> v * (1 + level * u), with u drawn
/// i.i.d. from a seeded mt19937_64. For `uniform`, u is uniform on [-1, 1]
/// (bits mapped as (x >> 11) * 2^-53, scaled); for `gaussian`, u is a
/// Box-Muller standard normal. Identical seeds reproduce identical signals
/// on any platform. The sample at t = 0 is corrupted like any other.
Signal add_noise(const Signal& s, double level, std::uint64_t seed,
                 NoiseKind kind = NoiseKind::uniform);

/// Text format shared by every tool input/output: a `t,value` header, then
/// one decimal pair per line, uniform time step. Values are written with 17
/// significant digits so the round trip is exact.
void write_signal(const Signal& s, const std::string& path);
Signal read_signal(const std::string& path);

} // namespace kernid
