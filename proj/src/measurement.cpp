#include "kernid/measurement.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

namespace kernid {

void MeasurementSet::validate() const {
    const Signal* first = nullptr;
    for (const auto* s : {&K, &Yf, &y_xi, &y_eta}) {
        if (!s->has_value()) continue;
        if (!first) {
            first = &**s;
        } else if (!first->grid.compatible_with((*s)->grid)) {
            throw ConfigError("MeasurementSet: signals on different grids");
        }
    }
    if (!first) throw ConfigError("MeasurementSet: needs at least one signal");
}

Signal downsample(const Signal& fine, double rate) {
    if (!(rate > 0.0)) throw ConfigError("downsample: rate must be positive");
    const double coarse_step = 1.0 / rate;
    const double ratio = coarse_step / fine.grid.step;
    const double stride_d = std::round(ratio);
    if (stride_d < 1.0 || std::abs(ratio - stride_d) > 1e-12 * ratio)
        throw ConfigError("downsample: fine step does not divide the measurement step");
    const std::size_t stride = static_cast<std::size_t>(stride_d);
    if (fine.grid.intervals % stride != 0)
        throw ConfigError("downsample: horizon is not a whole number of measurement steps");

    std::vector<double> picked;
    picked.reserve(fine.grid.intervals / stride + 1);
    for (std::size_t j = 0; j <= fine.grid.intervals; j += stride)
        picked.push_back(fine.values[j]);
    return Signal(UniformGrid(coarse_step, fine.grid.intervals / stride), std::move(picked));
}

namespace {

double unit_open(std::uint64_t bits) {
    // 53-bit mantissa in [0, 1)
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

Signal add_noise(const Signal& s, double level, std::uint64_t seed, NoiseKind kind) {
    if (!(level >= 0.0)) throw ConfigError("add_noise: level must be non-negative");
    std::mt19937_64 rng(seed);
    Signal out = s;
    if (kind == NoiseKind::uniform) {
        for (double& v : out.values) {
            const double u = 2.0 * unit_open(rng()) - 1.0;
            v *= 1.0 + level * u;
        }
    } else {
        // Box-Muller, one draw per sample, cosine branch.
        for (double& v : out.values) {
            const double u1 = unit_open(rng());
            const double u2 = unit_open(rng());
            const double z = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * M_PI * u2);
            v *= 1.0 + level * z;
        }
    }
    return out;
}

void write_signal(const Signal& s, const std::string& path) {
    std::ofstream file(path);
    if (!file) throw IoError("write_signal: cannot open '" + path + "' for writing");
    file << "t,value\n";
    char buf[64];
    for (std::size_t j = 0; j < s.size(); ++j) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", s.grid.t(j), s.values[j]);
        file << buf;
    }
    if (!file) throw IoError("write_signal: failed writing '" + path + "'");
}

Signal read_signal(const std::string& path) {
    std::ifstream file(path);
    if (!file) throw IoError("read_signal: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(file, line)) throw IoError("read_signal: '" + path + "' is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value")
        throw IoError("read_signal: '" + path + "' has an unexpected header (want 't,value')");

    std::vector<double> ts, vs;
    std::size_t line_no = 1;
    while (std::getline(file, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw IoError("read_signal: '" + path + "' line " + std::to_string(line_no) +
                          ": expected 't,value'");
        double t = 0.0, v = 0.0;
        const char* tb = line.data();
        auto tr = std::from_chars(tb, tb + comma, t);
        auto vr = std::from_chars(tb + comma + 1, tb + line.size(), v);
        if (tr.ec != std::errc() || vr.ec != std::errc())
            throw IoError("read_signal: '" + path + "' line " + std::to_string(line_no) +
                          ": malformed number");
        ts.push_back(t);
        vs.push_back(v);
    }
    if (ts.size() < 2) throw IoError("read_signal: '" + path + "' holds fewer than two samples");
    if (std::abs(ts[0]) > 1e-12)
        throw IoError("read_signal: '" + path + "' does not start at t = 0");

    const double step = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    if (!(step > 0.0)) throw IoError("read_signal: '" + path + "' time column is not increasing");
    for (std::size_t j = 1; j < ts.size(); ++j) {
        const double d = ts[j] - ts[j - 1];
        if (d <= 0.0)
            throw IoError("read_signal: '" + path + "' time column is not increasing");
        if (std::abs(d - step) > 1e-9 * step)
            throw IoError("read_signal: '" + path + "' time step is not uniform");
    }
    return Signal(UniformGrid(step, ts.size() - 1), std::move(vs));
}

} // namespace kernid
