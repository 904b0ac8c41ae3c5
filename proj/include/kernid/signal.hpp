#pragma once

#include <cstddef>
#include <vector>

#include "kernid/errors.hpp"

namespace kernid {

/// Uniform time grid t_j = j*step, j = 0..intervals.
struct UniformGrid {
    double step = 0.0;
    std::size_t intervals = 0;

    UniformGrid() = default;
    UniformGrid(double h, std::size_t m) : step(h), intervals(m) {
        if (!(h > 0.0)) throw ConfigError("UniformGrid: step must be positive");
        if (m < 1) throw ConfigError("UniformGrid: need at least one interval");
    }

    std::size_t size() const { return intervals + 1; }
    double t(std::size_t j) const { return static_cast<double>(j) * step; }
    double duration() const { return static_cast<double>(intervals) * step; }

    bool compatible_with(const UniformGrid& other, double rel_tol = 1e-12) const {
        if (intervals != other.intervals) return false;
        const double d = step - other.step;
        return (d < 0 ? -d : d) <= rel_tol * step;
    }
};

/// Real-valued function sampled on a uniform grid.
struct Signal {
    UniformGrid grid;
    std::vector<double> values;

    Signal() = default;
    Signal(UniformGrid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size())
            throw ConfigError("Signal: sample count does not match the grid");
    }

    static Signal zeros(const UniformGrid& g) {
        return Signal(g, std::vector<double>(g.size(), 0.0));
    }

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t j) const { return values[j]; }
    double& operator[](std::size_t j) { return values[j]; }
};

inline void require_same_grid(const Signal& a, const Signal& b, const char* where) {
    if (!a.grid.compatible_with(b.grid))
        throw ConfigError(std::string(where) + ": signals live on different grids");
}

} // namespace kernid
