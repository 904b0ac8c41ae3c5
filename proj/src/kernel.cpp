#include "kernid/kernel.hpp"

#include <cmath>

namespace kernid {

ExpSumKernel::ExpSumKernel(std::vector<Term> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw ConfigError("ExpSumKernel: needs at least one term");
    for (const Term& term : terms_) {
        if (!(term.amplitude > 0.0))
            throw ConfigError("ExpSumKernel: amplitudes must be strictly positive");
        if (!(term.rate >= 0.0))
            throw ConfigError("ExpSumKernel: decay rates must be non-negative");
        if (!std::isfinite(term.amplitude) || !std::isfinite(term.rate))
            throw ConfigError("ExpSumKernel: non-finite term");
    }
}

double ExpSumKernel::value(double t) const {
    double sum = 0.0;
    for (const Term& term : terms_) sum += term.amplitude * std::exp(-term.rate * t);
    return sum;
}

double ExpSumKernel::primitive(double t) const {
    double sum = 0.0;
    for (const Term& term : terms_) {
        if (term.rate == 0.0) {
            sum += term.amplitude * t;
        } else {
            sum += term.amplitude / term.rate * (1.0 - std::exp(-term.rate * t));
        }
    }
    return sum;
}

double ExpSumKernel::at_zero() const {
    double sum = 0.0;
    for (const Term& term : terms_) sum += term.amplitude;
    return sum;
}

double ExpSumKernel::alpha() const {
    double sum = 0.0;
    for (const Term& term : terms_) sum += term.amplitude * term.rate;
    return 0.5 * sum;
}

ExpSumKernel ExpSumKernel::normalized(double c) const {
    if (!(c > 0.0)) throw ConfigError("ExpSumKernel::normalized: scale must be positive");
    std::vector<Term> scaled = terms_;
    for (Term& term : scaled) {
        term.amplitude /= c;
        term.rate /= c;
    }
    return ExpSumKernel(std::move(scaled));
}

SampledKernel::SampledKernel(UniformGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (values.size() != grid.size())
        throw ConfigError("SampledKernel: sample count does not match the grid");
    if (!(values[0] > 0.0))
        throw ConfigError("SampledKernel: requires a positive value at t = 0");
}

SampledKernel sample_kernel(const ExpSumKernel& k, const UniformGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = k.value(grid.t(j));
    return SampledKernel(grid, std::move(v));
}

Signal sample_primitive(const ExpSumKernel& k, const UniformGrid& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = k.primitive(grid.t(j));
    return Signal(grid, std::move(v));
}

} // namespace kernid
