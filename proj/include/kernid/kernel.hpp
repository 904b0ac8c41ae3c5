#pragma once

#include <vector>

#include "kernid/signal.hpp"

namespace kernid {

/// Relaxation kernel as a sum of decaying exponentials,
///   N(t) = sum_k c_k * exp(-tau_k * t),
/// with c_k > 0 and tau_k >= 0, so that N(0) = sum_k c_k > 0.
/// A zero rate is allowed and contributes a constant component.
class ExpSumKernel {
public:
    struct Term {
        double amplitude; // c_k
        double rate;      // tau_k
    };

    explicit ExpSumKernel(std::vector<Term> terms);

    const std::vector<Term>& terms() const { return terms_; }

    /// N(t) for t >= 0.
    double value(double t) const;

    /// M(t) = integral of N over [0, t]; a tau_k = 0 term contributes c_k * t.
    double primitive(double t) const;

    /// N(0) = sum of amplitudes.
    double at_zero() const;

    /// -N'(0)/2 = (1/2) * sum_k c_k * tau_k.
    double alpha() const;

    /// Time-rescaled kernel N1(t) = (1/c) * N(t/c): amplitudes and rates
    /// both divided by c. With c = N(0) the result satisfies N1(0) = 1.
    ExpSumKernel normalized(double c) const;

private:
    std::vector<Term> terms_;
};

/// Kernel held as samples on a uniform grid starting at t = 0.
struct SampledKernel {
    UniformGrid grid;
    std::vector<double> values;

    SampledKernel(UniformGrid g, std::vector<double> v);
};

/// Pointwise evaluation of an exponential-sum kernel on a grid.
SampledKernel sample_kernel(const ExpSumKernel& k, const UniformGrid& grid);

/// Samples of the primitive M on a grid (analytic, not quadrature).
Signal sample_primitive(const ExpSumKernel& k, const UniformGrid& grid);

} // namespace kernid
