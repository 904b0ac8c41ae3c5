#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kernid/signal.hpp"

namespace kernid {

enum class Method { first_kind, second_kind, two_initial };

/// Regularization and smoothing knobs for the identification stage.
struct InverseConfig {
    double lavrentiev_eps = 0.1;
    double tikhonov_lambda = 0.01;
    int average_halfwidth = 3;
    Method method = Method::first_kind;

    void validate() const;
};

/// Outcome of one identification run on the measurement grid.
/// M_rec[0] = 0 always; error fields are filled when ground truth is known.
struct ReconstructionReport {
    Signal M_rec;
    Signal N_rec;
    std::optional<double> rel_l2_M;
    std::optional<double> rel_l2_N;
    InverseConfig config;
    std::uint64_t seed = 0;
};

/// Lower-triangular discretization of u -> integral g(t-s) u(s) ds by
/// trapezoidal product integration on the grid of g.
class ConvolutionOperator {
public:
    explicit ConvolutionOperator(const Signal& g);

    const UniformGrid& grid() const { return grid_; }
    std::size_t rows() const { return grid_.size(); }
    double at(std::size_t r, std::size_t c) const { return a_[r * rows() + c]; }

    std::vector<double> apply(const std::vector<double>& u) const;

private:
    UniformGrid grid_;
    std::vector<double> a_; // row-major, entries above the diagonal are zero
};

inline ConvolutionOperator build_convolution_operator(const Signal& g) {
    return ConvolutionOperator(g);
}

/// First-kind route: rearranges the flux identity to
///   (1/2) (g * M)(t) = (g * K)(t) - (pi/2) Yf(t)
/// and solves the Lavrentiev-regularized triangular system
///   (eps * h * I + (1/2) A) m = b
/// by forward substitution, with m[0] pinned to zero. The regularization
/// parameter is quoted in units of the measurement step h, so eps = h adds
/// a diagonal of h^2; see the notes in the repository README.
Signal identify_M_first_kind(const Signal& K_meas, const Signal& Yf_meas,
                             const Signal& g, double eps);

/// Differentiated second-kind route:
///   g(0) M(t) + (g' * M)(t) = 2 g(0) K(t) + 2 (g' * K)(t) - pi * Yf'(t),
/// solved by forward substitution; g' and Yf' by numerical_derivative.
/// Requires g(0) != 0.
Signal identify_M_second_kind(const Signal& K_meas, const Signal& Yf_meas,
                              const Signal& g);

/// Two-profile route: solves gamma N(t) = y_eta'(t) + (y_xi * N)(t) as a
/// discrete second-kind system. Rejects |gamma| below 1e-12.
Signal identify_N_two_initial(const Signal& y_xi, const Signal& y_eta, double gamma);

/// Regularized differentiation: minimizes |V u - M|^2 + lambda^2 |u|^2 where
/// V integrates by the trapezoid rule. V weights the alternating (Nyquist)
/// band of u by near-zero singular values, so that band is unobservable;
/// for lambda > 0 the returned signal is the smooth representative of the
/// solution family, obtained by pairwise (1,2,1)/4 smoothing of the
/// normal-equations solution. With lambda = 0 the triangular system is
/// solved directly, pinning u[0] to the one-sided derivative of M at 0.
Signal identify_N_tikhonov(const Signal& M_rec, double lambda);

/// Post-solve cleanup for the triangular first-kind reconstructions.
/// Trapezoid-weight Volterra systems of the first kind propagate a weakly
/// damped alternating parasitic mode, and a jump of the data inside a
/// single grid cell deconvolves into an isolated impulse defect. Pairwise
/// (1,2,1)/4 smoothing removes the first, a short symmetric-window median
/// the second; both reproduce smooth monotone inputs essentially unchanged.
Signal stabilize_reconstruction(const Signal& s);

/// Centered window average of 2*halfwidth+1 samples; windows are truncated
/// and renormalized near the ends.
Signal moving_average(const Signal& s, int halfwidth);

/// Least-squares projection onto non-decreasing signals (pool adjacent
/// violators). Optional cleanup for reconstructions of the increasing M.
Signal monotone_projection(const Signal& s);

/// Pull the first samples toward a known value at t = 0, with weights
/// 1, 2/3, 1/3 on the first three samples.
Signal blend_initial_value(const Signal& s, double known_at_zero);

/// Central differences inside, one-sided second-order stencils at the ends.
Signal numerical_derivative(const Signal& s);

/// ||a - b|| / ||b|| over the samples with t >= t_min.
double relative_l2_error(const Signal& a, const Signal& b, double t_min = 0.0);

} // namespace kernid
