#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kernid/kernel.hpp"
#include "kernid/signal.hpp"

namespace kernid {

/// One sine mode z_n of the memory equation on [0, pi]:
///   z_n'(t) = -n^2 * (N * z_n)(t),  z_n(0) = 1,
/// sampled together with its derivative on a uniform grid.
/// zprime is always evaluated from the right-hand side, never by differencing.
struct ModeSolution {
    int index = 0;
    UniformGrid grid;
    std::vector<double> z;
    std::vector<double> zprime;
};

/// Sine coefficients xi_n, n = 1..size(), of an initial profile
/// xi(x) = sum_n xi_n sin(n x).
struct InitialCondition {
    std::vector<double> coefficients;

    explicit InitialCondition(std::vector<double> coeffs);
    std::size_t max_index() const { return coefficients.size(); }
};

/// Boundary drive f(t) = integral of g over [0, t], represented by g on the
/// working grid. f(0) = 0 by construction; f0_prime = g(0) is kept so the
/// differentiated identification route can check it is nonzero.
struct BoundaryInput {
    Signal g;
    double f0_prime = 0.0;

    explicit BoundaryInput(Signal g_samples)
        : g(std::move(g_samples)), f0_prime(g.values.front()) {}
};

/// Coefficients xi_n = 1/n of the ramp profile (pi - x)/2.
InitialCondition ramp_coefficients(int n_max);

/// Second profile with coefficients xi_n / n^2.
InitialCondition eta_from_xi(const InitialCondition& xi);

/// gamma = sum_n (-1)^n xi_n / n over the truncation.
double gamma_functional(const InitialCondition& xi);

/// Mode solver for exponential-sum kernels. The mode system
///   z' = -n^2 sum_k c_k w_k,   w_k' = -tau_k w_k + z
/// is linear with constant coefficients, so a classical 4th-order one-step
/// update is applied as a precomputed per-step transfer matrix. The internal
/// substep is refined automatically: each grid step is subdivided so that
/// n * h_sub <= 0.01, well inside the stability requirement n * h_sub <= 0.5;
/// the tighter bound keeps the accumulated phase error of high modes below
/// 1e-6 over horizons of a few time units.
ModeSolution solve_mode_expsum(const ExpSumKernel& k, int n, const UniformGrid& grid);

/// Mode solver for kernels known only through samples: product-trapezoidal
/// quadrature of the memory convolution combined with an implicit-trapezoid
/// time step. The base scheme is second order; by default it is run on
/// half- and quarter-step refinements of the grid (kernel values filled in
/// by cubic interpolation) and extrapolated, which removes the h^2 error
/// term and brings high modes (n up to ~50 at h = 1e-3) within 1e-4 of the
/// exponential-sum solver. `GridRefinement::none` runs the raw scheme on
/// the given grid.
enum class GridRefinement { none, two_grid };

ModeSolution solve_mode_general(const SampledKernel& k, int n, const UniformGrid& grid,
                                GridRefinement refinement = GridRefinement::two_grid);

/// Closed-form pieces used to accelerate the alternating mode series.
/// For a kernel with N(0) = s^2 the mode derivatives behave like
///   z_n'(t)/n ~ -s * exp(-a t) * sin(n s t),  a = -N'(0) / (2 N(0)),
/// so subtracting this from every term leaves corrections of order 1/n and
/// turns the slowly convergent series into sawtooth/parabola closed forms
/// plus a fast-converging remainder. With N(0) = 1 this reduces to the
/// familiar exp(-alpha t) sawtooth with alpha = -N'(0)/2.
struct SawtoothAccel {
    double speed = 1.0;        // s = sqrt(N(0))
    double damping = 0.0;      // a = -N'(0) / (2 N(0))
    bool phase_correction = true; // subtract the O(1/n) frequency-shift term too

    static SawtoothAccel for_kernel(const ExpSumKernel& k);
};

/// K(t) = sum_{n=1..n_max} (-1)^n z_n'(t) / n^2, the negated flux response
/// to the ramp initial profile. Direct truncation when accel is empty,
/// sawtooth-accelerated otherwise.
Signal compute_K(std::span<const ModeSolution> modes, int n_max,
                 const std::optional<SawtoothAccel>& accel = std::nullopt);

/// Boundary flux produced by an initial profile xi:
///   y_xi(t) = -sum_n (-1)^n (xi_n / n) z_n'(t).
Signal flux_from_initial(const InitialCondition& xi, std::span<const ModeSolution> modes);

/// Boundary flux produced by the drive f (with zero initial profile):
///   (pi/2) Yf(t) = integral g(t-s) (K(s) - M(s)/2) ds,
/// where M is the kernel primitive on the same grid.
Signal flux_from_boundary(const BoundaryInput& g, const Signal& K, const Signal& Mprim);

struct SeriesFluxOptions {
    int n_max = 400;
    std::size_t output_stride = 1; // evaluate every k-th grid point
};

/// Independent route to the same flux, summing per-mode convolutions:
///   (pi/2) Yf(t) = -1/2 (N * F)(t) + sum_n (-1)^n n^-2 (g * z_n')(t),
/// with F the running integral of g. Used to cross-check flux_from_boundary.
/// With output_stride > 1 the result lives on the decimated grid.
Signal flux_from_boundary_series(const BoundaryInput& g, std::span<const ModeSolution> modes,
                                 const ExpSumKernel& k, const SeriesFluxOptions& opts);

/// Boundary flux produced by the companion profile eta (coefficients
/// xi_n / n^2 of the ORIGINAL xi):
///   y_eta(t) = sum_n (-1)^n (xi_n / n) (N * z_n)(t).
/// The mode equation gives (N * z_n) = -z_n' / n^2 exactly, which is what
/// is evaluated here; the equivalence is covered by tests.
Signal flux_y_eta(const InitialCondition& xi, std::span<const ModeSolution> modes);

/// Scaled residual of the uniform mode-derivative bound:
///   n * max_j | zprime[j]/n + exp(-alpha t_j) sin(n t_j) |.
/// Bounded uniformly in n for kernels with N(0) = 1.
double mode_asymptotic_residual(const ModeSolution& mode, double alpha);

} // namespace kernid
