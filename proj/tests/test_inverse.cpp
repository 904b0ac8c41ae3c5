#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "kernid/experiment.hpp"
#include "kernid/inverse.hpp"
#include "kernid/numerics.hpp"

using namespace kernid;

namespace {

const UniformGrid kMeas(0.1, 50);

Signal sampled(double (*f)(double), const UniformGrid& g = kMeas) {
    std::vector<double> v(g.size());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = f(g.t(j));
    return Signal(g, std::move(v));
}

// noiseless forward data for the reference configuration, computed once
const ForwardData& forward_data() {
    static const ForwardData fwd = [] {
        ExperimentConfig cfg;
        return run_forward(cfg);
    }();
    return fwd;
}

Signal first_kind_route(const Signal& K, const Signal& Yf, const Signal& g, double eps,
                        int halfwidth = 0) {
    Signal m = moving_average(stabilize_reconstruction(identify_M_first_kind(K, Yf, g, eps)),
                              halfwidth);
    m.values[0] = 0.0;
    return m;
}

} // namespace

TEST_CASE("convolution operator: constants and linear kernels") {
    const Signal one = sampled(+[](double) { return 1.0; });
    const ConvolutionOperator A(one);
    const std::vector<double> t = A.apply(std::vector<double>(51, 1.0));
    for (std::size_t i = 0; i < 51; ++i)
        CHECK(t[i] == doctest::Approx(kMeas.t(i)).epsilon(1e-12));

    const Signal lin = sampled(+[](double x) { return x; });
    const ConvolutionOperator B(lin);
    const std::vector<double> q = B.apply(std::vector<double>(51, 1.0));
    for (std::size_t i = 0; i < 51; ++i)
        CHECK(q[i] == doctest::Approx(0.5 * kMeas.t(i) * kMeas.t(i)).epsilon(1e-12));

    const std::vector<double> zero = A.apply(std::vector<double>(51, 0.0));
    for (double v : zero) CHECK(v == 0.0);
}

TEST_CASE("first kind: triangular solve satisfies its own discrete system") {
    const auto& fwd = forward_data();
    const double eps = 1e-2;
    const Signal m = identify_M_first_kind(fwd.K, fwd.Yf, fwd.g, eps);

    const ConvolutionOperator A(fwd.g);
    const std::vector<double> AK = A.apply(fwd.K.values);
    const std::vector<double> Am = A.apply(m.values);
    const double reg = eps * kMeas.step;
    for (std::size_t i = 1; i < 51; ++i) {
        const double lhs = reg * m.values[i] + 0.5 * Am[i];
        const double rhs = AK[i] - 0.5 * M_PI * fwd.Yf.values[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("first kind: noiseless round trip on the reference kernel") {
    const auto& fwd = forward_data();
    const Signal m = first_kind_route(fwd.K, fwd.Yf, fwd.g, 1e-3);
    CHECK(m.values[0] == 0.0);
    CHECK(relative_l2_error(m, fwd.truth_M) <= 0.01);
}

TEST_CASE("first kind: wave-limit data recover M = t before the front") {
    ExperimentConfig cfg;
    cfg.kernel_terms = {{1.0, 0.0}};
    const ForwardData fwd = run_forward(cfg);
    const Signal m = first_kind_route(fwd.K, fwd.Yf, fwd.g, 1e-3);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double t = m.grid.t(j);
        if (t > M_PI - 0.2) break;
        num += (m.values[j] - t) * (m.values[j] - t);
        den += t * t;
    }
    CHECK(std::sqrt(num / den) <= 0.01);
}

TEST_CASE("first kind: regularization limits and argument checks") {
    const auto& fwd = forward_data();
    const Signal m = identify_M_first_kind(fwd.K, fwd.Yf, fwd.g, 1e3);
    double peak = 0.0;
    for (double v : m.values) peak = std::max(peak, std::abs(v));
    CHECK(peak <= 1e-2 * 0.45); // huge eps drives the reconstruction to zero

    CHECK_THROWS_AS(identify_M_first_kind(fwd.K, fwd.Yf, fwd.g, 0.0), ConfigError);
    CHECK_THROWS_AS(identify_M_first_kind(fwd.K, fwd.Yf, fwd.g, -1.0), ConfigError);
    const Signal other = Signal::zeros(UniformGrid(0.1, 40));
    CHECK_THROWS_AS(identify_M_first_kind(other, fwd.Yf, fwd.g, 0.1), ConfigError);
}

TEST_CASE("first kind: error decreases with eps down to the discretization floor") {
    const auto& fwd = forward_data();
    double previous = 1e9;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        const double err = relative_l2_error(first_kind_route(fwd.K, fwd.Yf, fwd.g, eps),
                                             fwd.truth_M);
        CHECK(err <= previous * 1.10);
        previous = err;
    }
}

TEST_CASE("first kind: linear in the data, consistent under kernel scaling") {
    const auto& fwd = forward_data();
    Signal K2 = fwd.K, Y2 = fwd.Yf;
    for (double& v : K2.values) v *= 3.0;
    for (double& v : Y2.values) v *= 3.0;
    const Signal m1 = identify_M_first_kind(fwd.K, fwd.Yf, fwd.g, 1e-2);
    const Signal m3 = identify_M_first_kind(K2, Y2, fwd.g, 1e-2);
    for (std::size_t j = 0; j < m1.size(); ++j)
        CHECK(m3.values[j] == doctest::Approx(3.0 * m1.values[j]).epsilon(1e-10));

    ExperimentConfig doubled;
    for (auto& t : doubled.kernel_terms) t.amplitude *= 2.0;
    const ForwardData f2 = run_forward(doubled);
    const Signal r1 = first_kind_route(fwd.K, fwd.Yf, fwd.g, 1e-3);
    const Signal r2 = first_kind_route(f2.K, f2.Yf, f2.g, 1e-3);
    Signal r1x2 = r1;
    for (double& v : r1x2.values) v *= 2.0;
    CHECK(relative_l2_error(r2, r1x2) <= 0.02);
}

TEST_CASE("second kind and two-profile solves satisfy their discrete systems") {
    const auto& fwd = forward_data();

    const Signal m = identify_M_second_kind(fwd.K, fwd.Yf, fwd.g);
    const Signal gprime = numerical_derivative(fwd.g);
    const Signal Yd = numerical_derivative(fwd.Yf);
    const ConvolutionOperator Agp(gprime);
    const std::vector<double> AK = Agp.apply(fwd.K.values);
    const std::vector<double> Am = Agp.apply(m.values);
    const double g0 = fwd.g.values[0];
    for (std::size_t i = 1; i < m.size(); ++i) {
        const double lhs = g0 * m.values[i] + Am[i];
        const double rhs = 2.0 * g0 * fwd.K.values[i] + 2.0 * AK[i] - M_PI * Yd.values[i];
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }

    const Signal n = identify_N_two_initial(fwd.y_xi, fwd.y_eta, fwd.gamma);
    const Signal dyeta = numerical_derivative(fwd.y_eta);
    const ConvolutionOperator Ax(fwd.y_xi);
    const std::vector<double> An = Ax.apply(n.values);
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double lhs = fwd.gamma * n.values[i] - An[i];
        CHECK(lhs == doctest::Approx(dyeta.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("moving average: identity, constants, alternating window") {
    const Signal s = sampled(+[](double x) { return x * x; });
    CHECK(moving_average(s, 0).values == s.values);

    Signal flat(kMeas, std::vector<double>(51, 3.14));
    const Signal f = moving_average(flat, 4);
    for (double v : f.values) CHECK(v == doctest::Approx(3.14).epsilon(1e-15));

    std::vector<double> alt(51);
    for (std::size_t j = 0; j < alt.size(); ++j) alt[j] = (j % 2 == 0) ? 1.0 : -1.0;
    const Signal a = moving_average(Signal(kMeas, alt), 1);
    for (std::size_t j = 1; j + 1 < a.size(); ++j)
        CHECK(std::abs(a.values[j]) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(a.values[0] == 0.0);
    CHECK(a.values[50] == 0.0);

    // commutes with scaling
    Signal scaled = s;
    for (double& v : scaled.values) v *= -2.5;
    const Signal lhs = moving_average(scaled, 2);
    const Signal rhs = moving_average(s, 2);
    for (std::size_t j = 0; j < lhs.size(); ++j)
        CHECK(lhs.values[j] == doctest::Approx(-2.5 * rhs.values[j]).epsilon(1e-13));
}

TEST_CASE("stabilize_reconstruction is neutral on smooth monotone data") {
    const Signal m = sampled(+[](double x) { return 0.3 * x + 0.05 * x * x; });
    const Signal s = stabilize_reconstruction(m);
    // interior: only the O(h^2) curvature bias of the pairing remains
    for (std::size_t j = 1; j + 1 < s.size(); ++j)
        CHECK(std::abs(s.values[j] - m.values[j]) <= 3e-4);
    CHECK(s.values[0] == m.values[0]);
    // the end sample carries the pairing's h/2 * slope bias
    CHECK(std::abs(s.values[50] - m.values[50]) <= 0.05 * 0.81);
}

TEST_CASE("stabilize_reconstruction clips impulses and kills alternating tails") {
    const Signal m = sampled(+[](double x) { return 0.3 * x + 0.05 * x * x; });
    Signal bad = m;
    bad.values[25] += 0.5;
    for (std::size_t j = 30; j < 51; ++j) bad.values[j] += ((j % 2) ? 0.05 : -0.05);
    const Signal fixed = stabilize_reconstruction(bad);
    // the impulse is reduced to the local sample range (a few slope steps)
    CHECK(std::abs(fixed.values[25] - m.values[25]) < 0.5 / 4.0);
    double tail = 0.0;
    for (std::size_t j = 32; j < 49; ++j)
        tail = std::max(tail, std::abs(fixed.values[j] - m.values[j]));
    CHECK(tail < 0.01);
}

TEST_CASE("tikhonov: exact linear input with lambda = 0") {
    const Signal m = sampled(+[](double x) { return x; });
    const Signal u = identify_N_tikhonov(m, 0.0);
    for (double v : u.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(identify_N_tikhonov(m, -0.1), ConfigError);
}

TEST_CASE("tikhonov: derivative of the exact primitive") {
    const auto& fwd = forward_data();
    const Signal n = identify_N_tikhonov(fwd.truth_M, 1e-4);
    CHECK(relative_l2_error(n, fwd.truth_N, 0.2) <= 0.05);
}

TEST_CASE("tikhonov: large lambda drives the output to zero") {
    const auto& fwd = forward_data();
    const Signal n = identify_N_tikhonov(fwd.truth_M, 1e3);
    for (double v : n.values) CHECK(std::abs(v) < 1e-3);
}

TEST_CASE("second kind: agreement with the first-kind route and exact start") {
    const auto& fwd = forward_data();
    const Signal m2 = identify_M_second_kind(fwd.K, fwd.Yf, fwd.g);
    CHECK(m2.values[0] == 0.0);

    Signal s2 = stabilize_reconstruction(m2);
    s2.values[0] = 0.0;
    const Signal s1 = first_kind_route(fwd.K, fwd.Yf, fwd.g, 1e-3);
    CHECK(relative_l2_error(s2, s1) <= 0.05);

    Signal g0 = fwd.g;
    g0.values[0] = 0.0;
    CHECK_THROWS_WITH_AS(identify_M_second_kind(fwd.K, fwd.Yf, g0),
                         doctest::Contains("f'(0)"), NumericError);
}

TEST_CASE("second kind: wave-limit data before the front") {
    ExperimentConfig cfg;
    cfg.kernel_terms = {{1.0, 0.0}};
    const ForwardData fwd = run_forward(cfg);
    Signal m = stabilize_reconstruction(identify_M_second_kind(fwd.K, fwd.Yf, fwd.g));
    m.values[0] = 0.0;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) {
        const double t = m.grid.t(j);
        if (t > M_PI - 0.2) break;
        num += (m.values[j] - t) * (m.values[j] - t);
        den += t * t;
    }
    CHECK(std::sqrt(num / den) <= 0.02);
}

TEST_CASE("two-profile route: noiseless identification and degeneracy errors") {
    const auto& fwd = forward_data();
    const Signal n = identify_N_two_initial(fwd.y_xi, fwd.y_eta, fwd.gamma);
    CHECK(relative_l2_error(n, fwd.truth_N, 0.2) <= 0.05);
    CHECK(n.values[0] == doctest::Approx(0.8).epsilon(0.03));
    for (double v : n.values) CHECK(std::isfinite(v));

    CHECK_THROWS_WITH_AS(identify_N_two_initial(fwd.y_xi, fwd.y_eta, 0.0),
                         doctest::Contains("gamma"), NumericError);
    CHECK_THROWS_AS(identify_N_two_initial(fwd.y_xi, fwd.y_eta, 1e-13), NumericError);

    // flipping the sign of the profile flips both fluxes and gamma
    Signal xi_f = fwd.y_xi, eta_f = fwd.y_eta;
    for (double& v : xi_f.values) v = -v;
    for (double& v : eta_f.values) v = -v;
    const Signal n_f = identify_N_two_initial(xi_f, eta_f, -fwd.gamma);
    for (std::size_t j = 0; j < n.size(); ++j)
        CHECK(n_f.values[j] == doctest::Approx(n.values[j]).epsilon(1e-12));
}

TEST_CASE("numerical derivative: polynomials exact, sine to truncation order") {
    const Signal lin = sampled(+[](double x) { return x; });
    for (double v : numerical_derivative(lin).values)
        CHECK(v == doctest::Approx(1.0).epsilon(1e-12));

    const Signal quad = sampled(+[](double x) { return x * x; });
    const Signal dq = numerical_derivative(quad);
    for (std::size_t j = 0; j < dq.size(); ++j)
        CHECK(dq.values[j] == doctest::Approx(2.0 * kMeas.t(j)).epsilon(1e-10));

    const Signal sine = sampled(+[](double x) { return std::sin(x); });
    const Signal ds = numerical_derivative(sine);
    double interior = 0.0;
    for (std::size_t j = 1; j + 1 < ds.size(); ++j)
        interior = std::max(interior, std::abs(ds.values[j] - std::cos(kMeas.t(j))));
    CHECK(interior <= 2e-3);
    // one-sided ends carry h^2 |f'''| / 3 <= 3.4e-3
    CHECK(std::abs(ds.values[0] - 1.0) <= 3.5e-3);
    CHECK(std::abs(ds.values[50] - std::cos(5.0)) <= 3.5e-3);

    CHECK_THROWS_AS(numerical_derivative(Signal(UniformGrid(0.1, 1), {0.0, 1.0})),
                    ConfigError);
}

TEST_CASE("relative l2 error") {
    const Signal b = sampled(+[](double) { return 1.0; });
    Signal a = b;
    CHECK(relative_l2_error(a, b) == 0.0);
    for (double& v : a.values) v *= 2.0;
    CHECK(relative_l2_error(a, b) == doctest::Approx(1.0).epsilon(1e-14));
    Signal c = b;
    for (double& v : c.values) v += 0.125;
    CHECK(relative_l2_error(c, b) == doctest::Approx(0.125).epsilon(1e-12));

    const Signal zero = Signal::zeros(kMeas);
    CHECK_THROWS_AS(relative_l2_error(b, zero), NumericError);
    CHECK(relative_l2_error(c, b, 4.0) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("monotone projection and initial-value blend") {
    Signal s(kMeas, std::vector<double>(51, 0.0));
    for (std::size_t j = 0; j < 51; ++j) s.values[j] = 0.1 * static_cast<double>(j);
    s.values[20] = 5.0; // violator
    const Signal p = monotone_projection(s);
    for (std::size_t j = 1; j < 51; ++j) CHECK(p.values[j] >= p.values[j - 1] - 1e-15);

    Signal n(kMeas, std::vector<double>(51, 1.0));
    const Signal blended = blend_initial_value(n, 1.6);
    CHECK(blended.values[0] == doctest::Approx(1.6));
    CHECK(blended.values[1] == doctest::Approx(1.4));
    CHECK(blended.values[2] == doctest::Approx(1.2));
    CHECK(blended.values[3] == 1.0);
}

TEST_CASE("inverse config validation") {
    InverseConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.lavrentiev_eps = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lavrentiev_eps = 0.1;
    cfg.tikhonov_lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.tikhonov_lambda = 0.01;
    cfg.average_halfwidth = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
