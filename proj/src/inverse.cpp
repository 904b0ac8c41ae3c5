#include "kernid/inverse.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace kernid {

void InverseConfig::validate() const {
    if (!(lavrentiev_eps > 0.0)) throw ConfigError("InverseConfig: lavrentiev_eps must be > 0");
    if (!(tikhonov_lambda >= 0.0)) throw ConfigError("InverseConfig: tikhonov_lambda must be >= 0");
    if (average_halfwidth < 0) throw ConfigError("InverseConfig: average_halfwidth must be >= 0");
}

ConvolutionOperator::ConvolutionOperator(const Signal& g) : grid_(g.grid) {
    const std::size_t n = g.size();
    const double h = grid_.step;
    a_.assign(n * n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        a_[i * n + 0] = 0.5 * h * g.values[i];
        for (std::size_t k = 1; k < i; ++k) a_[i * n + k] = h * g.values[i - k];
        a_[i * n + i] = 0.5 * h * g.values[0];
    }
}

std::vector<double> ConvolutionOperator::apply(const std::vector<double>& u) const {
    if (u.size() != rows()) throw ConfigError("ConvolutionOperator: size mismatch");
    const std::size_t n = rows();
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += a_[i * n + k] * u[k];
        out[i] = acc;
    }
    return out;
}

Signal identify_M_first_kind(const Signal& K_meas, const Signal& Yf_meas,
                             const Signal& g, double eps) {
    if (!(eps > 0.0)) throw ConfigError("identify_M_first_kind: eps must be positive");
    require_same_grid(K_meas, Yf_meas, "identify_M_first_kind");
    require_same_grid(K_meas, g, "identify_M_first_kind");

    const ConvolutionOperator A(g);
    const std::size_t n = A.rows();
    const std::vector<double> AK = A.apply(K_meas.values);

    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) b[i] = AK[i] - 0.5 * M_PI * Yf_meas.values[i];

    // (eps*h I + A/2) m = b, forward substitution. eps is quoted in units of
    // the measurement step so its strength is commensurate with the
    // trapezoid weights h*g of the operator.
    const double reg = eps * K_meas.grid.step;
    std::vector<double> m(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double acc = b[i];
        for (std::size_t k = 0; k < i; ++k) acc -= 0.5 * A.at(i, k) * m[k];
        m[i] = acc / (reg + 0.5 * A.at(i, i));
    }
    m[0] = 0.0;
    return Signal(K_meas.grid, std::move(m));
}

Signal identify_M_second_kind(const Signal& K_meas, const Signal& Yf_meas,
                              const Signal& g) {
    require_same_grid(K_meas, Yf_meas, "identify_M_second_kind");
    require_same_grid(K_meas, g, "identify_M_second_kind");
    const double g0 = g.values.front();
    if (g0 == 0.0)
        throw NumericError("identify_M_second_kind: second-kind route requires f'(0) != 0");

    const Signal gprime = numerical_derivative(g);
    const Signal Yd = numerical_derivative(Yf_meas);
    const ConvolutionOperator Agp(gprime);
    const std::size_t n = Agp.rows();
    const std::vector<double> AK = Agp.apply(K_meas.values);

    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i)
        rhs[i] = 2.0 * g0 * K_meas.values[i] + 2.0 * AK[i] - M_PI * Yd.values[i];

    std::vector<double> m(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        double acc = rhs[i];
        for (std::size_t k = 0; k < i; ++k) acc -= Agp.at(i, k) * m[k];
        m[i] = acc / (g0 + Agp.at(i, i));
    }
    m[0] = 0.0;
    return Signal(K_meas.grid, std::move(m));
}

Signal identify_N_two_initial(const Signal& y_xi, const Signal& y_eta, double gamma) {
    require_same_grid(y_xi, y_eta, "identify_N_two_initial");
    if (std::abs(gamma) < 1e-12)
        throw NumericError("identify_N_two_initial: degenerate profile, gamma is (near) zero");

    const Signal dyeta = numerical_derivative(y_eta);
    const ConvolutionOperator A(y_xi);
    const std::size_t n = A.rows();

    // gamma N(t) - (y_xi * N)(t) = y_eta'(t)
    std::vector<double> rec(n, 0.0);
    rec[0] = dyeta.values[0] / gamma;
    for (std::size_t i = 1; i < n; ++i) {
        double acc = dyeta.values[i];
        for (std::size_t k = 0; k < i; ++k) acc += A.at(i, k) * rec[k];
        rec[i] = acc / (gamma - A.at(i, i));
    }
    for (double v : rec)
        if (!std::isfinite(v))
            throw NumericError("identify_N_two_initial: reconstruction diverged");
    return Signal(y_xi.grid, std::move(rec));
}

namespace {

// (1,2,1)/4 smoothing; annihilates the alternating mode exactly.
std::vector<double> pairwise_smooth(const std::vector<double>& v) {
    std::vector<double> out = v;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = 0.25 * (v[i - 1] + 2.0 * v[i] + v[i + 1]);
    if (n >= 2) out[n - 1] = 0.5 * (v[n - 2] + v[n - 1]);
    return out;
}

} // namespace

Signal identify_N_tikhonov(const Signal& M_rec, double lambda) {
    if (lambda < 0.0) throw ConfigError("identify_N_tikhonov: lambda must be >= 0");
    const std::size_t n = M_rec.size();
    if (n < 3) throw ConfigError("identify_N_tikhonov: needs at least three samples");
    const double h = M_rec.grid.step;

    if (lambda == 0.0) {
        // Plain deconvolution of the trapezoid integrator. The first row of
        // the integrator vanishes, so u[0] is fixed by the one-sided
        // derivative of M and the rest follows by forward substitution.
        std::vector<double> u(n, 0.0);
        u[0] = (-3.0 * M_rec.values[0] + 4.0 * M_rec.values[1] - M_rec.values[2]) / (2.0 * h);
        double interior = 0.0; // sum of u[1..i-1]
        for (std::size_t i = 1; i < n; ++i) {
            u[i] = 2.0 * (M_rec.values[i] / h - 0.5 * u[0] - interior);
            interior += u[i];
        }
        return Signal(M_rec.grid, std::move(u));
    }

    Eigen::MatrixXd V = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    for (std::size_t i = 1; i < n; ++i) {
        V(i, 0) = 0.5 * h;
        for (std::size_t k = 1; k < i; ++k) V(i, k) = h;
        V(i, i) = 0.5 * h;
    }
    const Eigen::Map<const Eigen::VectorXd> m(M_rec.values.data(),
                                              static_cast<Eigen::Index>(n));
    Eigen::MatrixXd normal = V.transpose() * V;
    normal.diagonal().array() += lambda * lambda;
    const Eigen::VectorXd u = normal.llt().solve(V.transpose() * m);

    std::vector<double> out(u.data(), u.data() + n);
    return Signal(M_rec.grid, pairwise_smooth(out));
}

Signal stabilize_reconstruction(const Signal& s) {
    std::vector<double> v = pairwise_smooth(s.values);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    std::vector<double> out = v;
    std::vector<double> window;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t w = std::min({std::ptrdiff_t{3}, i, n - 1 - i});
        if (w == 0) continue;
        window.assign(v.begin() + (i - w), v.begin() + (i + w + 1));
        std::nth_element(window.begin(), window.begin() + w, window.end());
        out[static_cast<std::size_t>(i)] = window[static_cast<std::size_t>(w)];
    }
    return Signal(s.grid, std::move(out));
}

Signal moving_average(const Signal& s, int halfwidth) {
    if (halfwidth < 0) throw ConfigError("moving_average: halfwidth must be >= 0");
    if (halfwidth == 0) return s;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(s.size());
    const std::ptrdiff_t w = halfwidth;
    std::vector<double> out(s.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - w);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n - 1, i + w);
        double acc = 0.0;
        for (std::ptrdiff_t k = lo; k <= hi; ++k) acc += s.values[static_cast<std::size_t>(k)];
        out[static_cast<std::size_t>(i)] = acc / static_cast<double>(hi - lo + 1);
    }
    return Signal(s.grid, std::move(out));
}

Signal monotone_projection(const Signal& s) {
    const std::size_t n = s.size();
    std::vector<double> level(n), weight(n);
    std::vector<std::size_t> len(n);
    std::size_t blocks = 0;
    for (std::size_t i = 0; i < n; ++i) {
        level[blocks] = s.values[i];
        weight[blocks] = 1.0;
        len[blocks] = 1;
        ++blocks;
        while (blocks > 1 && level[blocks - 2] > level[blocks - 1]) {
            const double w = weight[blocks - 2] + weight[blocks - 1];
            level[blocks - 2] =
                (weight[blocks - 2] * level[blocks - 2] + weight[blocks - 1] * level[blocks - 1]) / w;
            weight[blocks - 2] = w;
            len[blocks - 2] += len[blocks - 1];
            --blocks;
        }
    }
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t b = 0; b < blocks; ++b)
        out.insert(out.end(), len[b], level[b]);
    return Signal(s.grid, std::move(out));
}

Signal blend_initial_value(const Signal& s, double known_at_zero) {
    Signal out = s;
    const double shift = known_at_zero - s.values[0];
    const double w[3] = {1.0, 2.0 / 3.0, 1.0 / 3.0};
    for (std::size_t j = 0; j < 3 && j < out.size(); ++j) out.values[j] += w[j] * shift;
    return out;
}

Signal numerical_derivative(const Signal& s) {
    const std::size_t n = s.size();
    if (n < 3) throw ConfigError("numerical_derivative: needs at least three samples");
    const double h = s.grid.step;
    std::vector<double> d(n);
    d[0] = (-3.0 * s.values[0] + 4.0 * s.values[1] - s.values[2]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i)
        d[i] = (s.values[i + 1] - s.values[i - 1]) / (2.0 * h);
    d[n - 1] = (3.0 * s.values[n - 1] - 4.0 * s.values[n - 2] + s.values[n - 3]) / (2.0 * h);
    return Signal(s.grid, std::move(d));
}

double relative_l2_error(const Signal& a, const Signal& b, double t_min) {
    require_same_grid(a, b, "relative_l2_error");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (a.grid.t(j) < t_min - 1e-12) continue;
        const double d = a.values[j] - b.values[j];
        num += d * d;
        den += b.values[j] * b.values[j];
    }
    if (den == 0.0)
        throw NumericError("relative_l2_error: reference vanishes on the requested window");
    return std::sqrt(num / den);
}

} // namespace kernid
