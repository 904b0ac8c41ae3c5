#include "kernid/numerics.hpp"

namespace kernid {

std::vector<double> conv_trapezoid(const std::vector<double>& a,
                                   const std::vector<double>& b, double h) {
    const std::size_t count = a.size();
    std::vector<double> out(count, 0.0);
    for (std::size_t i = 1; i < count; ++i) {
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        std::size_t k = 1;
        for (; k + 3 < i; k += 4) {
            a0 += a[i - k] * b[k];
            a1 += a[i - k - 1] * b[k + 1];
            a2 += a[i - k - 2] * b[k + 2];
            a3 += a[i - k - 3] * b[k + 3];
        }
        double sum = (a0 + a1) + (a2 + a3);
        for (; k < i; ++k) sum += a[i - k] * b[k];
        sum += 0.5 * (a[i] * b[0] + a[0] * b[i]);
        out[i] = h * sum;
    }
    return out;
}

std::vector<double> cumulative_trapezoid(const std::vector<double>& v, double h) {
    std::vector<double> out(v.size(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        acc += 0.5 * h * (v[i - 1] + v[i]);
        out[i] = acc;
    }
    return out;
}

} // namespace kernid
