#include "knn/poly.hpp"

#include <cmath>
#include <stdexcept>

namespace knn::poly {

namespace {

double at(const Coeffs& p, std::size_t i) { return i < p.size() ? p[i] : 0.0; }

}  // namespace

Coeffs multiply(const Coeffs& a, const Coeffs& b, std::size_t order) {
    Coeffs out(order + 1, 0.0);
    for (std::size_t i = 0; i < a.size() && i <= order; ++i) {
        if (a[i] == 0.0)
            continue;
        for (std::size_t j = 0; j < b.size() && i + j <= order; ++j)
            out[i + j] += a[i] * b[j];
    }
    return out;
}

Coeffs power(const Coeffs& p, double alpha, std::size_t order) {
    const double p0 = at(p, 0);
    if (p0 == 0.0)
        throw std::domain_error("poly::power: zero constant term");
    if (p0 < 0.0 && alpha != std::floor(alpha))
        throw std::domain_error("poly::power: negative constant term with fractional exponent");
    Coeffs y(order + 1, 0.0);
    y[0] = std::pow(p0, alpha);
    for (std::size_t m = 1; m <= order; ++m) {
        double acc = 0.0;
        for (std::size_t i = 1; i <= m; ++i) {
            const double pi = at(p, i);
            if (pi != 0.0)
                acc += ((alpha + 1.0) * static_cast<double>(i) - static_cast<double>(m)) * pi *
                       y[m - i];
        }
        y[m] = acc / (static_cast<double>(m) * p0);
    }
    return y;
}

Coeffs revert(const Coeffs& q, std::size_t order) {
    if (at(q, 0) == 0.0)
        throw std::domain_error("poly::revert: zero leading coefficient");
    Coeffs r(order + 1, 0.0);
    for (std::size_t m = 0; m <= order; ++m) {
        const Coeffs qm = power(q, -static_cast<double>(m + 1), m);
        r[m] = qm[m] / static_cast<double>(m + 1);
    }
    return r;
}

Coeffs compose(const Coeffs& a, const Coeffs& b, std::size_t order) {
    if (at(b, 0) != 0.0)
        throw std::domain_error("poly::compose: inner series must vanish at zero");
    Coeffs out(order + 1, 0.0);
    Coeffs bpow{1.0};
    for (std::size_t n = 0; n < a.size() && n <= order; ++n) {
        for (std::size_t i = 0; i < bpow.size() && i <= order; ++i)
            out[i] += a[n] * bpow[i];
        bpow = multiply(bpow, b, order);
    }
    return out;
}

double evaluate(const Coeffs& p, double x) {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it)
        acc = acc * x + *it;
    return acc;
}

}  // namespace knn::poly
