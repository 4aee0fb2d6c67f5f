#include "knn/series.hpp"

#include "knn/numerics.hpp"
#include "knn/poly.hpp"

#include <cmath>
#include <numbers>

namespace knn {

namespace {

constexpr double kSeriesCut = 1e-15;
constexpr long long kBurnIn = 10;

template <typename T>
T binomial(int n, int k) {
    T out(1);
    for (int i = 1; i <= k; ++i)
        out = out * T(n - k + i) / T(i);
    return out;
}

// B_0 .. B_n with B_1 = -1/2.
template <typename T>
std::vector<T> bernoulli_numbers(int n) {
    std::vector<T> b(n + 1, T(0));
    b[0] = T(1);
    for (int m = 1; m <= n; ++m) {
        T acc(0);
        for (int j = 0; j < m; ++j)
            acc += binomial<T>(m + 1, j) * b[j];
        b[m] = -acc / T(m + 1);
    }
    return b;
}

template <typename T>
T bernoulli_poly(int n, T x, const std::vector<T>& b) {
    T acc(0);
    T xp(1);  // x^(n-j), built from j = n downwards
    for (int j = n; j >= 0; --j) {
        acc += binomial<T>(n, j) * b[j] * xp;
        xp *= x;
    }
    return acc;
}

// Coefficients E_0..E_order of N^g Gamma(N+1)/Gamma(N+1+g) in powers of 1/N, from the
// Stirling series log Gamma(z+a) ~ (z+a-1/2) log z - z + log(2 pi)/2
//   + sum_n (-1)^(n+1) B_(n+1)(a) / (n (n+1) z^n).
template <typename T>
std::vector<T> gamma_ratio_expansion(T g, int order) {
    const auto b = bernoulli_numbers<T>(order + 1);
    std::vector<T> s(order + 1, T(0));
    for (int n = 1; n <= order; ++n) {
        const T diff = bernoulli_poly<T>(n + 1, T(1), b) - bernoulli_poly<T>(n + 1, T(1) + g, b);
        const T sign = (n % 2 == 1) ? T(1) : T(-1);
        s[n] = sign * diff / T(n * (n + 1));
    }
    std::vector<T> e(order + 1, T(0));
    e[0] = T(1);
    for (int m = 1; m <= order; ++m) {
        T acc(0);
        for (int n = 1; n <= m; ++n)
            acc += T(n) * s[n] * e[m - n];
        e[m] = acc / T(m);
    }
    return e;
}

double term_gamma_factor(long long k, long long N, double delta) {
    const double kd = static_cast<double>(k);
    const double Nd = static_cast<double>(N);
    const double r1 = gamma_ratio(kd + delta, kd);
    const double r2 = gamma_ratio(Nd + 1.0, Nd + 1.0 + delta);
    const double prod = r1 * r2;
    if (std::isfinite(prod) && prod > 0.0 && std::isfinite(r1) && r2 > 0.0)
        return prod;
    return std::exp(log_gamma_ratio(kd + delta, kd) + log_gamma_ratio(Nd + 1.0, Nd + 1.0 + delta));
}

}  // namespace

double PowerSeries::evaluate(double w) const {
    if (w <= 0.0)
        return 0.0;
    const double z = std::pow(w, step);
    return std::pow(w, gamma) * poly::evaluate(coeffs, z);
}

void PowerSeries::validate() const {
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("PowerSeries: gamma must lie in [0, 1)");
    if (coeffs.empty() || !(coeffs[0] > 0.0))
        throw std::invalid_argument("PowerSeries: c_0 must be positive");
    if (!(step > 0.0))
        throw std::invalid_argument("PowerSeries: step must be positive");
}

void MomentSpec::validate() const {
    if (k < 1)
        throw std::invalid_argument("MomentSpec: k must be >= 1");
    if (N < k)
        throw std::invalid_argument("MomentSpec: N must be >= k");
    if (!(alpha > 0.0))
        throw std::invalid_argument("MomentSpec: alpha must be positive");
}

TopologyInfo TopologyInfo::from_genus(int genus) {
    if (genus < 0)
        throw std::invalid_argument("TopologyInfo: genus must be >= 0");
    return {2 * (1 - genus), genus};
}

TopologyInfo TopologyInfo::from_chi(int chi) {
    if (chi > 2 || chi % 2 != 0)
        throw std::invalid_argument("TopologyInfo: orientable closed surfaces have even chi <= 2");
    return {chi, 1 - chi / 2};
}

double ReducedScalingSeries::evaluate(double N) const {
    return poly::evaluate(one_over_N_coeffs, 1.0 / N);
}

SeriesMean mean_from_series(const PowerSeries& s, const MomentSpec& ms) {
    s.validate();
    ms.validate();
    if (ms.alpha != 1.0)
        throw std::invalid_argument("mean_from_series: alpha != 1 is handled by quadrature");
    SeriesMean out;
    CompensatedSum acc;
    double prev = 0.0;
    for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
        const double delta = s.gamma + static_cast<double>(j) * s.step;
        const double term = s.coeffs[j] == 0.0
                                ? 0.0
                                : s.coeffs[j] * term_gamma_factor(ms.k, ms.N, delta);
        acc.add(term);
        if (j > 0 && j + 1 == s.coeffs.size() && term != 0.0 && std::abs(term) >= std::abs(prev))
            out.truncation_warning = true;
        prev = term;
        out.last_term = term;
    }
    out.value = acc.value();
    return out;
}

double flat_leading_coefficient(int d) {
    if (d < 1)
        throw std::invalid_argument("dimension must be >= 1");
    const double dd = static_cast<double>(d);
    return std::pow(std::tgamma(dd / 2.0 + 1.0), 1.0 / dd) / std::sqrt(std::numbers::pi);
}

double flat_mean(DimensionSpec dim, const MomentSpec& ms) {
    ms.validate();
    if (ms.alpha != 1.0)
        throw std::invalid_argument("flat_mean: only the first moment has this closed form");
    const double g = 1.0 / static_cast<double>(dim.d);
    return flat_leading_coefficient(dim.d) * term_gamma_factor(ms.k, ms.N, g);
}

SphereSum sphere_mean_exact(const MomentSpec& ms, long long max_terms) {
    ms.validate();
    if (ms.alpha != 1.0)
        throw std::invalid_argument("sphere_mean_exact: only alpha = 1");
    const double k = static_cast<double>(ms.k);
    const double N = static_cast<double>(ms.N);

    double t = term_gamma_factor(ms.k, ms.N, 0.5) / std::sqrt(std::numbers::pi);
    CompensatedSum acc;
    acc.add(t);
    long long j = 0;
    bool converged = false;
    while (j + 1 < max_terms) {
        const double jd = static_cast<double>(j);
        t *= (2.0 * jd + 1.0) * (2.0 * jd + 1.0) / (2.0 * (jd + 1.0) * (2.0 * jd + 3.0)) *
             (k + jd + 0.5) / (N + jd + 1.5);
        ++j;
        acc.add(t);
        if (j > kBurnIn && t < kSeriesCut * acc.value()) {
            converged = true;
            break;
        }
    }
    // Terms decay like C j^-p with p = N - k + 5/2; the remainder is approximated by
    // the integral of that power law from j + 1/2.
    const double p = N - k + 2.5;
    const double jd = static_cast<double>(j);
    // t j^p (j + 1/2)^(1-p) / (p - 1), arranged so that j^p cannot overflow
    const double tail = t * jd * std::exp((p - 1.0) * std::log(jd / (jd + 0.5))) / (p - 1.0);
    if (!converged)
        throw ConvergenceError("sphere_mean_exact: series not converged within max_terms",
                               acc.value(), tail);
    SphereSum out;
    out.terms = j + 1;
    out.tail_estimate = tail;
    acc.add(tail);
    out.value = acc.value();
    return out;
}

PowerSeries sphere_inverse_series(int order) {
    PowerSeries s;
    s.gamma = 0.5;
    s.coeffs.resize(static_cast<std::size_t>(order) + 1);
    double a = 1.0 / std::sqrt(std::numbers::pi);
    for (int j = 0; j <= order; ++j) {
        s.coeffs[j] = a;
        const double jd = j;
        a *= (2.0 * jd + 1.0) * (2.0 * jd + 1.0) / (2.0 * (jd + 1.0) * (2.0 * jd + 3.0));
    }
    return s;
}

PowerSeries flat_inverse_series(int d) {
    PowerSeries s;
    s.gamma = 1.0 / static_cast<double>(d);
    s.coeffs = {flat_leading_coefficient(d)};
    return s;
}

PowerSeries curved_leading_inverse(int d, double K) {
    const double dd = static_cast<double>(d);
    const double c0 = flat_leading_coefficient(d);
    PowerSeries s;
    s.gamma = 1.0 / dd;
    s.step = 2.0 / dd;
    s.coeffs = {c0, c0 * (dd - 1.0) / (dd + 2.0) * K / 6.0 * c0 * c0};
    return s;
}

ReducedScalingSeries reduced_series(Rational gamma, long long k, int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("reduced_series: order must be in [0, 3]");
    ReducedScalingSeries out;
    out.k = k;
    out.gamma = boost::rational_cast<double>(gamma);
    auto exact = gamma_ratio_expansion<Rational>(gamma, order);
    for (const auto& c : exact)
        out.one_over_N_coeffs.push_back(boost::rational_cast<double>(c));
    out.exact_coeffs = std::move(exact);
    return out;
}

ReducedScalingSeries reduced_series(double gamma, long long k, int order) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("reduced_series: order must be in [0, 3]");
    ReducedScalingSeries out;
    out.k = k;
    out.gamma = gamma;
    out.one_over_N_coeffs = gamma_ratio_expansion<double>(gamma, order);
    return out;
}

ReducedScalingSeries reduced_series(const PowerSeries& s, long long k, int order) {
    s.validate();
    if (s.step != 1.0)
        throw std::invalid_argument("reduced_series: combined form needs an integer-step series");
    if (order < 0 || order > 3)
        throw std::invalid_argument("reduced_series: order must be in [0, 3]");
    ReducedScalingSeries out;
    out.k = k;
    out.gamma = s.gamma;
    out.one_over_N_coeffs.assign(static_cast<std::size_t>(order) + 1, 0.0);
    // term j: (c_j/c_0) (k+g)_j N^-j [N^(g+j) Gamma(N+1)/Gamma(N+1+g+j)]
    double poch = 1.0;
    for (int j = 0; j <= order && j < static_cast<int>(s.coeffs.size()); ++j) {
        if (j > 0)
            poch *= static_cast<double>(k) + s.gamma + static_cast<double>(j - 1);
        const double scale = s.coeffs[j] / s.coeffs[0] * poch;
        const auto e = gamma_ratio_expansion<double>(s.gamma + j, order - j);
        for (int m = 0; m + j <= order; ++m)
            out.one_over_N_coeffs[m + j] += scale * e[m];
    }
    return out;
}

double subleading_coeff(long long k, TopologyInfo topo) {
    if (k < 1)
        throw std::invalid_argument("subleading_coeff: k must be >= 1");
    return (static_cast<double>(topo.chi) * (2.0 * static_cast<double>(k) + 1.0) - 9.0) / 24.0;
}

double leading_asymptote(double c0, double gamma, long long k, long long N) {
    return c0 * gamma_ratio(static_cast<double>(k) + gamma, static_cast<double>(k)) *
           std::pow(static_cast<double>(N), -gamma);
}

}  // namespace knn
