#include "knn/poly.hpp"
#include "knn/series.hpp"

#include <doctest.h>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

using namespace knn;

namespace {

const double kPi = 3.14159265358979323846;

// Mean of g(W), W ~ Beta(k, N-k+1), by tanh-sinh quadrature against the Beta density.
double beta_expectation(const std::function<double(double)>& g, long long k, long long N) {
    boost::math::beta_distribution<double> dist(static_cast<double>(k),
                                                static_cast<double>(N - k + 1));
    boost::math::quadrature::tanh_sinh<double> ts;
    return ts.integrate([&](double w) { return g(w) * boost::math::pdf(dist, w); }, 0.0, 1.0);
}

}  // namespace

TEST_CASE("flat mean agrees with Beta-kernel quadrature") {
    for (long long k : {1, 2, 5}) {
        for (long long N : {5, 20, 80}) {
            const double oracle =
                beta_expectation([](double w) { return std::sqrt(w / kPi); }, k, N);
            CHECK(flat_mean({2}, {k, N, 1.0}) == doctest::Approx(oracle).epsilon(1e-11));
        }
    }
    // d = 3: A^-1(w) = (3w / 4 pi)^(1/3)
    const double oracle3 =
        beta_expectation([](double w) { return std::cbrt(3.0 * w / (4.0 * kPi)); }, 2, 30);
    CHECK(flat_mean({3}, {2, 30, 1.0}) == doctest::Approx(oracle3).epsilon(1e-11));
}

TEST_CASE("flat leading coefficient") {
    CHECK(flat_leading_coefficient(2) == doctest::Approx(1.0 / std::sqrt(kPi)));
    CHECK(flat_leading_coefficient(3) == doctest::Approx(std::cbrt(3.0 / (4.0 * kPi))));
    CHECK(flat_leading_coefficient(1) == doctest::Approx(0.5));
}

TEST_CASE("reduced series: exact first coefficient -gamma(gamma+1)/2") {
    auto r2 = reduced_series(Rational(1, 2), 1, 3);
    REQUIRE(r2.exact_coeffs);
    CHECK((*r2.exact_coeffs)[0] == Rational(1));
    CHECK((*r2.exact_coeffs)[1] == Rational(-3, 8));
    auto r3 = reduced_series(Rational(1, 3), 4, 3);
    CHECK((*r3.exact_coeffs)[1] == Rational(-2, 9));
    auto r4 = reduced_series(Rational(1, 4), 2, 2);
    CHECK((*r4.exact_coeffs)[1] == Rational(-5, 32));
}

TEST_CASE("reduced series matches log-gamma evaluation") {
    // N^g Gamma(N+1)/Gamma(N+g+1) from lgamma in long double, against the truncated series.
    for (double g : {0.5, 1.0 / 3.0}) {
        const auto r = reduced_series(g, 1, 3);
        for (double N : {50.0, 200.0}) {
            const long double exact = std::exp(static_cast<long double>(g) * std::log((long double)N) +
                                               std::lgamma((long double)N + 1) -
                                               std::lgamma((long double)N + g + 1));
            CHECK(std::abs(r.evaluate(N) - static_cast<double>(exact)) < 1.0 / std::pow(N, 4));
        }
    }
}

TEST_CASE("subleading coefficient by topology") {
    CHECK(subleading_coeff(1, TopologyInfo::from_chi(2)) == doctest::Approx(-1.0 / 8.0));
    CHECK(subleading_coeff(2, TopologyInfo::from_chi(2)) == doctest::Approx(1.0 / 24.0));
    // torus: -3/8 for every k, the flat value
    for (long long k = 1; k <= 4; ++k)
        CHECK(subleading_coeff(k, TopologyInfo::from_genus(1)) == doctest::Approx(-3.0 / 8.0));
    CHECK(TopologyInfo::from_genus(2).chi == -2);
}

TEST_CASE("sphere inverse series reproduces arcsin") {
    const auto s = sphere_inverse_series(30);
    for (double w : {0.01, 0.1, 0.3})
        CHECK(s.evaluate(w) == doctest::Approx(std::asin(std::sqrt(w)) / std::sqrt(kPi)).epsilon(1e-13));
    const double r = std::sqrt(kPi);
    CHECK(s.coeffs[1] * r == doctest::Approx(1.0 / 6.0));
    CHECK(s.coeffs[3] * r == doctest::Approx(5.0 / 112.0));
}

TEST_CASE("sphere exact mean matches Beta-kernel quadrature") {
    auto a = [](double w) { return std::asin(std::sqrt(w)) / std::sqrt(kPi); };
    for (auto [k, N] : {std::pair<long long, long long>{1, 1}, {1, 10}, {3, 50}, {2, 400}}) {
        const SphereSum s = sphere_mean_exact({k, N, 1.0});
        CHECK(s.value == doctest::Approx(beta_expectation(a, k, N)).epsilon(1e-11));
    }
    // N = 1: <D> = E[arcsin sqrt(W)]/sqrt(pi) with W uniform, = (pi/4)/sqrt(pi)
    CHECK(sphere_mean_exact({1, 1, 1.0}).value == doctest::Approx(std::sqrt(kPi) / 4.0).epsilon(1e-10));
}

TEST_CASE("mean_from_series on the flat inverse is the flat mean") {
    const auto s = flat_inverse_series(2);
    const SeriesMean m = mean_from_series(s, {3, 40, 1.0});
    CHECK(m.value == doctest::Approx(flat_mean({2}, {3, 40, 1.0})).epsilon(1e-14));
    CHECK_THROWS_AS(mean_from_series(s, {1, 10, 2.0}), std::invalid_argument);
}

TEST_CASE("moment spec validation") {
    CHECK_THROWS_AS(MomentSpec({5, 3, 1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(MomentSpec({0, 3, 1.0}).validate(), std::invalid_argument);
    CHECK_NOTHROW(MomentSpec({3, 3, 1.0}).validate());
}

TEST_CASE("poly: reversion gives signed Catalan numbers") {
    // s = x (1 + x)  =>  x = s - s^2 + 2 s^3 - 5 s^4 + 14 s^5 - 42 s^6
    const auto r = poly::revert({1.0, 1.0}, 5);
    const double catalan[] = {1, 1, 2, 5, 14, 42};
    for (int i = 0; i <= 5; ++i)
        CHECK(r[i] == doctest::Approx((i % 2 ? -1.0 : 1.0) * catalan[i]));
}

TEST_CASE("poly: fractional power and composition") {
    const auto p = poly::power({1.0, 1.0}, 0.5, 4);  // sqrt(1+x)
    const double expect[] = {1.0, 0.5, -0.125, 0.0625, -0.0390625};
    for (int i = 0; i <= 4; ++i)
        CHECK(p[i] == doctest::Approx(expect[i]));
    const auto sq = poly::multiply(p, p, 4);
    CHECK(sq[0] == doctest::Approx(1.0));
    CHECK(sq[1] == doctest::Approx(1.0));
    for (int i = 2; i <= 4; ++i)
        CHECK(std::abs(sq[i]) < 1e-15);
    // exp(x) composed with 2x gives exp(2x)
    const poly::Coeffs e{1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
    const auto e2 = poly::compose(e, {0.0, 2.0}, 4);
    CHECK(e2[3] == doctest::Approx(8.0 / 6.0));
    CHECK(poly::evaluate({1.0, 2.0, 3.0}, 2.0) == doctest::Approx(17.0));
}

TEST_CASE("leading asymptote") {
    const double c0 = flat_leading_coefficient(2);
    CHECK(leading_asymptote(c0, 0.5, 1, 100) ==
          doctest::Approx(c0 * std::tgamma(1.5) / 10.0).epsilon(1e-14));
}

TEST_CASE("worked values of the Beta-moment series") {
    const double two_thirds = 2.0 / (3.0 * std::sqrt(kPi));
    PowerSeries flat{0.5, {1.0 / std::sqrt(kPi)}, 1.0};
    CHECK(mean_from_series(flat, {1, 1, 1.0}).value == doctest::Approx(two_thirds).epsilon(1e-14));
    CHECK(flat_mean({2}, {1, 1, 1.0}) == doctest::Approx(two_thirds).epsilon(1e-14));
    PowerSeries constant{0.0, {0.7}, 1.0};
    CHECK(mean_from_series(constant, {3, 9, 1.0}).value == doctest::Approx(0.7).epsilon(1e-14));
    for (long long N : {2, 10, 1000})
        CHECK(flat_mean({2}, {2, N, 1.0}) / flat_mean({2}, {1, N, 1.0}) == doctest::Approx(1.5).epsilon(1e-14));
    // circle of unit length: k-th neighbour on one side ... mean k / (2 (N+1))
    for (long long k : {1, 2})
        for (long long N : {2, 6})
            CHECK(flat_mean({1}, {k, N, 1.0}) == doctest::Approx(k / (2.0 * (N + 1))).epsilon(1e-14));
    // truncated sphere series against the exact sum
    const SeriesMean s = mean_from_series(sphere_inverse_series(30), {1, 10, 1.0});
    CHECK(std::abs(s.value - sphere_mean_exact({1, 10, 1.0}).value) < 1e-6);
}

TEST_CASE("gamma = 0 reduced series is identically one") {
    const auto r = reduced_series(Rational(0), 2, 3);
    CHECK((*r.exact_coeffs)[0] == Rational(1));
    for (std::size_t i = 1; i < r.exact_coeffs->size(); ++i)
        CHECK((*r.exact_coeffs)[i] == Rational(0));
}

TEST_CASE("sphere reduced mean: 1/N slope from exact sums") {
    for (long long k : {1, 2}) {
        double sxx = 0.0, sxy = 0.0;
        for (double e = 3.0; e <= 5.0; e += 0.25) {
            const long long N = std::llround(std::pow(10.0, e));
            const double lead = leading_asymptote(1.0 / std::sqrt(kPi), 0.5, k, N);
            const double x = 1.0 / N, y = sphere_mean_exact({k, N, 1.0}).value / lead - 1.0;
            sxx += x * x;
            sxy += x * y;
        }
        CHECK(sxy / sxx == doctest::Approx((4.0 * k - 7.0) / 24.0).epsilon(0.002 / 0.125));
    }
}
