#include "knn/catalog.hpp"
#include "knn/curvature.hpp"
#include "knn/poly.hpp"
#include "knn/random.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>

using namespace knn;

namespace {

const double kPi = 3.14159265358979323846;
const double kR = 0.5 / std::sqrt(kPi);  // unit-area sphere

// Taylor coefficients of sin^2(x): sum_{n>=1} (-1)^(n+1) 2^(2n-1) x^(2n) / (2n)!
double sin_sq_coeff(int n) {
    return (n % 2 ? 1.0 : -1.0) * std::pow(2.0, 2 * n - 1) / std::tgamma(2.0 * n + 1.0);
}

}  // namespace

TEST_CASE("constant-curvature area series is the sphere cap area") {
    // Sphere of radius rho: A(l) = 4 pi rho^2 sin^2(l / 2 rho), K = 1/rho^2.
    for (double rho : {kR, 1.0, 3.0}) {
        CurvatureJet j;
        j.K = 1.0 / (rho * rho);
        const AreaPolynomial a = area_series_from_curvature(j, 8);
        REQUIRE(a.bracket.size() == 4);
        const double scale = 4.0 * kPi * rho * rho;
        CHECK(a.leading * a.bracket[0] ==
              doctest::Approx(scale * sin_sq_coeff(1) / std::pow(2.0 * rho, 2)).epsilon(1e-13));
        for (int n = 1; n < 4; ++n) {
            const double expect = scale * sin_sq_coeff(n + 1) / std::pow(2.0 * rho, 2 * n + 2);
            CHECK(a.leading * a.bracket[n] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("area series order handling") {
    CurvatureJet j{1.0, 0.0, 0.0, 0.0};
    CHECK(area_series_from_curvature(j, 2).bracket.size() == 1);
    CHECK(area_series_from_curvature(j, 6).bracket.size() == 3);
    CHECK_THROWS_AS(area_series_from_curvature(j, 5), std::invalid_argument);
    CHECK_THROWS_AS(area_series_from_curvature(j, 10), std::invalid_argument);
}

TEST_CASE("flat inversion gives the ball-volume inverse") {
    for (int d : {1, 2, 3, 5}) {
        const PowerSeries s = invert_area_series(flat_area_polynomial(d));
        CHECK(s.gamma == doctest::Approx(1.0 / d));
        CHECK(s.coeffs[0] == doctest::Approx(flat_leading_coefficient(d)).epsilon(1e-14));
    }
}

TEST_CASE("inversion round trip: A(A^-1(w)) = w") {
    CurvatureJet j{3.0, 0.7, 0.2, -0.4};
    const AreaPolynomial a = area_series_from_curvature(j, 8);
    const PowerSeries s = invert_area_series(a);
    for (double w : {1e-4, 1e-3, 5e-3}) {
        const double l = s.evaluate(w);
        // truncation: the next omitted order is w^5 relative to w
        CHECK(std::abs(a.evaluate(l) - w) < 50.0 * w * std::pow(w, 4) + 1e-17);
    }
    CHECK(curved_leading_inverse(2, 3.0).coeffs[1] ==
          doctest::Approx(s.coeffs[1]).epsilon(1e-13));
}

TEST_CASE("stereographic sphere has K = 1/R^2 everywhere") {
    const PatchAtlas a = make_stereographic_sphere_atlas();
    for (const auto& p : a.patches) {
        for (double u : {-1.5, 0.0, 0.4, 1.7}) {
            for (double v : {-1.0, 0.3}) {
                CHECK(gaussian_curvature_value(p, u, v) == doctest::Approx(4.0 * kPi).epsilon(1e-12));
            }
        }
        const CurvatureJet jet = gaussian_curvature(p, 0.3, -0.2);
        CHECK(std::abs(jet.lap_K) < 1e-5);
        CHECK(std::abs(jet.grad_K_sq) < 1e-8);
        CHECK(std::abs(jet.bilap_K) < 1e-2);
        CHECK(derivative_mismatch(p) < 1e-6);
    }
}

TEST_CASE("curvature of f = exp(2 phi): K = -lap(phi) / f") {
    // phi = 0.1 u^2 v: K = -(0.2 v) e^{-2 phi}, lap K checked by central differences of K.
    ConformalPatch p;
    p.name = "test";
    p.domain = {-1, 1, -1, 1, false, false};
    p.metric = [](double u, double v) {
        const double ph = 0.1 * u * u * v;
        const double pu = 0.2 * u * v, pv = 0.1 * u * u;
        const double puu = 0.2 * v, puv = 0.2 * u, pvv = 0.0;
        MetricJet m;
        m.f = std::exp(2.0 * ph);
        m.fu = 2.0 * pu * m.f;
        m.fv = 2.0 * pv * m.f;
        m.fuu = (4.0 * pu * pu + 2.0 * puu) * m.f;
        m.fvv = (4.0 * pv * pv + 2.0 * pvv) * m.f;
        m.fuv = (4.0 * pu * pv + 2.0 * puv) * m.f;
        return m;
    };
    auto K = [](double u, double v) { return -0.2 * v * std::exp(-0.2 * u * u * v); };
    CHECK(gaussian_curvature_value(p, 0.3, 0.5) == doctest::Approx(K(0.3, 0.5)).epsilon(1e-13));
    const double h = 1e-3, u = 0.3, v = 0.5;
    const double lap = (K(u + h, v) + K(u - h, v) + K(u, v + h) + K(u, v - h) - 4 * K(u, v)) / (h * h);
    CHECK(curvature_laplacian(p, u, v) == doctest::Approx(lap / p.f(u, v)).epsilon(1e-5));
    CHECK(derivative_mismatch(p) < 1e-6);
}

TEST_CASE("nonpositive metric factor is rejected") {
    ConformalPatch p;
    p.metric = [](double, double) { return MetricJet{-1.0, 0, 0, 0, 0, 0}; };
    CHECK_THROWS_AS(gaussian_curvature_value(p, 0.0, 0.0), std::domain_error);
}

TEST_CASE("geodesic shooting distance matches great-circle distance") {
    const PatchAtlas a = make_stereographic_sphere_atlas();
    const auto& p = a.patches[0];
    const double pts[][4] = {{0.0, 0.0, 0.3, 0.1}, {0.5, -0.2, -0.4, 0.6}, {-1.0, 0.3, -0.2, -0.5}};
    for (const auto& q : pts) {
        const double d = geodesic_distance_by_shooting(p, q[0], q[1], q[2], q[3]);
        const double oracle = a.embedded_distance(a.embed(0, q[0], q[1]), a.embed(0, q[2], q[3]));
        CHECK(d == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("geodesic shooting on a flat chart is Euclidean") {
    const PatchAtlas a = make_flat_torus_atlas();
    const double d = geodesic_distance_by_shooting(a.patches[0], 0.2, 0.3, 0.45, 0.1);
    CHECK(d == doctest::Approx(std::hypot(0.25, 0.2)).epsilon(1e-10));
}

TEST_CASE("geodesic trace conserves speed and stays on a great circle") {
    const PatchAtlas a = make_stereographic_sphere_atlas();
    const auto& p = a.patches[0];
    GeodesicState s;
    s.u = 0.1;
    s.v = 0.0;
    const double speed = 1.0 / std::sqrt(p.f(0.1, 0.0));
    s.du_ds = speed;
    const GeodesicPath path = geodesic_trace(p, s, 0.3);
    REQUIRE(!path.states.empty());
    CHECK(path.max_speed_drift < 1e-9);
    // starting along u on v = 0: the great circle through both poles stays on v = 0
    for (const auto& st : path.states)
        CHECK(std::abs(st.v) < 1e-12);
    CHECK(path.states.back().s == doctest::Approx(0.3));
}

TEST_CASE("numeric disc area on the sphere is sin^2(sqrt(pi) l)") {
    const PatchAtlas a = make_stereographic_sphere_atlas();
    for (double l : {0.05, 0.2, 0.35}) {
        const AreaEstimate e = disc_area_numeric(a.patches[0], 0.2, -0.1, l);
        const double oracle = std::pow(std::sin(std::sqrt(kPi) * l), 2);
        CHECK(e.value == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("area series with derivative terms matches numeric disc area") {
    // Non-constant curvature: the l^6 and l^8 terms carry lap K, (grad K)^2 and bilap K.
    const PatchAtlas a = make_perturbed_sphere_atlas();
    const auto& p = a.patches[0];
    const double u = 0.35, v = -0.25;
    const CurvatureJet jet = gaussian_curvature(p, u, v);
    const AreaPolynomial a8 = area_series_from_curvature(jet, 8);
    const AreaPolynomial a4 = area_series_from_curvature(jet, 4);
    for (double l : {0.04, 0.08}) {
        const double numeric = disc_area_numeric(p, u, v, l).value;
        const double err8 = std::abs(a8.evaluate(l) - numeric) / numeric;
        const double err4 = std::abs(a4.evaluate(l) - numeric) / numeric;
        CHECK(err8 < 1e-9);
        CHECK(err8 < 1e-2 * err4);
    }
}

TEST_CASE("Gauss-Bonnet on the catalog surfaces") {
    CHECK(gauss_bonnet_chi(make_flat_torus_atlas()) == doctest::Approx(0.0));
    CHECK(gauss_bonnet_chi(make_torus_of_revolution_atlas(0.3)) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(gauss_bonnet_chi(make_perturbed_sphere_atlas(0.2, -0.1)) ==
          doctest::Approx(2.0).epsilon(1e-8));
    for (const auto& name : atlas_names())
        CHECK(atlas_area(make_atlas(name)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("unknown atlas") { CHECK_THROWS_AS(make_atlas("klein"), std::invalid_argument); }

namespace {

ConformalPatch patch_from(std::function<MetricJet(double, double)> m, ChartDomain d) {
    ConformalPatch p;
    p.name = "test";
    p.metric = std::move(m);
    p.domain = d;
    return p;
}

}  // namespace

TEST_CASE("curvature of textbook metrics") {
    const auto flat = patch_from([](double, double) { return MetricJet{2.0, 0, 0, 0, 0, 0}; },
                                 {-1, 1, -1, 1, false, false});
    CHECK(gaussian_curvature_value(flat, 0.3, 0.1) == 0.0);
    // unit-radius stereographic sphere
    const auto sphere = patch_from(
        [](double u, double v) {
            const double D = 1 + u * u + v * v;
            MetricJet m;
            m.f = 4 / (D * D);
            m.fu = -16 * u / (D * D * D);
            m.fv = -16 * v / (D * D * D);
            m.fuu = -16 / (D * D * D) + 96 * u * u / (D * D * D * D);
            m.fvv = -16 / (D * D * D) + 96 * v * v / (D * D * D * D);
            m.fuv = 96 * u * v / (D * D * D * D);
            return m;
        },
        {-2, 2, -2, 2, false, false});
    for (double u : {0.0, 0.7, -1.3})
        CHECK(gaussian_curvature_value(sphere, u, 0.4) == doctest::Approx(1.0).epsilon(1e-10));
    // upper half plane
    const auto hyp = patch_from(
        [](double, double v) {
            MetricJet m;
            m.f = 1 / (v * v);
            m.fv = -2 / (v * v * v);
            m.fvv = 6 / (v * v * v * v);
            return m;
        },
        {-1, 1, 0.1, 2, false, false});
    CHECK(gaussian_curvature_value(hyp, 0.2, 0.5) == doctest::Approx(-1.0).epsilon(1e-12));

    const AreaPolynomial zero = area_series_from_curvature({}, 8);
    CHECK(zero.evaluate(0.37) == doctest::Approx(kPi * 0.37 * 0.37).epsilon(1e-15));
}

TEST_CASE("forward series composed with its inverse is the identity") {
    RandomStream rng(31, 0);
    auto pick = [&](double r) { return r * (2.0 * rng.uniform() - 1.0); };
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const CurvatureJet j{pick(20.0), pick(50.0), pick(50.0), pick(200.0)};
        const AreaPolynomial a = area_series_from_curvature(j, 8);
        const PowerSeries s = invert_area_series(a);
        // l^2 = w E(w)^2, A = leading * l^2 * sum_i b_i (l^2)^i
        const std::size_t order = 3;
        const poly::Coeffs E2 = poly::multiply(s.coeffs, s.coeffs, order);
        poly::Coeffs l2{0.0};
        l2.insert(l2.end(), E2.begin(), E2.end());
        l2.resize(order + 2);
        poly::Coeffs bracket(order + 2, 0.0);
        poly::Coeffs power{1.0};
        for (double b : a.bracket) {
            for (std::size_t i = 0; i < power.size() && i < bracket.size(); ++i)
                bracket[i] += b * power[i];
            power = poly::multiply(power, l2, order + 1);
        }
        const poly::Coeffs area = poly::multiply(l2, bracket, order + 1);
        worst = std::max(worst, std::abs(a.leading * area[1] - 1.0));
        for (std::size_t i = 2; i <= order + 1; ++i)
            worst = std::max(worst, std::abs(a.leading * area[i]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("geodesics on a flat metric are straight and reversible") {
    const auto flat = patch_from([](double, double) { return MetricJet{4.0, 0, 0, 0, 0, 0}; },
                                 {-10, 10, -10, 10, false, false});
    GeodesicState s;
    s.u = 0.1;
    s.v = -0.2;
    s.du_ds = 0.3;
    s.dv_ds = 0.4;  // f (u'^2 + v'^2) = 1
    const GeodesicPath path = geodesic_trace(flat, s, 2.0);
    const auto& end = path.states.back();
    CHECK(end.u == doctest::Approx(0.1 + 2.0 * 0.3).epsilon(1e-12));
    CHECK(end.v == doctest::Approx(-0.2 + 2.0 * 0.4).epsilon(1e-12));

    const PatchAtlas atlas = make_perturbed_sphere_atlas();
    const auto& p = atlas.patches[0];
    GeodesicState q;
    q.u = 0.2;
    q.v = 0.1;
    q.du_ds = 1.0 / std::sqrt(p.f(0.2, 0.1));
    const GeodesicState fwd = geodesic_trace(p, q, 0.4).states.back();
    GeodesicState back = fwd;
    back.s = 0.0;
    back.du_ds = -fwd.du_ds;
    back.dv_ds = -fwd.dv_ds;
    const GeodesicState home = geodesic_trace(p, back, 0.4).states.back();
    CHECK(std::abs(home.u - q.u) < 1e-8);
    CHECK(std::abs(home.v - q.v) < 1e-8);
}

TEST_CASE("numeric disc area: flat, sphere value and series agreement") {
    const auto flat = patch_from([](double, double) { return MetricJet{4.0, 0, 0, 0, 0, 0}; },
                                 {-10, 10, -10, 10, false, false});
    CHECK(disc_area_numeric(flat, 0.0, 0.0, 0.3).value == doctest::Approx(kPi * 0.09).epsilon(1e-9));
    const PatchAtlas a = make_stereographic_sphere_atlas();
    CHECK(disc_area_numeric(a.patches[0], 0.0, 0.0, 0.1).value == doctest::Approx(std::pow(std::sin(std::sqrt(kPi) * 0.1), 2)).epsilon(1e-9));
    const AreaPolynomial s = area_series_from_curvature(gaussian_curvature(a.patches[0], 0.0, 0.0), 8);
    CHECK(std::abs(disc_area_numeric(a.patches[0], 0.0, 0.0, 0.05).value - s.evaluate(0.05)) < 1e-8);
}

TEST_CASE("surface-averaged series on catalog surfaces") {
    const PowerSeries flat = surface_average_series(make_flat_torus_atlas(), 3, {});
    for (std::size_t j = 1; j < flat.coeffs.size(); ++j)
        CHECK(flat.coeffs[j] == 0.0);
    const PowerSeries torus = surface_average_series(make_torus_of_revolution_atlas(), 1, {});
    CHECK(std::abs(torus.coeffs[1] / torus.coeffs[0]) < 1e-6);
    const PowerSeries sphere = surface_average_series(make_stereographic_sphere_atlas(), 1, {});
    CHECK(sphere.coeffs[1] / sphere.coeffs[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-6));
    CHECK(gauss_bonnet_chi(make_stereographic_sphere_atlas()) == doctest::Approx(2.0).epsilon(1e-6));
}
