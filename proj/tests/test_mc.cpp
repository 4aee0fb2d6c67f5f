#include "knn/mc.hpp"
#include "knn/series.hpp"

#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

using namespace knn;

TEST_CASE("grid neighbour search equals brute force") {
    const Manifold t = Manifold::flat_torus();
    for (std::uint64_t trial = 0; trial < 200; ++trial) {
        RandomStream rng(99, trial);
        const long long N = 64 + static_cast<long long>(trial) * 7;
        const SurfacePoint x = t.sample(rng);
        std::vector<SurfacePoint> sites(static_cast<std::size_t>(N));
        for (auto& s : sites)
            s = t.sample(rng);
        const int k = 1 + static_cast<int>(trial % 6);
        CHECK(knn_distances_grid(x, sites, k) == knn_distances_brute(t, x, sites, k));
    }
}

TEST_CASE("grid search with clustered sites and duplicates") {
    const Manifold t = Manifold::flat_torus();
    std::vector<SurfacePoint> sites(100);
    for (std::size_t i = 0; i < sites.size(); ++i) {
        sites[i].coords[0] = 0.999 - 0.001 * (i % 5);
        sites[i].coords[1] = 0.001 * (i % 3);
    }
    SurfacePoint x;
    x.coords = {0.5, 0.5};
    CHECK(knn_distances_grid(x, sites, 10) == knn_distances_brute(t, x, sites, 10));
    x.coords = {0.0, 0.0};
    CHECK(knn_distances_grid(x, sites, 4) == knn_distances_brute(t, x, sites, 4));
}

TEST_CASE("neighbour search argument checks") {
    const Manifold t = Manifold::flat_torus();
    std::vector<SurfacePoint> sites(3);
    CHECK_THROWS_AS(knn_distances(t, {}, sites, 4), std::invalid_argument);
    CHECK_THROWS_AS(knn_distances(t, {}, sites, 0), std::invalid_argument);
}

TEST_CASE("accumulator statistics") {
    Accumulator a(2), b(2), all(2);
    for (int i = 0; i < 10; ++i) {
        const std::vector<double> v{double(i), double(i * i)};
        (i < 4 ? a : b).add_trial(v);
        all.add_trial(v);
    }
    a.merge(b);
    CHECK(a.count() == 10);
    CHECK(a.mean(1) == doctest::Approx(4.5));
    CHECK(a.mean(2) == doctest::Approx(28.5));
    // sample sd of 0..9 is sqrt(55/6)
    CHECK(a.stderr_of_mean(1) == doctest::Approx(std::sqrt(55.0 / 6.0 / 10.0)));
    CHECK(a.stderr_of_mean(2) == doctest::Approx(all.stderr_of_mean(2)));
    CHECK_THROWS_AS(a.add_trial({1.0}), std::invalid_argument);
}

TEST_CASE("estimates do not depend on the worker count") {
    const Manifold s = Manifold::sphere_geodesic();
    SampleConfig cfg;
    cfg.N = 30;
    cfg.k_max = 3;
    cfg.trials = 5000;
    cfg.seed = 17;
    cfg.streams = 1;
    const Accumulator one = estimate_moments(s, cfg);
    cfg.streams = 3;
    const Accumulator three = estimate_moments(s, cfg);
    for (int k = 1; k <= 3; ++k) {
        CHECK(one.sum(k).value() == three.sum(k).value());
        CHECK(one.sum_sq(k).value() == three.sum_sq(k).value());
    }
}

TEST_CASE("fixed query point") {
    const Manifold t = Manifold::flat_torus();
    SampleConfig cfg;
    cfg.N = 50;
    cfg.trials = 20000;
    cfg.seed = 4;
    SurfacePoint q;
    q.coords = {0.25, 0.75};
    cfg.fixed_query = q;
    const Accumulator acc = estimate_moments(t, cfg);
    // on the torus every point is equivalent; compare with the flat formula
    const double expect = flat_mean({2}, {1, 50, 1.0});
    CHECK(std::abs(acc.mean(1) - expect) < 4.0 * acc.stderr_of_mean(1));
}

TEST_CASE("chord sphere Monte Carlo follows the flat formula") {
    const Manifold c = Manifold::sphere_chord();
    SampleConfig cfg;
    cfg.N = 8;
    cfg.k_max = 3;
    cfg.trials = 40000;
    cfg.seed = 8;
    const Accumulator acc = estimate_moments(c, cfg);
    for (int k = 1; k <= 3; ++k)
        CHECK(std::abs(acc.mean(k) - flat_mean({2}, {k, 8, 1.0})) < 4.0 * acc.stderr_of_mean(k));
}

TEST_CASE("second moment on the flat torus") {
    // W = pi D^2 while D < 1/2, so E[D^2] = k / (pi (N+1)) up to exponentially small terms.
    const Manifold t = Manifold::flat_torus();
    SampleConfig cfg;
    cfg.N = 100;
    cfg.k_max = 2;
    cfg.alpha = 2.0;
    cfg.trials = 20000;
    const Accumulator acc = estimate_moments(t, cfg);
    for (int k = 1; k <= 2; ++k)
        CHECK(std::abs(acc.mean(k) - k / (3.14159265358979323846 * 101.0)) < 4.0 * acc.stderr_of_mean(k));
}

TEST_CASE("sample config validation") {
    SampleConfig cfg;
    cfg.N = 3;
    cfg.k_max = 4;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.k_max = 1;
    cfg.trials = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("subleading fit recovers known coefficients") {
    ScalingEstimate se{1, 0.5, 1.0, {}, std::nullopt};
    for (long long N : {100, 200, 400, 800, 1600}) {
        const double x = 1.0 / N;
        ScalingPoint p;
        p.N = N;
        p.reduced = 1.0 - 0.375 * x + 0.2 * x * x;
        se.points.push_back(p);
    }
    const SubleadingFit f = fit_subleading(se, true);
    CHECK(!f.weighted);
    CHECK(f.c1 == doctest::Approx(-0.375).epsilon(1e-9));
    CHECK(*f.c2 == doctest::Approx(0.2).epsilon(1e-6));
    CHECK(f.c1_stderr < 1e-10);

    // weighted: noiseless data, known sigmas
    for (auto& p : se.points) {
        p.reduced = 1.0 - 0.375 / p.N;
        p.reduced_stderr = 1e-4;
    }
    const SubleadingFit w = fit_subleading(se);
    CHECK(w.weighted);
    CHECK(w.c1 == doctest::Approx(-0.375).epsilon(1e-12));
    // sigma / sqrt(sum x^2)
    double sxx = 0.0;
    for (const auto& p : se.points)
        sxx += 1.0 / (double(p.N) * p.N);
    CHECK(w.c1_stderr == doctest::Approx(1e-4 / std::sqrt(sxx)));

    se.points[2].reduced_stderr = 0.0;
    CHECK_THROWS_AS(fit_subleading(se), std::invalid_argument);
    se.points.resize(3);  // 100..400 is not a decade
    for (auto& p : se.points)
        p.reduced_stderr = 1e-4;
    CHECK_THROWS_AS(fit_subleading(se), std::invalid_argument);
}

TEST_CASE("scaling estimate forms the reduced variable") {
    const double c0 = flat_leading_coefficient(2);
    ScalingEstimate se{2, 0.5, c0, {}, std::nullopt};
    se.add(100, flat_mean({2}, {2, 100, 1.0}), 0.0);
    const auto r = reduced_series(0.5, 2, 3);
    CHECK(se.points[0].reduced == doctest::Approx(r.evaluate(100.0)).epsilon(1e-9));
}

namespace {

const double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("distances to hand-placed torus sites") {
    const Manifold t = Manifold::flat_torus();
    std::vector<SurfacePoint> sites(3);
    sites[0].coords = {0.1, 0.0};
    sites[1].coords = {0.3, 0.0};
    sites[2].coords = {0.0, 0.45};
    const auto d = knn_distances(t, SurfacePoint{}, sites, 3);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(d[1] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(d[2] == doctest::Approx(0.45).epsilon(1e-15));
}

TEST_CASE("chord distances never exceed the diameter") {
    const Manifold c = Manifold::sphere_chord();
    SampleConfig cfg;
    RandomStream rng(8, 0);
    for (int i = 0; i < 1000; ++i) {
        const SurfacePoint a = c.sample(rng), b = c.sample(rng);
        CHECK(c.distance(a, b) <= 2.0 * c.radius() * (1.0 + 1e-15));
    }
}

TEST_CASE("one site on the torus: mean point-to-point distance") {
    // E|x| over the unit square centered at 0 by nested Gauss-Kronrod on one octant
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double octant = GK::integrate(
        [](double x) {
            return GK::integrate([x](double y) { return std::hypot(x, y); }, 0.0, x, 5, 1e-14);
        },
        0.0, 0.5, 5, 1e-14);
    const double oracle = 8.0 * octant;
    CHECK(oracle == doctest::Approx((std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))) / 6.0).epsilon(1e-12));

    SampleConfig cfg;
    cfg.N = 1;
    cfg.trials = 1000000;
    cfg.seed = 17;
    const Accumulator acc = estimate_moments(Manifold::flat_torus(), cfg);
    CHECK(std::abs(acc.mean(1) - oracle) < 3.0 * acc.stderr_of_mean(1));
}

TEST_CASE("flat torus at N = 100 matches the flat formula") {
    SampleConfig cfg;
    cfg.N = 100;
    cfg.trials = 1000000;
    cfg.seed = 3;
    const Accumulator acc = estimate_moments(Manifold::flat_torus(), cfg);
    CHECK(std::abs(acc.mean(1) - flat_mean({2}, {1, 100, 1.0})) < 3.0 * acc.stderr_of_mean(1));
}

TEST_CASE("flat torus subleading coefficient for k = 3") {
    // The disc is flat for w < pi/4, so every term beyond 1/N is known exactly; remove them
    // and fit the 1/N slope alone.
    const auto exact = reduced_series(0.5, 3, 3);
    ScalingEstimate se;
    se.k = 3;
    se.gamma = 0.5;
    se.c0 = 1.0 / std::sqrt(kPi);
    for (long long N : {25, 50, 100, 200, 400}) {
        SampleConfig cfg;
        cfg.N = N;
        cfg.k_max = 3;
        cfg.trials = 100000;
        cfg.seed = 11 + static_cast<std::uint64_t>(N);
        const Accumulator acc = estimate_moments(Manifold::flat_torus(), cfg);
        se.add(N, acc.mean(3), acc.stderr_of_mean(3));
        se.points.back().reduced -= exact.evaluate(static_cast<double>(N)) - 1.0 + 0.375 / N;
    }
    const SubleadingFit fit = fit_subleading(se);
    CHECK(std::abs(fit.c1 + 0.375) < 3.0 * fit.c1_stderr);
}
