#include "knn/quadrature.hpp"

#include "knn/numerics.hpp"

// pchip.hpp in Boost 1.74 uses isnan without including it.
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace knn {

namespace {

constexpr double kPi = std::numbers::pi;

double ball_volume(int d) {
    const double dd = d;
    return std::pow(kPi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
}

double torus_inverse(double w) {
    if (w <= 0.0)
        return 0.0;
    if (w <= kPi / 4.0)
        return std::sqrt(w / kPi);
    const double lmax = std::sqrt(0.5);
    if (w >= 1.0)
        return lmax;
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(
        [w](double l) { return flat_torus_disc_area(l) - w; }, 0.5, lmax,
        flat_torus_disc_area(0.5) - w, 1.0 - w, boost::math::tools::eps_tolerance<double>(52),
        iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace

double flat_torus_disc_area(double l) {
    if (l < 0.0)
        throw std::domain_error("disc area: negative radius");
    if (l <= 0.5)
        return kPi * l * l;
    if (l >= std::sqrt(0.5))
        return 1.0;
    // Disc clipped to the fundamental square: remove four circular segments beyond |x| = 1/2.
    const double seg = l * l * std::acos(0.5 / l) - 0.5 * std::sqrt(l * l - 0.25);
    return kPi * l * l - 4.0 * seg;
}

AreaInverseFn AreaInverseFn::from_series(const PowerSeries& s) {
    s.validate();
    AreaInverseFn a;
    a.kind = InverseKind::Series;
    a.name = "series";
    a.eval = [s](double w) { return s.evaluate(w); };
    return a;
}

AreaInverseFn AreaInverseFn::tabulated(std::vector<double> w, std::vector<double> l) {
    if (w.size() != l.size() || w.size() < 4)
        throw std::invalid_argument("tabulated inverse: need at least 4 matching points");
    if (w.front() != 0.0 || w.back() != 1.0)
        throw std::invalid_argument("tabulated inverse: grid must span [0, 1]");
    for (std::size_t i = 1; i < w.size(); ++i) {
        if (!(w[i] > w[i - 1]))
            throw std::invalid_argument("tabulated inverse: w grid must increase strictly");
        if (l[i] < l[i - 1])
            throw std::invalid_argument("tabulated inverse: values must be nondecreasing");
    }
    if (l.front() != 0.0)
        throw std::invalid_argument("tabulated inverse: A^-1(0) must be 0");
    using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
    auto spline = std::make_shared<Pchip>(std::move(w), std::move(l));
    AreaInverseFn a;
    a.kind = InverseKind::Tabulated;
    a.name = "tabulated";
    a.eval = [spline](double x) { return (*spline)(std::clamp(x, 0.0, 1.0)); };
    return a;
}

AreaInverseFn closed_area_inverse(const std::string& name, int d) {
    AreaInverseFn a;
    a.kind = InverseKind::Closed;
    a.name = name;
    if (name == "flat-2d" || name == "sphere-chord") {
        a.eval = [](double w) { return std::sqrt(std::max(w, 0.0) / kPi); };
    } else if (name == "sphere-geodesic") {
        a.eval = [](double w) { return std::asin(std::sqrt(std::clamp(w, 0.0, 1.0))) / std::sqrt(kPi); };
    } else if (name == "flat-torus-2d") {
        a.eval = torus_inverse;
    } else if (name == "flat-d") {
        if (d < 1)
            throw std::invalid_argument("flat-d inverse: dimension must be >= 1");
        const double v = ball_volume(d);
        a.eval = [v, d](double w) { return std::pow(std::max(w, 0.0) / v, 1.0 / d); };
    } else {
        throw std::invalid_argument("unknown closed-form area inverse: " + name);
    }
    return a;
}

MomentResult moment_from_area_inverse(const AreaInverseFn& a, const MomentSpec& ms,
                                      double rel_tol) {
    ms.validate();
    const double k = static_cast<double>(ms.k);
    const double N = static_cast<double>(ms.N);
    const double lognorm = log_order_stat_norm(ms.k, ms.N);

    auto weight = [&](double w) {
        if (w <= 0.0 || w >= 1.0) {
            if (w <= 0.0)
                return ms.k == 1 ? std::exp(lognorm) : 0.0;
            return ms.N == ms.k ? std::exp(lognorm) : 0.0;
        }
        return std::exp(lognorm + (k - 1.0) * std::log(w) + (N - k) * std::log1p(-w));
    };
    auto integrand = [&](double w) {
        const double r = a.eval(w);
        const double ra = ms.alpha == 1.0 ? r : std::pow(r, ms.alpha);
        return ra * weight(w);
    };

    // Breakpoints around the Beta(k, N-k+1) mode.
    const double mu = k / (N + 1.0);
    const double sigma = std::sqrt(mu * (1.0 - mu) / (N + 2.0));
    std::vector<double> cuts{0.0, 1.0};
    for (double m = 1.0; m <= 64.0; m *= 2.0) {
        cuts.push_back(mu - m * sigma);
        cuts.push_back(mu + m * sigma);
    }
    cuts.push_back(mu);
    for (auto& c : cuts)
        c = std::clamp(c, 0.0, 1.0);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    CompensatedSum value;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i], hi = cuts[i + 1];
        Integral part;
        if (i == 0) {
            // w = hi t^2 removes the fractional power of w at the origin.
            part = integrate_adaptive(
                [&](double t) { return integrand(hi * t * t) * 2.0 * hi * t; }, 0.0, 1.0,
                rel_tol);
        } else if (i + 2 == cuts.size()) {
            // w = 1 - (1 - lo) t^2 removes square-root behaviour at w = 1.
            const double span = 1.0 - lo;
            part = integrate_adaptive(
                [&](double t) { return integrand(1.0 - span * t * t) * 2.0 * span * t; }, 0.0,
                1.0, rel_tol);
        } else {
            part = integrate_adaptive(integrand, lo, hi, rel_tol);
        }
        value.add(part.value);
        error += part.error;
    }
    MomentResult out{value.value(), error};
    if (!std::isfinite(out.value) || out.error > 10.0 * rel_tol * std::abs(out.value))
        throw QuadratureError("moment_from_area_inverse: tolerance not reached", out.value,
                              out.error);
    return out;
}

double remainder_bound(const AreaInverseFn& a, const FlatnessThreshold& flat,
                       const MomentSpec& ms) {
    ms.validate();
    if (flat.w0 >= 1.0)
        return 0.0;
    if (!(flat.w0 > 0.0))
        throw std::invalid_argument("remainder_bound: w0 must lie in (0, 1]");
    // A^-1 is nondecreasing, so its supremum on [w0, 1] is its value at 1.
    const double sup = std::pow(a.eval(1.0), ms.alpha);
    return sup * incomplete_beta_upper(static_cast<double>(ms.k),
                                       static_cast<double>(ms.N - ms.k + 1), flat.w0);
}

}  // namespace knn
