#include "knn/curvature.hpp"

#include "knn/poly.hpp"

#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace knn {

namespace odeint = boost::numeric::odeint;

namespace {

using State4 = std::array<double, 4>;
using State9 = std::array<double, 9>;

// Geodesic equations for ds^2 = f (du^2 + dv^2). The v equation is the u equation with
// the roles of u and v exchanged.
inline void geodesic_accel(const MetricJet& m, double p, double q, double& au, double& av) {
    const double gu = m.fu / m.f;
    const double gv = m.fv / m.f;
    au = -0.5 * (gu * (p * p - q * q) + 2.0 * gv * p * q);
    av = -0.5 * (gv * (q * q - p * p) + 2.0 * gu * p * q);
}

struct GeodesicRhs {
    const ConformalPatch* patch;
    void operator()(const State4& x, State4& dx, double /*s*/) const {
        const MetricJet m = patch->metric(x[0], x[1]);
        dx[0] = x[2];
        dx[1] = x[3];
        geodesic_accel(m, x[2], x[3], dx[2], dx[3]);
    }
};

// Geodesic plus its first variation (u_t, v_t, p_t, q_t) and the accumulated area
// integral of f * (u' v_t - v' u_t).
struct VariationalRhs {
    const ConformalPatch* patch;
    void operator()(const State9& x, State9& dx, double /*s*/) const {
        const MetricJet m = patch->metric(x[0], x[1]);
        const double p = x[2], q = x[3];
        const double f2 = m.f * m.f;
        const double gu = m.fu / m.f, gv = m.fv / m.f;
        const double guu = (m.fuu * m.f - m.fu * m.fu) / f2;
        const double guv = (m.fuv * m.f - m.fu * m.fv) / f2;
        const double gvv = (m.fvv * m.f - m.fv * m.fv) / f2;
        const double a = p * p - q * q;

        dx[0] = p;
        dx[1] = q;
        geodesic_accel(m, p, q, dx[2], dx[3]);

        const double au_u = -0.5 * (guu * a + 2.0 * guv * p * q);
        const double au_v = -0.5 * (guv * a + 2.0 * gvv * p * q);
        const double au_p = -(gu * p + gv * q);
        const double au_q = gu * q - gv * p;
        const double av_u = -0.5 * (-guv * a + 2.0 * guu * p * q);
        const double av_v = -0.5 * (-gvv * a + 2.0 * guv * p * q);
        const double av_p = gv * p - gu * q;
        const double av_q = -(gv * q + gu * p);

        dx[4] = x[6];
        dx[5] = x[7];
        dx[6] = au_u * x[4] + au_v * x[5] + au_p * x[6] + au_q * x[7];
        dx[7] = av_u * x[4] + av_v * x[5] + av_p * x[6] + av_q * x[7];
        dx[8] = m.f * (p * x[5] - q * x[4]);
    }
};

double polar_jacobian(const State9& x) { return x[2] * x[5] - x[3] * x[4]; }

State9 shoot(const ConformalPatch& p, double u, double v, double theta, double length,
             double rel_tol, bool check_conjugate) {
    const double f0 = p.f(u, v);
    const double c = std::cos(theta), s = std::sin(theta);
    const double inv = 1.0 / std::sqrt(f0);
    State9 x{u, v, c * inv, s * inv, 0.0, 0.0, -s * inv, c * inv, 0.0};
    if (length == 0.0)
        return x;
    auto stepper =
        odeint::make_dense_output(rel_tol * 1e-3, rel_tol, odeint::runge_kutta_dopri5<State9>());
    VariationalRhs rhs{&p};
    stepper.initialize(x, 0.0, length / 64.0);
    while (stepper.current_time() < length) {
        stepper.do_step(rhs);
        State9 now = stepper.current_state();
        if (stepper.current_time() >= length)
            stepper.calc_state(length, now);
        if (!p.domain.contains(now[0], now[1]))
            throw std::domain_error("geodesic left the chart domain");
        if (check_conjugate && !(polar_jacobian(now) > 0.0))
            throw std::runtime_error(
                "conjugate point reached: geodesic disc is not embedded at this radius");
    }
    stepper.calc_state(length, x);
    return x;
}

}  // namespace

bool ChartDomain::contains(double u, double v) const {
    const bool in_u = periodic_u || (u >= u0 && u <= u1);
    const bool in_v = periodic_v || (v >= v0 && v <= v1);
    return in_u && in_v;
}

double AreaPolynomial::evaluate(double l) const {
    return leading * std::pow(l, dim) * poly::evaluate(bracket, l * l);
}

double gaussian_curvature_value(const ConformalPatch& p, double u, double v) {
    const MetricJet m = p.metric(u, v);
    if (!(m.f > 0.0))
        throw std::domain_error("gaussian_curvature: metric factor f must be positive");
    return (m.fu * m.fu + m.fv * m.fv - m.f * m.fuu - m.f * m.fvv) / (2.0 * m.f * m.f * m.f);
}

namespace {

// Flat five-point Laplacian, Richardson-extrapolated to O(step^4).
template <typename Fn>
double flat_laplacian(const Fn& fn, double a, double b, double step) {
    auto lap = [&](double hh) {
        return (fn(a + hh, b) + fn(a - hh, b) + fn(a, b + hh) + fn(a, b - hh) - 4.0 * fn(a, b)) /
               (hh * hh);
    };
    return (4.0 * lap(step / 2.0) - lap(step)) / 3.0;
}

}  // namespace

double curvature_laplacian(const ConformalPatch& p, double u, double v) {
    auto K = [&](double a, double b) { return gaussian_curvature_value(p, a, b); };
    return flat_laplacian(K, u, v, 2e-3 * p.fd_scale) / p.f(u, v);
}

CurvatureJet gaussian_curvature(const ConformalPatch& p, double u, double v) {
    auto K = [&](double a, double b) { return gaussian_curvature_value(p, a, b); };
    const double f = p.f(u, v);
    CurvatureJet j;
    j.K = K(u, v);

    const double h = 2e-3 * p.fd_scale;
    const double H = 2e-2 * p.fd_scale;

    auto grad = [&](double step) {
        return std::array<double, 2>{(K(u + step, v) - K(u - step, v)) / (2.0 * step),
                                     (K(u, v + step) - K(u, v - step)) / (2.0 * step)};
    };
    const auto g1 = grad(h);
    const auto g2 = grad(h / 2.0);
    const double Ku = (4.0 * g2[0] - g1[0]) / 3.0;
    const double Kv = (4.0 * g2[1] - g1[1]) / 3.0;
    j.grad_K_sq = (Ku * Ku + Kv * Kv) / f;

    auto lb = [&](double a, double b) { return curvature_laplacian(p, a, b); };
    j.lap_K = lb(u, v);
    j.bilap_K = flat_laplacian(lb, u, v, H) / f;
    return j;
}

AreaPolynomial area_series_from_curvature(const CurvatureJet& j, int order) {
    if (order != 2 && order != 4 && order != 6 && order != 8)
        throw std::invalid_argument("area_series_from_curvature: order must be 2, 4, 6 or 8");
    const double K = j.K, L = j.lap_K, G = j.grad_K_sq, B = j.bilap_K;
    const std::vector<double> full{
        1.0,
        -K / 12.0,
        (2.0 * K * K - 3.0 * L) / 720.0,
        -(8.0 * K * K * K - 3.0 * (10.0 * G + 14.0 * K * L - 5.0 * B)) / 161280.0,
    };
    AreaPolynomial a;
    a.dim = 2;
    a.leading = std::numbers::pi;
    a.bracket.assign(full.begin(), full.begin() + order / 2);
    return a;
}

AreaPolynomial flat_area_polynomial(int d) {
    if (d < 1)
        throw std::invalid_argument("flat_area_polynomial: dimension must be >= 1");
    const double dd = d;
    AreaPolynomial a;
    a.dim = d;
    a.leading = std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
    a.bracket = {1.0};
    return a;
}

PowerSeries invert_area_series(const AreaPolynomial& area, int order) {
    if (area.bracket.empty() || area.bracket[0] == 0.0 || area.leading == 0.0)
        throw std::domain_error("invert_area_series: zero leading coefficient");
    if (area.dim < 1)
        throw std::invalid_argument("invert_area_series: dimension must be >= 1");
    const int max_order = static_cast<int>(area.bracket.size()) - 1;
    if (order < 0 || order > max_order)
        order = max_order;
    const double d = area.dim;
    const auto J = static_cast<std::size_t>(order);

    // Normalise so the bracket starts at 1, then with x = l^2 and s = (w/C)^(2/d):
    //   s = x q(x), q = P^(2/d);  x = s r(s);  l = s^(1/2) r(s)^(1/2).
    poly::Coeffs P = area.bracket;
    const double p0 = P[0];
    for (auto& c : P)
        c /= p0;
    const double C = area.leading * p0;
    const poly::Coeffs q = poly::power(P, 2.0 / d, J);
    const poly::Coeffs r = poly::revert(q, J);
    const poly::Coeffs e = poly::power(r, 0.5, J);

    PowerSeries out;
    out.gamma = 1.0 / d;
    out.step = 2.0 / d;
    out.coeffs.resize(J + 1);
    for (std::size_t i = 0; i <= J; ++i)
        out.coeffs[i] = e[i] * std::pow(C, -(1.0 + 2.0 * static_cast<double>(i)) / d);
    return out;
}

GeodesicPath geodesic_trace(const ConformalPatch& p, const GeodesicState& start, double s_max,
                            double tol) {
    GeodesicPath path;
    auto drift = [&](const State4& x) {
        return std::abs(p.f(x[0], x[1]) * (x[2] * x[2] + x[3] * x[3]) - 1.0);
    };
    State4 x{start.u, start.v, start.du_ds, start.dv_ds};
    path.states.push_back(start);
    path.max_speed_drift = drift(x);
    if (s_max == 0.0)
        return path;
    const double dir = s_max > 0.0 ? 1.0 : -1.0;
    if (dir < 0.0)
        throw std::invalid_argument("geodesic_trace: s_max must be non-negative");

    auto stepper =
        odeint::make_dense_output(tol * 1e-3, tol, odeint::runge_kutta_dopri5<State4>());
    GeodesicRhs rhs{&p};
    stepper.initialize(x, start.s, s_max / 64.0);
    const double s_end = start.s + s_max;
    while (stepper.current_time() < s_end) {
        stepper.do_step(rhs);
        State4 now = stepper.current_state();
        double t = stepper.current_time();
        if (t >= s_end) {
            stepper.calc_state(s_end, now);
            t = s_end;
        }
        if (!p.domain.contains(now[0], now[1])) {
            path.exited_domain = true;
            break;
        }
        path.states.push_back({t, now[0], now[1], now[2], now[3]});
        path.max_speed_drift = std::max(path.max_speed_drift, drift(now));
    }
    return path;
}

double geodesic_distance_by_shooting(const ConformalPatch& p, double u0, double v0, double u1,
                                     double v1, double tol) {
    const double du = u1 - u0, dv = v1 - v0;
    const double coord_len = std::hypot(du, dv);
    if (coord_len == 0.0)
        return 0.0;
    double theta = std::atan2(dv, du);
    double len = coord_len * std::sqrt(p.f(0.5 * (u0 + u1), 0.5 * (v0 + v1)));
    for (int it = 0; it < 60; ++it) {
        const State9 x = shoot(p, u0, v0, theta, len, tol, false);
        const double ru = x[0] - u1, rv = x[1] - v1;
        if (std::hypot(ru, rv) < 1e-14 * std::max(1.0, coord_len))
            return len;
        // d(end)/d(theta) = (u_t, v_t); d(end)/d(len) = (u', v').
        const double a = x[4], b = x[2];
        const double c = x[5], d = x[3];
        const double det = a * d - b * c;
        if (det == 0.0)
            break;
        const double dtheta = (d * ru - b * rv) / det;
        const double dlen = (-c * ru + a * rv) / det;
        theta -= dtheta;
        len -= dlen;
        if (len <= 0.0)
            len = 0.5 * (len + dlen);
    }
    throw std::runtime_error("geodesic_distance_by_shooting: Newton iteration did not converge");
}

AreaEstimate disc_area_numeric(const ConformalPatch& p, double u, double v, double l,
                               const CurvatureOptions& opts) {
    if (l < 0.0)
        throw std::domain_error("disc_area_numeric: negative radius");
    const MetricJet m0 = p.metric(u, v);
    if (!(m0.f > 0.0))
        throw std::domain_error("disc_area_numeric: metric factor f must be positive");
    AreaEstimate out;
    if (l == 0.0)
        return out;

    // Shooting directions u0' = cos(theta)/sqrt(f0), v0' = sin(theta)/sqrt(f0). Sweeping theta
    // over [0, 2 pi) covers u0' in [-1/sqrt(f0), 1/sqrt(f0)] once for each sign of v0', so the
    // two velocity-sign branches are summed automatically. The integrand is periodic in
    // theta, so the trapezoid rule converges geometrically; directions are nested on doubling.
    std::vector<double> values;
    auto area_along = [&](double theta) {
        return shoot(p, u, v, theta, l, opts.ode_rel_tol, true)[8];
    };
    int M = 16;
    values.reserve(1024);
    for (int i = 0; i < M; ++i)
        values.push_back(area_along(2.0 * std::numbers::pi * i / M));
    auto trapezoid = [&](int count) {
        double acc = 0.0;
        const int stride = static_cast<int>(values.size()) / count;
        for (int i = 0; i < count; ++i)
            acc += values[static_cast<std::size_t>(i * stride)];
        return acc * 2.0 * std::numbers::pi / count;
    };
    double prev = trapezoid(M);
    for (; M < 4096;) {
        std::vector<double> refined;
        refined.reserve(2 * values.size());
        for (int i = 0; i < M; ++i) {
            refined.push_back(values[i]);
            refined.push_back(area_along(2.0 * std::numbers::pi * (i + 0.5) / M));
        }
        values = std::move(refined);
        M *= 2;
        const double now = trapezoid(M);
        out.error = std::abs(now - prev);
        out.value = now;
        out.directions = M;
        prev = now;
        if (M >= 32 && out.error <= opts.quad_rel_tol * std::abs(now))
            return out;
    }
    return out;
}

double derivative_mismatch(const ConformalPatch& p, int n) {
    const auto& d = p.domain;
    const double h = 1e-4 * p.fd_scale;
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < n; ++k) {
            const double u = d.u0 + (d.u1 - d.u0) * (i + 0.5) / n;
            const double v = d.v0 + (d.v1 - d.v0) * (k + 0.5) / n;
            const MetricJet m = p.metric(u, v);
            auto F = [&](double a, double b) { return p.metric(a, b).f; };
            auto Fu = [&](double a, double b) { return p.metric(a, b).fu; };
            const double fu = (F(u + h, v) - F(u - h, v)) / (2 * h);
            const double fv = (F(u, v + h) - F(u, v - h)) / (2 * h);
            const double fuu = (Fu(u + h, v) - Fu(u - h, v)) / (2 * h);
            const double fuv = (Fu(u, v + h) - Fu(u, v - h)) / (2 * h);
            const double fvv = (p.metric(u, v + h).fv - p.metric(u, v - h).fv) / (2 * h);
            // Scale first derivatives by f/fd_scale and second by f/fd_scale^2.
            const double s1 = std::abs(m.f) / p.fd_scale;
            const double s2 = s1 / p.fd_scale;
            worst = std::max({worst, std::abs(fu - m.fu) / s1, std::abs(fv - m.fv) / s1,
                              std::abs(fuu - m.fuu) / s2, std::abs(fuv - m.fuv) / s2,
                              std::abs(fvv - m.fvv) / s2});
        }
    }
    return worst;
}

}  // namespace knn
