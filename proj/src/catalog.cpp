#include "knn/catalog.hpp"

#include "knn/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace knn {

namespace {

constexpr double kPi = std::numbers::pi;
// Chart 0 carries the point fully for rho < e^-a, chart 1 for rho > e^a.
constexpr double kBlend = 0.6;

double bump(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// Smooth step: 1 for x <= -a, 0 for x >= a, and S(-x) = 1 - S(x).
double smooth_step(double x) {
    const double lo = bump(kBlend - x);
    const double hi = bump(kBlend + x);
    return lo / (lo + hi);
}

// Under the chart transition (u, v) -> (u, v) / rho^2, log rho changes sign, so the same
// weight in both charts sums to one.
double stereo_weight(double u, double v) {
    const double rho = std::hypot(u, v);
    if (rho == 0.0)
        return 1.0;
    return smooth_step(std::log(rho));
}

ChartDomain stereo_domain() {
    const double e = std::exp(kBlend);
    return {-e, e, -e, e, false, false};
}

// f = 4 R^2 / (1 + rho^2)^2.
MetricJet stereo_metric(double R, double u, double v) {
    const double D = 1.0 + u * u + v * v;
    const double c = 4.0 * R * R;
    MetricJet m;
    m.f = c / (D * D);
    m.fu = -4.0 * c * u / (D * D * D);
    m.fv = -4.0 * c * v / (D * D * D);
    const double D4 = D * D * D * D;
    m.fuu = -4.0 * c / (D * D * D) + 24.0 * c * u * u / D4;
    m.fvv = -4.0 * c / (D * D * D) + 24.0 * c * v * v / D4;
    m.fuv = 24.0 * c * u * v / D4;
    return m;
}

Vec3 stereo_embed(double R, int chart, double u, double v) {
    const double r2 = u * u + v * v;
    const double D = 1.0 + r2;
    const double z = chart == 0 ? (r2 - 1.0) / D : (1.0 - r2) / D;
    return {R * 2.0 * u / D, R * 2.0 * v / D, R * z};
}

double chord_to_arc(double R, const Vec3& a, const Vec3& b) {
    const double c = std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    return 2.0 * R * std::asin(std::min(1.0, c / (2.0 * R)));
}

PatchAtlas perturbed_sphere(double eps_z, double eps_x, double C) {
    const double R = 0.5 / std::sqrt(kPi);
    PatchAtlas a;
    a.name = "perturbed-sphere";
    a.declared_chi = 2;
    for (int chart = 0; chart < 2; ++chart) {
        const double zs = chart == 0 ? 1.0 : -1.0;
        ConformalPatch p;
        p.name = chart == 0 ? "south" : "north";
        p.domain = stereo_domain();
        p.weight = stereo_weight;
        p.metric = [=](double u, double v) {
            const double D = 1.0 + u * u + v * v;
            const double D2 = D * D, D3 = D2 * D;
            // Embedded unit-sphere coordinates x and z (chart-0 sign of z) with derivatives.
            const double x = 2.0 * u / D;
            const double xu = 2.0 / D - 4.0 * u * u / D2;
            const double xv = -4.0 * u * v / D2;
            const double xuu = -12.0 * u / D2 + 16.0 * u * u * u / D3;
            const double xuv = -4.0 * v / D2 + 16.0 * u * u * v / D3;
            const double xvv = -4.0 * u / D2 + 16.0 * u * v * v / D3;
            const double z = 1.0 - 2.0 / D;
            const double zu = 4.0 * u / D2, zv = 4.0 * v / D2;
            const double zuu = 4.0 / D2 - 16.0 * u * u / D3;
            const double zvv = 4.0 / D2 - 16.0 * v * v / D3;
            const double zuv = -16.0 * u * v / D3;

            const double ez = eps_z * zs;
            const double H = ez * z + eps_x * x;
            // g = log f = log(C 4 R^2) - 2 log D + 2 H
            const double gu = -4.0 * u / D + 2.0 * (ez * zu + eps_x * xu);
            const double gv = -4.0 * v / D + 2.0 * (ez * zv + eps_x * xv);
            const double guu = -4.0 / D + 8.0 * u * u / D2 + 2.0 * (ez * zuu + eps_x * xuu);
            const double gvv = -4.0 / D + 8.0 * v * v / D2 + 2.0 * (ez * zvv + eps_x * xvv);
            const double guv = 8.0 * u * v / D2 + 2.0 * (ez * zuv + eps_x * xuv);

            MetricJet m;
            m.f = C * 4.0 * R * R / D2 * std::exp(2.0 * H);
            m.fu = m.f * gu;
            m.fv = m.f * gv;
            m.fuu = m.f * (gu * gu + guu);
            m.fvv = m.f * (gv * gv + gvv);
            m.fuv = m.f * (gu * gv + guv);
            return m;
        };
        a.patches.push_back(std::move(p));
        a.sup_weighted_f.push_back(C * 4.0 * R * R *
                                   std::exp(2.0 * (std::abs(eps_z) + std::abs(eps_x))));
    }
    a.embed = [R](int chart, double u, double v) { return stereo_embed(R, chart, u, v); };
    return a;
}

void check_integral(const Integral& in, double rel_tol, const char* what) {
    const double allowed = std::max(100.0 * rel_tol * in.l1, 1e-13);
    if (!(in.error <= allowed) || !std::isfinite(in.value))
        throw QuadratureError(std::string(what) + ": quadrature did not converge", in.value,
                              in.error);
}

}  // namespace

PatchAtlas make_flat_torus_atlas() {
    PatchAtlas a;
    a.name = "flat-torus";
    a.declared_chi = 0;
    ConformalPatch p;
    p.name = "unit-square";
    p.metric = [](double, double) { return MetricJet{}; };
    p.domain = {0.0, 1.0, 0.0, 1.0, true, true};
    p.fd_scale = 0.1;
    a.patches.push_back(std::move(p));
    a.sup_weighted_f = {1.0};
    return a;
}

PatchAtlas make_stereographic_sphere_atlas(double radius) {
    const double R = radius > 0.0 ? radius : 0.5 / std::sqrt(kPi);
    PatchAtlas a;
    a.name = "stereographic-sphere";
    a.declared_chi = 2;
    for (int chart = 0; chart < 2; ++chart) {
        ConformalPatch p;
        p.name = chart == 0 ? "south" : "north";
        p.metric = [R](double u, double v) { return stereo_metric(R, u, v); };
        p.domain = stereo_domain();
        p.weight = stereo_weight;
        a.patches.push_back(std::move(p));
        a.sup_weighted_f.push_back(4.0 * R * R);
    }
    a.embed = [R](int chart, double u, double v) { return stereo_embed(R, chart, u, v); };
    a.embedded_distance = [R](const Vec3& x, const Vec3& y) { return chord_to_arc(R, x, y); };
    return a;
}

PatchAtlas make_torus_of_revolution_atlas(double aspect) {
    if (!(aspect > 0.0 && aspect < 1.0))
        throw std::invalid_argument("torus-of-revolution: aspect must lie in (0, 1)");
    // Area 4 pi^2 R r = 1.
    const double R = 1.0 / (2.0 * kPi * std::sqrt(aspect));
    const double r = aspect * R;
    const double root = std::sqrt(R * R - r * r);
    const double beta = root / (2.0 * r);
    const double period = kPi / beta;
    const double squeeze = std::sqrt((R + r) / (R - r));

    // Isothermal coordinates: u is the rotation angle, v = integral of r dphi / (R + r cos phi),
    // so that ds^2 = rho^2 (du^2 + dv^2) with rho = R + r cos phi.
    auto phi_of = [=](double v) {
        const double x = beta * (v - period * std::floor(v / period + 0.5));
        return 2.0 * std::atan2(squeeze * std::sin(x), std::cos(x));
    };

    PatchAtlas a;
    a.name = "torus-of-revolution";
    a.declared_chi = 0;
    ConformalPatch p;
    p.name = "isothermal";
    p.metric = [=](double, double v) {
        const double phi = phi_of(v);
        const double rho = R + r * std::cos(phi);
        const double s = std::sin(phi);
        MetricJet m;
        m.f = rho * rho;
        m.fv = -2.0 * rho * rho * s;
        m.fvv = 4.0 * rho * rho * s * s - 2.0 * rho * rho * rho * std::cos(phi) / r;
        return m;
    };
    p.domain = {0.0, 2.0 * kPi, -0.5 * period, 0.5 * period, true, true};
    p.fd_scale = std::min(2.0 * kPi, period) / (2.0 * kPi);
    a.patches.push_back(std::move(p));
    a.sup_weighted_f = {(R + r) * (R + r)};
    a.embed = [=](int, double u, double v) {
        const double phi = phi_of(v);
        const double rho = R + r * std::cos(phi);
        return Vec3{rho * std::cos(u), rho * std::sin(u), r * std::sin(phi)};
    };
    return a;
}

PatchAtlas make_perturbed_sphere_atlas(double eps_z, double eps_x) {
    const double area = atlas_area(perturbed_sphere(eps_z, eps_x, 1.0), 1e-13);
    return perturbed_sphere(eps_z, eps_x, 1.0 / area);
}

std::vector<std::string> atlas_names() {
    return {"flat-torus", "stereographic-sphere", "torus-of-revolution", "perturbed-sphere"};
}

PatchAtlas make_atlas(const std::string& name, const std::map<std::string, double>& params) {
    auto get = [&](const char* key, double fallback) {
        auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    if (name == "flat-torus")
        return make_flat_torus_atlas();
    if (name == "stereographic-sphere")
        return make_stereographic_sphere_atlas(get("radius", 0.0));
    if (name == "torus-of-revolution")
        return make_torus_of_revolution_atlas(get("aspect", 0.5));
    if (name == "perturbed-sphere")
        return make_perturbed_sphere_atlas(get("eps_z", 0.3), get("eps_x", 0.2));
    throw std::invalid_argument("unknown surface atlas: " + name);
}

double atlas_area(const PatchAtlas& atlas, double rel_tol) {
    double total = 0.0;
    for (const auto& p : atlas.patches) {
        const auto& d = p.domain;
        const Integral in = integrate_rectangle(
            [&](double u, double v) { return p.weight_at(u, v) * p.f(u, v); }, d.u0, d.u1, d.v0,
            d.v1, rel_tol);
        check_integral(in, rel_tol, "atlas_area");
        total += in.value;
    }
    return total;
}

void validate_sampling_bounds(const PatchAtlas& atlas, int grid) {
    if (atlas.sup_weighted_f.size() != atlas.patches.size())
        throw std::invalid_argument("atlas: one sampling bound per chart is required");
    for (std::size_t i = 0; i < atlas.patches.size(); ++i) {
        const auto& p = atlas.patches[i];
        const auto& d = p.domain;
        for (int a = 0; a < grid; ++a) {
            for (int b = 0; b < grid; ++b) {
                const double u = d.u0 + (d.u1 - d.u0) * a / (grid - 1);
                const double v = d.v0 + (d.v1 - d.v0) * b / (grid - 1);
                const double wf = p.weight_at(u, v) * p.f(u, v);
                if (wf > atlas.sup_weighted_f[i] * (1.0 + 1e-12))
                    throw std::invalid_argument("atlas " + atlas.name + ": chart " + p.name +
                                                " exceeds its declared sampling bound");
            }
        }
    }
}

double gauss_bonnet_chi(const PatchAtlas& atlas, const CurvatureOptions& opts) {
    double total = 0.0;
    for (const auto& p : atlas.patches) {
        const auto& d = p.domain;
        const Integral in = integrate_rectangle(
            [&](double u, double v) {
                const double w = p.weight_at(u, v);
                if (w == 0.0)
                    return 0.0;
                return w * gaussian_curvature_value(p, u, v) * p.f(u, v);
            },
            d.u0, d.u1, d.v0, d.v1, opts.quad_rel_tol);
        check_integral(in, opts.quad_rel_tol, "gauss_bonnet_chi");
        total += in.value;
    }
    return total / (2.0 * kPi);
}

PowerSeries surface_average_series(const PatchAtlas& atlas, int order,
                                   const CurvatureOptions& opts, AveragingMode mode) {
    if (order < 0 || order > 3)
        throw std::invalid_argument("surface_average_series: order must be in [0, 3]");
    const int area_order = 2 * (order + 1);

    // Under the surface integral, lap K and bilap K are total derivatives and
    // (grad K)^2 = -K lap K after integrating by parts. Feeding the reversion a jet with
    // those replacements gives the integrated-by-parts coefficients without retyping them.
    auto coeffs_at = [&](const ConformalPatch& p, double u, double v, int j) {
        CurvatureJet jet;
        if (mode == AveragingMode::Pointwise && j >= 2) {
            jet = gaussian_curvature(p, u, v);
        } else {
            jet.K = gaussian_curvature_value(p, u, v);
            if (j == 3) {
                jet.lap_K = curvature_laplacian(p, u, v);
                jet.grad_K_sq = -jet.K * jet.lap_K;
            }
        }
        return invert_area_series(area_series_from_curvature(jet, area_order)).coeffs[j];
    };

    const double area = atlas_area(atlas, opts.quad_rel_tol);
    PowerSeries out;
    out.gamma = 0.5;
    out.coeffs.assign(static_cast<std::size_t>(order) + 1, 0.0);
    out.coeffs[0] = 1.0 / std::sqrt(kPi);
    for (int j = 1; j <= order; ++j) {
        // Higher coefficients carry finite-difference noise; accept a looser residual.
        const double tol = j >= 3 ? 1e3 * opts.quad_rel_tol : opts.quad_rel_tol;
        double total = 0.0;
        for (const auto& p : atlas.patches) {
            const auto& d = p.domain;
            const Integral in = integrate_rectangle(
                [&](double u, double v) {
                    const double w = p.weight_at(u, v);
                    if (w == 0.0)
                        return 0.0;
                    return w * p.f(u, v) * coeffs_at(p, u, v, j);
                },
                d.u0, d.u1, d.v0, d.v1, tol);
            check_integral(in, tol, "surface_average_series");
            total += in.value;
        }
        out.coeffs[j] = total / area;
    }
    return out;
}

}  // namespace knn
