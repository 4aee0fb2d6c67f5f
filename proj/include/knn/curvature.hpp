#pragma once

#include "knn/series.hpp"

#include <functional>
#include <string>
#include <vector>

namespace knn {

/// f and its partial derivatives through second order at one chart point.
struct MetricJet {
    double f = 1.0;
    double fu = 0.0, fv = 0.0;
    double fuu = 0.0, fuv = 0.0, fvv = 0.0;
};

struct ChartDomain {
    double u0 = 0.0, u1 = 1.0;
    double v0 = 0.0, v1 = 1.0;
    bool periodic_u = false;
    bool periodic_v = false;

    [[nodiscard]] bool contains(double u, double v) const;
};

/// A chart with conformal metric ds^2 = f(u,v) (du^2 + dv^2) and measure f du dv.
/// `weight` is this chart's share of a partition of unity over an atlas.
struct ConformalPatch {
    std::string name;
    std::function<MetricJet(double, double)> metric;
    ChartDomain domain;
    std::function<double(double, double)> weight;
    double fd_scale = 1.0;  // coordinate length setting finite-difference steps

    [[nodiscard]] double f(double u, double v) const { return metric(u, v).f; }
    [[nodiscard]] double weight_at(double u, double v) const { return weight ? weight(u, v) : 1.0; }
};

/// Gaussian curvature and the derivative scalars entering the disc-area expansion.
/// lap_K and bilap_K are Laplace-Beltrami operators, grad_K_sq = g^ij d_iK d_jK.
struct CurvatureJet {
    double K = 0.0;
    double lap_K = 0.0;
    double grad_K_sq = 0.0;
    double bilap_K = 0.0;
};

struct GeodesicState {
    double s = 0.0;
    double u = 0.0, v = 0.0;
    double du_ds = 0.0, dv_ds = 0.0;
};

struct GeodesicPath {
    std::vector<GeodesicState> states;
    bool exited_domain = false;
    double max_speed_drift = 0.0;  // max |f (u'^2 + v'^2) - 1|
};

/// A(l) = leading * l^dim * sum_i bracket[i] l^(2i); bracket[0] is 1 for a true area series.
struct AreaPolynomial {
    int dim = 2;
    double leading = 0.0;
    std::vector<double> bracket;

    [[nodiscard]] double evaluate(double l) const;
};

struct CurvatureOptions {
    double ode_rel_tol = 1e-12;
    double quad_rel_tol = 1e-10;
};

struct AreaEstimate {
    double value = 0.0;
    double error = 0.0;
    int directions = 0;
};

/// K = (f_u^2 + f_v^2 - f f_uu - f f_vv) / (2 f^3). Throws std::domain_error if f <= 0.
double gaussian_curvature_value(const ConformalPatch& p, double u, double v);

/// K analytically; its derivative scalars by Richardson-extrapolated central differences.
CurvatureJet gaussian_curvature(const ConformalPatch& p, double u, double v);

/// Only the Laplace-Beltrami of K, same stencil as gaussian_curvature.
double curvature_laplacian(const ConformalPatch& p, double u, double v);

/// Disc-area expansion through l^order (order in {2,4,6,8}).
AreaPolynomial area_series_from_curvature(const CurvatureJet& j, int order);

/// Flat ball volume pi^(d/2)/(d/2)! l^d as an AreaPolynomial.
AreaPolynomial flat_area_polynomial(int d);

/// Formal reversion of an area series into A^-1(w) = w^(1/d) sum_j c_j w^(2j/d).
/// `order` is the last coefficient index kept; -1 keeps as many as the input supports.
PowerSeries invert_area_series(const AreaPolynomial& area, int order = -1);

/// Integrates the geodesic equations from `start` up to arc length s_max.
GeodesicPath geodesic_trace(const ConformalPatch& p, const GeodesicState& start, double s_max,
                            double tol = 1e-12);

/// Geodesic distance between two chart points by shooting (Newton on the initial direction
/// and length). Only meaningful inside the injectivity radius.
double geodesic_distance_by_shooting(const ConformalPatch& p, double u0, double v0, double u1,
                                     double v1, double tol = 1e-12);

/// Area of the geodesic disc of radius l about (u, v), integrating the polar Jacobian
/// along geodesics shot in every direction.
AreaEstimate disc_area_numeric(const ConformalPatch& p, double u, double v, double l,
                               const CurvatureOptions& opts = {});

/// Largest relative mismatch between the supplied derivatives of f and central differences
/// of f on an n x n grid over the chart domain.
double derivative_mismatch(const ConformalPatch& p, int n = 9);

}  // namespace knn
