#pragma once

#include "knn/series.hpp"

#include <functional>
#include <string>
#include <vector>

namespace knn {

/// Radius l0 below which the surface is exactly Euclidean around every point, and w0 = A(l0).
/// w0 = 1 means the flat formula holds at all radii.
struct FlatnessThreshold {
    double l0 = 0.0;
    double w0 = 0.0;
};

enum class InverseKind { Series, Closed, Tabulated };

/// A^-1 : [0, 1] -> lengths, nondecreasing with A^-1(0) = 0.
struct AreaInverseFn {
    std::function<double(double)> eval;
    InverseKind kind = InverseKind::Closed;
    std::string name;

    static AreaInverseFn from_series(const PowerSeries& s);
    /// Shape-preserving cubic through (w_i, l_i); w must start at 0 and end at 1.
    static AreaInverseFn tabulated(std::vector<double> w, std::vector<double> l);
};

/// Closed forms: "flat-2d" sqrt(w/pi), "sphere-geodesic" arcsin(sqrt w)/sqrt(pi),
/// "sphere-chord" (same as flat-2d), "flat-torus-2d" (true unit square torus, valid up to
/// the diameter), "flat-d" (ball volume inverse in dimension d).
AreaInverseFn closed_area_inverse(const std::string& name, int d = 2);

/// Disc area of the unit square flat torus at radius l (exact for every l).
double flat_torus_disc_area(double l);

struct MomentResult {
    double value = 0.0;
    double error = 0.0;
};

/// Gamma(N+1)/(Gamma(N-k+1) Gamma(k)) * integral_0^1 [A^-1(w)]^alpha w^(k-1) (1-w)^(N-k) dw.
/// The interval is split at mu +- 2^i sigma of the Beta kernel so large N stays resolved.
/// Throws QuadratureError when rel_tol is not reached.
MomentResult moment_from_area_inverse(const AreaInverseFn& a, const MomentSpec& ms,
                                      double rel_tol = 1e-12);

/// sup_{w >= w0} [A^-1]^alpha times the Beta(k, N-k+1) mass above w0.
double remainder_bound(const AreaInverseFn& a, const FlatnessThreshold& flat,
                       const MomentSpec& ms);

}  // namespace knn
