#pragma once

#include "knn/curvature.hpp"

#include <array>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace knn {

using Vec3 = std::array<double, 3>;

/// A closed surface as a set of conformal charts whose weights sum to one pointwise.
struct PatchAtlas {
    std::string name;
    std::vector<ConformalPatch> patches;
    /// Rejection-sampling bounds: sup over each chart of weight * f.
    std::vector<double> sup_weighted_f;
    int declared_chi = 0;
    /// Chart point -> embedding in R^3, when the atlas has one.
    std::function<Vec3(int, double, double)> embed;
    /// Geodesic distance between embedded points, when known in closed form.
    std::function<double(const Vec3&, const Vec3&)> embedded_distance;
};

PatchAtlas make_flat_torus_atlas();
/// Round sphere of the given radius (default: unit area) from two stereographic charts
/// blended by a smooth compactly supported partition of unity.
PatchAtlas make_stereographic_sphere_atlas(double radius = 0.0);
/// Torus of revolution with minor/major radius ratio `aspect`, rescaled to unit area, as
/// one doubly periodic isothermal chart.
PatchAtlas make_torus_of_revolution_atlas(double aspect = 0.5);
/// Unit-area sphere with conformal factor exp(2 (eps_z z + eps_x x)).
PatchAtlas make_perturbed_sphere_atlas(double eps_z = 0.3, double eps_x = 0.2);

/// Built-in by name: "flat-torus", "stereographic-sphere", "torus-of-revolution",
/// "perturbed-sphere". Unknown names throw std::invalid_argument.
PatchAtlas make_atlas(const std::string& name, const std::map<std::string, double>& params = {});
std::vector<std::string> atlas_names();

/// Total measure sum_p integral of weight * f.
double atlas_area(const PatchAtlas& atlas, double rel_tol = 1e-10);

/// Grid-scans weight * f on every chart and throws if a declared bound is exceeded.
void validate_sampling_bounds(const PatchAtlas& atlas, int grid = 161);

/// (1/2pi) sum_p integral of weight K f du dv.
double gauss_bonnet_chi(const PatchAtlas& atlas, const CurvatureOptions& opts = {});

enum class AveragingMode {
    /// Drops total derivatives and uses (grad K)^2 -> -K lap K before integrating.
    IntegratedByParts,
    /// Integrates the pointwise inverse coefficients with finite-difference jets.
    Pointwise,
};

/// Surface average of the inverse-area coefficients c_0..c_order (order <= 3).
PowerSeries surface_average_series(const PatchAtlas& atlas, int order,
                                   const CurvatureOptions& opts = {},
                                   AveragingMode mode = AveragingMode::IntegratedByParts);

}  // namespace knn
