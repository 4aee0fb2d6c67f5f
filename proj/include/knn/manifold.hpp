#pragma once

#include "knn/catalog.hpp"
#include "knn/quadrature.hpp"
#include "knn/random.hpp"
#include "knn/regge.hpp"

#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace knn {

enum class ManifoldKind {
    FlatTorus2D,
    SphereGeodesic,
    SphereChord,
    FlatTorusD,
    ConformalPatchSet,
    Polyhedron,
};

/// A point of a manifold. Torus points use coords[0..d-1] in [0, 1); sphere points their
/// embedding (x, y, z); conformal points (u, v) in chart `chart_id`; polyhedron points
/// their embedding, with chart_id naming the face.
struct SurfacePoint {
    int chart_id = 0;
    std::array<double, 8> coords{};
};

class RejectionSamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A closed manifold of unit total volume.
class Manifold {
public:
    static Manifold flat_torus();
    static Manifold sphere_geodesic();
    static Manifold sphere_chord();
    static Manifold flat_torus_d(int d);
    static Manifold conformal(PatchAtlas atlas);
    static Manifold polyhedron(PolyhedralSurface surface);

    [[nodiscard]] ManifoldKind kind() const { return kind_; }
    [[nodiscard]] const std::string& name() const { return name_; }
    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] double total_area() const { return 1.0; }
    /// Curved surfaces have no flat neighbourhood and report {0, 0}.
    [[nodiscard]] FlatnessThreshold flatness() const { return flat_; }
    /// Largest distance between two points (infinity when not known in closed form).
    [[nodiscard]] double diameter() const { return diameter_; }
    /// Euler characteristic for surfaces; 0 for tori of any dimension.
    [[nodiscard]] int chi() const { return chi_; }
    /// Sphere radius for the sphere kinds.
    [[nodiscard]] double radius() const { return radius_; }

    SurfacePoint sample(RandomStream& rng) const;
    [[nodiscard]] double distance(const SurfacePoint& a, const SurfacePoint& b) const;
    /// Monotone key with the same ordering as distance(); cheaper where available.
    [[nodiscard]] double distance_key(const SurfacePoint& a, const SurfacePoint& b) const;
    [[nodiscard]] double key_to_distance(double key) const;
    [[nodiscard]] double disc_area(const SurfacePoint& x, double l) const;
    /// The inverse disc-area function, when it is the same at every point and known.
    [[nodiscard]] std::optional<AreaInverseFn> area_inverse() const;

    [[nodiscard]] const PatchAtlas* atlas() const { return atlas_.get(); }
    [[nodiscard]] const PolyhedralSurface* surface() const { return surface_.get(); }

    int max_rejection_attempts = 100000;

private:
    Manifold() = default;

    ManifoldKind kind_ = ManifoldKind::FlatTorus2D;
    std::string name_;
    int dim_ = 2;
    int chi_ = 0;
    double radius_ = 0.0;
    double diameter_ = 0.0;
    FlatnessThreshold flat_;
    std::shared_ptr<const PatchAtlas> atlas_;
    std::vector<double> chart_cdf_;  // rejection envelope mass per chart, cumulative
    std::shared_ptr<const PolyhedralSurface> surface_;
    std::vector<double> face_cdf_;
    std::vector<double> safe_radius_;
    std::vector<double> deficit_;
};

/// Built-in manifolds by name: flat-torus, sphere-geodesic, sphere-chord, flat-torus-d
/// (param "dim"), cube, tetrahedron, and the conformal atlases of catalog.hpp.
Manifold make_manifold(const std::string& name, const std::map<std::string, double>& params = {});
std::vector<std::string> manifold_names();

/// Minimum-image distance on the unit square torus.
inline double torus_distance(double ax, double ay, double bx, double by) {
    double dx = ax > bx ? ax - bx : bx - ax;
    double dy = ay > by ? ay - by : by - ay;
    if (dx > 0.5)
        dx = 1.0 - dx;
    if (dy > 0.5)
        dy = 1.0 - dy;
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace knn
