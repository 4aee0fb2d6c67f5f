#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>

namespace knn {

using Point3 = std::array<double, 3>;
using Point2 = std::array<double, 2>;

/// Closed polygonal surface. Faces list vertex indices counter-clockwise seen from outside.
/// `face_corners` optionally gives each face's corners in its own flat 2-D frame; it is used
/// instead of `vertices` when the surface has no embedding (the flat torus mesh).
struct PolyhedralSurface {
    std::string name;
    std::vector<Point3> vertices;
    std::vector<std::vector<int>> faces;
    std::vector<std::vector<Point2>> face_corners;
    std::optional<int> declared_chi;

    [[nodiscard]] double face_area(std::size_t f) const;
    [[nodiscard]] double total_area() const;
};

struct VertexData {
    double theta = 0.0;    // angle sum
    double deficit = 0.0;  // 2 pi - theta
};

struct EulerResult {
    std::vector<VertexData> vertices;
    double deficit_sum = 0.0;
    double chi_from_deficits = 0.0;
    int V = 0, E = 0, F = 0;
    [[nodiscard]] int chi_combinatorial() const { return V - E + F; }
};

/// Angle sums and deficits from face geometry. Throws std::invalid_argument if some edge is
/// not shared by exactly two faces or the faces are not consistently oriented.
EulerResult deficit_and_euler(const PolyhedralSurface& p);

/// x / pi as the nearest fraction with denominator <= max_den.
boost::rational<long long> as_multiple_of_pi(double x, long long max_den = 1000);

/// Cube and regular tetrahedron of unit total area.
PolyhedralSurface make_cube();
PolyhedralSurface make_tetrahedron();
/// n x n square grid of the unit flat torus, two triangles per cell, intrinsic geometry only.
PolyhedralSurface make_flat_torus_mesh(int n = 4);

/// Subdivided octahedron projected to the sphere with random radial jitter (genus 0).
PolyhedralSurface make_random_sphere_mesh(std::uint64_t seed, int subdivisions, double jitter);
/// Triangulated torus of revolution on an n x m grid with random jitter (genus 1).
PolyhedralSurface make_random_torus_mesh(std::uint64_t seed, int n, int m, double jitter);

/// Reads an OFF mesh (vertices and polygonal faces).
PolyhedralSurface read_off(std::istream& in, const std::string& name = "off");

/// Rescales the embedding so the total area is 1.
void normalize_area(PolyhedralSurface& p);

/// Area of a geodesic disc of radius l whose center lies at distance r_vertex from the apex
/// of a cone with the given deficit, computed on the unrolled sector. Exact while the disc
/// touches no other vertex.
double cone_disc_area(double deficit, double r_vertex, double l);

/// Largest radius about vertex v within which the surface is exactly a cone: the distance
/// from v to the nearest edge of its incident faces that does not contain v.
double vertex_safe_radius(const PolyhedralSurface& p, int v);

/// Shortest surface path between points a (on face fa) and b (on face fb), taken as the
/// minimum straight-line distance over all unfoldings along simple face sequences whose
/// segment crosses every shared edge. Only the built-in cube and tetrahedron are accepted.
double unfolded_distance(const PolyhedralSurface& p, int fa, const Point3& a, int fb,
                         const Point3& b);

}  // namespace knn
