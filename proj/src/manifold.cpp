#include "knn/manifold.hpp"

#include "knn/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace knn {

namespace {

constexpr double kPi = std::numbers::pi;
const double kSphereRadius = 0.5 / std::sqrt(kPi);

double ball_volume(int d) {
    const double dd = d;
    return std::pow(kPi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
}

// Volume of the ball of radius l intersected with the cube [-1/2, 1/2]^d, by nested
// quadrature over slices. A slice at height x is a (d-1)-ball of radius sqrt(l^2 - x^2).
double clipped_ball_volume(int d, double l) {
    if (l <= 0.0)
        return 0.0;
    if (d == 1)
        return 2.0 * std::min(l, 0.5);
    if (l <= 0.5)
        return ball_volume(d) * std::pow(l, d);
    if (l * l >= 0.25 * d)
        return 1.0;
    const double x_max = std::min(l, 0.5);
    auto slice = [&](double x) {
        return clipped_ball_volume(d - 1, std::sqrt(std::max(l * l - x * x, 0.0)));
    };
    // The slice radius crosses 1/2 at x = sqrt(l^2 - 1/4); split there to keep the kink on
    // a panel boundary.
    const double kink = std::sqrt(l * l - 0.25);
    double total = 0.0;
    if (kink < x_max) {
        total += integrate_adaptive(slice, 0.0, kink, 1e-11, 10).value;
        total += integrate_adaptive(slice, kink, x_max, 1e-11, 10).value;
    } else {
        total += integrate_adaptive(slice, 0.0, x_max, 1e-11, 10).value;
    }
    return 2.0 * total;
}

double chord_sq(const SurfacePoint& a, const SurfacePoint& b) {
    const double dx = a.coords[0] - b.coords[0];
    const double dy = a.coords[1] - b.coords[1];
    const double dz = a.coords[2] - b.coords[2];
    return dx * dx + dy * dy + dz * dz;
}

Point3 xyz(const SurfacePoint& p) { return {p.coords[0], p.coords[1], p.coords[2]}; }

}  // namespace

Manifold Manifold::flat_torus() {
    Manifold m;
    m.kind_ = ManifoldKind::FlatTorus2D;
    m.name_ = "flat-torus";
    m.dim_ = 2;
    m.chi_ = 0;
    m.diameter_ = std::sqrt(0.5);
    m.flat_ = {0.5, kPi / 4.0};
    return m;
}

Manifold Manifold::sphere_geodesic() {
    Manifold m;
    m.kind_ = ManifoldKind::SphereGeodesic;
    m.name_ = "sphere-geodesic";
    m.chi_ = 2;
    m.radius_ = kSphereRadius;
    m.diameter_ = kPi * kSphereRadius;
    m.flat_ = {0.0, 0.0};
    return m;
}

Manifold Manifold::sphere_chord() {
    Manifold m;
    m.kind_ = ManifoldKind::SphereChord;
    m.name_ = "sphere-chord";
    m.chi_ = 2;
    m.radius_ = kSphereRadius;
    m.diameter_ = 2.0 * kSphereRadius;
    // A chord ball cuts a cap of area pi l^2 at every radius.
    m.flat_ = {2.0 * kSphereRadius, 1.0};
    return m;
}

Manifold Manifold::flat_torus_d(int d) {
    if (d < 1 || d > 8)
        throw std::invalid_argument("flat-torus-d: dimension must be in [1, 8]");
    Manifold m;
    m.kind_ = ManifoldKind::FlatTorusD;
    m.name_ = "flat-torus-d";
    m.dim_ = d;
    m.diameter_ = 0.5 * std::sqrt(static_cast<double>(d));
    m.flat_ = {0.5, ball_volume(d) * std::pow(0.5, d)};
    return m;
}

Manifold Manifold::conformal(PatchAtlas atlas) {
    if (atlas.patches.empty())
        throw std::invalid_argument("conformal manifold: atlas has no charts");
    validate_sampling_bounds(atlas);
    const double area = atlas_area(atlas);
    if (std::abs(area - 1.0) > 1e-8)
        throw std::invalid_argument("conformal manifold: atlas " + atlas.name +
                                    " does not have unit area");
    Manifold m;
    m.kind_ = ManifoldKind::ConformalPatchSet;
    m.name_ = atlas.name;
    m.chi_ = atlas.declared_chi;
    m.diameter_ = std::numeric_limits<double>::infinity();
    m.flat_ = {0.0, 0.0};
    double acc = 0.0;
    for (std::size_t i = 0; i < atlas.patches.size(); ++i) {
        const auto& d = atlas.patches[i].domain;
        acc += (d.u1 - d.u0) * (d.v1 - d.v0) * atlas.sup_weighted_f[i];
        m.chart_cdf_.push_back(acc);
    }
    m.atlas_ = std::make_shared<const PatchAtlas>(std::move(atlas));
    return m;
}

Manifold Manifold::polyhedron(PolyhedralSurface surface) {
    const auto euler = deficit_and_euler(surface);
    if (std::abs(surface.total_area() - 1.0) > 1e-12)
        normalize_area(surface);
    Manifold m;
    m.kind_ = ManifoldKind::Polyhedron;
    m.name_ = surface.name;
    m.chi_ = euler.chi_combinatorial();
    m.flat_ = {0.0, 0.0};
    double acc = 0.0;
    for (std::size_t f = 0; f < surface.faces.size(); ++f) {
        acc += surface.face_area(f);
        m.face_cdf_.push_back(acc);
    }
    for (std::size_t v = 0; v < surface.vertices.size(); ++v)
        m.safe_radius_.push_back(vertex_safe_radius(surface, static_cast<int>(v)));
    for (const auto& v : euler.vertices)
        m.deficit_.push_back(v.deficit);
    m.diameter_ = std::numeric_limits<double>::infinity();
    m.surface_ = std::make_shared<const PolyhedralSurface>(std::move(surface));
    return m;
}

SurfacePoint Manifold::sample(RandomStream& rng) const {
    SurfacePoint p;
    switch (kind_) {
    case ManifoldKind::FlatTorus2D:
        p.coords[0] = rng.uniform();
        p.coords[1] = rng.uniform();
        return p;
    case ManifoldKind::FlatTorusD:
        for (int i = 0; i < dim_; ++i)
            p.coords[i] = rng.uniform();
        return p;
    case ManifoldKind::SphereGeodesic:
    case ManifoldKind::SphereChord: {
        // Marsaglia (1972): (x1, x2) uniform in the unit disc maps to a uniform point on the
        // sphere; z = 1 - 2s is uniform on [-1, 1] as Archimedes requires.
        double x1, x2, s;
        do {
            x1 = 2.0 * rng.uniform() - 1.0;
            x2 = 2.0 * rng.uniform() - 1.0;
            s = x1 * x1 + x2 * x2;
        } while (s >= 1.0);
        const double t = 2.0 * std::sqrt(1.0 - s);
        p.coords[0] = radius_ * x1 * t;
        p.coords[1] = radius_ * x2 * t;
        p.coords[2] = radius_ * (1.0 - 2.0 * s);
        return p;
    }
    case ManifoldKind::ConformalPatchSet: {
        const auto& atlas = *atlas_;
        for (int attempt = 0; attempt < max_rejection_attempts; ++attempt) {
            const double pick = rng.uniform() * chart_cdf_.back();
            const auto hit = static_cast<std::size_t>(
                std::upper_bound(chart_cdf_.begin(), chart_cdf_.end(), pick) - chart_cdf_.begin());
            const std::size_t chart = std::min(hit, chart_cdf_.size() - 1);
            const auto& patch = atlas.patches[chart];
            const auto& d = patch.domain;
            const double u = d.u0 + (d.u1 - d.u0) * rng.uniform();
            const double v = d.v0 + (d.v1 - d.v0) * rng.uniform();
            const double accept = patch.weight_at(u, v) * patch.f(u, v);
            if (rng.uniform() * atlas.sup_weighted_f[chart] < accept) {
                p.chart_id = static_cast<int>(chart);
                p.coords[0] = u;
                p.coords[1] = v;
                return p;
            }
        }
        throw RejectionSamplingError("conformal sampler: no acceptance within the attempt limit; "
                                     "the declared sup f bound is too loose");
    }
    case ManifoldKind::Polyhedron: {
        const auto& s = *surface_;
        const double pick = rng.uniform() * face_cdf_.back();
        auto f = static_cast<std::size_t>(
            std::upper_bound(face_cdf_.begin(), face_cdf_.end(), pick) - face_cdf_.begin());
        f = std::min(f, face_cdf_.size() - 1);
        const auto& face = s.faces[f];
        // Fan triangulation from corner 0, triangle chosen by area.
        std::vector<double> tri_cdf;
        double acc = 0.0;
        for (std::size_t i = 1; i + 1 < face.size(); ++i) {
            const Point3& a = s.vertices[face[0]];
            const Point3& b = s.vertices[face[i]];
            const Point3& c = s.vertices[face[i + 1]];
            const Point3 ab{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
            const Point3 ac{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
            acc += 0.5 * std::hypot(ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
                                    ab[0] * ac[1] - ab[1] * ac[0]);
            tri_cdf.push_back(acc);
        }
        const double tpick = rng.uniform() * acc;
        auto t = static_cast<std::size_t>(
            std::upper_bound(tri_cdf.begin(), tri_cdf.end(), tpick) - tri_cdf.begin());
        t = std::min(t, tri_cdf.size() - 1);
        const double r1 = std::sqrt(rng.uniform());
        const double r2 = rng.uniform();
        const Point3& a = s.vertices[face[0]];
        const Point3& b = s.vertices[face[t + 1]];
        const Point3& c = s.vertices[face[t + 2]];
        for (int i = 0; i < 3; ++i)
            p.coords[i] = (1.0 - r1) * a[i] + r1 * (1.0 - r2) * b[i] + r1 * r2 * c[i];
        p.chart_id = static_cast<int>(f);
        return p;
    }
    }
    throw std::logic_error("unhandled manifold kind");
}

double Manifold::distance_key(const SurfacePoint& a, const SurfacePoint& b) const {
    switch (kind_) {
    case ManifoldKind::FlatTorus2D:
        return torus_distance(a.coords[0], a.coords[1], b.coords[0], b.coords[1]);
    case ManifoldKind::FlatTorusD: {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i) {
            double dx = std::abs(a.coords[i] - b.coords[i]);
            if (dx > 0.5)
                dx = 1.0 - dx;
            s += dx * dx;
        }
        return s;
    }
    case ManifoldKind::SphereGeodesic:
    case ManifoldKind::SphereChord:
        return chord_sq(a, b);
    case ManifoldKind::ConformalPatchSet:
    case ManifoldKind::Polyhedron:
        return distance(a, b);
    }
    throw std::logic_error("unhandled manifold kind");
}

double Manifold::key_to_distance(double key) const {
    switch (kind_) {
    case ManifoldKind::FlatTorusD:
    case ManifoldKind::SphereChord:
        return std::sqrt(key);
    case ManifoldKind::SphereGeodesic:
        return 2.0 * radius_ * std::asin(std::min(1.0, std::sqrt(key) / (2.0 * radius_)));
    default:
        return key;
    }
}

double Manifold::distance(const SurfacePoint& a, const SurfacePoint& b) const {
    switch (kind_) {
    case ManifoldKind::FlatTorus2D:
    case ManifoldKind::FlatTorusD:
    case ManifoldKind::SphereGeodesic:
    case ManifoldKind::SphereChord:
        return key_to_distance(distance_key(a, b));
    case ManifoldKind::ConformalPatchSet: {
        const auto& atlas = *atlas_;
        if (!atlas.embed || !atlas.embedded_distance)
            throw std::invalid_argument("distance: atlas " + atlas.name +
                                        " has no closed-form geodesic distance");
        return atlas.embedded_distance(atlas.embed(a.chart_id, a.coords[0], a.coords[1]),
                                       atlas.embed(b.chart_id, b.coords[0], b.coords[1]));
    }
    case ManifoldKind::Polyhedron:
        return unfolded_distance(*surface_, a.chart_id, xyz(a), b.chart_id, xyz(b));
    }
    throw std::logic_error("unhandled manifold kind");
}

double Manifold::disc_area(const SurfacePoint& x, double l) const {
    if (l < 0.0)
        throw std::domain_error("disc_area: negative radius");
    if (l == 0.0)
        return 0.0;
    switch (kind_) {
    case ManifoldKind::FlatTorus2D:
        return flat_torus_disc_area(l);
    case ManifoldKind::FlatTorusD:
        return clipped_ball_volume(dim_, l);
    case ManifoldKind::SphereGeodesic: {
        if (l >= diameter_)
            return 1.0;
        const double s = std::sin(std::sqrt(kPi) * l);
        return s * s;
    }
    case ManifoldKind::SphereChord:
        return l >= diameter_ ? 1.0 : kPi * l * l;
    case ManifoldKind::ConformalPatchSet: {
        const auto& patch = atlas_->patches.at(static_cast<std::size_t>(x.chart_id));
        return disc_area_numeric(patch, x.coords[0], x.coords[1], l).value;
    }
    case ManifoldKind::Polyhedron: {
        const auto& s = *surface_;
        const auto& face = s.faces.at(static_cast<std::size_t>(x.chart_id));
        int best_v = face[0];
        double best_r = std::numeric_limits<double>::infinity();
        for (int v : face) {
            const auto& q = s.vertices[v];
            const double r = std::hypot(q[0] - x.coords[0], q[1] - x.coords[1], q[2] - x.coords[2]);
            if (r < best_r) {
                best_r = r;
                best_v = v;
            }
        }
        if (best_r + l > safe_radius_[best_v])
            throw std::domain_error(
                "disc_area: disc reaches beyond a single vertex cone on this polyhedron");
        return cone_disc_area(deficit_[best_v], best_r, l);
    }
    }
    throw std::logic_error("unhandled manifold kind");
}

std::optional<AreaInverseFn> Manifold::area_inverse() const {
    switch (kind_) {
    case ManifoldKind::FlatTorus2D:
        return closed_area_inverse("flat-torus-2d");
    case ManifoldKind::SphereGeodesic:
        return closed_area_inverse("sphere-geodesic");
    case ManifoldKind::SphereChord:
        return closed_area_inverse("sphere-chord");
    default:
        return std::nullopt;
    }
}

std::vector<std::string> manifold_names() {
    std::vector<std::string> out{"flat-torus", "sphere-geodesic", "sphere-chord", "flat-torus-d",
                                 "cube", "tetrahedron"};
    for (const auto& n : atlas_names())
        if (n != "flat-torus")
            out.push_back(n);
    return out;
}

Manifold make_manifold(const std::string& name, const std::map<std::string, double>& params) {
    if (name == "flat-torus")
        return Manifold::flat_torus();
    if (name == "sphere-geodesic")
        return Manifold::sphere_geodesic();
    if (name == "sphere-chord")
        return Manifold::sphere_chord();
    if (name == "flat-torus-d") {
        auto it = params.find("dim");
        const double d = it == params.end() ? 2.0 : it->second;
        if (d != std::floor(d))
            throw std::invalid_argument("flat-torus-d: dim must be an integer");
        return Manifold::flat_torus_d(static_cast<int>(d));
    }
    if (name == "cube")
        return Manifold::polyhedron(make_cube());
    if (name == "tetrahedron")
        return Manifold::polyhedron(make_tetrahedron());
    for (const auto& n : atlas_names()) {
        if (n == name && n != "flat-torus")
            return Manifold::conformal(make_atlas(name, params));
    }
    throw std::invalid_argument("unknown manifold: " + name);
}

}  // namespace knn
