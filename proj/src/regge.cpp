#include "knn/regge.hpp"

#include "knn/random.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace knn {

namespace {

constexpr double kPi = std::numbers::pi;

Point3 sub(const Point3& a, const Point3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Point3& a, const Point3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Point3 cross(const Point3& a, const Point3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Point3& a) { return std::sqrt(dot(a, a)); }
Point3 scale(const Point3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

double cross2(const Point2& a, const Point2& b) { return a[0] * b[1] - a[1] * b[0]; }
Point2 sub2(const Point2& a, const Point2& b) { return {a[0] - b[0], a[1] - b[1]}; }

double point_segment_distance(const Point2& x, const Point2& p, const Point2& q) {
    const Point2 d = sub2(q, p);
    const double len2 = d[0] * d[0] + d[1] * d[1];
    double t = len2 > 0.0 ? ((x[0] - p[0]) * d[0] + (x[1] - p[1]) * d[1]) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x[0] - p[0] - t * d[0], x[1] - p[1] - t * d[1]);
}

struct FaceFrame {
    Point3 origin, e1, e2;
    [[nodiscard]] Point2 project(const Point3& x) const {
        const Point3 d = sub(x, origin);
        return {dot(d, e1), dot(d, e2)};
    }
};

// Orthonormal frame in the plane of face f, with e1 along its first edge. The Newell normal
// handles non-triangular faces.
FaceFrame face_frame(const PolyhedralSurface& p, std::size_t f) {
    const auto& face = p.faces[f];
    const Point3& o = p.vertices[face[0]];
    const Point3 e1raw = sub(p.vertices[face[1]], o);
    const Point3 e1 = scale(e1raw, 1.0 / norm(e1raw));
    Point3 n{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < face.size(); ++i) {
        const Point3& a = p.vertices[face[i]];
        const Point3& b = p.vertices[face[(i + 1) % face.size()]];
        n = {n[0] + (a[1] - b[1]) * (a[2] + b[2]), n[1] + (a[2] - b[2]) * (a[0] + b[0]),
             n[2] + (a[0] - b[0]) * (a[1] + b[1])};
    }
    n = scale(n, 1.0 / norm(n));
    return {o, e1, cross(n, e1)};
}

// Corners of face f in its own flat frame.
std::vector<Point2> local_corners(const PolyhedralSurface& p, std::size_t f) {
    if (!p.face_corners.empty())
        return p.face_corners[f];
    const FaceFrame fr = face_frame(p, f);
    std::vector<Point2> out;
    out.reserve(p.faces[f].size());
    for (int v : p.faces[f])
        out.push_back(fr.project(p.vertices[v]));
    return out;
}

Point2 to_local(const PolyhedralSurface& p, std::size_t f, const Point3& x) {
    return face_frame(p, f).project(x);
}

struct Rigid2 {
    double c = 1.0, s = 0.0;
    Point2 t{0.0, 0.0};
    [[nodiscard]] Point2 apply(const Point2& x) const {
        return {c * x[0] - s * x[1] + t[0], s * x[0] + c * x[1] + t[1]};
    }
};

// Orientation-preserving motion taking (p0, p1) onto (q0, q1); |p1 - p0| = |q1 - q0|.
Rigid2 align(const Point2& p0, const Point2& p1, const Point2& q0, const Point2& q1) {
    const double a = std::atan2(q1[1] - q0[1], q1[0] - q0[0]) -
                     std::atan2(p1[1] - p0[1], p1[0] - p0[0]);
    Rigid2 r;
    r.c = std::cos(a);
    r.s = std::sin(a);
    const Point2 rp = r.apply(p0);
    r.t = {q0[0] - rp[0], q0[1] - rp[1]};
    return r;
}

bool segment_crosses(const Point2& a, const Point2& b, const Point2& p, const Point2& q) {
    const double scale2 = std::max({std::abs(a[0]), std::abs(a[1]), std::abs(b[0]),
                                    std::abs(b[1]), std::abs(p[0]), std::abs(p[1]),
                                    std::abs(q[0]), std::abs(q[1]), 1e-300});
    const double eps = 1e-12 * scale2 * scale2;
    const double o1 = cross2(sub2(b, a), sub2(p, a));
    const double o2 = cross2(sub2(b, a), sub2(q, a));
    const double o3 = cross2(sub2(q, p), sub2(a, p));
    const double o4 = cross2(sub2(q, p), sub2(b, p));
    return o1 * o2 <= eps * eps && o3 * o4 <= eps * eps;
}

struct EdgeKey {
    int a, b;
    bool operator<(const EdgeKey& o) const { return a != o.a ? a < o.a : b < o.b; }
};

// For each (face, edge index) the neighbouring face and its matching edge index.
std::vector<std::vector<std::pair<int, int>>> adjacency(const PolyhedralSurface& p) {
    std::map<EdgeKey, std::pair<int, int>> directed;
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
        const auto& face = p.faces[f];
        for (std::size_t i = 0; i < face.size(); ++i) {
            const EdgeKey k{face[i], face[(i + 1) % face.size()]};
            if (!directed.emplace(k, std::pair<int, int>{static_cast<int>(f), static_cast<int>(i)})
                     .second)
                throw std::invalid_argument(
                    "mesh is not consistently oriented (directed edge repeated)");
        }
    }
    std::vector<std::vector<std::pair<int, int>>> adj(p.faces.size());
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
        const auto& face = p.faces[f];
        adj[f].resize(face.size());
        for (std::size_t i = 0; i < face.size(); ++i) {
            auto it = directed.find({face[(i + 1) % face.size()], face[i]});
            if (it == directed.end())
                throw std::invalid_argument("mesh is not closed: edge with a single face");
            adj[f][i] = it->second;
        }
    }
    return adj;
}

PolyhedralSurface finish(PolyhedralSurface p) {
    normalize_area(p);
    return p;
}

}  // namespace

double PolyhedralSurface::face_area(std::size_t f) const {
    const auto c = local_corners(*this, f);
    double a = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        a += cross2(c[i], c[(i + 1) % c.size()]);
    return 0.5 * std::abs(a);
}

double PolyhedralSurface::total_area() const {
    double a = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f)
        a += face_area(f);
    return a;
}

EulerResult deficit_and_euler(const PolyhedralSurface& p) {
    if (p.faces.empty())
        throw std::invalid_argument("deficit_and_euler: empty mesh");
    (void)adjacency(p);  // closedness and orientation checks

    EulerResult out;
    out.vertices.assign(p.vertices.size(), VertexData{});
    std::vector<bool> used(p.vertices.size(), false);
    std::map<EdgeKey, int> edges;
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
        const auto& face = p.faces[f];
        const auto c = local_corners(p, f);
        const std::size_t n = face.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Point2 prev = sub2(c[(i + n - 1) % n], c[i]);
            const Point2 next = sub2(c[(i + 1) % n], c[i]);
            const double ang = std::atan2(std::abs(cross2(prev, next)),
                                          prev[0] * next[0] + prev[1] * next[1]);
            out.vertices[face[i]].theta += ang;
            used[face[i]] = true;
            const int a = face[i], b = face[(i + 1) % n];
            edges[{std::min(a, b), std::max(a, b)}] += 1;
        }
    }
    double sum = 0.0;
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
        if (!used[v])
            continue;
        out.vertices[v].deficit = 2.0 * kPi - out.vertices[v].theta;
        sum += out.vertices[v].deficit;
        ++out.V;
    }
    out.E = static_cast<int>(edges.size());
    out.F = static_cast<int>(p.faces.size());
    out.deficit_sum = sum;
    out.chi_from_deficits = sum / (2.0 * kPi);
    return out;
}

boost::rational<long long> as_multiple_of_pi(double x, long long max_den) {
    const double r = x / kPi;
    boost::rational<long long> best(static_cast<long long>(std::llround(r)), 1);
    double best_err = std::abs(r - boost::rational_cast<double>(best));
    for (long long d = 2; d <= max_den; ++d) {
        const boost::rational<long long> q(static_cast<long long>(std::llround(r * d)), d);
        const double err = std::abs(r - boost::rational_cast<double>(q));
        if (err < best_err - 1e-15) {
            best = q;
            best_err = err;
        }
    }
    return best;
}

PolyhedralSurface make_cube() {
    PolyhedralSurface p;
    p.name = "cube";
    for (int i = 0; i < 8; ++i)
        p.vertices.push_back({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)});
    p.faces = {{0, 2, 3, 1}, {4, 5, 7, 6}, {0, 1, 5, 4}, {2, 6, 7, 3}, {0, 4, 6, 2}, {1, 3, 7, 5}};
    p.declared_chi = 2;
    return finish(std::move(p));
}

PolyhedralSurface make_tetrahedron() {
    PolyhedralSurface p;
    p.name = "tetrahedron";
    p.vertices = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
    p.faces = {{0, 1, 2}, {0, 3, 1}, {0, 2, 3}, {1, 3, 2}};
    p.declared_chi = 2;
    return finish(std::move(p));
}

PolyhedralSurface make_flat_torus_mesh(int n) {
    if (n < 3)
        throw std::invalid_argument("flat torus mesh: need n >= 3");
    PolyhedralSurface p;
    p.name = "flat-torus-mesh";
    const double h = 1.0 / n;
    auto id = [n](int i, int j) { return ((i + n) % n) * n + (j + n) % n; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            p.vertices.push_back({i * h, j * h, 0.0});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            p.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            p.face_corners.push_back({{0.0, 0.0}, {h, 0.0}, {h, h}});
            p.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            p.face_corners.push_back({{0.0, 0.0}, {h, h}, {0.0, h}});
        }
    }
    p.declared_chi = 0;
    return p;
}

PolyhedralSurface make_random_sphere_mesh(std::uint64_t seed, int subdivisions, double jitter) {
    PolyhedralSurface p;
    p.name = "random-sphere";
    p.vertices = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
    p.faces = {{0, 2, 4}, {2, 1, 4}, {1, 3, 4}, {3, 0, 4},
               {2, 0, 5}, {1, 2, 5}, {3, 1, 5}, {0, 3, 5}};
    for (int s = 0; s < subdivisions; ++s) {
        std::map<EdgeKey, int> mid;
        auto midpoint = [&](int a, int b) {
            const EdgeKey k{std::min(a, b), std::max(a, b)};
            auto it = mid.find(k);
            if (it != mid.end())
                return it->second;
            const Point3& x = p.vertices[a];
            const Point3& y = p.vertices[b];
            Point3 m{0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1]), 0.5 * (x[2] + y[2])};
            p.vertices.push_back(scale(m, 1.0 / norm(m)));
            const int idx = static_cast<int>(p.vertices.size()) - 1;
            mid.emplace(k, idx);
            return idx;
        };
        std::vector<std::vector<int>> next;
        for (const auto& f : p.faces) {
            const int ab = midpoint(f[0], f[1]), bc = midpoint(f[1], f[2]),
                      ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({ab, f[1], bc});
            next.push_back({ca, bc, f[2]});
            next.push_back({ab, bc, ca});
        }
        p.faces = std::move(next);
    }
    RandomStream rng(seed, 0);
    for (auto& v : p.vertices)
        v = scale(v, 1.0 + jitter * (2.0 * rng.uniform() - 1.0));
    p.declared_chi = 2;
    return finish(std::move(p));
}

PolyhedralSurface make_random_torus_mesh(std::uint64_t seed, int n, int m, double jitter) {
    if (n < 3 || m < 3)
        throw std::invalid_argument("torus mesh: need n, m >= 3");
    PolyhedralSurface p;
    p.name = "random-torus";
    const double R = 1.0, r = 0.4;
    RandomStream rng(seed, 0);
    auto id = [n, m](int i, int j) { return ((i + n) % n) * m + (j + m) % m; };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            const double u = 2.0 * kPi * i / n, v = 2.0 * kPi * j / m;
            const double rho = R + r * std::cos(v);
            Point3 x{rho * std::cos(u), rho * std::sin(u), r * std::sin(v)};
            for (auto& c : x)
                c += jitter * r * (2.0 * rng.uniform() - 1.0);
            p.vertices.push_back(x);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            p.faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            p.faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }
    }
    p.declared_chi = 0;
    return finish(std::move(p));
}

PolyhedralSurface read_off(std::istream& in, const std::string& name) {
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string t;
        while (ls >> t)
            tokens.push_back(t);
    }
    std::size_t pos = 0;
    auto next = [&]() -> const std::string& {
        if (pos >= tokens.size())
            throw std::invalid_argument("OFF: unexpected end of file");
        return tokens[pos++];
    };
    if (next() != "OFF")
        throw std::invalid_argument("OFF: missing header");
    PolyhedralSurface p;
    p.name = name;
    try {
        const long nv = std::stol(next());
        const long nf = std::stol(next());
        (void)next();  // edge count, unused
        if (nv < 3 || nf < 2)
            throw std::invalid_argument("OFF: too few vertices or faces");
        for (long i = 0; i < nv; ++i)
            p.vertices.push_back({std::stod(next()), std::stod(next()), std::stod(next())});
        for (long f = 0; f < nf; ++f) {
            const long k = std::stol(next());
            if (k < 3)
                throw std::invalid_argument("OFF: face with fewer than 3 vertices");
            std::vector<int> face;
            for (long i = 0; i < k; ++i) {
                const long v = std::stol(next());
                if (v < 0 || v >= nv)
                    throw std::invalid_argument("OFF: vertex index out of range");
                face.push_back(static_cast<int>(v));
            }
            p.faces.push_back(std::move(face));
        }
    } catch (const std::logic_error& e) {
        if (dynamic_cast<const std::invalid_argument*>(&e) &&
            std::string(e.what()).rfind("OFF", 0) == 0)
            throw;
        throw std::invalid_argument(std::string("OFF: malformed number: ") + e.what());
    }
    return p;
}

void normalize_area(PolyhedralSurface& p) {
    const double a = p.total_area();
    if (!(a > 0.0))
        throw std::invalid_argument("normalize_area: zero area");
    const double s = 1.0 / std::sqrt(a);
    for (auto& v : p.vertices)
        v = scale(v, s);
    for (auto& face : p.face_corners)
        for (auto& c : face)
            c = {c[0] * s, c[1] * s};
}

double cone_disc_area(double deficit, double r, double l) {
    if (!(deficit >= 0.0 && deficit < 2.0 * kPi))
        throw std::domain_error("cone_disc_area: deficit must lie in [0, 2 pi)");
    if (r < 0.0 || l < 0.0)
        throw std::domain_error("cone_disc_area: negative distance");
    if (l == 0.0)
        return 0.0;
    // Unroll the cone into a sector of opening theta with the center on its bisector at
    // distance r from the apex. Every point of the sector is within pi of the center's
    // direction, so the disc is the plane disc clipped to the sector.
    const double theta = 2.0 * kPi - deficit;
    const double half = 0.5 * theta;
    const double T = r * std::sin(half);  // distance from the center to either cut line
    auto strip = [&](double t) {
        return t * std::sqrt(std::max(l * l - t * t, 0.0)) + l * l * std::asin(std::min(t / l, 1.0));
    };
    if (r <= l) {
        // Polar integration about the apex: (1/2) integral rho(psi)^2 over |psi| <= theta/2.
        return 0.5 * (l * l * theta + r * r * std::sin(theta)) + strip(T);
    }
    if (half >= 0.5 * kPi || T >= l)
        return kPi * l * l;
    // Disc minus the two circular segments beyond the cut lines.
    return 2.0 * strip(T);
}

double vertex_safe_radius(const PolyhedralSurface& p, int v) {
    double best = std::numeric_limits<double>::infinity();
    bool found = false;
    for (std::size_t f = 0; f < p.faces.size(); ++f) {
        const auto& face = p.faces[f];
        const auto it = std::find(face.begin(), face.end(), v);
        if (it == face.end())
            continue;
        found = true;
        const auto c = local_corners(p, f);
        const std::size_t iv = static_cast<std::size_t>(it - face.begin());
        const std::size_t n = face.size();
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = (i + 1) % n;
            if (i == iv || j == iv)
                continue;
            best = std::min(best, point_segment_distance(c[iv], c[i], c[j]));
        }
    }
    if (!found)
        throw std::invalid_argument("vertex_safe_radius: vertex has no faces");
    return best;
}

double unfolded_distance(const PolyhedralSurface& p, int fa, const Point3& a, int fb,
                         const Point3& b) {
    if (p.name != "cube" && p.name != "tetrahedron")
        throw std::invalid_argument("unfolded_distance: only the built-in cube and tetrahedron");
    const int F = static_cast<int>(p.faces.size());
    if (fa < 0 || fa >= F || fb < 0 || fb >= F)
        throw std::invalid_argument("unfolded_distance: face index out of range");
    const Point2 a2 = to_local(p, fa, a);
    if (fa == fb) {
        const Point2 b2 = to_local(p, fb, b);
        return std::hypot(b2[0] - a2[0], b2[1] - a2[1]);
    }
    const auto adj = adjacency(p);
    std::vector<std::vector<Point2>> corners(F);
    for (int f = 0; f < F; ++f)
        corners[f] = local_corners(p, f);
    const Point2 b_local = to_local(p, fb, b);

    double best = std::numeric_limits<double>::infinity();
    std::vector<bool> on_path(F, false);
    std::vector<std::array<Point2, 2>> crossings;

    // Depth-first over simple face sequences. A shortest path crosses a convex face at most
    // once, so sequences never need to revisit a face.
    std::function<void(int, const Rigid2&, int)> visit = [&](int f, const Rigid2& T, int entry) {
        if (f == fb) {
            const Point2 b2 = T.apply(b_local);
            const double d = std::hypot(b2[0] - a2[0], b2[1] - a2[1]);
            if (d < best) {
                const bool ok = std::all_of(crossings.begin(), crossings.end(), [&](const auto& e) {
                    return segment_crosses(a2, b2, e[0], e[1]);
                });
                if (ok)
                    best = d;
            }
            return;
        }
        on_path[f] = true;
        const auto& c = corners[f];
        const std::size_t n = c.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<int>(i) == entry)
                continue;
            const auto [g, j] = adj[f][i];
            if (on_path[g])
                continue;
            const Point2 p0 = T.apply(c[i]);
            const Point2 p1 = T.apply(c[(i + 1) % n]);
            if (point_segment_distance(a2, p0, p1) >= best)
                continue;
            // Edge i of f runs p0 -> p1; in g the same edge is j, running p1 -> p0.
            const auto& cg = corners[g];
            const Rigid2 Tg = align(cg[j], cg[(j + 1) % cg.size()], p1, p0);
            crossings.push_back({p0, p1});
            visit(g, Tg, j);
            crossings.pop_back();
        }
        on_path[f] = false;
    };
    visit(fa, Rigid2{}, -1);
    if (!std::isfinite(best))
        throw std::runtime_error("unfolded_distance: no valid unfolding found");
    return best;
}

}  // namespace knn
