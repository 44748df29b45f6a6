#include "qsurf/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace qsurf::mesh {

using geometry::Interface;
using geometry::LayoutSpec;
using geometry::Material;
using geometry::Segment;

int Mesh::electrode_id(const std::string& name) const {
    for (size_t i = 0; i < electrodes.size(); ++i)
        if (electrodes[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

struct Axis {
    std::vector<double> coords;  // sorted unique feature coordinates
    std::vector<char> fine;      // coordinate needs corner-scale seeding
};

void add_coord(Axis& axis, double c, bool fine) {
    axis.coords.push_back(c);
    axis.fine.push_back(fine ? 1 : 0);
}

void dedupe(Axis& axis, double tol) {
    std::vector<size_t> order(axis.coords.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return axis.coords[a] < axis.coords[b]; });
    std::vector<double> cs;
    std::vector<char> fs;
    for (size_t k : order) {
        if (!cs.empty() && axis.coords[k] - cs.back() <= tol) {
            fs.back() = static_cast<char>(fs.back() | axis.fine[k]);
        } else {
            cs.push_back(axis.coords[k]);
            fs.push_back(axis.fine[k]);
        }
    }
    axis.coords = std::move(cs);
    axis.fine = std::move(fs);
}

// Fills one interval with points whose spacing grows geometrically from both
// endpoint seed sizes, capped at h_max. The tentative step list is scaled
// down uniformly to land exactly on the interval, which can only tighten the
// seed spacing.
void grade_interval(double a, double b, double seed_a, double seed_b, double ratio, double h_max,
                    std::vector<double>& out) {
    const double length = b - a;
    std::vector<double> left, right;
    double next_a = std::min(seed_a, h_max);
    double next_b = std::min(seed_b, h_max);
    double sum = 0.0;
    while (sum < length) {
        if (next_a <= next_b) {
            left.push_back(next_a);
            sum += next_a;
            next_a = std::min(next_a * ratio, h_max);
        } else {
            right.push_back(next_b);
            sum += next_b;
            next_b = std::min(next_b * ratio, h_max);
        }
    }
    // Scale the tentative steps to land exactly on b (scale <= 1, so seed
    // spacing only tightens). Both fronts end at the junction point; keep a
    // single copy of it, and none at all when it coincides with an endpoint.
    const double scale = length / sum;
    std::vector<double> fwd, bwd;
    double x = a;
    for (double s : left) fwd.push_back(x += s * scale);
    double y = b;
    for (double s : right) bwd.push_back(y -= s * scale);
    if (!bwd.empty())
        bwd.pop_back();  // junction already in fwd, or equals a when fwd empty
    else if (!fwd.empty())
        fwd.pop_back();  // junction equals b
    out.insert(out.end(), fwd.begin(), fwd.end());
    out.insert(out.end(), bwd.rbegin(), bwd.rend());
}

std::vector<double> build_ladder(const Axis& axis, const MeshControls& c) {
    std::vector<double> pts;
    for (size_t i = 0; i + 1 < axis.coords.size(); ++i) {
        pts.push_back(axis.coords[i]);
        double seed_a = axis.fine[i] ? c.corner_h_min_um : c.h_max_um;
        double seed_b = axis.fine[i + 1] ? c.corner_h_min_um : c.h_max_um;
        grade_interval(axis.coords[i], axis.coords[i + 1], seed_a, seed_b, c.grading_ratio,
                       c.h_max_um, pts);
    }
    pts.push_back(axis.coords.back());
    // guard against roundoff duplicates at interval junctions
    std::vector<double> clean;
    clean.reserve(pts.size());
    for (double p : pts)
        if (clean.empty() || p > clean.back()) clean.push_back(p);
    return clean;
}

size_t index_of(const std::vector<double>& ladder, double value, double tol) {
    auto it = std::lower_bound(ladder.begin(), ladder.end(), value - tol);
    if (it == ladder.end() || std::abs(*it - value) > tol)
        throw meshing_error("segment endpoint does not lie on a grid line");
    return static_cast<size_t>(it - ladder.begin());
}

}  // namespace

Mesh generate_mesh(const LayoutSpec& layout, const MeshControls& controls) {
    if (!(controls.corner_h_min_um > 0.0) || !(controls.corner_h_min_um < controls.h_max_um))
        throw std::invalid_argument("mesh controls require 0 < corner_h_min < h_max");
    if (!(controls.grading_ratio > 1.0) || controls.grading_ratio > 3.0)
        throw std::invalid_argument("grading_ratio must lie in (1, 3]");
    if (controls.max_refine_passes < 0)
        throw std::invalid_argument("max_refine_passes must be >= 0");
    if (layout.regions.empty()) throw std::invalid_argument("layout has no regions");

    // Feature coordinates: every region edge. Corner-scale seeding applies to
    // coordinates carrying a conductor corner (or the trench floor, whose
    // reentrant corners sit just below conductor corners).
    std::unordered_set<double> fine_x, fine_y;
    for (const Vec2& c : layout.conductor_corners) {
        fine_x.insert(c.x);
        fine_y.insert(c.y);
    }
    if (layout.trench_depth_um > 0.0) fine_y.insert(-layout.trench_depth_um);

    Axis ax, ay;
    const double tol_x = 1e-9 * std::max(1.0, std::abs(layout.bbox.x1 - layout.bbox.x0));
    const double tol_y = 1e-9 * std::max(1.0, std::abs(layout.bbox.y1 - layout.bbox.y0));
    auto near_any = [](const std::unordered_set<double>& set, double v, double tol) {
        if (set.count(v)) return true;
        for (double s : set)
            if (std::abs(s - v) <= tol) return true;
        return false;
    };
    for (const auto& reg : layout.regions) {
        add_coord(ax, reg.rect.x0, near_any(fine_x, reg.rect.x0, tol_x));
        add_coord(ax, reg.rect.x1, near_any(fine_x, reg.rect.x1, tol_x));
        add_coord(ay, reg.rect.y0, near_any(fine_y, reg.rect.y0, tol_y));
        add_coord(ay, reg.rect.y1, near_any(fine_y, reg.rect.y1, tol_y));
    }
    add_coord(ax, layout.bbox.x0, false);
    add_coord(ax, layout.bbox.x1, false);
    add_coord(ay, layout.bbox.y0, false);
    add_coord(ay, layout.bbox.y1, false);
    dedupe(ax, tol_x);
    dedupe(ay, tol_y);

    // Feasibility: the corner seed must fit into every gap that touches a
    // corner-seeded coordinate.
    for (const Axis* axis : {&ax, &ay}) {
        for (size_t i = 0; i + 1 < axis->coords.size(); ++i) {
            double gap = axis->coords[i + 1] - axis->coords[i];
            if ((axis->fine[i] || axis->fine[i + 1]) && controls.corner_h_min_um >= gap) {
                std::ostringstream os;
                os << "corner_h_min (" << controls.corner_h_min_um
                   << " um) does not fit the feature gap of " << gap << " um";
                throw meshing_error(os.str());
            }
        }
    }

    const std::vector<double> xs = build_ladder(ax, controls);
    const std::vector<double> ys = build_ladder(ay, controls);
    const size_t nx = xs.size(), ny = ys.size();

    Mesh m;
    m.conductor_corners = layout.conductor_corners;
    m.vertices.reserve(nx * ny);
    for (size_t j = 0; j < ny; ++j)
        for (size_t i = 0; i < nx; ++i) m.vertices.push_back({xs[i], ys[j]});

    // Electrode table in layout order.
    std::unordered_map<std::string, int> electrode_ids;
    for (const auto& reg : layout.regions) {
        if (reg.material == Material::Conductor && !electrode_ids.count(reg.electrode)) {
            electrode_ids.emplace(reg.electrode, static_cast<int>(m.electrodes.size()));
            m.electrodes.push_back(reg.electrode);
        }
    }

    // Cell -> region via its center; region edges are grid lines, so every
    // cell lies wholly inside one region.
    m.triangles.reserve(2 * (nx - 1) * (ny - 1));
    auto vid = [nx](size_t i, size_t j) { return static_cast<int>(j * nx + i); };
    for (size_t j = 0; j + 1 < ny; ++j) {
        for (size_t i = 0; i + 1 < nx; ++i) {
            Vec2 center{0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])};
            Material mat = Material::Vacuum;
            int electrode = -1;
            bool found = false;
            for (const auto& reg : layout.regions) {
                if (reg.rect.contains(center)) {
                    mat = reg.material;
                    if (mat == Material::Conductor) electrode = electrode_ids.at(reg.electrode);
                    found = true;
                    break;
                }
            }
            if (!found) throw meshing_error("grid cell not covered by any region");
            Triangle t1{{vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)}, mat, electrode};
            Triangle t2{{vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)}, mat, electrode};
            m.triangles.push_back(t1);
            m.triangles.push_back(t2);
        }
    }

    // Tagged boundary edges along the layout segments.
    for (const Segment& s : layout.segments) {
        if (s.horizontal()) {
            size_t j = index_of(ys, s.a.y, tol_y);
            size_t i0 = index_of(xs, std::min(s.a.x, s.b.x), tol_x);
            size_t i1 = index_of(xs, std::max(s.a.x, s.b.x), tol_x);
            for (size_t i = i0; i < i1; ++i)
                m.boundary_edges.push_back({vid(i, j), vid(i + 1, j), s.tag, s.sidewall});
        } else {
            size_t i = index_of(xs, s.a.x, tol_x);
            size_t j0 = index_of(ys, std::min(s.a.y, s.b.y), tol_y);
            size_t j1 = index_of(ys, std::max(s.a.y, s.b.y), tol_y);
            for (size_t j = j0; j < j1; ++j)
                m.boundary_edges.push_back({vid(i, j), vid(i, j + 1), s.tag, s.sidewall});
        }
    }

    return m;
}

namespace {

double squared_edge_length(const Mesh& m, int a, int b) {
    return (m.vertices[a] - m.vertices[b]).squared_norm();
}

// Longest edge of a triangle, ties broken by canonical edge key.
int longest_local_edge(const Mesh& m, const Triangle& t) {
    int best = 0;
    double best_len = -1.0;
    std::uint64_t best_key = 0;
    for (int e = 0; e < 3; ++e) {
        int a = t.v[e], b = t.v[(e + 1) % 3];
        double len = squared_edge_length(m, a, b);
        std::uint64_t key = edge_key(a, b);
        if (len > best_len || (len == best_len && key < best_key)) {
            best = e;
            best_len = len;
            best_key = key;
        }
    }
    return best;
}

}  // namespace

Mesh bisect_marked(const Mesh& m, const std::vector<char>& marked) {
    if (marked.size() != m.triangles.size())
        throw std::invalid_argument("marked flags do not match triangle count");

    // Edge -> adjacent triangles.
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris;
    edge_tris.reserve(m.triangles.size() * 2);
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        for (int e = 0; e < 3; ++e) {
            std::uint64_t k = edge_key(m.triangles[t].v[e], m.triangles[t].v[(e + 1) % 3]);
            auto [it, fresh] = edge_tris.try_emplace(k, std::array<int, 2>{-1, -1});
            if (it->second[0] < 0)
                it->second[0] = static_cast<int>(t);
            else
                it->second[1] = static_cast<int>(t);
        }
    }

    // Seed the split set with the longest edge of each marked triangle, then
    // propagate: any triangle touching a split edge must split its own
    // longest edge too, so the subdivision stays conforming.
    std::unordered_set<std::uint64_t> split_edges;
    std::deque<std::uint64_t> work;
    auto add_edge = [&](std::uint64_t k) {
        if (split_edges.insert(k).second) work.push_back(k);
    };
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        if (!marked[t]) continue;
        const Triangle& tri = m.triangles[t];
        int le = longest_local_edge(m, tri);
        add_edge(edge_key(tri.v[le], tri.v[(le + 1) % 3]));
    }
    while (!work.empty()) {
        std::uint64_t k = work.front();
        work.pop_front();
        for (int t : edge_tris.at(k)) {
            if (t < 0) continue;
            const Triangle& tri = m.triangles[t];
            int le = longest_local_edge(m, tri);
            add_edge(edge_key(tri.v[le], tri.v[(le + 1) % 3]));
        }
    }

    Mesh out;
    out.vertices = m.vertices;
    out.electrodes = m.electrodes;
    out.conductor_corners = m.conductor_corners;

    // Midpoints in deterministic (key-sorted) order.
    std::vector<std::uint64_t> sorted_edges(split_edges.begin(), split_edges.end());
    std::sort(sorted_edges.begin(), sorted_edges.end());
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(sorted_edges.size());
    for (std::uint64_t k : sorted_edges) {
        int a = static_cast<int>(k >> 32);
        int b = static_cast<int>(k & 0xffffffffu);
        midpoint.emplace(k, static_cast<int>(out.vertices.size()));
        out.vertices.push_back((m.vertices[a] + m.vertices[b]) * 0.5);
    }

    auto mid_of = [&](int a, int b) -> int {
        auto it = midpoint.find(edge_key(a, b));
        return it == midpoint.end() ? -1 : it->second;
    };

    // Bisect by edge (p,q) with opposite vertex o: children (o,p,m),(o,m,q),
    // both CCW. The longest (split-set) edge goes first; recursion handles any
    // remaining split edges inherited by a child (depth at most two, since
    // children contain at most one original edge each).
    std::vector<Triangle>& tris = out.triangles;
    auto longest_out = [&](const Triangle& t) {
        int best = 0;
        double best_len = -1.0;
        std::uint64_t best_key = 0;
        for (int e = 0; e < 3; ++e) {
            int a = t.v[e], b = t.v[(e + 1) % 3];
            double len = (out.vertices[a] - out.vertices[b]).squared_norm();
            std::uint64_t key = edge_key(a, b);
            if (len > best_len || (len == best_len && key < best_key)) {
                best = e;
                best_len = len;
                best_key = key;
            }
        }
        return best;
    };
    auto emit = [&](auto&& self, const Triangle& t) -> void {
        int split_e = -1;
        int le = longest_out(t);
        for (int off = 0; off < 3; ++off) {
            int e = (le + off) % 3;
            if (mid_of(t.v[e], t.v[(e + 1) % 3]) >= 0) {
                split_e = e;
                break;
            }
        }
        if (split_e < 0) {
            tris.push_back(t);
            return;
        }
        int p = t.v[split_e], q = t.v[(split_e + 1) % 3], o = t.v[(split_e + 2) % 3];
        int mid = mid_of(p, q);
        Triangle c1{{o, p, mid}, t.region, t.electrode};
        Triangle c2{{o, mid, q}, t.region, t.electrode};
        self(self, c1);
        self(self, c2);
    };
    for (const Triangle& t : m.triangles) emit(emit, t);

    // Boundary edges: split in place, preserving order and direction.
    for (const BoundaryEdge& be : m.boundary_edges) {
        int mid = mid_of(be.v0, be.v1);
        if (mid < 0) {
            out.boundary_edges.push_back(be);
        } else {
            out.boundary_edges.push_back({be.v0, mid, be.tag, be.sidewall});
            out.boundary_edges.push_back({mid, be.v1, be.tag, be.sidewall});
        }
    }
    return out;
}

Mesh refine_by_indicator(const Mesh& m, const std::vector<double>& indicator,
                         double marker_fraction) {
    if (indicator.size() != m.triangles.size())
        throw std::invalid_argument("indicator size does not match triangle count");
    if (!(marker_fraction > 0.0) || marker_fraction > 1.0)
        throw std::invalid_argument("marker_fraction must lie in (0, 1]");

    size_t k = static_cast<size_t>(std::ceil(marker_fraction * m.triangles.size()));
    k = std::min(k, m.triangles.size());
    std::vector<size_t> order(m.triangles.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (indicator[a] != indicator[b]) return indicator[a] > indicator[b];
        return a < b;
    });
    std::vector<char> marked(m.triangles.size(), 0);
    for (size_t i = 0; i < k; ++i) marked[order[i]] = 1;
    return bisect_marked(m, marked);
}

std::vector<std::string> check_mesh(const Mesh& m) {
    std::vector<std::string> issues;
    std::ostringstream os;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        for (int v : m.triangles[t].v) {
            if (v < 0 || v >= static_cast<int>(m.vertices.size())) {
                os.str("");
                os << "triangle " << t << " references invalid vertex " << v;
                issues.push_back(os.str());
            }
        }
        if (m.signed_area(static_cast<int>(t)) <= 0.0) {
            os.str("");
            os << "triangle " << t << " has non-positive area";
            issues.push_back(os.str());
        }
    }
    std::unordered_map<std::uint64_t, int> edge_count;
    for (const Triangle& t : m.triangles)
        for (int e = 0; e < 3; ++e) ++edge_count[edge_key(t.v[e], t.v[(e + 1) % 3])];
    for (const auto& [k, n] : edge_count) {
        if (n > 2) {
            os.str("");
            os << "edge (" << (k >> 32) << "," << (k & 0xffffffffu) << ") shared by " << n
               << " triangles (non-manifold)";
            issues.push_back(os.str());
        }
    }
    // Hanging node: an edge left whole while a vertex sits exactly at its
    // midpoint and the two half-edges exist. Midpoints are computed as the
    // exact average, so the coordinate lookup is bit-exact.
    std::map<std::pair<double, double>, int> vertex_at;
    for (size_t v = 0; v < m.vertices.size(); ++v)
        vertex_at.emplace(std::make_pair(m.vertices[v].x, m.vertices[v].y), static_cast<int>(v));
    for (const auto& [k, n] : edge_count) {
        int a = static_cast<int>(k >> 32);
        int b = static_cast<int>(k & 0xffffffffu);
        Vec2 mid = (m.vertices[a] + m.vertices[b]) * 0.5;
        auto it = vertex_at.find({mid.x, mid.y});
        if (it == vertex_at.end()) continue;
        int v = it->second;
        if (edge_count.count(edge_key(a, v)) && edge_count.count(edge_key(v, b))) {
            os.str("");
            os << "edge (" << a << "," << b << ") has a hanging node at vertex " << v;
            issues.push_back(os.str());
        }
    }
    for (const BoundaryEdge& be : m.boundary_edges) {
        if (!edge_count.count(edge_key(be.v0, be.v1))) {
            os.str("");
            os << "boundary edge (" << be.v0 << "," << be.v1 << ") is not a mesh edge";
            issues.push_back(os.str());
        }
    }
    return issues;
}

std::string dump_mesh(const Mesh& m) {
    std::ostringstream os;
    os << "vertices " << m.vertices.size() << "\n";
    for (const Vec2& v : m.vertices) os << v.x << " " << v.y << "\n";
    os << "triangles " << m.triangles.size() << "\n";
    for (const Triangle& t : m.triangles)
        os << t.v[0] << " " << t.v[1] << " " << t.v[2] << " "
           << geometry::to_string(t.region) << "\n";
    return os.str();
}

}  // namespace qsurf::mesh
