#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "qsurf/geometry.hpp"
#include "qsurf/types.hpp"

// Conforming triangulation of a rectilinear LayoutSpec. Generation lays a
// tensor-product grid whose 1D coordinate ladders grow geometrically away
// from conductor corners (where the field is singular) up to h_max, then
// splits every cell into two triangles. Refinement is conforming
// longest-edge bisection with closure, driven by a per-element indicator.

namespace qsurf::mesh {

struct MeshControls {
    double h_max_um = 40.0;
    double corner_h_min_um = 0.005;  // 5 nm
    double grading_ratio = 1.8;      // in (1, 3]
    int max_refine_passes = 1;
};

struct Triangle {
    std::array<int, 3> v{};  // CCW
    geometry::Material region = geometry::Material::Vacuum;
    int electrode = -1;  // index into Mesh::electrodes, conductors only
};

struct BoundaryEdge {
    int v0 = 0, v1 = 0;
    geometry::Interface tag = geometry::Interface::Outer;
    bool sidewall = false;
};

struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<Triangle> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    std::vector<std::string> electrodes;  // electrode index -> name
    std::vector<Vec2> conductor_corners;

    double signed_area(int tri) const {
        const Triangle& t = triangles[tri];
        const Vec2& a = vertices[t.v[0]];
        const Vec2& b = vertices[t.v[1]];
        const Vec2& c = vertices[t.v[2]];
        return 0.5 * (b - a).cross(c - a);
    }
    Vec2 centroid(int tri) const {
        const Triangle& t = triangles[tri];
        return (vertices[t.v[0]] + vertices[t.v[1]] + vertices[t.v[2]]) * (1.0 / 3.0);
    }
    int electrode_id(const std::string& name) const;
};

// Canonical undirected edge key.
inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

Mesh generate_mesh(const geometry::LayoutSpec& layout, const MeshControls& controls);

// Bisects the triangles whose indicator value is in the top marker_fraction
// (stable ordering, ties broken by element index); extra bisections restore
// conformity. marker_fraction must lie in (0, 1].
Mesh refine_by_indicator(const Mesh& m, const std::vector<double>& indicator,
                         double marker_fraction);

// Bisects an explicit marked set (same closure rules).
Mesh bisect_marked(const Mesh& m, const std::vector<char>& marked);

// Structural invariant check used by tests: conformity (an edge is shared by
// at most two triangles, and interior grid edges by exactly two), positive
// signed areas, and boundary-edge vertex validity. Empty result means valid.
std::vector<std::string> check_mesh(const Mesh& m);

// Plain-text dump (vertex and triangle listings) for debugging.
std::string dump_mesh(const Mesh& m);

}  // namespace qsurf::mesh
