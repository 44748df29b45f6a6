#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "qsurf/mesh.hpp"

using namespace qsurf;
using namespace qsurf::mesh;
using geometry::Interface;
using geometry::Material;

namespace {

double total_area(const Mesh& m, Material mat) {
    double a = 0.0;
    for (size_t t = 0; t < m.triangles.size(); ++t)
        if (m.triangles[t].region == mat) a += m.signed_area(static_cast<int>(t));
    return a;
}

bool meshes_identical(const Mesh& a, const Mesh& b) {
    if (a.vertices.size() != b.vertices.size() || a.triangles.size() != b.triangles.size())
        return false;
    for (size_t i = 0; i < a.vertices.size(); ++i)
        if (a.vertices[i].x != b.vertices[i].x || a.vertices[i].y != b.vertices[i].y) return false;
    for (size_t i = 0; i < a.triangles.size(); ++i)
        if (a.triangles[i].v != b.triangles[i].v || a.triangles[i].region != b.triangles[i].region)
            return false;
    return true;
}

}  // namespace

TEST_CASE("coarse box mesh is a valid conforming triangulation") {
    geometry::LayoutSpec layout = test::plate_capacitor(40.0, 10.0, Material::Vacuum);
    MeshControls c;
    c.h_max_um = 5.0;
    c.corner_h_min_um = 0.5;
    Mesh m = generate_mesh(layout, c);
    CHECK(m.triangles.size() > 0);
    CHECK(check_mesh(m).empty());
    double bbox_area = layout.bbox.area();
    double covered = total_area(m, Material::Vacuum) + total_area(m, Material::Substrate) +
                     total_area(m, Material::Conductor);
    CHECK(covered == doctest::Approx(bbox_area).epsilon(1e-12));
}

TEST_CASE("corner grading honors corner_h_min on a preset layout") {
    geometry::LayoutSpec layout = geometry::build_layout(geometry::preset('C').params, 0.3);
    MeshControls c;
    c.h_max_um = 5.0;
    c.corner_h_min_um = 0.005;
    c.grading_ratio = 1.8;
    Mesh m = generate_mesh(layout, c);
    CHECK(check_mesh(m).empty());

    // smallest incident edge at every conductor corner
    std::map<std::pair<double, double>, int> vertex_at;
    for (size_t v = 0; v < m.vertices.size(); ++v)
        vertex_at[{m.vertices[v].x, m.vertices[v].y}] = static_cast<int>(v);
    std::vector<double> min_edge(m.vertices.size(), 1e300);
    for (const Triangle& t : m.triangles) {
        for (int e = 0; e < 3; ++e) {
            int a = t.v[e], b = t.v[(e + 1) % 3];
            double len = (m.vertices[a] - m.vertices[b]).norm();
            min_edge[a] = std::min(min_edge[a], len);
            min_edge[b] = std::min(min_edge[b], len);
        }
    }
    for (const Vec2& corner : m.conductor_corners) {
        auto it = vertex_at.find({corner.x, corner.y});
        REQUIRE(it != vertex_at.end());
        CHECK(min_edge[it->second] <= c.corner_h_min_um * (1.0 + 1e-9));
    }
}

TEST_CASE("infeasible corner size fails meshing") {
    geometry::LayoutSpec layout = geometry::build_layout(geometry::preset('C').params, 0.3);
    MeshControls c;
    c.h_max_um = 200.0;
    c.corner_h_min_um = 2.0 * geometry::preset('C').params.gap_um;
    CHECK_THROWS_AS(generate_mesh(layout, c), meshing_error);
}

TEST_CASE("bad controls are rejected") {
    geometry::LayoutSpec layout = test::plate_capacitor(10.0, 5.0, Material::Vacuum);
    MeshControls c;
    c.corner_h_min_um = 0.0;
    CHECK_THROWS_AS(generate_mesh(layout, c), std::invalid_argument);
    c = MeshControls{};
    c.grading_ratio = 1.0;
    CHECK_THROWS_AS(generate_mesh(layout, c), std::invalid_argument);
    c = MeshControls{};
    c.grading_ratio = 3.5;
    CHECK_THROWS_AS(generate_mesh(layout, c), std::invalid_argument);
    c = MeshControls{};
    c.max_refine_passes = -1;
    CHECK_THROWS_AS(generate_mesh(layout, c), std::invalid_argument);
}

TEST_CASE("uniform bisection at least doubles the mesh and stays conforming") {
    geometry::LayoutSpec layout = geometry::build_layout(geometry::preset('D').params, 0.3);
    Mesh m = generate_mesh(layout, test::coarse_controls());
    std::vector<double> indicator(m.triangles.size(), 1.0);
    Mesh r = refine_by_indicator(m, indicator, 1.0);
    CHECK(r.triangles.size() >= 2 * m.triangles.size());
    CHECK(check_mesh(r).empty());

    // material area and region tags preserved
    for (Material mat : {Material::Substrate, Material::Vacuum, Material::Conductor})
        CHECK(total_area(r, mat) == doctest::Approx(total_area(m, mat)).epsilon(1e-12));

    // boundary edges split and retagged consistently: total tagged length preserved
    auto tagged_length = [](const Mesh& mm, Interface tag) {
        double len = 0.0;
        for (const BoundaryEdge& be : mm.boundary_edges)
            if (be.tag == tag) len += (mm.vertices[be.v1] - mm.vertices[be.v0]).norm();
        return len;
    };
    for (Interface tag : {Interface::SM, Interface::SA, Interface::MA})
        CHECK(tagged_length(r, tag) == doctest::Approx(tagged_length(m, tag)).epsilon(1e-12));
}

TEST_CASE("partial marking refines the marked elements and restores conformity") {
    geometry::LayoutSpec layout = test::plate_capacitor(40.0, 10.0, Material::Substrate);
    MeshControls c;
    c.h_max_um = 4.0;
    c.corner_h_min_um = 0.4;
    Mesh m = generate_mesh(layout, c);
    std::vector<double> indicator(m.triangles.size(), 0.0);
    // mark a band in the middle
    for (size_t t = 0; t < m.triangles.size(); ++t)
        if (std::abs(m.centroid(static_cast<int>(t)).y - 5.0) < 2.0) indicator[t] = 1.0;
    Mesh r = refine_by_indicator(m, indicator, 0.2);
    CHECK(r.triangles.size() > m.triangles.size());
    CHECK(check_mesh(r).empty());
}

TEST_CASE("refinement marking validates its arguments") {
    geometry::LayoutSpec layout = test::plate_capacitor(10.0, 5.0, Material::Vacuum);
    Mesh m = generate_mesh(layout, test::coarse_controls());
    std::vector<double> indicator(m.triangles.size(), 1.0);
    CHECK_THROWS_AS(refine_by_indicator(m, indicator, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(refine_by_indicator(m, indicator, 1.5), std::invalid_argument);
    indicator.pop_back();
    CHECK_THROWS_AS(refine_by_indicator(m, indicator, 0.5), std::invalid_argument);
}

TEST_CASE("identical inputs produce identical meshes") {
    geometry::LayoutSpec layout = geometry::build_layout(geometry::preset('B').params, 0.4);
    MeshControls c = test::coarse_controls();
    Mesh a = generate_mesh(layout, c);
    Mesh b = generate_mesh(layout, c);
    CHECK(meshes_identical(a, b));

    std::vector<double> indicator(a.triangles.size());
    for (size_t i = 0; i < indicator.size(); ++i) indicator[i] = std::sin(0.1 * i);
    Mesh ra = refine_by_indicator(a, indicator, 0.3);
    Mesh rb = refine_by_indicator(b, indicator, 0.3);
    CHECK(meshes_identical(ra, rb));
}
