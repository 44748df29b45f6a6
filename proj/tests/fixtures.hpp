#pragma once

#include <memory>

#include "qsurf/analysis.hpp"

// Hand-built layouts with closed-form fields, used as oracles across the
// test suites.

namespace qsurf::test {

// Parallel-plate capacitor with plates spanning the full bbox width, so the
// field between them is exactly V/d and exactly representable by linear
// elements. Vacuum padding outside the plates carries zero field. The
// fixture has no singular corners, so conductor_corners stays empty.
inline geometry::LayoutSpec plate_capacitor(double width_um, double gap_um,
                                            geometry::Material dielectric) {
    using namespace geometry;
    const double t = 0.2, pad = 1.0;
    LayoutSpec layout;
    layout.bbox = {0.0, -t - pad, width_um, gap_um + t + pad};
    layout.metal_thickness_um = t;
    layout.regions = {
        {{0.0, -t - pad, width_um, -t}, Material::Vacuum, {}},
        {{0.0, -t, width_um, 0.0}, Material::Conductor, "n"},
        {{0.0, 0.0, width_um, gap_um}, dielectric, {}},
        {{0.0, gap_um, width_um, gap_um + t}, Material::Conductor, "p"},
        {{0.0, gap_um + t, width_um, gap_um + t + pad}, Material::Vacuum, {}},
    };
    Interface face = dielectric == Material::Substrate ? Interface::SM : Interface::MA;
    layout.segments = {
        {{0.0, 0.0}, {width_um, 0.0}, face, false},
        {{0.0, gap_um}, {width_um, gap_um}, face, false},
        {{0.0, gap_um + t}, {width_um, gap_um + t}, Interface::MA, false},
    };
    return layout;
}

// Two-dielectric stack between plates: substrate in the lower half, vacuum
// in the upper half, field normal to the interface.
inline geometry::LayoutSpec two_layer_plate(double width_um, double gap_um) {
    using namespace geometry;
    const double t = 0.2;
    const double mid = gap_um / 2.0;
    LayoutSpec layout;
    layout.bbox = {0.0, -t, width_um, gap_um + t};
    layout.metal_thickness_um = t;
    layout.regions = {
        {{0.0, -t, width_um, 0.0}, Material::Conductor, "n"},
        {{0.0, 0.0, width_um, mid}, Material::Substrate, {}},
        {{0.0, mid, width_um, gap_um}, Material::Vacuum, {}},
        {{0.0, gap_um, width_um, gap_um + t}, Material::Conductor, "p"},
    };
    layout.segments = {
        {{0.0, 0.0}, {width_um, 0.0}, Interface::SM, false},
        {{0.0, mid}, {width_um, mid}, Interface::SA, false},
        {{0.0, gap_um}, {width_um, gap_um}, Interface::MA, false},
    };
    return layout;
}

inline mesh::MeshControls coarse_controls() {
    mesh::MeshControls c;
    c.h_max_um = 80.0;
    c.corner_h_min_um = 0.02;
    c.grading_ratio = 2.0;
    c.max_refine_passes = 0;
    return c;
}

inline mesh::MeshControls medium_controls() {
    mesh::MeshControls c;
    c.h_max_um = 40.0;
    c.corner_h_min_um = 0.005;
    c.grading_ratio = 1.8;
    c.max_refine_passes = 1;
    return c;
}

inline solver::FieldSolution solve_layout(const geometry::LayoutSpec& layout,
                                          const mesh::MeshControls& controls,
                                          const std::map<std::string, double>& voltages) {
    auto grid = std::make_shared<mesh::Mesh>(mesh::generate_mesh(layout, controls));
    return solver::solve(grid, solver::MaterialStack{}, voltages);
}

inline std::map<std::string, double> pn_drive(double v = 1.0) {
    return {{"p", 0.5 * v}, {"n", -0.5 * v}};
}

inline std::map<std::string, double> pn_gnd_drive(double v = 1.0) {
    return {{"p", 0.5 * v}, {"n", -0.5 * v}, {"gnd", 0.0}};
}

}  // namespace qsurf::test
