#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "qsurf/solver.hpp"

using namespace qsurf;
using namespace qsurf::solver;
using geometry::Material;

TEST_CASE("parallel plate carries the exact uniform field") {
    const double d = 10.0;
    auto layout = test::plate_capacitor(40.0, d, Material::Substrate);
    FieldSolution sol = test::solve_layout(layout, test::coarse_controls(), test::pn_drive());

    const mesh::Mesh& m = *sol.mesh;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        if (m.triangles[t].region == Material::Conductor) continue;
        Vec2 c = m.centroid(static_cast<int>(t));
        if (c.y > 0.0 && c.y < d) {
            // interior: |E| = V/d with V = 1
            CHECK(std::abs(sol.field[t].x) < 1e-12);
            CHECK(sol.field[t].y == doctest::Approx(-1.0 / d).epsilon(1e-12));
        } else if (c.y < -0.2 || c.y > d + 0.2) {
            // shielded padding: zero field
            CHECK(sol.field[t].norm() < 1e-12);
        }
    }
    CHECK(sol.residual <= kResidualTolerance);
    CHECK(sol.u_total_j_per_m > 0.0);
}

TEST_CASE("two-dielectric stack satisfies the interface conditions exactly") {
    const double d = 10.0;
    auto layout = test::two_layer_plate(40.0, d);
    FieldSolution sol = test::solve_layout(layout, test::coarse_controls(), test::pn_drive());

    const mesh::Mesh& m = *sol.mesh;
    double e_sub = 0.0, e_vac = 0.0;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        if (m.triangles[t].region == Material::Substrate) e_sub = sol.field[t].y;
        if (m.triangles[t].region == Material::Vacuum) e_vac = sol.field[t].y;
        CHECK(std::abs(sol.field[t].x) < 1e-12);  // tangential component matches (zero)
    }
    MaterialStack mat;
    CHECK(mat.eps_substrate * e_sub == doctest::Approx(mat.eps_vacuum * e_vac).epsilon(1e-10));
    // series-capacitor voltage split
    CHECK(std::abs(e_sub) * d / 2.0 + std::abs(e_vac) * d / 2.0 == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("voltage scaling scales fields linearly and energy quadratically") {
    auto layout = geometry::build_layout(geometry::preset('D').params, 0.3);
    auto grid = std::make_shared<mesh::Mesh>(mesh::generate_mesh(layout, test::coarse_controls()));
    MaterialStack mat;
    FieldSolution s1 = solve(grid, mat, test::pn_gnd_drive(1.0));
    FieldSolution s2 = solve(grid, mat, test::pn_gnd_drive(2.0));

    CHECK(s2.u_total_j_per_m == doctest::Approx(4.0 * s1.u_total_j_per_m).epsilon(1e-11));
    for (size_t t = 0; t < s1.field.size(); t += 97) {
        CHECK(s2.field[t].x == doctest::Approx(2.0 * s1.field[t].x).epsilon(1e-9));
        CHECK(s2.field[t].y == doctest::Approx(2.0 * s1.field[t].y).epsilon(1e-9));
    }
    CHECK(capacitance(s2) == doctest::Approx(capacitance(s1)).epsilon(1e-11));
}

TEST_CASE("energy decreases monotonically under nested refinement") {
    auto layout = geometry::build_layout(geometry::preset('C').params, 0.3);
    auto grid = std::make_shared<mesh::Mesh>(mesh::generate_mesh(layout, test::coarse_controls()));
    MaterialStack mat;

    std::vector<double> energies;
    FieldSolution sol = solve(grid, mat, test::pn_gnd_drive());
    energies.push_back(sol.u_total_j_per_m);
    for (int level = 0; level < 2; ++level) {
        grid = std::make_shared<mesh::Mesh>(refine(*grid, sol, 1.0));
        sol = solve(grid, mat, test::pn_gnd_drive());
        energies.push_back(sol.u_total_j_per_m);
    }
    // Dirichlet energy of the FE minimizer decreases on nested spaces
    CHECK(energies[1] < energies[0]);
    CHECK(energies[2] < energies[1]);
    // and the decrements shrink (Richardson-consistent approach to a limit)
    CHECK(energies[1] - energies[2] < energies[0] - energies[1]);
}

TEST_CASE("discrete solution minimizes the assembled energy") {
    auto layout = test::plate_capacitor(20.0, 5.0, Material::Substrate);
    FieldSolution sol = test::solve_layout(layout, test::coarse_controls(), test::pn_drive());

    std::mt19937 rng(12345);
    std::normal_distribution<double> noise(0.0, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> perturbed = sol.potential;
        for (size_t v = 0; v < perturbed.size(); ++v) perturbed[v] += noise(rng);
        // restore boundary values: perturb only free vertices
        for (size_t t = 0; t < sol.mesh->triangles.size(); ++t) {
            if (sol.mesh->triangles[t].region != Material::Conductor) continue;
            for (int vid : sol.mesh->triangles[t].v) perturbed[vid] = sol.potential[vid];
        }
        double u = energy_from_potential(*sol.mesh, sol.materials, perturbed);
        CHECK(u >= sol.u_total_j_per_m * (1.0 - 1e-12));
    }
}

TEST_CASE("vacuum plate capacitance matches the analytic value") {
    const double w = 40.0, d = 10.0;
    auto layout = test::plate_capacitor(w, d, Material::Vacuum);
    FieldSolution sol = test::solve_layout(layout, test::coarse_controls(), test::pn_drive());
    double expected = constants::eps0_f_per_m * w / d;
    CHECK(capacitance(sol) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("pad-pair capacitance times pad length lands near the design target") {
    auto layout = geometry::build_layout(geometry::preset('D').params, 0.05);
    FieldSolution sol =
        test::solve_layout(layout, test::medium_controls(), test::pn_gnd_drive());
    double c_per_m = capacitance(sol);
    double c_device = c_per_m * um_to_m(geometry::preset('D').params.pad_length_um);
    // 2D cross-section times length approximation: same order as 55.35 fF
    CHECK(c_device > 0.5 * 55.35e-15);
    CHECK(c_device < 2.0 * 55.35e-15);
}

TEST_CASE("charging energy arithmetic") {
    CHECK(charging_energy_mhz(55.35e-15) == doctest::Approx(350.0).epsilon(0.003));
    // halving the capacitance doubles E_c
    CHECK(charging_energy_mhz(27.675e-15) ==
          doctest::Approx(2.0 * charging_energy_mhz(55.35e-15)).epsilon(1e-12));
    // large-C limit
    CHECK(charging_energy_mhz(1e-9) < 0.02);
    CHECK_THROWS_AS(charging_energy_mhz(0.0), std::invalid_argument);
    CHECK_THROWS_AS(charging_energy_mhz(-1e-15), std::invalid_argument);
}

TEST_CASE("solver error paths") {
    // no conductor at all: no voltage reference
    geometry::LayoutSpec empty_layout;
    empty_layout.bbox = {0.0, 0.0, 10.0, 10.0};
    empty_layout.regions = {{{0.0, 0.0, 10.0, 10.0}, Material::Vacuum, {}}};
    mesh::MeshControls c;
    c.h_max_um = 2.0;
    c.corner_h_min_um = 0.5;
    auto grid = std::make_shared<mesh::Mesh>(mesh::generate_mesh(empty_layout, c));
    CHECK_THROWS_AS(solve(grid, MaterialStack{}, {}), solve_error);

    // missing electrode voltage
    auto plate = test::plate_capacitor(10.0, 5.0, Material::Vacuum);
    auto grid2 = std::make_shared<mesh::Mesh>(mesh::generate_mesh(plate, c));
    CHECK_THROWS_AS(solve(grid2, MaterialStack{}, {{"p", 0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(solve(grid2, MaterialStack{}, {{"p", 0.5}, {"n", -0.5}, {"x", 1.0}}),
                    std::invalid_argument);

    // capacitance needs exactly two driven electrodes, antisymmetric
    FieldSolution sol = solve(grid2, MaterialStack{}, {{"p", 0.5}, {"n", 0.0}});
    CHECK_THROWS_AS(capacitance(sol), std::invalid_argument);
    FieldSolution sol2 = solve(grid2, MaterialStack{}, {{"p", 0.7}, {"n", -0.5}});
    CHECK_THROWS_AS(capacitance(sol2), std::invalid_argument);

    // bad material stack
    MaterialStack bad;
    bad.eps_substrate = 0.5;
    CHECK_THROWS_AS(solve(grid2, bad, test::pn_drive()), std::invalid_argument);
}

TEST_CASE("zero drive yields zero energy and zero residual") {
    auto plate = test::plate_capacitor(10.0, 5.0, Material::Vacuum);
    FieldSolution sol =
        test::solve_layout(plate, test::coarse_controls(), {{"p", 0.0}, {"n", 0.0}});
    CHECK(sol.u_total_j_per_m == 0.0);
    CHECK(sol.residual == 0.0);
}
