#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "qsurf/mesh.hpp"
#include "qsurf/types.hpp"

// 2D electrostatics on a triangulated cross-section: Laplace with
// piecewise-constant permittivity, Dirichlet conductors, natural (Neumann)
// outer boundary. Linear (P1) elements; fields are piecewise constant.
// Contamination layers are never meshed or solved; they enter only in the
// participation post-processing.

namespace qsurf::solver {

struct MaterialStack {
    double eps_substrate = 11.45;
    double eps_vacuum = 1.0;
    double eps_contamination = 5.0;
    // Hypothetical layer thicknesses (for budgets and the thin-layer
    // self-consistency check); the field solve never sees them.
    double thickness_sm_nm = 3.0;
    double thickness_sa_nm = 3.0;
    double thickness_ma_nm = 3.0;
    double tan_delta_sm = 0.0;
    double tan_delta_sa = 0.0;
    double tan_delta_ma = 0.0;
    double tan_delta_substrate = 0.0;

    double relative_permittivity(geometry::Material m) const;
    // Throws std::invalid_argument when out of range (permittivities >= 1,
    // thicknesses and loss tangents >= 0).
    void check() const;
};

struct FieldSolution {
    std::shared_ptr<const mesh::Mesh> mesh;
    MaterialStack materials;
    std::map<std::string, double> bc;     // electrode name -> voltage
    std::vector<double> potential;        // per vertex, V
    std::vector<Vec2> field;              // per element, V/um (zero in metal)
    std::vector<double> element_energy;   // per element, J/m
    double u_substrate_j_per_m = 0.0;
    double u_vacuum_j_per_m = 0.0;
    double u_total_j_per_m = 0.0;         // u_substrate + u_vacuum
    double residual = 0.0;                // relative linear-system residual
};

// Relative residual contract for the linear solve.
inline constexpr double kResidualTolerance = 1e-10;

FieldSolution solve(std::shared_ptr<const mesh::Mesh> m, const MaterialStack& materials,
                    const std::map<std::string, double>& electrode_voltages);

inline double total_energy(const FieldSolution& sol) { return sol.u_total_j_per_m; }

// Energy of an arbitrary nodal potential on the same mesh (used by the
// energy-minimization property test).
double energy_from_potential(const mesh::Mesh& m, const MaterialStack& materials,
                             const std::vector<double>& potential);

// C' = 2 U / V^2 for an antisymmetric two-electrode drive (+V/2, -V/2);
// grounded electrodes at 0 V are allowed. Returns farad per meter.
double capacitance(const FieldSolution& sol);

// E_c/h = e^2 / (2 h C), reported in MHz. C in farad.
double charging_energy_mhz(double capacitance_farad);

// Energy-flux jump indicator per element, used to drive refinement.
std::vector<double> error_indicator(const FieldSolution& sol);

mesh::Mesh refine(const mesh::Mesh& m, const FieldSolution& sol, double marker_fraction);

}  // namespace qsurf::solver
