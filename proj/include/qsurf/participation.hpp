#pragma once

#include <map>
#include <string>
#include <vector>

#include "qsurf/solver.hpp"

// Thin-layer surface participation post-processing. The solved field never
// contains the contamination layers: the field adjacent to each interface
// (on the actual dielectric side, "side 2") is transformed into the
// effective in-layer field by matching tangential E and normal eps*E, then
// projected uniformly through the layer thickness, so the participation per
// thickness p/t comes out in 1/m.
//
// Side-2 convention: SM and SA use the substrate-side field, MA the
// vacuum-side field.

namespace qsurf::participation {

struct InterfaceSample {
    Vec2 position;        // boundary-edge midpoint, um
    Vec2 tangent;         // unit
    Vec2 normal;          // unit
    Vec2 e2;              // side-2 field, V/um
    double side2_eps = 1.0;
    double arc_weight_um = 0.0;
};

// Effective field inside the hypothetical layer (permittivity eps1) from the
// side-2 field: the tangential part carries over, the normal part scales by
// eps2/eps1. n must be unit length; its sign does not matter.
Vec2 transform_field(const Vec2& e2, const Vec2& n, double eps1, double eps2);

// One sample per boundary edge of the given interface class, using the
// adjacent element field on the side-2 material.
std::vector<InterfaceSample> collect_samples(const solver::FieldSolution& sol,
                                             geometry::Interface tag,
                                             bool include_sidewalls = true);

// Integrated p/t in 1/m over the given samples, excluding arc lying within
// `cutoff_nm` of any conductor corner. Empty input yields 0 (and sets
// *empty_warning when provided); zero total energy is a domain_error.
double surface_participation(const std::vector<InterfaceSample>& samples, double eps1,
                             const solver::FieldSolution& sol, double cutoff_nm,
                             bool* empty_warning = nullptr);

// Fraction of the stored energy in one dielectric region; substrate and
// vacuum fractions add to 1 exactly.
double bulk_participation(const solver::FieldSolution& sol, geometry::Material region);

struct CutoffRow {
    double cutoff_nm;
    double p_per_m;
};

// p/t as a function of the corner exclusion radius (diagnostic for the
// corner-singular integrand).
std::vector<CutoffRow> cutoff_sensitivity(const solver::FieldSolution& sol,
                                          const std::vector<InterfaceSample>& samples,
                                          double eps1, const std::vector<double>& cutoffs_nm);

struct ReportOptions {
    double cutoff_nm = 1.0;
    bool include_sa_sidewalls = true;
};

struct ParticipationReport {
    double p_sm_per_m = 0.0;
    double p_sa_per_m = 0.0;
    double p_ma_per_m = 0.0;
    double p_substrate = 0.0;
    double p_vacuum = 0.0;
    double cutoff_nm = 0.0;
    // Relative change of each entry over the last refinement pass; filled by
    // the sweep pipeline. Keys: SM, SA, MA, substrate.
    std::map<std::string, double> mesh_convergence;
    std::vector<std::string> warnings;

    double surface(geometry::Interface tag) const;
};

ParticipationReport compute_report(const solver::FieldSolution& sol, const ReportOptions& opts);

// Thin-layer self-consistency limit: warn when p = (p/t)*t exceeds this.
inline constexpr double kPerturbativeLimit = 0.05;

}  // namespace qsurf::participation
