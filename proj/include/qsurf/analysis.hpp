#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsurf/participation.hpp"

// Trench-depth sweeps, logarithmic extrapolation of participation factors to
// shallow trench depths, and conversion of participations plus loss tangents
// into quality-factor budgets, T1 estimates, substrate loss bounds, and
// Purcell limits.

namespace qsurf::analysis {

struct SweepOptions {
    mesh::MeshControls mesh;
    solver::MaterialStack materials;
    participation::ReportOptions report;
    double min_fit_depth_nm = 300.0;  // shallower trenches are extrapolated, not solved
    double drive_v = 1.0;             // antisymmetric +-V/2 electrode drive
    double marker_fraction = 0.25;    // adaptive refinement marking per pass
    bool extra_uniform_refine = false;  // append one uniform pass (stability studies)
    int jobs = 1;
};

struct SweepResult {
    std::string design;
    std::vector<double> depths_nm;  // strictly increasing
    std::vector<participation::ParticipationReport> reports;
};

// One converged participation report per depth. Solves run max_refine_passes
// adaptive refinements; the reports carry the relative change over the last
// pass. Depth failures are annotated with the offending depth.
SweepResult trench_sweep(const geometry::DesignParams& params, const std::string& design_id,
                         std::vector<double> depths_nm, const SweepOptions& opts);

// Full pipeline for one depth (also used by the CLI simulate command, where
// the min-fit-depth restriction does not apply). The returned solution holds
// the final (refined) mesh.
struct DepthSolution {
    solver::FieldSolution solution;
    participation::ParticipationReport report;
};

DepthSolution solve_at_depth(const geometry::DesignParams& params, double depth_nm,
                             const SweepOptions& opts);

participation::ParticipationReport participation_at_depth(const geometry::DesignParams& params,
                                                          double depth_nm,
                                                          const SweepOptions& opts);

struct LogFit {
    std::string quantity;            // SM, SA, MA, substrate
    double intercept = 0.0;          // value of the fit at ln(depth_nm) = 0
    double slope = 0.0;              // per ln(depth_nm)
    double r_squared = 0.0;
    double extrapolated_depth_nm = 0.0;
    double extrapolated = 0.0;       // clamped at 0
    bool clamped = false;

    double evaluate(double depth_nm) const;
};

// Least-squares fit value = a + b*ln(depth_nm). The extrapolated value is
// independent of the logarithm's scale (a shift in x only moves a).
LogFit fit_log(const std::vector<double>& depths_nm, const std::vector<double>& values,
               double target_depth_nm, const std::string& quantity);

// Fits for SM, SA, MA, and the substrate bulk fraction; requires >= 4 depths.
std::vector<LogFit> log_extrapolate(const SweepResult& sweep, double target_depth_nm);

struct LossChannel {
    std::string name;
    double participation = 0.0;  // p/t in 1/m for surfaces; p for bulk
    double thickness_nm = 0.0;   // surfaces only
    double tan_delta = 0.0;
    bool is_bulk = false;

    double inv_q() const;
};

struct LossBudget {
    std::vector<LossChannel> channels;
    double other_loss = 0.0;  // lumped 1/Q for unmodeled mechanisms
    double f_qubit_ghz = 0.0;
    double total_inv_q = 0.0;
    bool infinite_q = false;
    double q_total = 0.0;  // +inf when infinite_q
    double t1_us = 0.0;    // +inf when infinite_q
};

LossBudget loss_budget(std::vector<LossChannel> channels, double other_loss, double f_qubit_ghz);

double q_from_t1(double t1_us, double f_ghz);
double t1_from_q(double q, double f_ghz);

// Upper bound on the substrate loss tangent from a measured Q.
double tan_delta_bound(double q_measured, double p_substrate);

struct PurcellParams {
    double g_mhz = 0.0;
    double f_qubit_ghz = 0.0;
    double f_res_ghz = 0.0;
    double q_c = 0.0;
};

// T1 limit from relaxation through the readout resonator, in us:
// rate = (g/Delta)^2 * kappa with kappa = 2*pi*f_res/Q_c.
double purcell_limit_us(const PurcellParams& params);

struct DesignComparison {
    std::string design;
    double p_sm_per_m = 0.0;
    double p_sa_per_m = 0.0;
    double p_ma_per_m = 0.0;
    double inv_p_sa_m = 0.0;
    double p_substrate = 0.0;
    // Which interface dominates cannot be settled from the data, so every
    // single-interface hypothesis is reported side by side.
    double q_if_sm = 0.0;
    double q_if_sa = 0.0;
    double q_if_ma = 0.0;
    double q_total = 0.0;
    bool infinite_q = false;
};

// Sweeps each design over fit_depths_nm, extrapolates to target_depth_nm,
// and converts to predicted Q using the loss parameters in opts.materials
// plus other_loss. Requires at least two designs.
std::vector<DesignComparison> compare_designs(const std::vector<std::string>& designs,
                                              const std::vector<double>& fit_depths_nm,
                                              double target_depth_nm, double other_loss,
                                              const SweepOptions& opts);

}  // namespace qsurf::analysis
