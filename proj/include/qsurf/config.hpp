#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsurf/analysis.hpp"
#include "qsurf/geometry.hpp"

// Declarative run configuration: one plain-text file with [section] headers
// and key = value lines. Lengths and frequencies carry explicit unit
// suffixes (nm, um, mm, m; Hz, kHz, MHz, GHz); unknown sections and keys are
// rejected. Parsing never throws: every problem is reported with its line
// number so a bad file yields the full list of mistakes at once.

namespace qsurf::config {

enum class Command { Simulate, Sweep, Budget, Compare };

const char* to_string(Command c);

struct ParseError {
    int line = 0;  // 0 for file-level problems
    std::string message;
};

struct BudgetInputs {
    std::optional<double> p_sm_per_m;
    std::optional<double> p_sa_per_m;
    std::optional<double> p_ma_per_m;
    std::optional<double> p_substrate;
    double other_loss = 0.0;
    double f_qubit_ghz = 0.0;
    std::optional<double> q_measured;
    std::optional<analysis::PurcellParams> purcell;
};

struct RunConfig {
    Command command = Command::Simulate;

    // [geometry]
    std::string design;  // preset name, empty for custom parameter sets
    geometry::DesignParams params;
    double trench_nm = 0.0;

    // [materials]; the explicit_* flags record what the file actually set,
    // because budget-bearing parameters must never come from defaults.
    solver::MaterialStack materials;
    bool explicit_thickness[3] = {false, false, false};   // SM, SA, MA
    bool explicit_tan_delta[4] = {false, false, false, false};  // SM, SA, MA, substrate

    // [mesh]
    mesh::MeshControls mesh;

    // [participation]
    participation::ReportOptions report;

    // [sweep]
    std::vector<double> sweep_depths_nm;  // sorted ascending
    double target_depth_nm = 50.0;
    double min_fit_depth_nm = 300.0;

    // [budget]
    BudgetInputs budget;

    // [compare]
    std::vector<std::string> compare_designs;
    double compare_other_loss = 0.0;

    // [output]
    bool dump_mesh = false;
    bool dump_field = false;
};

struct ParseResult {
    RunConfig config;
    std::vector<ParseError> errors;

    bool ok() const { return errors.empty(); }
};

ParseResult parse_config(const std::string& text, Command command);

Command parse_command(const std::string& name);

}  // namespace qsurf::config
