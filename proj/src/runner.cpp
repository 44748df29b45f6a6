#include "qsurf/runner.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qsurf/analysis.hpp"
#include "qsurf/report.hpp"

namespace qsurf::runner {

namespace fs = std::filesystem;
using config::Command;
using config::RunConfig;
using report::csv_row;
using report::fmt;

namespace {

analysis::SweepOptions sweep_options(const RunConfig& cfg, int jobs) {
    analysis::SweepOptions opts;
    opts.mesh = cfg.mesh;
    opts.materials = cfg.materials;
    opts.report = cfg.report;
    opts.min_fit_depth_nm = cfg.min_fit_depth_nm;
    opts.jobs = jobs;
    return opts;
}

std::string design_label(const RunConfig& cfg) {
    return cfg.design.empty() ? "custom" : cfg.design;
}

const std::vector<std::string> kParticipationHeader = {
    "design",      "trench_nm", "p_sm_per_m", "p_sa_per_m",
    "p_ma_per_m",  "p_substrate", "p_vacuum",  "cutoff_nm",
    "conv_sm",     "conv_sa",   "conv_ma",    "conv_substrate"};

std::string participation_row(const std::string& design, double trench_nm,
                              const participation::ParticipationReport& r) {
    auto conv = [&](const char* key) {
        auto it = r.mesh_convergence.find(key);
        return it == r.mesh_convergence.end() ? std::string("nan") : fmt(it->second);
    };
    return csv_row({design, fmt(trench_nm), fmt(r.p_sm_per_m), fmt(r.p_sa_per_m),
                    fmt(r.p_ma_per_m), fmt(r.p_substrate), fmt(r.p_vacuum), fmt(r.cutoff_nm),
                    conv("SM"), conv("SA"), conv("MA"), conv("substrate")});
}

std::string field_dump(const solver::FieldSolution& sol) {
    std::ostringstream os;
    os << "# element_centroid_x_um element_centroid_y_um ex_v_per_um ey_v_per_um\n";
    const mesh::Mesh& m = *sol.mesh;
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        Vec2 c = m.centroid(static_cast<int>(t));
        os << fmt(c.x) << " " << fmt(c.y) << " " << fmt(sol.field[t].x) << " "
           << fmt(sol.field[t].y) << "\n";
    }
    return os.str();
}

void produce_simulate(const RunConfig& cfg, int jobs, std::map<std::string, std::string>& out) {
    analysis::DepthSolution ds =
        analysis::solve_at_depth(cfg.params, cfg.trench_nm, sweep_options(cfg, jobs));
    std::string csv = csv_row(kParticipationHeader);
    csv += participation_row(design_label(cfg), cfg.trench_nm, ds.report);
    out["participation.csv"] = csv;
    if (cfg.dump_mesh) out["mesh.txt"] = mesh::dump_mesh(*ds.solution.mesh);
    if (cfg.dump_field) out["field.txt"] = field_dump(ds.solution);
}

void produce_sweep(const RunConfig& cfg, int jobs, std::map<std::string, std::string>& out) {
    analysis::SweepResult sweep = analysis::trench_sweep(cfg.params, design_label(cfg),
                                                         cfg.sweep_depths_nm,
                                                         sweep_options(cfg, jobs));
    std::string csv = csv_row(kParticipationHeader);
    for (size_t i = 0; i < sweep.depths_nm.size(); ++i)
        csv += participation_row(sweep.design, sweep.depths_nm[i], sweep.reports[i]);
    out["sweep.csv"] = csv;

    std::vector<analysis::LogFit> fits = analysis::log_extrapolate(sweep, cfg.target_depth_nm);
    std::string fit_csv = csv_row(
        {"quantity", "intercept", "slope", "r_squared", "target_depth_nm", "extrapolated",
         "clamped"});
    for (const analysis::LogFit& f : fits)
        fit_csv += csv_row({f.quantity, fmt(f.intercept), fmt(f.slope), fmt(f.r_squared),
                            fmt(f.extrapolated_depth_nm), fmt(f.extrapolated),
                            f.clamped ? "1" : "0"});
    out["fits.csv"] = fit_csv;

    std::ostringstream plot;
    plot << "# depth_nm p_sm_per_m p_sa_per_m p_ma_per_m\n";
    for (size_t i = 0; i < sweep.depths_nm.size(); ++i) {
        const auto& r = sweep.reports[i];
        plot << fmt(sweep.depths_nm[i]) << " " << fmt(r.p_sm_per_m) << " " << fmt(r.p_sa_per_m)
             << " " << fmt(r.p_ma_per_m) << "\n";
    }
    out["plot_participation_vs_depth.txt"] = plot.str();
}

void produce_budget(const RunConfig& cfg, std::map<std::string, std::string>& out) {
    const config::BudgetInputs& in = cfg.budget;
    const solver::MaterialStack& mat = cfg.materials;
    std::vector<analysis::LossChannel> channels;
    if (in.p_sm_per_m)
        channels.push_back({"SM", *in.p_sm_per_m, mat.thickness_sm_nm, mat.tan_delta_sm, false});
    if (in.p_sa_per_m)
        channels.push_back({"SA", *in.p_sa_per_m, mat.thickness_sa_nm, mat.tan_delta_sa, false});
    if (in.p_ma_per_m)
        channels.push_back({"MA", *in.p_ma_per_m, mat.thickness_ma_nm, mat.tan_delta_ma, false});
    if (in.p_substrate)
        channels.push_back({"substrate", *in.p_substrate, 0.0, mat.tan_delta_substrate, true});

    analysis::LossBudget budget =
        analysis::loss_budget(channels, in.other_loss, in.f_qubit_ghz);

    std::string chan_csv =
        csv_row({"channel", "participation", "thickness_nm", "tan_delta", "inv_q"});
    for (const analysis::LossChannel& c : budget.channels)
        chan_csv += csv_row({c.name, fmt(c.participation), fmt(c.thickness_nm), fmt(c.tan_delta),
                             fmt(c.inv_q())});
    chan_csv += csv_row({"other", "", "", "", fmt(budget.other_loss)});
    out["budget_channels.csv"] = chan_csv;

    std::string sum_csv = csv_row({"quantity", "value"});
    sum_csv += csv_row({"f_qubit_ghz", fmt(budget.f_qubit_ghz)});
    sum_csv += csv_row({"total_inv_q", fmt(budget.total_inv_q)});
    sum_csv += csv_row({"infinite_q", budget.infinite_q ? "1" : "0"});
    sum_csv += csv_row({"q_total", fmt(budget.q_total)});
    sum_csv += csv_row({"t1_us", fmt(budget.t1_us)});
    if (in.q_measured) {
        sum_csv += csv_row({"q_measured", fmt(*in.q_measured)});
        if (in.p_substrate)
            sum_csv += csv_row(
                {"tan_delta_bound", fmt(analysis::tan_delta_bound(*in.q_measured, *in.p_substrate))});
    }
    if (in.purcell) {
        sum_csv += csv_row({"purcell_t1_us", fmt(analysis::purcell_limit_us(*in.purcell))});
        sum_csv += csv_row({"purcell_g_mhz", fmt(in.purcell->g_mhz)});
        sum_csv += csv_row({"purcell_f_res_ghz", fmt(in.purcell->f_res_ghz)});
        sum_csv += csv_row({"purcell_q_c", fmt(in.purcell->q_c)});
    }
    out["budget_summary.csv"] = sum_csv;
}

void produce_compare(const RunConfig& cfg, int jobs, std::map<std::string, std::string>& out) {
    std::vector<analysis::DesignComparison> rows =
        analysis::compare_designs(cfg.compare_designs, cfg.sweep_depths_nm, cfg.target_depth_nm,
                                  cfg.compare_other_loss, sweep_options(cfg, jobs));
    std::string csv = csv_row({"design", "p_sm_per_m", "p_sa_per_m", "p_ma_per_m", "inv_p_sa_m",
                               "p_substrate", "q_if_sm", "q_if_sa", "q_if_ma", "q_total"});
    for (const auto& r : rows)
        csv += csv_row({r.design, fmt(r.p_sm_per_m), fmt(r.p_sa_per_m), fmt(r.p_ma_per_m),
                        fmt(r.inv_p_sa_m), fmt(r.p_substrate), fmt(r.q_if_sm), fmt(r.q_if_sa),
                        fmt(r.q_if_ma), fmt(r.q_total)});
    out["comparison.csv"] = csv;

    std::ostringstream plot;
    plot << "# inv_p_sa_m q_total design\n";
    for (const auto& r : rows)
        plot << fmt(r.inv_p_sa_m) << " " << fmt(r.q_total) << " " << r.design << "\n";
    out["plot_q_vs_inv_psa.txt"] = plot.str();
}

}  // namespace

std::map<std::string, std::string> produce_artifacts(const RunConfig& cfg, int jobs,
                                                     bool verbose) {
    std::map<std::string, std::string> artifacts;
    if (verbose)
        std::cerr << "running " << config::to_string(cfg.command) << " ..." << std::endl;
    switch (cfg.command) {
        case Command::Simulate: produce_simulate(cfg, jobs, artifacts); break;
        case Command::Sweep: produce_sweep(cfg, jobs, artifacts); break;
        case Command::Budget: produce_budget(cfg, artifacts); break;
        case Command::Compare: produce_compare(cfg, jobs, artifacts); break;
    }
    return artifacts;
}

int run(const RunRequest& request) {
    std::ifstream in(request.config_path);
    if (!in) {
        std::cerr << "config_error\t0\tcannot open config file: " << request.config_path << "\n";
        return kExitConfigError;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();

    config::ParseResult parsed = config::parse_config(buffer.str(), request.command);
    if (!parsed.ok()) {
        for (const config::ParseError& e : parsed.errors)
            std::cerr << "config_error\t" << e.line << "\t" << e.message << "\n";
        return kExitConfigError;
    }

    std::map<std::string, std::string> artifacts;
    try {
        artifacts = produce_artifacts(parsed.config, std::max(1, request.jobs), request.verbose);
    } catch (const std::exception& e) {
        std::cerr << "runtime_error\t" << e.what() << "\n";
        return kExitRuntimeError;
    }

    try {
        fs::create_directories(request.out_dir);
        std::string manifest;
        for (const auto& [name, content] : artifacts) {
            std::ofstream f(fs::path(request.out_dir) / name, std::ios::binary);
            f << content;
            if (!f) throw std::runtime_error("failed to write " + name);
            manifest += name + "\t" + report::fnv1a_hex(content) + "\t" +
                        std::to_string(content.size()) + "\n";
            if (request.verbose) std::cerr << "wrote " << name << std::endl;
        }
        std::ofstream mf(fs::path(request.out_dir) / "manifest.txt", std::ios::binary);
        mf << manifest;
        if (!mf) throw std::runtime_error("failed to write manifest.txt");
    } catch (const std::exception& e) {
        std::cerr << "runtime_error\t" << e.what() << "\n";
        return kExitRuntimeError;
    }
    return kExitOk;
}

}  // namespace qsurf::runner
