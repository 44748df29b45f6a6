#include "qsurf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <memory>
#include <sstream>

namespace qsurf::analysis {

using geometry::DesignParams;
using geometry::Interface;
using geometry::Material;
using participation::ParticipationReport;
using solver::FieldSolution;

namespace {

std::map<std::string, double> electrode_drive(const mesh::Mesh& m, double drive_v) {
    std::map<std::string, double> bc;
    for (const std::string& name : m.electrodes) {
        if (name == "p")
            bc[name] = 0.5 * drive_v;
        else if (name == "n")
            bc[name] = -0.5 * drive_v;
        else
            bc[name] = 0.0;
    }
    return bc;
}

double rel_change(double now, double before) {
    double denom = std::max(std::abs(before), 1e-300);
    return std::abs(now - before) / denom;
}

}  // namespace

DepthSolution solve_at_depth(const DesignParams& params, double depth_nm,
                             const SweepOptions& opts) {
    auto layout = geometry::build_layout(params, nm_to_um(depth_nm));
    auto grid = std::make_shared<mesh::Mesh>(mesh::generate_mesh(layout, opts.mesh));
    FieldSolution sol = solver::solve(grid, opts.materials, electrode_drive(*grid, opts.drive_v));
    ParticipationReport report = participation::compute_report(sol, opts.report);

    int passes = opts.mesh.max_refine_passes + (opts.extra_uniform_refine ? 1 : 0);
    for (int pass = 0; pass < passes; ++pass) {
        bool uniform = opts.extra_uniform_refine && pass == passes - 1;
        double frac = uniform ? 1.0 : opts.marker_fraction;
        grid = std::make_shared<mesh::Mesh>(solver::refine(*grid, sol, frac));
        sol = solver::solve(grid, opts.materials, electrode_drive(*grid, opts.drive_v));
        ParticipationReport next = participation::compute_report(sol, opts.report);
        next.mesh_convergence["SM"] = rel_change(next.p_sm_per_m, report.p_sm_per_m);
        next.mesh_convergence["SA"] = rel_change(next.p_sa_per_m, report.p_sa_per_m);
        next.mesh_convergence["MA"] = rel_change(next.p_ma_per_m, report.p_ma_per_m);
        next.mesh_convergence["substrate"] = rel_change(next.p_substrate, report.p_substrate);
        report = std::move(next);
    }
    return {std::move(sol), std::move(report)};
}

participation::ParticipationReport participation_at_depth(const DesignParams& params,
                                                          double depth_nm,
                                                          const SweepOptions& opts) {
    return solve_at_depth(params, depth_nm, opts).report;
}

SweepResult trench_sweep(const DesignParams& params, const std::string& design_id,
                         std::vector<double> depths_nm, const SweepOptions& opts) {
    if (depths_nm.empty()) throw std::invalid_argument("sweep requires at least one depth");
    for (size_t i = 0; i + 1 < depths_nm.size(); ++i)
        if (!(depths_nm[i] < depths_nm[i + 1]))
            throw std::invalid_argument("sweep depths must be strictly increasing");
    for (double d : depths_nm) {
        if (d < opts.min_fit_depth_nm) {
            std::ostringstream os;
            os << "trench depth " << d << " nm is below the minimum solvable depth "
               << opts.min_fit_depth_nm << " nm; shallower depths are extrapolated, not solved";
            throw std::invalid_argument(os.str());
        }
    }

    SweepResult result;
    result.design = design_id;
    result.depths_nm = depths_nm;
    result.reports.resize(depths_nm.size());

    auto run_depth = [&](size_t i) {
        try {
            result.reports[i] = participation_at_depth(params, depths_nm[i], opts);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "sweep failed at depth " << depths_nm[i] << " nm: " << e.what();
            throw solve_error(os.str());
        }
    };

    if (opts.jobs <= 1 || depths_nm.size() <= 1) {
        for (size_t i = 0; i < depths_nm.size(); ++i) run_depth(i);
    } else {
        // Fan out over depths; results land in pre-sized slots, so the merge
        // order is deterministic regardless of completion order.
        size_t width = static_cast<size_t>(opts.jobs);
        for (size_t base = 0; base < depths_nm.size(); base += width) {
            std::vector<std::future<void>> batch;
            for (size_t i = base; i < std::min(base + width, depths_nm.size()); ++i)
                batch.push_back(std::async(std::launch::async, run_depth, i));
            for (auto& f : batch) f.get();
        }
    }
    return result;
}

double LogFit::evaluate(double depth_nm) const {
    return intercept + slope * std::log(depth_nm);
}

LogFit fit_log(const std::vector<double>& depths_nm, const std::vector<double>& values,
               double target_depth_nm, const std::string& quantity) {
    if (depths_nm.size() != values.size() || depths_nm.size() < 2)
        throw std::invalid_argument("fit requires at least two (depth, value) pairs");
    if (!(target_depth_nm > 0.0)) throw std::invalid_argument("target depth must be > 0");

    const size_t n = depths_nm.size();
    double sx = 0.0, sy = 0.0;
    std::vector<double> xs(n);
    for (size_t i = 0; i < n; ++i) {
        if (!(depths_nm[i] > 0.0)) throw std::invalid_argument("depths must be > 0");
        xs[i] = std::log(depths_nm[i]);
        sx += xs[i];
        sy += values[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (values[i] - my);
        syy += (values[i] - my) * (values[i] - my);
    }
    if (sxx == 0.0) throw fit_error("degenerate fit: all depths equal");

    LogFit fit;
    fit.quantity = quantity;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double r = values[i] - fit.evaluate(depths_nm[i]);
        ss_res += r * r;
    }
    fit.r_squared = (syy == 0.0) ? (ss_res == 0.0 ? 1.0 : 0.0) : 1.0 - ss_res / syy;
    fit.extrapolated_depth_nm = target_depth_nm;
    fit.extrapolated = fit.evaluate(target_depth_nm);
    if (fit.extrapolated < 0.0) {
        fit.extrapolated = 0.0;
        fit.clamped = true;
    }
    return fit;
}

std::vector<LogFit> log_extrapolate(const SweepResult& sweep, double target_depth_nm) {
    if (sweep.depths_nm.size() < 4)
        throw std::invalid_argument("log extrapolation requires at least 4 sweep depths");
    if (sweep.depths_nm.size() != sweep.reports.size())
        throw std::invalid_argument("sweep depths and reports are inconsistent");

    auto column = [&](auto getter) {
        std::vector<double> v;
        v.reserve(sweep.reports.size());
        for (const auto& r : sweep.reports) v.push_back(getter(r));
        return v;
    };
    std::vector<LogFit> fits;
    fits.push_back(fit_log(sweep.depths_nm,
                           column([](const ParticipationReport& r) { return r.p_sm_per_m; }),
                           target_depth_nm, "SM"));
    fits.push_back(fit_log(sweep.depths_nm,
                           column([](const ParticipationReport& r) { return r.p_sa_per_m; }),
                           target_depth_nm, "SA"));
    fits.push_back(fit_log(sweep.depths_nm,
                           column([](const ParticipationReport& r) { return r.p_ma_per_m; }),
                           target_depth_nm, "MA"));
    fits.push_back(fit_log(sweep.depths_nm,
                           column([](const ParticipationReport& r) { return r.p_substrate; }),
                           target_depth_nm, "substrate"));
    return fits;
}

double LossChannel::inv_q() const {
    if (is_bulk) return participation * tan_delta;
    return participation * (thickness_nm * 1e-9) * tan_delta;
}

LossBudget loss_budget(std::vector<LossChannel> channels, double other_loss, double f_qubit_ghz) {
    if (other_loss < 0.0) throw std::invalid_argument("other_loss must be >= 0");
    if (!(f_qubit_ghz > 0.0)) throw std::invalid_argument("qubit frequency must be > 0");
    for (const LossChannel& c : channels)
        if (c.participation < 0.0 || c.thickness_nm < 0.0 || c.tan_delta < 0.0)
            throw std::invalid_argument("loss channel inputs must be >= 0 (channel " + c.name + ")");

    LossBudget budget;
    budget.channels = std::move(channels);
    budget.other_loss = other_loss;
    budget.f_qubit_ghz = f_qubit_ghz;
    double total = other_loss;
    for (const LossChannel& c : budget.channels) total += c.inv_q();
    budget.total_inv_q = total;
    if (total == 0.0) {
        budget.infinite_q = true;
        budget.q_total = std::numeric_limits<double>::infinity();
        budget.t1_us = std::numeric_limits<double>::infinity();
    } else {
        budget.q_total = 1.0 / total;
        budget.t1_us = t1_from_q(budget.q_total, f_qubit_ghz);
    }
    return budget;
}

double q_from_t1(double t1_us, double f_ghz) {
    if (!(t1_us > 0.0) || !(f_ghz > 0.0))
        throw std::invalid_argument("q_from_t1 requires positive inputs");
    return (t1_us * 1e-6) * 2.0 * constants::pi * (f_ghz * 1e9);
}

double t1_from_q(double q, double f_ghz) {
    if (!(q > 0.0) || !(f_ghz > 0.0))
        throw std::invalid_argument("t1_from_q requires positive inputs");
    return q / (2.0 * constants::pi * (f_ghz * 1e9)) * 1e6;
}

double tan_delta_bound(double q_measured, double p_substrate) {
    if (!(q_measured > 0.0)) throw std::invalid_argument("measured Q must be > 0");
    if (!(p_substrate > 0.0) || p_substrate > 1.0)
        throw std::invalid_argument("substrate participation must lie in (0, 1]");
    return 1.0 / (p_substrate * q_measured);
}

double purcell_limit_us(const PurcellParams& params) {
    if (!(params.q_c > 0.0)) throw std::invalid_argument("coupling Q must be > 0");
    if (params.g_mhz < 0.0) throw std::invalid_argument("coupling g must be >= 0");
    if (!(params.f_res_ghz > 0.0) || !(params.f_qubit_ghz > 0.0))
        throw std::invalid_argument("frequencies must be > 0");
    const double delta_hz = (params.f_res_ghz - params.f_qubit_ghz) * 1e9;
    if (delta_hz == 0.0)
        throw std::domain_error("qubit on resonance with the readout: divergent Purcell rate");
    if (params.g_mhz == 0.0) return std::numeric_limits<double>::infinity();
    const double g_over_delta = (params.g_mhz * 1e6) / delta_hz;
    const double kappa = 2.0 * constants::pi * (params.f_res_ghz * 1e9) / params.q_c;
    const double rate = g_over_delta * g_over_delta * kappa;
    return 1e6 / rate;
}

std::vector<DesignComparison> compare_designs(const std::vector<std::string>& designs,
                                              const std::vector<double>& fit_depths_nm,
                                              double target_depth_nm, double other_loss,
                                              const SweepOptions& opts) {
    if (designs.size() < 2)
        throw std::invalid_argument("design comparison requires at least two designs");

    const solver::MaterialStack& mat = opts.materials;
    std::vector<DesignComparison> rows;
    for (const std::string& name : designs) {
        geometry::ModPreset p = geometry::preset(name);
        SweepResult sweep = trench_sweep(p.params, name, fit_depths_nm, opts);
        std::vector<LogFit> fits = log_extrapolate(sweep, target_depth_nm);

        DesignComparison row;
        row.design = name;
        for (const LogFit& f : fits) {
            if (f.quantity == "SM") row.p_sm_per_m = f.extrapolated;
            if (f.quantity == "SA") row.p_sa_per_m = f.extrapolated;
            if (f.quantity == "MA") row.p_ma_per_m = f.extrapolated;
            if (f.quantity == "substrate") row.p_substrate = std::min(f.extrapolated, 1.0);
        }
        row.inv_p_sa_m =
            row.p_sa_per_m > 0.0 ? 1.0 / row.p_sa_per_m : std::numeric_limits<double>::infinity();

        auto single_channel_q = [](double p_per_m, double t_nm, double tan_d) {
            double inv = p_per_m * (t_nm * 1e-9) * tan_d;
            return inv > 0.0 ? 1.0 / inv : std::numeric_limits<double>::infinity();
        };
        row.q_if_sm = single_channel_q(row.p_sm_per_m, mat.thickness_sm_nm, mat.tan_delta_sm);
        row.q_if_sa = single_channel_q(row.p_sa_per_m, mat.thickness_sa_nm, mat.tan_delta_sa);
        row.q_if_ma = single_channel_q(row.p_ma_per_m, mat.thickness_ma_nm, mat.tan_delta_ma);

        std::vector<LossChannel> channels = {
            {"SM", row.p_sm_per_m, mat.thickness_sm_nm, mat.tan_delta_sm, false},
            {"SA", row.p_sa_per_m, mat.thickness_sa_nm, mat.tan_delta_sa, false},
            {"MA", row.p_ma_per_m, mat.thickness_ma_nm, mat.tan_delta_ma, false},
            {"substrate", row.p_substrate, 0.0, mat.tan_delta_substrate, true},
        };
        LossBudget budget = loss_budget(std::move(channels), other_loss, 4.8);
        row.q_total = budget.q_total;
        row.infinite_q = budget.infinite_q;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace qsurf::analysis
