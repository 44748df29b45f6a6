#include "qsurf/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace qsurf::solver {

using geometry::Material;
using mesh::Mesh;
using mesh::Triangle;

double MaterialStack::relative_permittivity(Material m) const {
    switch (m) {
        case Material::Substrate: return eps_substrate;
        case Material::Vacuum: return eps_vacuum;
        case Material::Conductor: return 0.0;  // excluded from assembly
    }
    return 0.0;
}

void MaterialStack::check() const {
    if (eps_substrate < 1.0 || eps_vacuum < 1.0 || eps_contamination < 1.0)
        throw std::invalid_argument("relative permittivities must be >= 1");
    if (thickness_sm_nm < 0.0 || thickness_sa_nm < 0.0 || thickness_ma_nm < 0.0)
        throw std::invalid_argument("layer thicknesses must be >= 0");
    if (tan_delta_sm < 0.0 || tan_delta_sa < 0.0 || tan_delta_ma < 0.0 ||
        tan_delta_substrate < 0.0)
        throw std::invalid_argument("loss tangents must be >= 0");
}

namespace {

struct ElementGeometry {
    double area;
    double bx[3], by[3];  // gradient of the barycentric basis, times 2A
};

ElementGeometry element_geometry(const Mesh& m, const Triangle& t) {
    const Vec2& p0 = m.vertices[t.v[0]];
    const Vec2& p1 = m.vertices[t.v[1]];
    const Vec2& p2 = m.vertices[t.v[2]];
    ElementGeometry g;
    g.area = 0.5 * (p1 - p0).cross(p2 - p0);
    g.bx[0] = p1.y - p2.y;
    g.bx[1] = p2.y - p0.y;
    g.bx[2] = p0.y - p1.y;
    g.by[0] = p2.x - p1.x;
    g.by[1] = p0.x - p2.x;
    g.by[2] = p1.x - p0.x;
    return g;
}

Vec2 element_gradient(const Mesh& m, const Triangle& t, const std::vector<double>& u) {
    ElementGeometry g = element_geometry(m, t);
    double gx = 0.0, gy = 0.0;
    for (int i = 0; i < 3; ++i) {
        gx += u[t.v[i]] * g.bx[i];
        gy += u[t.v[i]] * g.by[i];
    }
    double inv = 1.0 / (2.0 * g.area);
    return {gx * inv, gy * inv};
}

}  // namespace

FieldSolution solve(std::shared_ptr<const Mesh> mesh_ptr, const MaterialStack& materials,
                    const std::map<std::string, double>& electrode_voltages) {
    materials.check();
    const Mesh& m = *mesh_ptr;
    const size_t n = m.vertices.size();
    if (n == 0 || m.triangles.empty()) throw std::invalid_argument("empty mesh");

    // Electrode voltages, checked against the electrodes actually present.
    std::vector<double> electrode_v(m.electrodes.size(), 0.0);
    {
        std::ostringstream missing;
        for (size_t e = 0; e < m.electrodes.size(); ++e) {
            auto it = electrode_voltages.find(m.electrodes[e]);
            if (it == electrode_voltages.end()) {
                missing << (missing.tellp() > 0 ? ", " : "") << m.electrodes[e];
                continue;
            }
            electrode_v[e] = it->second;
        }
        if (missing.tellp() > 0)
            throw std::invalid_argument("no voltage assigned to electrode(s): " + missing.str());
        for (const auto& [name, v] : electrode_voltages)
            if (m.electrode_id(name) < 0)
                throw std::invalid_argument("voltage given for unknown electrode '" + name + "'");
    }

    // Dirichlet set: every vertex of every conductor element.
    std::vector<int> vert_electrode(n, -1);
    for (const Triangle& t : m.triangles) {
        if (t.region != Material::Conductor) continue;
        for (int v : t.v) {
            if (vert_electrode[v] >= 0 && vert_electrode[v] != t.electrode)
                throw solve_error("two electrodes share a vertex; conductors must not touch");
            vert_electrode[v] = t.electrode;
        }
    }

    std::vector<int> dof(n, -1);
    int n_free = 0;
    for (size_t v = 0; v < n; ++v)
        if (vert_electrode[v] < 0) dof[v] = n_free++;
    if (n_free == static_cast<int>(n))
        throw solve_error("no conductor in mesh: system has no voltage reference");

    FieldSolution sol;
    sol.mesh = std::move(mesh_ptr);
    sol.materials = materials;
    sol.bc = electrode_voltages;
    sol.potential.assign(n, 0.0);
    for (size_t v = 0; v < n; ++v)
        if (vert_electrode[v] >= 0) sol.potential[v] = electrode_v[vert_electrode[v]];

    // Assemble K u = b over dielectric elements; Dirichlet values moved to
    // the right-hand side.
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(9 * m.triangles.size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_free);
    for (const Triangle& t : m.triangles) {
        if (t.region == Material::Conductor) continue;
        const double eps = materials.relative_permittivity(t.region);
        ElementGeometry g = element_geometry(m, t);
        const double coef = eps / (4.0 * g.area);
        for (int i = 0; i < 3; ++i) {
            int vi = t.v[i];
            if (dof[vi] < 0) continue;
            for (int j = 0; j < 3; ++j) {
                int vj = t.v[j];
                double kij = coef * (g.bx[i] * g.bx[j] + g.by[i] * g.by[j]);
                if (dof[vj] >= 0)
                    triplets.emplace_back(dof[vi], dof[vj], kij);
                else
                    b[dof[vi]] -= kij * sol.potential[vj];
            }
        }
    }

    Eigen::SparseMatrix<double> K(n_free, n_free);
    K.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_free);
    double bnorm = b.norm();
    if (bnorm > 0.0) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
        if (ldlt.info() != Eigen::Success)
            throw solve_error("sparse factorization failed (singular system)");
        x = ldlt.solve(b);
        double res = (K * x - b).norm() / bnorm;
        if (res > kResidualTolerance) {
            // one step of iterative refinement
            Eigen::VectorXd dx = ldlt.solve(b - K * x);
            x += dx;
            res = (K * x - b).norm() / bnorm;
        }
        if (res > kResidualTolerance) {
            std::ostringstream os;
            os << "linear solve did not reach residual tolerance: " << res;
            throw solve_error(os.str());
        }
        sol.residual = res;
    }
    for (size_t v = 0; v < n; ++v)
        if (dof[v] >= 0) sol.potential[v] = x[dof[v]];

    // Per-element fields and energies. Lengths are in micrometers; the
    // micrometers cancel in |E|^2 * area, so the energy per unit length is
    // eps0 * (V^2 scale) directly.
    sol.field.resize(m.triangles.size());
    sol.element_energy.resize(m.triangles.size());
    double u_sub = 0.0, u_vac = 0.0;
    for (size_t ti = 0; ti < m.triangles.size(); ++ti) {
        const Triangle& t = m.triangles[ti];
        if (t.region == Material::Conductor) {
            sol.field[ti] = {0.0, 0.0};
            sol.element_energy[ti] = 0.0;
            continue;
        }
        Vec2 grad = element_gradient(m, t, sol.potential);
        sol.field[ti] = -grad;
        double area = m.signed_area(static_cast<int>(ti));
        double e = 0.5 * constants::eps0_f_per_m * materials.relative_permittivity(t.region) *
                   grad.squared_norm() * area;
        sol.element_energy[ti] = e;
        (t.region == Material::Substrate ? u_sub : u_vac) += e;
    }
    sol.u_substrate_j_per_m = u_sub;
    sol.u_vacuum_j_per_m = u_vac;
    sol.u_total_j_per_m = u_sub + u_vac;
    return sol;
}

double energy_from_potential(const Mesh& m, const MaterialStack& materials,
                             const std::vector<double>& potential) {
    if (potential.size() != m.vertices.size())
        throw std::invalid_argument("potential size does not match vertex count");
    double u_tot = 0.0;
    for (size_t ti = 0; ti < m.triangles.size(); ++ti) {
        const Triangle& t = m.triangles[ti];
        if (t.region == Material::Conductor) continue;
        Vec2 grad = element_gradient(m, t, potential);
        u_tot += 0.5 * constants::eps0_f_per_m * materials.relative_permittivity(t.region) *
                 grad.squared_norm() * m.signed_area(static_cast<int>(ti));
    }
    return u_tot;
}

double capacitance(const FieldSolution& sol) {
    std::vector<double> driven;
    for (const auto& [name, v] : sol.bc)
        if (v != 0.0) driven.push_back(v);
    if (driven.size() != 2)
        throw std::invalid_argument("capacitance requires exactly two driven electrodes");
    double vsum = driven[0] + driven[1];
    double vdiff = driven[0] - driven[1];
    if (std::abs(vsum) > 1e-9 * std::abs(vdiff))
        throw std::invalid_argument("capacitance requires an antisymmetric drive (+V/2, -V/2)");
    return 2.0 * sol.u_total_j_per_m / (vdiff * vdiff);
}

double charging_energy_mhz(double capacitance_farad) {
    if (!(capacitance_farad > 0.0))
        throw std::invalid_argument("charging energy requires positive capacitance");
    const double e = constants::elementary_charge_c;
    const double h = constants::planck_j_s;
    return e * e / (2.0 * h * capacitance_farad) / 1.0e6;
}

std::vector<double> error_indicator(const FieldSolution& sol) {
    const Mesh& m = *sol.mesh;
    // Edge -> adjacent elements.
    std::unordered_map<std::uint64_t, std::array<int, 2>> edge_tris;
    edge_tris.reserve(2 * m.triangles.size());
    for (size_t t = 0; t < m.triangles.size(); ++t) {
        for (int e = 0; e < 3; ++e) {
            std::uint64_t k = mesh::edge_key(m.triangles[t].v[e], m.triangles[t].v[(e + 1) % 3]);
            auto [it, fresh] = edge_tris.try_emplace(k, std::array<int, 2>{-1, -1});
            if (it->second[0] < 0)
                it->second[0] = static_cast<int>(t);
            else
                it->second[1] = static_cast<int>(t);
        }
    }
    std::vector<double> eta2(m.triangles.size(), 0.0);
    for (const auto& [key, ts] : edge_tris) {
        if (ts[0] < 0 || ts[1] < 0) continue;
        const Triangle& ta = m.triangles[ts[0]];
        const Triangle& tb = m.triangles[ts[1]];
        if (ta.region == Material::Conductor || tb.region == Material::Conductor) continue;
        int a = static_cast<int>(key >> 32);
        int b = static_cast<int>(key & 0xffffffffu);
        Vec2 along = m.vertices[b] - m.vertices[a];
        double len = along.norm();
        Vec2 normal{-along.y / len, along.x / len};
        double flux_a = sol.materials.relative_permittivity(ta.region) * sol.field[ts[0]].dot(normal);
        double flux_b = sol.materials.relative_permittivity(tb.region) * sol.field[ts[1]].dot(normal);
        double jump = (flux_a - flux_b) * len;
        eta2[ts[0]] += 0.5 * jump * jump;
        eta2[ts[1]] += 0.5 * jump * jump;
    }
    for (double& v : eta2) v = std::sqrt(v);
    return eta2;
}

mesh::Mesh refine(const Mesh& m, const FieldSolution& sol, double marker_fraction) {
    if (sol.mesh.get() != &m)
        throw std::invalid_argument("solution was not computed on the given mesh");
    return mesh::refine_by_indicator(m, error_indicator(sol), marker_fraction);
}

}  // namespace qsurf::solver
