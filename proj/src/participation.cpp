#include "qsurf/participation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace qsurf::participation {

using geometry::Interface;
using geometry::Material;
using mesh::Mesh;
using solver::FieldSolution;

Vec2 transform_field(const Vec2& e2, const Vec2& n, double eps1, double eps2) {
    if (std::abs(n.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("interface normal must be a unit vector");
    if (eps1 < 1.0 || eps2 < 1.0)
        throw std::invalid_argument("relative permittivities must be >= 1");
    const double en = e2.dot(n);
    const Vec2 normal_part = n * en;
    const Vec2 tangential_part = e2 - normal_part;
    return normal_part * (eps2 / eps1) + tangential_part;
}

std::vector<InterfaceSample> collect_samples(const FieldSolution& sol, Interface tag,
                                             bool include_sidewalls) {
    const Mesh& m = *sol.mesh;

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

    const Material side2_material =
        (tag == Interface::MA) ? Material::Vacuum : Material::Substrate;

    std::vector<InterfaceSample> samples;
    for (const mesh::BoundaryEdge& be : m.boundary_edges) {
        if (be.tag != tag) continue;
        if (!include_sidewalls && be.sidewall) continue;
        auto it = edge_tris.find(mesh::edge_key(be.v0, be.v1));
        if (it == edge_tris.end())
            throw std::invalid_argument("boundary edge is not part of the mesh");
        int side2 = -1;
        for (int t : it->second)
            if (t >= 0 && m.triangles[t].region == side2_material) side2 = t;
        if (side2 < 0) {
            std::ostringstream os;
            os << "interface edge (" << be.v0 << "," << be.v1 << ") tagged "
               << geometry::to_string(tag) << " has no adjacent "
               << geometry::to_string(side2_material) << " element";
            throw std::invalid_argument(os.str());
        }
        const Vec2& a = m.vertices[be.v0];
        const Vec2& b = m.vertices[be.v1];
        Vec2 along = b - a;
        double len = along.norm();
        InterfaceSample s;
        s.position = (a + b) * 0.5;
        s.tangent = along * (1.0 / len);
        s.normal = {-s.tangent.y, s.tangent.x};
        s.e2 = sol.field[side2];
        s.side2_eps = sol.materials.relative_permittivity(side2_material);
        s.arc_weight_um = len;
        samples.push_back(s);
    }
    return samples;
}

double surface_participation(const std::vector<InterfaceSample>& samples, double eps1,
                             const FieldSolution& sol, double cutoff_nm, bool* empty_warning) {
    if (cutoff_nm < 0.0) throw std::invalid_argument("cutoff must be >= 0");
    if (empty_warning) *empty_warning = false;
    if (samples.empty()) {
        if (empty_warning) *empty_warning = true;
        return 0.0;
    }
    if (!(sol.u_total_j_per_m > 0.0))
        throw std::domain_error("participation undefined: zero total field energy");

    const std::vector<Vec2>& corners = sol.mesh->conductor_corners;
    const double cutoff_um = nm_to_um(cutoff_nm);
    const double cutoff2 = cutoff_um * cutoff_um;

    double num = 0.0;  // J/m per um of layer thickness
    for (const InterfaceSample& s : samples) {
        if (cutoff2 > 0.0) {
            bool excluded = false;
            for (const Vec2& c : corners) {
                if ((s.position - c).squared_norm() < cutoff2) {
                    excluded = true;
                    break;
                }
            }
            if (excluded) continue;
        }
        Vec2 e1 = transform_field(s.e2, s.normal, eps1, s.side2_eps);
        num += 0.5 * constants::eps0_f_per_m * eps1 * e1.squared_norm() * s.arc_weight_um;
    }
    return num / sol.u_total_j_per_m * um_per_m;
}

double bulk_participation(const FieldSolution& sol, Material region) {
    if (!(sol.u_total_j_per_m > 0.0))
        throw std::domain_error("participation undefined: zero total field energy");
    switch (region) {
        case Material::Substrate: return sol.u_substrate_j_per_m / sol.u_total_j_per_m;
        case Material::Vacuum: return sol.u_vacuum_j_per_m / sol.u_total_j_per_m;
        default: throw std::invalid_argument("bulk participation is defined for dielectrics only");
    }
}

std::vector<CutoffRow> cutoff_sensitivity(const FieldSolution& sol,
                                          const std::vector<InterfaceSample>& samples,
                                          double eps1, const std::vector<double>& cutoffs_nm) {
    std::vector<CutoffRow> rows;
    rows.reserve(cutoffs_nm.size());
    for (double c : cutoffs_nm)
        rows.push_back({c, surface_participation(samples, eps1, sol, c)});
    return rows;
}

double ParticipationReport::surface(Interface tag) const {
    switch (tag) {
        case Interface::SM: return p_sm_per_m;
        case Interface::SA: return p_sa_per_m;
        case Interface::MA: return p_ma_per_m;
        default: throw std::invalid_argument("no surface participation for this tag");
    }
}

ParticipationReport compute_report(const FieldSolution& sol, const ReportOptions& opts) {
    ParticipationReport rep;
    rep.cutoff_nm = opts.cutoff_nm;
    const double eps1 = sol.materials.eps_contamination;

    struct Entry {
        Interface tag;
        double* value;
        double thickness_nm;
    };
    Entry entries[] = {
        {Interface::SM, &rep.p_sm_per_m, sol.materials.thickness_sm_nm},
        {Interface::SA, &rep.p_sa_per_m, sol.materials.thickness_sa_nm},
        {Interface::MA, &rep.p_ma_per_m, sol.materials.thickness_ma_nm},
    };
    for (const Entry& e : entries) {
        bool empty = false;
        auto samples = collect_samples(sol, e.tag, opts.include_sa_sidewalls);
        *e.value = surface_participation(samples, eps1, sol, opts.cutoff_nm, &empty);
        if (empty) {
            std::ostringstream os;
            os << "no " << geometry::to_string(e.tag) << " interface samples";
            rep.warnings.push_back(os.str());
        }
        double p = *e.value * e.thickness_nm * 1e-9;
        if (p > kPerturbativeLimit) {
            std::ostringstream os;
            os << geometry::to_string(e.tag) << " layer participation " << p
               << " exceeds the thin-layer limit " << kPerturbativeLimit
               << "; the no-layer approximation is not self-consistent";
            rep.warnings.push_back(os.str());
        }
    }
    rep.p_substrate = bulk_participation(sol, Material::Substrate);
    rep.p_vacuum = bulk_participation(sol, Material::Vacuum);
    return rep;
}

}  // namespace qsurf::participation
