#include "qsurf/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace qsurf::geometry {

const char* to_string(Material m) {
    switch (m) {
        case Material::Substrate: return "substrate";
        case Material::Vacuum: return "vacuum";
        case Material::Conductor: return "conductor";
    }
    return "?";
}

const char* to_string(Interface t) {
    switch (t) {
        case Interface::SM: return "SM";
        case Interface::SA: return "SA";
        case Interface::MA: return "MA";
        case Interface::Outer: return "outer";
    }
    return "?";
}

double LayoutSpec::total_segment_length(Interface tag) const {
    double total = 0.0;
    for (const Segment& s : segments)
        if (s.tag == tag) total += s.length();
    return total;
}

ModPreset preset(char id) {
    ModPreset p;
    p.id = static_cast<char>(std::toupper(static_cast<unsigned char>(id)));
    DesignParams& d = p.params;
    switch (p.id) {
        case 'A':
            d.style = Style::Interdigitated;
            d.conductor_width_um = 1.0;
            d.gap_um = 1.0;
            d.n_repeats = 8;
            p.coupling_g_mhz = 8.0;
            break;
        case 'B':
            d.style = Style::Interdigitated;
            d.conductor_width_um = 5.0;
            d.gap_um = 5.0;
            d.n_repeats = 6;
            p.coupling_g_mhz = 20.0;
            break;
        case 'C':
            d.style = Style::Interdigitated;
            d.conductor_width_um = 20.0;
            d.gap_um = 20.0;
            d.n_repeats = 4;
            p.coupling_g_mhz = 45.0;
            break;
        case 'D':
            d.style = Style::PadPair;
            d.conductor_width_um = 60.0;
            d.gap_um = 20.0;
            d.n_repeats = 1;
            d.pad_length_um = 500.0;
            p.coupling_g_mhz = 52.0;
            break;
        case 'E':
            d.style = Style::PadPair;
            d.conductor_width_um = 120.0;
            d.gap_um = 70.0;
            d.n_repeats = 1;
            d.pad_length_um = 500.0;
            p.coupling_g_mhz = 53.0;
            break;
        default:
            throw std::invalid_argument(std::string("unknown design preset '") + id + "'");
    }
    return p;
}

ModPreset preset(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (n.size() == 5 && n.rfind("mod_", 0) == 0) return preset(n[4]);
    if (n.size() == 1) return preset(n[0]);
    throw std::invalid_argument("unknown design preset '" + name + "'");
}

namespace {

constexpr double kGroundStripWidth = 60.0;  // um
constexpr double kGroundClearanceMin = 5.0;

void check_params(const DesignParams& p) {
    auto positive = [](double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string(what) + " must be strictly positive");
    };
    positive(p.conductor_width_um, "conductor_width");
    positive(p.gap_um, "gap");
    positive(p.metal_thickness_um, "metal_thickness");
    positive(p.ground_box_span_um, "ground_box_span");
    if (p.n_repeats < 1) throw std::invalid_argument("n_repeats must be >= 1");
    if (p.style == Style::PadPair) positive(p.pad_length_um, "pad_length");
}

}  // namespace

LayoutSpec build_layout(const DesignParams& params, double trench_depth_um) {
    check_params(params);
    if (trench_depth_um < 0.0 || !std::isfinite(trench_depth_um))
        throw std::invalid_argument("trench_depth must be >= 0");

    const double w = params.conductor_width_um;
    const double g = params.gap_um;
    const double tm = params.metal_thickness_um;
    const double d = trench_depth_um;
    const int n_fingers = 2 * params.n_repeats;

    // Electrode array centered on x = 0, fingers alternating n,p,n,p,...
    // so that mirror reflection swaps the two labels.
    const double extent = n_fingers * w + (n_fingers - 1) * g;
    const double half = extent / 2.0;

    struct Conductor {
        double x0, x1;
        std::string electrode;
    };
    std::vector<Conductor> conductors;
    for (int i = 0; i < n_fingers; ++i) {
        double x0 = -half + i * (w + g);
        conductors.push_back({x0, x0 + w, (i % 2 == 0) ? "n" : "p"});
    }

    const double span_half = params.ground_box_span_um / 2.0;
    if (span_half < half + kGroundClearanceMin)
        throw construction_error("ground_box_span too small for the electrode array");
    conductors.insert(conductors.begin(), {-span_half - kGroundStripWidth, -span_half, "gnd"});
    conductors.push_back({span_half, span_half + kGroundStripWidth, "gnd"});

    // Bounding box: at least 10x the electrode extent in every direction,
    // and wide enough to clear the grounding metal comfortably.
    const double half_w = std::max(5.0 * extent, span_half + kGroundStripWidth + 50.0);
    const double depth = std::max(5.0 * extent, span_half + kGroundStripWidth + 50.0);

    LayoutSpec layout;
    layout.trench_depth_um = d;
    layout.metal_thickness_um = tm;
    layout.electrode_extent_um = extent;
    layout.bbox = {-half_w, -depth, half_w, depth};

    // Conductor regions and their corners.
    for (const Conductor& c : conductors) {
        layout.regions.push_back({{c.x0, 0.0, c.x1, tm}, Material::Conductor, c.electrode});
        layout.conductor_corners.push_back({c.x0, 0.0});
        layout.conductor_corners.push_back({c.x1, 0.0});
        layout.conductor_corners.push_back({c.x0, tm});
        layout.conductor_corners.push_back({c.x1, tm});
    }

    // Exposed surface intervals between/around the conductors. Everything
    // not covered by metal is recessed by the trench depth.
    std::vector<std::pair<double, double>> gaps;
    gaps.emplace_back(layout.bbox.x0, conductors.front().x0);
    for (size_t i = 0; i + 1 < conductors.size(); ++i)
        gaps.emplace_back(conductors[i].x1, conductors[i + 1].x0);
    gaps.emplace_back(conductors.back().x1, layout.bbox.x1);
    for (auto& [a, b] : gaps)
        if (!(a < b)) throw construction_error("conductors overlap or touch");

    // Substrate: a full-width slab below the trench floor plus one mesa
    // under each conductor. Vacuum: a full-width slab above the metal plus
    // one column per exposed gap.
    if (d > 0.0) {
        layout.regions.push_back(
            {{layout.bbox.x0, layout.bbox.y0, layout.bbox.x1, -d}, Material::Substrate, {}});
        for (const Conductor& c : conductors)
            layout.regions.push_back({{c.x0, -d, c.x1, 0.0}, Material::Substrate, {}});
        for (auto& [a, b] : gaps)
            layout.regions.push_back({{a, -d, b, tm}, Material::Vacuum, {}});
    } else {
        layout.regions.push_back(
            {{layout.bbox.x0, layout.bbox.y0, layout.bbox.x1, 0.0}, Material::Substrate, {}});
        for (auto& [a, b] : gaps)
            layout.regions.push_back({{a, 0.0, b, tm}, Material::Vacuum, {}});
    }
    layout.regions.push_back(
        {{layout.bbox.x0, tm, layout.bbox.x1, layout.bbox.y1}, Material::Vacuum, {}});

    // Interface segments.
    for (const Conductor& c : conductors) {
        layout.segments.push_back({{c.x0, 0.0}, {c.x1, 0.0}, Interface::SM, false});
        layout.segments.push_back({{c.x0, tm}, {c.x1, tm}, Interface::MA, false});
        layout.segments.push_back({{c.x0, 0.0}, {c.x0, tm}, Interface::MA, false});
        layout.segments.push_back({{c.x1, 0.0}, {c.x1, tm}, Interface::MA, false});
    }
    for (auto& [a, b] : gaps) {
        layout.segments.push_back({{a, -d}, {b, -d}, Interface::SA, false});
        if (d > 0.0) {
            // Trench sidewalls; skip at the domain boundary (outermost gaps
            // end on the bbox, which has no mesa there).
            if (a != layout.bbox.x0)
                layout.segments.push_back({{a, -d}, {a, 0.0}, Interface::SA, true});
            if (b != layout.bbox.x1)
                layout.segments.push_back({{b, -d}, {b, 0.0}, Interface::SA, true});
        }
    }
    layout.segments.push_back(
        {{layout.bbox.x0, layout.bbox.y0}, {layout.bbox.x1, layout.bbox.y0}, Interface::Outer, false});
    layout.segments.push_back(
        {{layout.bbox.x0, layout.bbox.y1}, {layout.bbox.x1, layout.bbox.y1}, Interface::Outer, false});
    layout.segments.push_back(
        {{layout.bbox.x0, layout.bbox.y0}, {layout.bbox.x0, layout.bbox.y1}, Interface::Outer, false});
    layout.segments.push_back(
        {{layout.bbox.x1, layout.bbox.y0}, {layout.bbox.x1, layout.bbox.y1}, Interface::Outer, false});

    auto issues = validate(layout);
    if (!issues.empty()) {
        std::ostringstream os;
        os << "constructed layout failed validation:";
        for (const auto& s : issues) os << "\n  " << s;
        throw construction_error(os.str());
    }
    return layout;
}

namespace {

bool rects_overlap(const Rect& a, const Rect& b) {
    double ox = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
    double oy = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
    return ox > 0.0 && oy > 0.0;
}

// 1D interval cover bookkeeping for the tag-completeness check: each
// conductor side must be covered exactly once by tagged segments.
struct SideCover {
    double lo, hi;
    std::vector<std::pair<double, double>> pieces;

    std::string status() const {
        auto sorted = pieces;
        std::sort(sorted.begin(), sorted.end());
        double cursor = lo;
        for (auto& [a, b] : sorted) {
            if (a < cursor - 1e-12) return "double-tagged";
            if (a > cursor + 1e-12) return "untagged";
            cursor = b;
        }
        if (cursor < hi - 1e-12) return "untagged";
        return "";
    }
};

}  // namespace

std::vector<std::string> validate(const LayoutSpec& layout) {
    std::vector<std::string> issues;
    std::ostringstream os;

    // Regions inside the bbox, pairwise non-overlapping, tiling by area.
    double area_sum = 0.0;
    for (size_t i = 0; i < layout.regions.size(); ++i) {
        const Rect& r = layout.regions[i].rect;
        if (!(r.x0 < r.x1 && r.y0 < r.y1)) {
            os.str("");
            os << "region " << i << " is degenerate";
            issues.push_back(os.str());
            continue;
        }
        if (r.x0 < layout.bbox.x0 - 1e-12 || r.x1 > layout.bbox.x1 + 1e-12 ||
            r.y0 < layout.bbox.y0 - 1e-12 || r.y1 > layout.bbox.y1 + 1e-12) {
            os.str("");
            os << "region " << i << " extends outside the bounding box";
            issues.push_back(os.str());
        }
        area_sum += r.area();
        for (size_t j = i + 1; j < layout.regions.size(); ++j) {
            if (rects_overlap(r, layout.regions[j].rect)) {
                os.str("");
                os << "regions " << i << " and " << j << " overlap";
                issues.push_back(os.str());
            }
        }
    }
    double bbox_area = layout.bbox.area();
    if (std::abs(area_sum - bbox_area) > 1e-9 * bbox_area)
        issues.push_back("regions do not tile the bounding box");

    // Conductor boundary must be covered exactly by SM and MA segments:
    // SM where the conductor rests on substrate, MA elsewhere.
    for (size_t ci = 0; ci < layout.regions.size(); ++ci) {
        const Region& reg = layout.regions[ci];
        if (reg.material != Material::Conductor) continue;
        const Rect& r = reg.rect;
        SideCover bottom{r.x0, r.x1, {}}, top{r.x0, r.x1, {}};
        SideCover left{r.y0, r.y1, {}}, right{r.y0, r.y1, {}};
        for (const Segment& s : layout.segments) {
            if (s.tag != Interface::SM && s.tag != Interface::MA) continue;
            if (s.horizontal()) {
                double xa = std::min(s.a.x, s.b.x), xb = std::max(s.a.x, s.b.x);
                double lo = std::max(xa, r.x0), hi = std::min(xb, r.x1);
                if (lo >= hi) continue;
                if (s.a.y == r.y0) bottom.pieces.emplace_back(lo, hi);
                if (s.a.y == r.y1) top.pieces.emplace_back(lo, hi);
            } else {
                double ya = std::min(s.a.y, s.b.y), yb = std::max(s.a.y, s.b.y);
                double lo = std::max(ya, r.y0), hi = std::min(yb, r.y1);
                if (lo >= hi) continue;
                if (s.a.x == r.x0) left.pieces.emplace_back(lo, hi);
                if (s.a.x == r.x1) right.pieces.emplace_back(lo, hi);
            }
        }
        const char* names[4] = {"bottom", "top", "left", "right"};
        SideCover* sides[4] = {&bottom, &top, &left, &right};
        for (int k = 0; k < 4; ++k) {
            std::string st = sides[k]->status();
            if (!st.empty()) {
                os.str("");
                os << "conductor region " << ci << " (" << reg.electrode << "): " << names[k]
                   << " edge is " << st;
                issues.push_back(os.str());
            }
        }
        if (reg.electrode.empty()) {
            os.str("");
            os << "conductor region " << ci << " has no electrode label";
            issues.push_back(os.str());
        }
    }

    // Trench recess only in exposed gaps: conductors must rest on
    // un-recessed mesas, i.e. every conductor bottom is at y = 0.
    for (size_t ci = 0; ci < layout.regions.size(); ++ci) {
        const Region& reg = layout.regions[ci];
        if (reg.material == Material::Conductor && reg.rect.y0 != 0.0) {
            os.str("");
            os << "conductor region " << ci << " does not rest on the substrate plane";
            issues.push_back(os.str());
        }
    }

    // Every SA segment must separate substrate from vacuum, not touch metal.
    for (size_t si = 0; si < layout.segments.size(); ++si) {
        const Segment& s = layout.segments[si];
        if (s.tag != Interface::SA) continue;
        Vec2 mid = (s.a + s.b) * 0.5;
        Vec2 n = s.horizontal() ? Vec2{0.0, 1.0} : Vec2{1.0, 0.0};
        auto material_at = [&](const Vec2& p) {
            for (const Region& reg : layout.regions)
                if (reg.rect.contains(p)) return reg.material;
            return Material::Vacuum;
        };
        double h = 1e-6;
        Material m1 = material_at(mid + n * h);
        Material m2 = material_at(mid - n * h);
        bool ok = (m1 == Material::Substrate && m2 == Material::Vacuum) ||
                  (m2 == Material::Substrate && m1 == Material::Vacuum);
        if (!ok) {
            os.str("");
            os << "SA segment " << si << " does not separate substrate from vacuum";
            issues.push_back(os.str());
        }
    }

    return issues;
}

LayoutSpec reflected(const LayoutSpec& layout) {
    LayoutSpec out = layout;
    for (Region& r : out.regions) {
        double x0 = -r.rect.x1, x1 = -r.rect.x0;
        r.rect.x0 = x0;
        r.rect.x1 = x1;
    }
    for (Segment& s : out.segments) {
        s.a.x = -s.a.x;
        s.b.x = -s.b.x;
    }
    for (Vec2& c : out.conductor_corners) c.x = -c.x;
    return out;
}

}  // namespace qsurf::geometry
