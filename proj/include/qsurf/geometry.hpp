#pragma once

#include <string>
#include <vector>

#include "qsurf/types.hpp"

// Parametric planar qubit cross-sections. A layout is a rectilinear tiling of
// the bounding box into substrate, vacuum, and conductor rectangles, plus the
// tagged interface segments (SM / SA / MA / outer) the participation
// integrals run over.
//
// Conventions: x is lateral, y vertical, all lengths in micrometers. The
// un-recessed substrate surface is the plane y = 0; conductors sit on mesas
// at y in [0, metal_thickness]; exposed gaps are recessed to y = -trench.

namespace qsurf::geometry {

enum class Material { Substrate, Vacuum, Conductor };
enum class Interface { SM, SA, MA, Outer };

const char* to_string(Material m);
const char* to_string(Interface t);

enum class Style { Interdigitated, PadPair };

struct DesignParams {
    Style style = Style::Interdigitated;
    double conductor_width_um = 0.0;  // finger linewidth, or pad width in cross-section
    double gap_um = 0.0;              // finger-to-finger or pad-to-pad spacing
    int n_repeats = 1;                // electrode pairs in the cross-section
    double metal_thickness_um = 0.2;
    double pad_length_um = 0.0;       // pad extent normal to the cross-section (pad-pair only)
    double ground_box_span_um = 650.0;
};

struct ModPreset {
    char id = '?';  // 'A'..'E'
    DesignParams params;
    double coupling_g_mhz = 0.0;
};

// Axis-aligned rectangle, [x0,x1] x [y0,y1].
struct Rect {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    double area() const { return width() * height(); }
    bool contains(const Vec2& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

// One material region. Rectilinear layouts are stored as their rectangle
// decomposition; conductors are single rectangles carrying the electrode
// name used for Dirichlet boundary conditions ("p", "n", "gnd").
struct Region {
    Rect rect;
    Material material = Material::Vacuum;
    std::string electrode;  // empty unless material == Conductor
};

// Straight axis-aligned interface segment. `sidewall` marks the vertical
// walls of the trench recess so SA integration can optionally exclude them.
struct Segment {
    Vec2 a;
    Vec2 b;
    Interface tag = Interface::Outer;
    bool sidewall = false;

    double length() const { return (b - a).norm(); }
    bool horizontal() const { return a.y == b.y; }
};

struct LayoutSpec {
    std::vector<Region> regions;
    std::vector<Segment> segments;
    std::vector<Vec2> conductor_corners;
    double trench_depth_um = 0.0;
    double metal_thickness_um = 0.0;
    double electrode_extent_um = 0.0;  // lateral span of the qubit electrodes
    Rect bbox;

    double total_segment_length(Interface tag) const;
};

// Fixed design catalogue. Finger counts are chosen so each cross-section has
// a device-plausible overall extent; they are not constrained further.
ModPreset preset(char id);
ModPreset preset(const std::string& name);  // "mod_a" .. "mod_e"

// Materializes a cross-section for the given parameters and trench depth.
// Throws std::invalid_argument for non-positive dimensions and
// construction_error if the pieces cannot be assembled without overlap.
LayoutSpec build_layout(const DesignParams& params, double trench_depth_um);

// Report-only invariant check; empty result means the layout is valid.
std::vector<std::string> validate(const LayoutSpec& layout);

// Mirror image about the x = 0 midline with electrode labels preserved
// (label swap equivalence is what tests assert).
LayoutSpec reflected(const LayoutSpec& layout);

}  // namespace qsurf::geometry
