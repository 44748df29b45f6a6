#include <doctest.h>

#include <algorithm>
#include <set>

#include "qsurf/geometry.hpp"

using namespace qsurf;
using namespace qsurf::geometry;

TEST_CASE("preset catalogue matches the published designs") {
    ModPreset a = preset('A');
    CHECK(a.params.conductor_width_um == 1.0);
    CHECK(a.params.gap_um == 1.0);
    CHECK(a.params.style == Style::Interdigitated);
    CHECK(a.coupling_g_mhz == 8.0);

    ModPreset e = preset("mod_e");
    CHECK(e.params.style == Style::PadPair);
    CHECK(e.params.conductor_width_um == 120.0);
    CHECK(e.params.gap_um == 70.0);
    CHECK(e.params.pad_length_um == 500.0);

    ModPreset d = preset('D');
    CHECK(d.coupling_g_mhz == 52.0);
    CHECK(d.params.conductor_width_um == 60.0);
    CHECK(d.params.gap_um == 20.0);

    CHECK(preset('B').params.gap_um == 5.0);
    CHECK(preset('C').params.conductor_width_um == 20.0);
    for (char id : {'A', 'B', 'C', 'D', 'E'}) {
        CHECK(preset(id).params.metal_thickness_um == 0.2);
        CHECK(preset(id).params.ground_box_span_um == 650.0);
    }

    CHECK_THROWS_AS(preset('F'), std::invalid_argument);
    CHECK_THROWS_AS(preset("mod_x"), std::invalid_argument);
}

TEST_CASE("zero-trench layout keeps the exposed surface on the substrate plane") {
    LayoutSpec layout = build_layout(preset('C').params, 0.0);
    int sa_count = 0;
    for (const Segment& s : layout.segments) {
        if (s.tag != Interface::SA) continue;
        ++sa_count;
        CHECK(s.horizontal());
        CHECK(s.a.y == 0.0);
        CHECK_FALSE(s.sidewall);
    }
    CHECK(sa_count > 0);
    CHECK(validate(layout).empty());
}

TEST_CASE("trenched layout grows floors and sidewalls per gap") {
    const double depth_um = 0.5;
    LayoutSpec layout = build_layout(preset('C').params, depth_um);

    int conductors = 0;
    for (const Region& r : layout.regions)
        if (r.material == Material::Conductor) ++conductors;
    CHECK(conductors == 2 * preset('C').params.n_repeats * 1 + 2);  // fingers + 2 ground strips

    int floors = 0, sidewalls = 0;
    for (const Segment& s : layout.segments) {
        if (s.tag != Interface::SA) continue;
        if (s.sidewall) {
            ++sidewalls;
            CHECK(s.a.x == s.b.x);
            CHECK(std::min(s.a.y, s.b.y) == -depth_um);
            CHECK(std::max(s.a.y, s.b.y) == 0.0);
        } else {
            ++floors;
            CHECK(s.a.y == -depth_um);
        }
    }
    // gaps: one per conductor pair plus the two outer stretches
    CHECK(floors == conductors + 1);
    // two sidewalls per interior gap, one where a gap ends on the bbox
    CHECK(sidewalls == 2 * (conductors - 1) + 2);
    CHECK(validate(layout).empty());
}

TEST_CASE("degenerate parameters are rejected") {
    DesignParams p = preset('C').params;
    p.conductor_width_um = 0.0;
    CHECK_THROWS_AS(build_layout(p, 0.0), std::invalid_argument);

    p = preset('C').params;
    p.gap_um = -1.0;
    CHECK_THROWS_AS(build_layout(p, 0.0), std::invalid_argument);

    p = preset('C').params;
    p.n_repeats = 0;
    CHECK_THROWS_AS(build_layout(p, 0.0), std::invalid_argument);

    CHECK_THROWS_AS(build_layout(preset('C').params, -5.0), std::invalid_argument);

    // electrode array wider than the grounding box cannot be assembled
    p = preset('C').params;
    p.ground_box_span_um = 100.0;
    CHECK_THROWS_AS(build_layout(p, 0.0), construction_error);
}

TEST_CASE("validate flags broken layouts and passes all presets") {
    for (char id : {'A', 'B', 'C', 'D', 'E'}) {
        for (double depth : {0.0, 0.3}) {
            LayoutSpec layout = build_layout(preset(id).params, depth);
            CAPTURE(id);
            CAPTURE(depth);
            CHECK(validate(layout).empty());
        }
    }

    LayoutSpec layout = build_layout(preset('A').params, 0.3);

    SUBCASE("overlapping regions are reported") {
        LayoutSpec broken = layout;
        broken.regions.push_back({{-1.0, -0.1, 1.0, 0.1}, Material::Vacuum, {}});
        auto issues = validate(broken);
        bool overlap = false;
        for (const auto& s : issues) overlap |= s.find("overlap") != std::string::npos;
        CHECK(overlap);
    }

    SUBCASE("untagged conductor edge is reported") {
        LayoutSpec broken = layout;
        // drop one MA segment
        auto it = std::find_if(broken.segments.begin(), broken.segments.end(),
                               [](const Segment& s) { return s.tag == Interface::MA; });
        REQUIRE(it != broken.segments.end());
        broken.segments.erase(it);
        auto issues = validate(broken);
        bool untagged = false;
        for (const auto& s : issues) untagged |= s.find("untagged") != std::string::npos;
        CHECK(untagged);
    }

    SUBCASE("double-tagged conductor edge is reported") {
        LayoutSpec broken = layout;
        auto it = std::find_if(broken.segments.begin(), broken.segments.end(),
                               [](const Segment& s) { return s.tag == Interface::SM; });
        REQUIRE(it != broken.segments.end());
        broken.segments.push_back(*it);
        auto issues = validate(broken);
        bool doubled = false;
        for (const auto& s : issues) doubled |= s.find("double-tagged") != std::string::npos;
        CHECK(doubled);
    }
}

namespace {

// Region multiset signature with electrode labels run through `swap`.
std::multiset<std::string> region_signature(const LayoutSpec& layout, bool swap_labels) {
    std::multiset<std::string> sig;
    for (const Region& r : layout.regions) {
        std::string electrode = r.electrode;
        if (swap_labels) {
            if (electrode == "p")
                electrode = "n";
            else if (electrode == "n")
                electrode = "p";
        }
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g %.12g %d %s", r.rect.x0, r.rect.y0,
                      r.rect.x1, r.rect.y1, static_cast<int>(r.material), electrode.c_str());
        sig.insert(buf);
    }
    return sig;
}

}  // namespace

TEST_CASE("mirror reflection maps the layout onto itself with labels swapped") {
    for (char id : {'A', 'D'}) {
        LayoutSpec layout = build_layout(preset(id).params, 0.3);
        LayoutSpec mirror = reflected(layout);
        CHECK(region_signature(mirror, true) == region_signature(layout, false));
    }
}

TEST_CASE("total SA length is non-decreasing in trench depth") {
    double prev = -1.0;
    for (double depth : {0.0, 0.1, 0.2, 0.5, 1.0}) {
        LayoutSpec layout = build_layout(preset('B').params, depth);
        double len = layout.total_segment_length(Interface::SA);
        CHECK(len >= prev);
        prev = len;
    }
}

TEST_CASE("conductor boundary is exactly SM plus MA") {
    LayoutSpec layout = build_layout(preset('A').params, 0.3);
    // per conductor: bottom length = width (SM), top + 2 sides = MA
    double sm = layout.total_segment_length(Interface::SM);
    double ma = layout.total_segment_length(Interface::MA);
    double expected_sm = 0.0, expected_ma = 0.0;
    for (const Region& r : layout.regions) {
        if (r.material != Material::Conductor) continue;
        expected_sm += r.rect.width();
        expected_ma += r.rect.width() + 2.0 * r.rect.height();
    }
    CHECK(sm == doctest::Approx(expected_sm).epsilon(1e-12));
    CHECK(ma == doctest::Approx(expected_ma).epsilon(1e-12));
}
