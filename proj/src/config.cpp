#include "qsurf/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace qsurf::config {

const char* to_string(Command c) {
    switch (c) {
        case Command::Simulate: return "simulate";
        case Command::Sweep: return "sweep";
        case Command::Budget: return "budget";
        case Command::Compare: return "compare";
    }
    return "?";
}

Command parse_command(const std::string& name) {
    if (name == "simulate") return Command::Simulate;
    if (name == "sweep") return Command::Sweep;
    if (name == "budget") return Command::Budget;
    if (name == "compare") return Command::Compare;
    throw std::invalid_argument("unknown command '" + name + "'");
}

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

struct Line {
    int number;
    std::string section;
    std::string key;
    std::string value;
};

// A parsed value plus the machinery to consume it with unit checking.
class Reader {
  public:
    Reader(std::vector<ParseError>& errors) : errors_(errors) {}

    void add(const Line& l) {
        std::string id = l.section + "." + l.key;
        if (seen_.count(id)) {
            error(l.number, "duplicate key '" + l.key + "' in [" + l.section + "]");
            return;
        }
        seen_.insert(id);
        lines_[id] = l;
    }

    bool has(const std::string& section, const std::string& key) const {
        return lines_.count(section + "." + key) > 0;
    }

    // Plain dimensionless number.
    bool number(const std::string& section, const std::string& key, double& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        double v;
        if (!to_double(l->value, v)) {
            error(l->number, "key '" + key + "': '" + l->value + "' is not a number");
            return false;
        }
        out = v;
        return true;
    }

    bool integer(const std::string& section, const std::string& key, int& out) {
        double v;
        const Line* l = find(section, key);
        if (!l) return false;
        if (!to_double(l->value, v) || v != std::floor(v)) {
            error(l->number, "key '" + key + "': '" + l->value + "' is not an integer");
            return false;
        }
        out = static_cast<int>(v);
        return true;
    }

    bool boolean(const std::string& section, const std::string& key, bool& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        std::string v = lower(l->value);
        if (v == "true" || v == "yes" || v == "on") {
            out = true;
            return true;
        }
        if (v == "false" || v == "no" || v == "off") {
            out = false;
            return true;
        }
        error(l->number, "key '" + key + "': expected true/false, got '" + l->value + "'");
        return false;
    }

    bool text(const std::string& section, const std::string& key, std::string& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        out = l->value;
        return true;
    }

    // Length with a mandatory unit suffix; stored in the requested unit.
    bool length(const std::string& section, const std::string& key, double um_per_unit,
                double& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        double um;
        if (!parse_length_um(l->value, um)) {
            error(l->number, "key '" + key + "': '" + l->value +
                                 "' needs an explicit length unit (nm, um, mm, m)");
            return false;
        }
        out = um / um_per_unit;
        return true;
    }

    bool frequency_ghz(const std::string& section, const std::string& key, double& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        double ghz;
        if (!parse_frequency_ghz(l->value, ghz)) {
            error(l->number, "key '" + key + "': '" + l->value +
                                 "' needs an explicit frequency unit (Hz, kHz, MHz, GHz)");
            return false;
        }
        out = ghz;
        return true;
    }

    // Whitespace- or comma-separated length list, sorted ascending.
    bool length_list_nm(const std::string& section, const std::string& key,
                        std::vector<double>& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        std::vector<double> vals;
        std::string item;
        std::istringstream is(l->value);
        std::string normalized = l->value;
        std::replace(normalized.begin(), normalized.end(), ',', ' ');
        std::istringstream tokens(normalized);
        while (tokens >> item) {
            double um;
            if (!parse_length_um(item, um)) {
                error(l->number, "key '" + key + "': '" + item +
                                     "' needs an explicit length unit (nm, um, mm, m)");
                return false;
            }
            vals.push_back(um_to_nm(um));
        }
        if (vals.empty()) {
            error(l->number, "key '" + key + "': empty list");
            return false;
        }
        std::sort(vals.begin(), vals.end());
        for (size_t i = 0; i + 1 < vals.size(); ++i) {
            if (vals[i] == vals[i + 1]) {
                error(l->number, "key '" + key + "': duplicate entry");
                return false;
            }
        }
        out = std::move(vals);
        return true;
    }

    bool word_list(const std::string& section, const std::string& key,
                   std::vector<std::string>& out) {
        const Line* l = find(section, key);
        if (!l) return false;
        std::string normalized = l->value;
        std::replace(normalized.begin(), normalized.end(), ',', ' ');
        std::istringstream tokens(normalized);
        std::string item;
        out.clear();
        while (tokens >> item) out.push_back(lower(item));
        if (out.empty()) {
            error(l->number, "key '" + key + "': empty list");
            return false;
        }
        return true;
    }

    void error(int line, const std::string& message) { errors_.push_back({line, message}); }

    // Everything added but never consumed is an unknown key.
    void report_unconsumed() {
        for (const auto& [id, l] : lines_) {
            if (!consumed_.count(id))
                error(l.number, "unknown key '" + l.key + "' in section [" + l.section + "]");
        }
    }

    int line_of(const std::string& section, const std::string& key) const {
        auto it = lines_.find(section + "." + key);
        return it == lines_.end() ? 0 : it->second.number;
    }

  private:
    const Line* find(const std::string& section, const std::string& key) {
        auto it = lines_.find(section + "." + key);
        if (it == lines_.end()) return nullptr;
        consumed_.insert(section + "." + key);
        return &it->second;
    }

    static bool to_double(const std::string& s, double& out) {
        const char* begin = s.data();
        const char* end = s.data() + s.size();
        auto [ptr, ec] = std::from_chars(begin, end, out);
        return ec == std::errc() && ptr == end;
    }

    static bool parse_length_um(const std::string& s, double& out_um) {
        static const std::pair<const char*, double> units[] = {
            {"nm", 1e-3}, {"um", 1.0}, {"mm", 1e3}, {"m", 1e6}};
        for (const auto& [suffix, factor] : units) {
            size_t len = std::char_traits<char>::length(suffix);
            if (s.size() > len && s.compare(s.size() - len, len, suffix) == 0) {
                // "m" must not steal the trailing m of nm/um/mm
                if (len == 1 && s.size() > 1 &&
                    (s[s.size() - 2] == 'n' || s[s.size() - 2] == 'u' || s[s.size() - 2] == 'm'))
                    continue;
                double v;
                if (!to_double(trim(s.substr(0, s.size() - len)), v)) return false;
                out_um = v * factor;
                return true;
            }
        }
        return false;
    }

    static bool parse_frequency_ghz(const std::string& s, double& out_ghz) {
        static const std::pair<const char*, double> units[] = {
            {"ghz", 1.0}, {"mhz", 1e-3}, {"khz", 1e-6}, {"hz", 1e-9}};
        std::string ls = lower(s);
        for (const auto& [suffix, factor] : units) {
            size_t len = std::char_traits<char>::length(suffix);
            if (ls.size() > len && ls.compare(ls.size() - len, len, suffix) == 0) {
                if (len == 2 && ls.size() > 2) {
                    char prev = ls[ls.size() - 3];
                    if (prev == 'g' || prev == 'm' || prev == 'k') continue;
                }
                double v;
                if (!to_double(trim(s.substr(0, s.size() - len)), v)) return false;
                out_ghz = v * factor;
                return true;
            }
        }
        return false;
    }

    std::vector<ParseError>& errors_;
    std::map<std::string, Line> lines_;
    std::set<std::string> seen_;
    std::set<std::string> consumed_;
};

const std::set<std::string> kKnownSections = {"geometry", "materials", "mesh",
                                              "participation", "sweep", "budget",
                                              "compare", "output"};

}  // namespace

ParseResult parse_config(const std::string& text, Command command) {
    ParseResult result;
    RunConfig& cfg = result.config;
    cfg.command = command;
    Reader reader(result.errors);

    // Tokenize into section/key/value lines.
    {
        std::istringstream is(text);
        std::string raw;
        std::string section;
        int lineno = 0;
        while (std::getline(is, raw)) {
            ++lineno;
            std::string line = raw;
            size_t hash = line.find_first_of("#;");
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    reader.error(lineno, "malformed section header '" + line + "'");
                    continue;
                }
                section = lower(trim(line.substr(1, line.size() - 2)));
                if (!kKnownSections.count(section))
                    reader.error(lineno, "unknown section [" + section + "]");
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos) {
                reader.error(lineno, "expected 'key = value', got '" + line + "'");
                continue;
            }
            if (section.empty()) {
                reader.error(lineno, "key outside of any section");
                continue;
            }
            Line l{lineno, section, lower(trim(line.substr(0, eq))), trim(line.substr(eq + 1))};
            if (l.value.empty()) {
                reader.error(lineno, "key '" + l.key + "' has no value");
                continue;
            }
            if (kKnownSections.count(section)) reader.add(l);
        }
    }

    // [geometry]
    {
        bool have_design = reader.text("geometry", "design", cfg.design);
        if (have_design) cfg.design = lower(cfg.design);
        std::string style;
        bool have_style = reader.text("geometry", "style", style);
        if (have_design && have_style)
            reader.error(reader.line_of("geometry", "style"),
                         "give either a design preset or a custom style, not both");
        if (have_design) {
            try {
                cfg.params = geometry::preset(cfg.design).params;
            } catch (const std::exception& e) {
                reader.error(reader.line_of("geometry", "design"), e.what());
            }
        } else if (have_style) {
            if (style == "interdigitated")
                cfg.params.style = geometry::Style::Interdigitated;
            else if (style == "pad-pair" || style == "pad_pair")
                cfg.params.style = geometry::Style::PadPair;
            else
                reader.error(reader.line_of("geometry", "style"),
                             "style must be 'interdigitated' or 'pad-pair'");
        }
        reader.length("geometry", "conductor_width", 1.0, cfg.params.conductor_width_um);
        reader.length("geometry", "gap", 1.0, cfg.params.gap_um);
        reader.integer("geometry", "n_repeats", cfg.params.n_repeats);
        reader.length("geometry", "metal_thickness", 1.0, cfg.params.metal_thickness_um);
        reader.length("geometry", "pad_length", 1.0, cfg.params.pad_length_um);
        reader.length("geometry", "ground_box_span", 1.0, cfg.params.ground_box_span_um);
        double trench_um;
        if (reader.length("geometry", "trench", 1.0, trench_um)) cfg.trench_nm = um_to_nm(trench_um);
    }

    // [materials]
    {
        reader.number("materials", "eps_substrate", cfg.materials.eps_substrate);
        reader.number("materials", "eps_contamination", cfg.materials.eps_contamination);
        double t;
        if (reader.length("materials", "thickness_sm", 1e-3, t)) {
            cfg.materials.thickness_sm_nm = t;
            cfg.explicit_thickness[0] = true;
        }
        if (reader.length("materials", "thickness_sa", 1e-3, t)) {
            cfg.materials.thickness_sa_nm = t;
            cfg.explicit_thickness[1] = true;
        }
        if (reader.length("materials", "thickness_ma", 1e-3, t)) {
            cfg.materials.thickness_ma_nm = t;
            cfg.explicit_thickness[2] = true;
        }
        if (reader.number("materials", "tan_delta_sm", cfg.materials.tan_delta_sm))
            cfg.explicit_tan_delta[0] = true;
        if (reader.number("materials", "tan_delta_sa", cfg.materials.tan_delta_sa))
            cfg.explicit_tan_delta[1] = true;
        if (reader.number("materials", "tan_delta_ma", cfg.materials.tan_delta_ma))
            cfg.explicit_tan_delta[2] = true;
        if (reader.number("materials", "tan_delta_substrate", cfg.materials.tan_delta_substrate))
            cfg.explicit_tan_delta[3] = true;
    }

    // [mesh]
    reader.length("mesh", "h_max", 1.0, cfg.mesh.h_max_um);
    reader.length("mesh", "corner_h_min", 1.0, cfg.mesh.corner_h_min_um);
    reader.number("mesh", "grading_ratio", cfg.mesh.grading_ratio);
    reader.integer("mesh", "max_refine_passes", cfg.mesh.max_refine_passes);

    // [participation]
    {
        double c;
        if (reader.length("participation", "cutoff", 1e-3, c)) cfg.report.cutoff_nm = c;
        reader.boolean("participation", "include_sa_sidewalls", cfg.report.include_sa_sidewalls);
    }

    // [sweep]
    reader.length_list_nm("sweep", "depths", cfg.sweep_depths_nm);
    {
        double v;
        if (reader.length("sweep", "target_depth", 1e-3, v)) cfg.target_depth_nm = v;
        if (reader.length("sweep", "min_fit_depth", 1e-3, v)) cfg.min_fit_depth_nm = v;
    }

    // [budget]
    {
        double v;
        if (reader.number("budget", "p_sm_per_m", v)) cfg.budget.p_sm_per_m = v;
        if (reader.number("budget", "p_sa_per_m", v)) cfg.budget.p_sa_per_m = v;
        if (reader.number("budget", "p_ma_per_m", v)) cfg.budget.p_ma_per_m = v;
        if (reader.number("budget", "p_substrate", v)) cfg.budget.p_substrate = v;
        reader.number("budget", "other_loss", cfg.budget.other_loss);
        reader.frequency_ghz("budget", "f_qubit", cfg.budget.f_qubit_ghz);
        if (reader.number("budget", "q_measured", v)) cfg.budget.q_measured = v;
        bool have_g = reader.has("budget", "g");
        bool have_fres = reader.has("budget", "f_res");
        bool have_qc = reader.has("budget", "q_c");
        if (have_g || have_fres || have_qc) {
            analysis::PurcellParams pp;
            double g_ghz = 0.0;
            bool ok = reader.frequency_ghz("budget", "g", g_ghz);
            ok = reader.frequency_ghz("budget", "f_res", pp.f_res_ghz) && ok;
            ok = reader.number("budget", "q_c", pp.q_c) && ok;
            pp.g_mhz = g_ghz * 1e3;
            pp.f_qubit_ghz = cfg.budget.f_qubit_ghz;
            if (ok)
                cfg.budget.purcell = pp;
            else
                reader.error(0, "purcell estimate needs all of g, f_res, q_c in [budget]");
        }
    }

    // [compare]
    reader.word_list("compare", "designs", cfg.compare_designs);
    reader.number("compare", "other_loss", cfg.compare_other_loss);

    // [output]
    reader.boolean("output", "dump_mesh", cfg.dump_mesh);
    reader.boolean("output", "dump_field", cfg.dump_field);

    reader.report_unconsumed();

    // Per-command semantic requirements.
    auto require = [&](bool ok, const std::string& message) {
        if (!ok) reader.error(0, message);
    };
    const bool needs_geometry =
        command == Command::Simulate || command == Command::Sweep;
    if (needs_geometry) {
        require(!cfg.design.empty() || cfg.params.conductor_width_um > 0.0,
                "[geometry] must name a design preset or give custom parameters");
    }
    if (command == Command::Simulate)
        require(reader.has("geometry", "trench"), "[geometry] trench is required for simulate");
    if (command == Command::Sweep) {
        require(!cfg.sweep_depths_nm.empty(), "[sweep] depths is required for sweep");
        require(cfg.sweep_depths_nm.size() >= 4,
                "[sweep] needs at least 4 depths for the logarithmic fit");
    }
    if (command == Command::Budget) {
        require(cfg.budget.f_qubit_ghz > 0.0, "[budget] f_qubit is required");
        // Physics-bearing inputs are never defaulted: each surface channel
        // named in the budget needs its thickness and loss tangent spelled
        // out, and a substrate channel needs its loss tangent.
        const char* names[3] = {"sm", "sa", "ma"};
        std::optional<double> ps[3] = {cfg.budget.p_sm_per_m, cfg.budget.p_sa_per_m,
                                       cfg.budget.p_ma_per_m};
        for (int i = 0; i < 3; ++i) {
            if (!ps[i]) continue;
            require(cfg.explicit_thickness[i], std::string("[materials] thickness_") + names[i] +
                                                   " must be explicit for a budget run");
            require(cfg.explicit_tan_delta[i], std::string("[materials] tan_delta_") + names[i] +
                                                   " must be explicit for a budget run");
        }
        if (cfg.budget.p_substrate)
            require(cfg.explicit_tan_delta[3],
                    "[materials] tan_delta_substrate must be explicit for a budget run");
        require(cfg.budget.p_sm_per_m || cfg.budget.p_sa_per_m || cfg.budget.p_ma_per_m ||
                    cfg.budget.p_substrate || cfg.budget.other_loss > 0.0 || cfg.budget.q_measured,
                "[budget] names no loss channel at all");
    }
    if (command == Command::Compare) {
        require(cfg.compare_designs.size() >= 2, "[compare] needs at least two designs");
        require(!cfg.sweep_depths_nm.empty() && cfg.sweep_depths_nm.size() >= 4,
                "[sweep] depths (>= 4) is required for compare");
        for (int i = 0; i < 3; ++i) {
            require(cfg.explicit_thickness[i] && cfg.explicit_tan_delta[i],
                    "[materials] layer thicknesses and loss tangents must be explicit for compare");
            if (!(cfg.explicit_thickness[i] && cfg.explicit_tan_delta[i])) break;
        }
        require(cfg.explicit_tan_delta[3],
                "[materials] tan_delta_substrate must be explicit for compare");
    }

    std::sort(result.errors.begin(), result.errors.end(),
              [](const ParseError& a, const ParseError& b) {
                  if (a.line != b.line) return a.line < b.line;
                  return a.message < b.message;
              });
    return result;
}

}  // namespace qsurf::config
