// Scenario files in key = value form and their resolution into models
//
//   # intermediate alpha, PBG reservoir
//   model  = pbg
//   eta    = 0.2
//   omega0 = 0.1      # units of omega_c for PBG, of omega0 itself for Ohmic
//   alpha  = 0.57
//
// Blank lines and '#' comments are ignored. Unknown keys, duplicates, values
// that do not parse and fields that do not belong to the chosen model are all
// ConfigErrors carrying the line number and field name.

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "entdist/dynamics.hpp"
#include "entdist/errors.hpp"
#include "entdist/spectral.hpp"

namespace entdist {

// Everything a run needs, before validation. Presets, CLI flags and config
// files all write into this; resolve_*() turns it into checked objects.
struct ScenarioSpec {
    std::string label = "run";
    std::string model = "pbg";
    std::optional<double> eta, omega_c, kappa_max;  // PBG (eta also Ohmic)
    std::optional<double> cutoff;                   // Ohmic Lambda
    std::optional<double> g, omega_mode;            // single mode
    std::optional<double> gamma, width, omega_center;  // Lorentzian
    double omega0 = 0.1;
    double alpha = 0.70710678118654752;
    std::optional<double> t_max;
    std::optional<std::size_t> n_steps;
    std::string output_dir = "out";
    double alpha_min = 0.02;
    double alpha_max = 0.99;
    std::size_t sweep_points = 60;
    unsigned workers = 0;  // 0: hardware concurrency
    double identity_tolerance = 1e-10;
    bool estimate_error = true;
    std::size_t surface_stride = 10;

    std::map<std::string, int> lines;  // field -> config line that set it
};

struct SweepRange {
    double alpha_min;
    double alpha_max;
    std::size_t points;

    // Evenly spaced, endpoints included.
    std::vector<double> values() const {
        std::vector<double> v(points);
        for (std::size_t i = 0; i < points; ++i)
            v[i] = points == 1 ? alpha_min
                               : alpha_min + (alpha_max - alpha_min) * static_cast<double>(i) /
                                                 static_cast<double>(points - 1);
        return v;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline double parse_double(std::string_view text, int line, const std::string& field) {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw ConfigError("field '" + field + "': '" + std::string(text) + "' is not a finite number", line, field);
    return v;
}

inline std::size_t parse_count(std::string_view text, int line, const std::string& field) {
    std::size_t v = 0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw ConfigError("field '" + field + "': '" + std::string(text) + "' is not a non-negative integer", line, field);
    return v;
}

inline bool parse_bool(std::string_view text, int line, const std::string& field) {
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    throw ConfigError("field '" + field + "': expected true or false", line, field);
}

}  // namespace detail

// Applies one key = value pair. Aliases: Lambda/cutoff, lambda/width.
inline void apply_field(ScenarioSpec& s, const std::string& key, std::string_view value, int line = 0) {
    using detail::parse_count;
    using detail::parse_double;
    auto d = [&] { return parse_double(value, line, key); };
    auto n = [&] { return parse_count(value, line, key); };

    if (key == "label") s.label = std::string(value);
    else if (key == "model") s.model = std::string(value);
    else if (key == "eta") s.eta = d();
    else if (key == "omega_c") s.omega_c = d();
    else if (key == "kappa_max") s.kappa_max = d();
    else if (key == "Lambda" || key == "cutoff") s.cutoff = d();
    else if (key == "g") s.g = d();
    else if (key == "omega_mode") s.omega_mode = d();
    else if (key == "gamma") s.gamma = d();
    else if (key == "lambda" || key == "width") s.width = d();
    else if (key == "omega_center") s.omega_center = d();
    else if (key == "omega0") s.omega0 = d();
    else if (key == "alpha") s.alpha = d();
    else if (key == "t_max") s.t_max = d();
    else if (key == "n_steps") s.n_steps = n();
    else if (key == "output_dir") s.output_dir = std::string(value);
    else if (key == "alpha_min") s.alpha_min = d();
    else if (key == "alpha_max") s.alpha_max = d();
    else if (key == "sweep_points") s.sweep_points = n();
    else if (key == "workers") s.workers = static_cast<unsigned>(n());
    else if (key == "identity_tolerance") s.identity_tolerance = d();
    else if (key == "estimate_error") s.estimate_error = detail::parse_bool(value, line, key);
    else if (key == "surface_stride") s.surface_stride = n();
    else throw ConfigError("unknown field '" + key + "'", line, key);
    if (line > 0) s.lines[key == "Lambda" ? "cutoff" : key == "lambda" ? "width" : key] = line;
}

struct ConfigEntry {
    std::string key;
    std::string value;
    int line;
};

inline std::vector<ConfigEntry> parse_config(std::istream& in) {
    std::vector<ConfigEntry> out;
    std::set<std::string> seen;
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
        text = detail::trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line);
        const std::string key(detail::trim(text.substr(0, eq)));
        const std::string value(detail::trim(text.substr(eq + 1)));
        if (key.empty()) throw ConfigError("missing key before '='", line);
        if (value.empty()) throw ConfigError("field '" + key + "' has no value", line, key);
        if (!seen.insert(key).second) throw ConfigError("field '" + key + "' given twice", line, key);
        out.push_back({key, value, line});
    }
    return out;
}

inline std::vector<ConfigEntry> read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    return parse_config(in);
}

inline void apply_config(ScenarioSpec& s, const std::vector<ConfigEntry>& entries) {
    for (const auto& e : entries)
        if (e.key != "preset") apply_field(s, e.key, e.value, e.line);
}

// Preset name named by the file, if any.
inline std::optional<std::string> config_preset(const std::vector<ConfigEntry>& entries) {
    for (const auto& e : entries)
        if (e.key == "preset") return e.value;
    return std::nullopt;
}

namespace detail {

inline int line_of(const ScenarioSpec& s, const std::string& field) {
    const auto it = s.lines.find(field);
    return it == s.lines.end() ? 0 : it->second;
}

// Re-throws model-construction errors as ConfigErrors pointing at the field.
template <typename F>
auto with_field(const ScenarioSpec& s, const std::string& field, F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw ConfigError(e.what(), line_of(s, field), field);
    }
}

}  // namespace detail

inline SpectralModel resolve_model(const ScenarioSpec& s) {
    const std::map<std::string, std::vector<std::string>> owned = {
        {"pbg", {"eta", "omega_c", "kappa_max"}},
        {"ohmic", {"eta", "cutoff"}},
        {"single_mode", {"g", "omega_mode"}},
        {"lorentzian", {"gamma", "width", "omega_center"}},
    };
    const auto it = owned.find(s.model);
    if (it == owned.end())
        throw ConfigError("unknown model '" + s.model + "' (pbg, ohmic, single_mode, lorentzian)",
                          detail::line_of(s, "model"), "model");
    const std::map<std::string, bool> given = {
        {"eta", s.eta.has_value()},     {"omega_c", s.omega_c.has_value()},   {"kappa_max", s.kappa_max.has_value()},
        {"cutoff", s.cutoff.has_value()}, {"g", s.g.has_value()},             {"omega_mode", s.omega_mode.has_value()},
        {"gamma", s.gamma.has_value()}, {"width", s.width.has_value()},       {"omega_center", s.omega_center.has_value()},
    };
    for (const auto& [field, present] : given) {
        if (!present) continue;
        if (std::find(it->second.begin(), it->second.end(), field) == it->second.end()) {
            throw ConfigError("field '" + field + "' does not apply to model " + s.model, detail::line_of(s, field), field);
        }
    }

    // Defaults: PBG eta = 0.2, kappa_max = 10. The
    // single-mode and Lorentzian shapes default to resonance with omega0.
    if (s.model == "pbg")
        return detail::with_field(s, "eta", [&] {
            return SpectralModel::pbg(s.eta.value_or(0.2), s.omega_c.value_or(1.0), s.kappa_max.value_or(10.0));
        });
    if (s.model == "ohmic")
        return detail::with_field(s, "eta", [&] { return SpectralModel::ohmic(s.eta.value_or(0.1), s.cutoff.value_or(5.0)); });
    if (s.model == "single_mode")
        return detail::with_field(s, "g", [&] { return SpectralModel::single_mode(s.g.value_or(0.1), s.omega_mode.value_or(s.omega0)); });
    return detail::with_field(s, "gamma", [&] {
        return SpectralModel::lorentzian(s.gamma.value_or(0.1), s.width.value_or(1.0), s.omega_center.value_or(s.omega0));
    });
}

inline TimeGrid resolve_grid(const ScenarioSpec& s, const SpectralModel& model) {
    const TimeGrid def = default_grid(model);
    return detail::with_field(s, s.t_max ? "t_max" : "n_steps",
                              [&] { return TimeGrid(s.t_max.value_or(def.t_max), s.n_steps.value_or(def.n_steps)); });
}

inline void validate_spec(const ScenarioSpec& s) {
    auto fail = [&](const std::string& field, const std::string& what) {
        throw ConfigError(what, detail::line_of(s, field), field);
    };
    if (!(s.omega0 > 0.0)) fail("omega0", "omega0 must be > 0");
    if (!(s.alpha > 0.0 && s.alpha < 1.0)) fail("alpha", "alpha must lie in (0, 1)");
    if (!(s.alpha_min > 0.0 && s.alpha_min < 1.0)) fail("alpha_min", "alpha_min must lie in (0, 1)");
    if (!(s.alpha_max > 0.0 && s.alpha_max < 1.0)) fail("alpha_max", "alpha_max must lie in (0, 1)");
    if (!(s.alpha_min <= s.alpha_max)) fail("alpha_max", "sweep range is empty (alpha_min > alpha_max)");
    if (s.sweep_points == 0) fail("sweep_points", "sweep_points must be >= 1");
    if (!(s.identity_tolerance > 0.0)) fail("identity_tolerance", "identity_tolerance must be > 0");
    if (s.surface_stride == 0) fail("surface_stride", "surface_stride must be >= 1");
    if (s.label.empty() || s.label.find('/') != std::string::npos) fail("label", "label must be a plain file-name stem");
    if (s.output_dir.empty()) fail("output_dir", "output_dir must not be empty");
}

inline SweepRange resolve_sweep(const ScenarioSpec& s) { return {s.alpha_min, s.alpha_max, s.sweep_points}; }

}  // namespace entdist
