// config.hpp: Run configuration from scenarios, config files and command-line flags

#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qexciton/spectrum.hpp"

namespace qexciton {

/// Configuration error tied to one key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(const std::string& key, const std::string& what)
        : std::invalid_argument(key + ": " + what), key_(key) {}
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

enum class OutputFormat { csv, json };

struct RunConfig {
    std::string scenario = "fig1";
    ModelParams params;
    int excitation = 2;
    std::string initial_state = "exciton";  // "exciton", "photon" or "explicit"
    std::vector<cplx> amplitudes;           // used when initial_state == "explicit"
    Method method = Method::first_order;
    Grid grid;
    std::string output = "spectrum.csv";
    OutputFormat format = OutputFormat::csv;
    std::string report = "spectrum.report.json";
    double peak_min_height = kDefaultPeakRelativeHeight;
    double peak_min_separation = kDefaultPeakSeparation;

    InitialState initial() const {
        if (initial_state == "exciton") return InitialState::bare_exciton(excitation);
        if (initial_state == "photon") return InitialState::bare_photon(excitation);
        Vector v(static_cast<Eigen::Index>(amplitudes.size()));
        for (std::size_t i = 0; i < amplitudes.size(); ++i) v(static_cast<Eigen::Index>(i)) = amplitudes[i];
        return InitialState::from_amplitudes(excitation, v);
    }

    bool operator==(const RunConfig& o) const {
        return scenario == o.scenario && params.omega == o.params.omega &&
               params.coupling_g == o.params.coupling_g && params.n_molecules == o.params.n_molecules &&
               params.gamma == o.params.gamma && params.kappa == o.params.kappa && excitation == o.excitation &&
               initial_state == o.initial_state && amplitudes == o.amplitudes && method == o.method &&
               grid.min == o.grid.min && grid.max == o.grid.max && grid.step == o.grid.step && output == o.output &&
               format == o.format && report == o.report && peak_min_height == o.peak_min_height &&
               peak_min_separation == o.peak_min_separation;
    }
};

/// Lines farther than this from omega cannot occur on the block; a 50 gamma margin is added on top.
inline double default_half_width(const ModelParams& p, int excitation) {
    const double n = excitation;
    const double big_n = p.n_molecules;
    const double margin = kGridMarginGammas * p.gamma;
    const double required = 3.0 * p.coupling_g + 2.0 * p.omega * n / big_n + margin;
    const double outer_line =
        (2.0 * n - 1.0) * p.coupling_g + (p.omega + p.coupling_g) * (n * n + (n - 1.0) * (n - 1.0)) / (2.0 * big_n) +
        margin;
    return std::max({120.0, required, outer_line});
}

inline Grid default_grid(const ModelParams& p, int excitation) {
    return Grid::centered(p.omega, default_half_width(p, excitation), p.gamma / 10.0);
}

/// "spectrum.csv" -> "spectrum.report.json"
inline std::string default_report_path(const std::string& output) {
    const auto slash = output.find_last_of('/');
    const auto dot = output.find_last_of('.');
    const std::string stem = (dot != std::string::npos && (slash == std::string::npos || dot > slash))
                                 ? output.substr(0, dot)
                                 : output;
    return stem + ".report.json";
}

namespace detail {

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "scenario",  "omega",    "g",        "kappa",  "n_molecules",     "gamma",
        "excitation", "initial_state", "method", "grid_min", "grid_max", "grid_step",
        "output",    "format",   "report",   "peak_min_height", "peak_min_separation"};
    return keys;
}

inline std::string normalize_key(std::string key) {
    std::replace(key.begin(), key.end(), '-', '_');
    return key;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v))
        throw ConfigError(key, "cannot parse '" + text + "' as a number");
    return v;
}

inline int parse_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError(key, "cannot parse '" + text + "' as an integer");
    return v;
}

/// Entries are "re" or "re:im", separated by commas.
inline std::vector<cplx> parse_amplitudes(const std::string& key, const std::string& text) {
    std::vector<cplx> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            out.emplace_back(parse_double(key, item), 0.0);
        else
            out.emplace_back(parse_double(key, item.substr(0, colon)), parse_double(key, item.substr(colon + 1)));
    }
    return out;
}

using RawValues = std::map<std::string, std::string>;

template <class Json>
inline std::string json_scalar_text(const std::string& key, const Json& v) {
    if (v.is_string()) return v.template get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.template get<long long>());
    if (v.is_number()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v.template get<double>());
        return buf;
    }
    if (v.is_array()) {  // explicit amplitudes: numbers or [re, im] pairs
        std::string out;
        for (const auto& e : v) {
            if (!out.empty()) out += ',';
            if (e.is_array() && e.size() == 2)
                out += json_scalar_text(key, e[0]) + ":" + json_scalar_text(key, e[1]);
            else if (e.is_number())
                out += json_scalar_text(key, e);
            else
                throw ConfigError(key, "amplitude entries must be numbers or [re, im] pairs");
        }
        return out;
    }
    throw ConfigError(key, "unsupported JSON value " + v.dump());
}

inline void insert_checked(RawValues& out, const std::string& raw_key, std::string value) {
    const std::string key = normalize_key(raw_key);
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(raw_key, "unknown key");
    out[key] = std::move(value);
}

template <class Json>
inline RawValues parse_json_object(const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config", "JSON config must be an object");
    RawValues out;
    for (const auto& [k, v] : doc.items()) {
        if (v.is_null()) continue;
        insert_checked(out, k, json_scalar_text(k, v));
    }
    return out;
}

inline RawValues parse_key_value_text(const std::string& text) {
    RawValues out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected 'key = value', got '" + line + "'");
        insert_checked(out, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

}  // namespace detail

/// Reads a config file: a JSON object if the first non-blank character is '{', key = value lines otherwise.
inline detail::RawValues read_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ConfigError("config", std::string("invalid JSON: ") + e.what());
        }
        return detail::parse_json_object(doc);
    }
    return detail::parse_key_value_text(text);
}

inline RunConfig scenario_defaults(const std::string& name) {
    RunConfig c;
    c.scenario = name;
    if (name == "fig1") {
        c.params.n_molecules = 100;
    } else if (name == "fig2") {
        c.params.n_molecules = 10000;
    } else if (name != "custom") {
        throw ConfigError("scenario", "unknown scenario '" + name + "' (expected fig1, fig2 or custom)");
    }
    return c;
}

/// Layers: scenario defaults, then the config file, then flags. Validates the result.
inline RunConfig resolve_config(const detail::RawValues& file, const detail::RawValues& flags) {
    detail::RawValues v = file;
    for (const auto& [k, val] : flags) v[k] = val;

    RunConfig c = scenario_defaults(v.count("scenario") ? v.at("scenario") : "fig1");
    auto has = [&](const char* k) { return v.count(k) > 0; };
    auto num = [&](const char* k) { return detail::parse_double(k, v.at(k)); };
    auto integer = [&](const char* k) { return detail::parse_int(k, v.at(k)); };

    if (has("omega")) c.params.omega = num("omega");
    if (has("g")) c.params.coupling_g = num("g");
    if (has("n_molecules")) c.params.n_molecules = integer("n_molecules");
    if (has("gamma")) c.params.gamma = num("gamma");
    if (has("kappa")) {
        c.params.kappa = num("kappa");
        if (!has("g")) c.params.coupling_g = *c.params.kappa * std::sqrt(static_cast<double>(c.params.n_molecules));
    }
    if (has("excitation")) c.excitation = integer("excitation");

    try {
        c.params.validate();
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        const char* key = msg.rfind("omega", 0) == 0   ? "omega"
                          : msg.rfind("gamma", 0) == 0 ? "gamma"
                          : msg.rfind("g ", 0) == 0    ? "g"
                          : msg.rfind("N ", 0) == 0    ? "n_molecules"
                                                       : "kappa";
        throw ConfigError(key, msg);
    }
    if (c.excitation < 1) throw ConfigError("excitation", "must be >= 1 (the vacuum does not emit)");
    if (c.excitation > c.params.n_molecules)
        throw ConfigError("excitation", "exceeds N = " + std::to_string(c.params.n_molecules));

    if (has("initial_state")) {
        const std::string s = detail::trim(v.at("initial_state"));
        if (s == "exciton" || s == "photon") {
            c.initial_state = s;
        } else {
            c.initial_state = "explicit";
            c.amplitudes = detail::parse_amplitudes("initial_state", s);
        }
    }
    try {
        (void)c.initial();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("initial_state", e.what());
    }

    if (has("method")) {
        const std::string m = v.at("method");
        if (m != "first_order" && m != "exact_numeric")
            throw ConfigError("method", "expected first_order or exact_numeric, got '" + m + "'");
        c.method = parse_method(m);
    }

    const Grid fallback = default_grid(c.params, c.excitation);
    const double gmin = has("grid_min") ? num("grid_min") : fallback.min;
    const double gmax = has("grid_max") ? num("grid_max") : fallback.max;
    const double gstep = has("grid_step") ? num("grid_step") : fallback.step;
    if (!(gstep > 0.0)) throw ConfigError("grid_step", "must be > 0");
    if (gstep > c.params.gamma / 5.0 * (1.0 + 1e-12))
        throw ConfigError("grid_step", "must be <= gamma/5 = " + std::to_string(c.params.gamma / 5.0));
    const double reach = 3.0 * c.params.coupling_g + 2.0 * c.params.omega * c.excitation / c.params.n_molecules;
    if (gmin > c.params.omega - reach)
        throw ConfigError("grid_min", "must be <= " + std::to_string(c.params.omega - reach));
    if (gmax < c.params.omega + reach)
        throw ConfigError("grid_max", "must be >= " + std::to_string(c.params.omega + reach));
    c.grid = Grid(gmin, gmax, gstep);

    if (has("output")) c.output = v.at("output");
    if (c.output.empty()) throw ConfigError("output", "must not be empty");
    if (has("format")) {
        const std::string f = v.at("format");
        if (f == "csv")
            c.format = OutputFormat::csv;
        else if (f == "json")
            c.format = OutputFormat::json;
        else
            throw ConfigError("format", "expected csv or json, got '" + f + "'");
    } else {
        const bool json_ext = c.output.size() >= 5 && c.output.compare(c.output.size() - 5, 5, ".json") == 0;
        c.format = json_ext ? OutputFormat::json : OutputFormat::csv;
    }
    c.report = has("report") ? v.at("report") : default_report_path(c.output);
    if (c.report == c.output) throw ConfigError("report", "must differ from output");

    if (has("peak_min_height")) c.peak_min_height = num("peak_min_height");
    if (!(c.peak_min_height > 0.0 && c.peak_min_height < 1.0))
        throw ConfigError("peak_min_height", "must lie in (0, 1)");
    if (has("peak_min_separation")) c.peak_min_separation = num("peak_min_separation");
    if (!(c.peak_min_separation >= 0.0)) throw ConfigError("peak_min_separation", "must be >= 0");
    return c;
}

/// Flag values captured by register_run_flags, keyed like the config file.
struct FlagValues {
    detail::RawValues values;
    std::string config_path;
};

inline void register_run_flags(CLI::App& app, FlagValues& out) {
    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    static const Flag flags[] = {
        {"--scenario", "scenario", "named parameter set: fig1 (N=100), fig2 (N=10000) or custom"},
        {"--omega", "omega", "transition and cavity energy, meV"},
        {"--g", "g", "collective coupling g, meV"},
        {"--kappa", "kappa", "per-molecule coupling; g = kappa sqrt(N) unless --g is given"},
        {"--n-molecules", "n_molecules", "number of molecules N (>= 3)"},
        {"--gamma", "gamma", "spectrometer half-bandwidth, meV"},
        {"--excitation", "excitation", "excitation number of the initial state"},
        {"--initial-state", "initial_state", "exciton, photon, or comma-separated amplitudes (re or re:im)"},
        {"--method", "method", "first_order or exact_numeric"},
        {"--grid-min", "grid_min", "lowest frequency, meV"},
        {"--grid-max", "grid_max", "highest frequency, meV"},
        {"--grid-step", "grid_step", "frequency step, meV (<= gamma/5)"},
        {"--output", "output", "spectrum table path"},
        {"--format", "format", "csv or json (default from the output extension)"},
        {"--report", "report", "line/peak report path (default <output stem>.report.json)"},
        {"--peak-min-height", "peak_min_height", "peak threshold relative to the tallest peak"},
        {"--peak-min-separation", "peak_min_separation", "peaks closer than this merge, meV"},
    };
    for (const Flag& f : flags) {
        const std::string key = f.key;
        app.add_option_function<std::string>(
            f.name, [&out, key](const std::string& s) { out.values[key] = s; }, f.help);
    }
    app.add_option("--config", out.config_path, "config file: key = value lines or a JSON object");
}

inline RunConfig resolve_config(const FlagValues& flags) {
    const detail::RawValues file = flags.config_path.empty() ? detail::RawValues{} : read_config_file(flags.config_path);
    return resolve_config(file, flags.values);
}

/// Parses a flag list such as {"--scenario", "fig2", "--gamma", "0.2"}.
inline RunConfig parse_config(std::vector<std::string> args) {
    CLI::App app("qexciton spectrum");
    FlagValues flags;
    register_run_flags(app, flags);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        throw ConfigError("flags", e.what());
    }
    return resolve_config(flags);
}

/// Full-precision config block; read_config_json(to_json(c)) == c.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["scenario"] = c.scenario;
    j["omega"] = c.params.omega;
    j["g"] = c.params.coupling_g;
    if (c.params.kappa) j["kappa"] = *c.params.kappa;
    j["n_molecules"] = c.params.n_molecules;
    j["gamma"] = c.params.gamma;
    j["excitation"] = c.excitation;
    if (c.initial_state == "explicit") {
        nlohmann::json amps = nlohmann::json::array();
        for (const cplx& a : c.amplitudes) amps.push_back({a.real(), a.imag()});
        j["initial_state"] = amps;
    } else {
        j["initial_state"] = c.initial_state;
    }
    j["method"] = to_string(c.method);
    j["grid_min"] = c.grid.min;
    j["grid_max"] = c.grid.max;
    j["grid_step"] = c.grid.step;
    j["output"] = c.output;
    j["format"] = c.format == OutputFormat::csv ? "csv" : "json";
    j["report"] = c.report;
    j["peak_min_height"] = c.peak_min_height;
    j["peak_min_separation"] = c.peak_min_separation;
    return j;
}

template <class Json>
inline RunConfig read_config_json(const Json& j) {
    return resolve_config(detail::parse_json_object(j), {});
}

}  // namespace qexciton
