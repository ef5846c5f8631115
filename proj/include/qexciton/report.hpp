// report.hpp: Spectrum table and line/peak report for one resolved run

#pragma once

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qexciton/config.hpp"

namespace qexciton {

/// Rounds to 9 significant digits; every number in the data outputs passes through here.
inline double round9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::strtod(buf, nullptr);
}

inline std::string format9(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

struct RunProducts {
    SpectrumResult spectrum;
    std::vector<Peak> peaks;
    std::vector<EigenSystem> blocks;  // upper then lower
    std::string table;                // spectrum file contents
    nlohmann::ordered_json report;
};

namespace detail {

inline nlohmann::ordered_json label_json(const StateLabel& l) { return {{"j", l.j}, {"m", l.m}}; }

inline std::string spectrum_table(const SpectrumResult& s, OutputFormat format) {
    std::string out;
    if (format == OutputFormat::csv) {
        out = "omega_mev,s_omega\n";
        for (std::size_t i = 0; i < s.omega.size(); ++i) out += format9(s.omega[i]) + "," + format9(s.values[i]) + "\n";
        return out;
    }
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < s.omega.size(); ++i)
        rows.push_back({{"omega_mev", round9(s.omega[i])}, {"s_omega", round9(s.values[i])}});
    return rows.dump(1) + "\n";
}

}  // namespace detail

/// Computes everything run_spectrum writes, without touching the filesystem.
inline RunProducts compute_run(const RunConfig& config) {
    RunProducts out;
    const InitialState initial = config.initial();
    out.spectrum = emission_spectrum(config.params, initial, config.grid, config.method);
    out.peaks = find_peaks(out.spectrum, config.peak_min_height, config.peak_min_separation);
    out.blocks.push_back(detail::solve_block(config.params, config.excitation, config.method));
    out.blocks.push_back(detail::solve_block(config.params, config.excitation - 1, config.method));
    out.table = detail::spectrum_table(out.spectrum, config.format);

    using ojson = nlohmann::ordered_json;
    ojson lines = ojson::array();
    for (const SpectralLine& l : out.spectrum.lines)
        lines.push_back({{"frequency_mev", round9(l.frequency)},
                         {"weight", round9(l.weight)},
                         {"upper", detail::label_json(l.upper)},
                         {"lower", detail::label_json(l.lower)}});
    ojson peaks = ojson::array();
    for (const Peak& p : out.peaks) peaks.push_back({{"position_mev", round9(p.position)}, {"height", round9(p.height)}});
    ojson eigen = ojson::array();
    for (const EigenSystem& e : out.blocks) {
        ojson energies = ojson::array();
        ojson labels = ojson::array();
        for (std::size_t i = 0; i < e.energies.size(); ++i) {
            energies.push_back(round9(e.energies[i]));
            labels.push_back(detail::label_json(e.labels[i]));
        }
        eigen.push_back({{"excitation", e.block.excitation()},
                         {"method", to_string(e.method)},
                         {"energies_mev", energies},
                         {"labels", labels}});
    }
    ojson warnings = ojson::array();
    for (const std::string& w : config.params.warnings()) warnings.push_back(w);

    out.report["lines"] = lines;
    out.report["peaks"] = peaks;
    out.report["eigenvalues"] = eigen;
    out.report["config"] = to_json(config);
    out.report["initial_state"] = initial.name;
    out.report["integrated_intensity"] = round9(integrated_intensity(out.spectrum));
    out.report["sum_rule_target"] = round9(sum_rule_target(out.spectrum.lines));
    out.report["warnings"] = warnings;
    return out;
}

namespace detail {

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << text;
    f.close();
    if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace detail

/// Writes the spectrum table and the report. Returns the process exit status.
inline int run_spectrum(const RunConfig& config, std::ostream& log = std::cerr) {
    RunProducts products;
    try {
        products = compute_run(config);
    } catch (const std::exception& e) {
        log << "spectrum: " << e.what() << "\n";
        return 2;
    }
    for (const std::string& w : config.params.warnings()) log << "warning: " << w << "\n";
    try {
        detail::write_file(config.output, products.table);
        detail::write_file(config.report, products.report.dump(2) + "\n");
    } catch (const std::exception& e) {
        log << "output: " << e.what() << "\n";
        return 3;
    }
    log << products.spectrum.lines.size() << " lines, " << products.peaks.size() << " peaks";
    for (const Peak& p : products.peaks) log << " " << format9(p.position);
    log << "\n";
    return 0;
}

}  // namespace qexciton
