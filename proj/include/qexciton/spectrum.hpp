// spectrum.hpp: Filtered (physical) emission spectrum of the exciton dipole

#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qexciton/fock_algebra.hpp"
#include "qexciton/models.hpp"
#include "qexciton/perturbation.hpp"

namespace qexciton {

inline constexpr double kDefaultPeakRelativeHeight = 0.005;
inline constexpr double kDefaultPeakSeparation = 1.0;  // meV
inline constexpr double kLinePruneRelative = 1e-14;
inline constexpr double kGridMarginGammas = 50.0;

struct SpectralLine {
    double frequency = 0.0;  // E_upper - E_lower, meV
    double weight = 0.0;
    StateLabel upper;
    StateLabel lower;
};

/// Normalized amplitude vector over a block's Fock basis.
struct InitialState {
    int excitation = 0;
    Vector amplitudes;
    std::string name;

    static InitialState from_amplitudes(int excitation, Vector amplitudes, std::string name = "explicit") {
        const FockBlock block(excitation);
        if (amplitudes.size() != block.dimension())
            throw std::invalid_argument("initial state has " + std::to_string(amplitudes.size()) +
                                        " amplitudes, block " + std::to_string(excitation) + " needs " +
                                        std::to_string(block.dimension()));
        if (std::abs(amplitudes.norm() - 1.0) > 1e-10)
            throw std::invalid_argument("initial state not normalized (norm " + std::to_string(amplitudes.norm()) +
                                        ")");
        return {excitation, std::move(amplitudes), std::move(name)};
    }

    /// |n_photon, n_exciton> basis state.
    static InitialState fock(int excitation, int n_photon, std::string name) {
        const FockBlock block(excitation);
        if (n_photon < 0 || n_photon > excitation) throw std::invalid_argument("photon number outside block");
        Vector v = Vector::Zero(block.dimension());
        v(excitation - n_photon) = 1.0;
        return {excitation, std::move(v), std::move(name)};
    }

    static InitialState bare_exciton(int excitation) { return fock(excitation, 0, "exciton"); }
    static InitialState bare_photon(int excitation) { return fock(excitation, excitation, "photon"); }
};

/// Uniform grid min, min + step, ... up to max (inclusive when max lies on the lattice).
struct Grid {
    double min = 0.0;
    double max = 0.0;
    double step = 0.0;

    Grid() = default;
    Grid(double lo, double hi, double dx) : min(lo), max(hi), step(dx) {
        if (!(dx > 0.0)) throw std::invalid_argument("grid step must be > 0");
        if (!(hi > lo)) throw std::invalid_argument("grid max must exceed grid min");
    }

    std::size_t size() const { return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1; }
    double at(std::size_t i) const { return min + static_cast<double>(i) * step; }

    std::vector<double> points() const {
        std::vector<double> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
        return out;
    }

    static Grid centered(double center, double half_width, double step) {
        return Grid(center - half_width, center + half_width, step);
    }
};

struct SpectrumResult {
    Grid grid;
    std::vector<double> omega;
    std::vector<double> values;
    std::vector<SpectralLine> lines;
    double gamma = 0.0;
    InitialState initial_state;
};

/// Complex emission amplitudes A(m, n) = <phi_m| b_q |psi_n><psi_n|i> between the upper block
/// eigenstates psi_n and the lower block eigenstates phi_m.
struct DipoleTransitions {
    EigenSystem upper;
    EigenSystem lower;
    Matrix amplitudes;  // rows: lower states, cols: upper states

    double frequency(Eigen::Index lower_index, Eigen::Index upper_index) const {
        return upper.energies[static_cast<std::size_t>(upper_index)] -
               lower.energies[static_cast<std::size_t>(lower_index)];
    }
};

namespace detail {

inline EigenSystem solve_block(const ModelParams& params, int excitation, Method method) {
    switch (method) {
    case Method::first_order: return first_order_states(params, excitation);
    case Method::exact_numeric: return exact_block_spectrum(params, excitation, Model::effective);
    case Method::zeroth: break;
    }
    throw std::invalid_argument("spectrum method must be first_order or exact_numeric");
}

}  // namespace detail

inline DipoleTransitions dipole_transitions(const ModelParams& params, const InitialState& initial,
                                           Method method = Method::first_order) {
    params.validate();
    if (initial.excitation < 1) throw std::invalid_argument("no emission from vacuum");
    if (initial.amplitudes.size() != initial.excitation + 1)
        throw std::invalid_argument("initial state dimension does not match its block");
    if (std::abs(initial.amplitudes.norm() - 1.0) > 1e-10)
        throw std::invalid_argument("initial state not normalized (norm " + std::to_string(initial.amplitudes.norm()) +
                                    ")");

    DipoleTransitions t{detail::solve_block(params, initial.excitation, method),
                        detail::solve_block(params, initial.excitation - 1, method), Matrix()};
    const OperatorMap bq = qdeformed_lowering(FockBlock(initial.excitation), params.deformation());
    const Matrix coupling = t.lower.states.adjoint() * bq.entries() * t.upper.states;
    const Vector populations = t.upper.states.adjoint() * initial.amplitudes;
    t.amplitudes = coupling * populations.asDiagonal();
    return t;
}

/// One line per (upper l, lower m) with weight |<i|psi_l>|^2 |<psi_l|b_q†|phi_m>|^2.
inline std::vector<SpectralLine> transition_amplitudes(const ModelParams& params, const InitialState& initial,
                                                       Method method = Method::first_order) {
    const DipoleTransitions t = dipole_transitions(params, initial, method);
    std::vector<SpectralLine> lines;
    double max_weight = 0.0;
    for (Eigen::Index n = 0; n < t.amplitudes.cols(); ++n)
        for (Eigen::Index m = 0; m < t.amplitudes.rows(); ++m) {
            const double w = std::norm(t.amplitudes(m, n));
            max_weight = std::max(max_weight, w);
            lines.push_back({t.frequency(m, n), w, t.upper.labels[static_cast<std::size_t>(n)],
                             t.lower.labels[static_cast<std::size_t>(m)]});
        }
    std::erase_if(lines, [&](const SpectralLine& l) { return l.weight < kLinePruneRelative * max_weight; });
    std::sort(lines.begin(), lines.end(),
              [](const SpectralLine& a, const SpectralLine& b) { return a.frequency < b.frequency; });
    return lines;
}

inline double lorentzian(double omega, double center, double gamma) {
    const double d = omega - center;
    return 2.0 * gamma / (gamma * gamma + d * d);
}

namespace detail {

inline void require_coverage(const std::vector<double>& frequencies, const Grid& grid, double gamma) {
    const double margin = kGridMarginGammas * gamma;
    std::ostringstream bad;
    int count = 0;
    for (double f : frequencies)
        if (f - margin < grid.min || f + margin > grid.max) {
            bad << (count++ ? ", " : "") << f;
        }
    if (count)
        throw std::invalid_argument("grid does not cover lines with 50 gamma margin: " + bad.str() + " meV");
}

}  // namespace detail

/// S(omega) = sum over lines of 2 gamma / (gamma^2 + (omega - omega_line)^2) * weight.
inline SpectrumResult stationary_spectrum(const std::vector<SpectralLine>& lines, double gamma, const Grid& grid) {
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    std::vector<double> freqs;
    for (const auto& l : lines) freqs.push_back(l.frequency);
    detail::require_coverage(freqs, grid, gamma);

    SpectrumResult out;
    out.grid = grid;
    out.omega = grid.points();
    out.values.assign(out.omega.size(), 0.0);
    out.lines = lines;
    out.gamma = gamma;
    for (std::size_t i = 0; i < out.omega.size(); ++i)
        for (const auto& l : lines) out.values[i] += l.weight * lorentzian(out.omega[i], l.frequency, gamma);
    return out;
}

/// Finite-time physical spectrum including transient and cross terms.
///
/// With A(m, n) from dipole_transitions and w_nm = E_n - E'_m, the double time integral
/// factorizes per lower state m:
///   S(omega) = 2 gamma sum_m | sum_n A(m, n) F_nm |^2,
///   F_nm = exp(-i w_nm t) (1 - exp(-(gamma + i D) t)) / (gamma + i D),  D = omega - w_nm.
inline SpectrumResult time_domain_spectrum(const ModelParams& params, const InitialState& initial, double gamma,
                                           double t, const Grid& grid, Method method = Method::first_order) {
    if (!(t > 0.0)) throw std::invalid_argument("integration time must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
    const DipoleTransitions tr = dipole_transitions(params, initial, method);

    SpectrumResult out;
    out.grid = grid;
    out.omega = grid.points();
    out.values.assign(out.omega.size(), 0.0);
    out.gamma = gamma;
    out.initial_state = initial;
    out.lines = transition_amplitudes(params, initial, method);
    std::vector<double> freqs;
    for (const auto& l : out.lines) freqs.push_back(l.frequency);
    detail::require_coverage(freqs, grid, gamma);

    for (std::size_t i = 0; i < out.omega.size(); ++i) {
        double s = 0.0;
        for (Eigen::Index m = 0; m < tr.amplitudes.rows(); ++m) {
            cplx sum = 0.0;
            for (Eigen::Index n = 0; n < tr.amplitudes.cols(); ++n) {
                const double w = tr.frequency(m, n);
                const cplx z(gamma, out.omega[i] - w);
                sum += tr.amplitudes(m, n) * std::exp(cplx(0.0, -w * t)) * (1.0 - std::exp(-z * t)) / z;
            }
            s += std::norm(sum);
        }
        out.values[i] = 2.0 * gamma * s;
    }
    return out;
}

/// Stationary spectrum of a given initial state, with its lines attached.
inline SpectrumResult emission_spectrum(const ModelParams& params, const InitialState& initial, const Grid& grid,
                                        Method method = Method::first_order) {
    SpectrumResult s = stationary_spectrum(transition_amplitudes(params, initial, method), params.gamma, grid);
    s.initial_state = initial;
    return s;
}

struct Peak {
    double position = 0.0;
    double height = 0.0;
};

/// Local maxima above min_relative_height * global max; maxima closer than min_separation
/// are merged in favour of the higher one. Positions refined by a three-point parabola.
inline std::vector<Peak> find_peaks(const SpectrumResult& spec, double min_relative_height = kDefaultPeakRelativeHeight,
                                    double min_separation = kDefaultPeakSeparation) {
    if (!(min_relative_height > 0.0) || !(min_separation > 0.0))
        throw std::invalid_argument("peak thresholds must be positive");
    const auto& y = spec.values;
    if (y.size() < 3) return {};
    const double global = *std::max_element(y.begin(), y.end());
    if (!(global > 0.0)) return {};

    std::vector<Peak> candidates;
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
        if (y[i] < min_relative_height * global) continue;
        const double denom = y[i - 1] - 2.0 * y[i] + y[i + 1];
        double shift = 0.0;
        double height = y[i];
        if (denom < 0.0) {
            shift = 0.5 * (y[i - 1] - y[i + 1]) / denom;
            height = y[i] - 0.25 * (y[i - 1] - y[i + 1]) * shift;
        }
        candidates.push_back({spec.omega[i] + shift * spec.grid.step, height});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });
    std::vector<Peak> kept;
    for (const auto& c : candidates) {
        const bool close = std::any_of(kept.begin(), kept.end(), [&](const Peak& k) {
            return std::abs(k.position - c.position) < min_separation;
        });
        if (!close) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end(), [](const Peak& a, const Peak& b) { return a.position < b.position; });
    return kept;
}

/// Trapezoidal integral of S over the grid.
inline double integrated_intensity(const SpectrumResult& spec) {
    double total = 0.0;
    for (std::size_t i = 1; i < spec.values.size(); ++i)
        total += 0.5 * (spec.values[i] + spec.values[i - 1]) * (spec.omega[i] - spec.omega[i - 1]);
    return total;
}

/// 2 pi sum of line weights: the integral of the stationary spectrum over the whole real line.
inline double sum_rule_target(const std::vector<SpectralLine>& lines) {
    double w = 0.0;
    for (const auto& l : lines) w += l.weight;
    return 2.0 * kPi * w;
}

}  // namespace qexciton
