// validation.hpp: Cross-module oracle suite behind `qexciton validate`

#pragma once

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "qexciton/spectrum.hpp"

namespace qexciton {

enum class ValidationLevel { fast, full };

inline ValidationLevel parse_validation_level(const std::string& s) {
    if (s == "fast") return ValidationLevel::fast;
    if (s == "full") return ValidationLevel::full;
    throw std::invalid_argument("level: expected fast or full, got '" + s + "'");
}

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

struct ValidationOptions {
    ValidationLevel level = ValidationLevel::fast;
    // Drop g from one cubic term of H' in the Hermiticity check, which must then fail.
    bool tamper = false;
};

namespace validation {

inline ModelParams fig1(int n_molecules = 100) {
    ModelParams p;
    p.n_molecules = n_molecules;
    return p;
}

inline std::string sci(double x) {
    std::ostringstream s;
    s << std::setprecision(3) << x;
    return s.str();
}

inline CheckResult bound(std::string name, double measured, double limit) {
    return {std::move(name), measured <= limit, sci(measured) + " <= " + sci(limit)};
}

inline CheckResult within(std::string name, double measured, double lo, double hi) {
    return {std::move(name), measured >= lo && measured <= hi, sci(measured) + " in [" + sci(lo) + ", " + sci(hi) + "]"};
}

inline double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

inline double perturbation_error(int n_molecules, int excitation) {
    const ModelParams p = fig1(n_molecules);
    return max_gap(first_order_energies(p, excitation), exact_block_spectrum(p, excitation).energies);
}

inline double q_commutator_residual(int n_molecules) {
    const DeformationContext ctx(n_molecules);
    const FockBlock block(5);
    const Matrix bbdag = (qdeformed_raising(block, ctx).adjoint() * qdeformed_raising(block, ctx)).entries();
    const Matrix bdagb = (qdeformed_lowering(block, ctx).adjoint() * qdeformed_lowering(block, ctx)).entries();
    return max_abs(bbdag - ctx.q() * bdagb - Matrix::Identity(6, 6));
}

inline std::size_t nearest(const SpectrumResult& s, double omega) {
    return static_cast<std::size_t>(std::lround((omega - s.grid.min) / s.grid.step));
}

/// Largest |S_t / S - 1| over the line frequencies.
inline double time_domain_deviation(const ModelParams& p, const InitialState& init, double gamma_t) {
    const Grid grid = Grid::centered(p.omega, 130.0, p.gamma / 10.0);
    const SpectrumResult st = emission_spectrum(p, init, grid);
    const SpectrumResult td = time_domain_spectrum(p, init, p.gamma, gamma_t / p.gamma, grid);
    double worst = 0.0;
    for (const SpectralLine& l : st.lines) {
        const std::size_t i = nearest(st, l.frequency);
        worst = std::max(worst, std::abs(td.values[i] / st.values[i] - 1.0));
    }
    return worst;
}

/// Same comparison after averaging the time-domain spectrum over t in [20/gamma, 120/gamma]; the
/// interference between transitions sharing a lower state oscillates and averages out.
inline double time_averaged_deviation(const ModelParams& p, const InitialState& init, int samples) {
    const Grid grid = Grid::centered(p.omega, 130.0, p.gamma / 10.0);
    const SpectrumResult st = emission_spectrum(p, init, grid);
    std::vector<double> mean(st.values.size(), 0.0);
    const double t0 = 20.0 / p.gamma;
    const double t1 = 120.0 / p.gamma;
    for (int k = 0; k < samples; ++k) {
        const double t = t0 + (t1 - t0) * (k + 0.5) / samples;
        const SpectrumResult td = time_domain_spectrum(p, init, p.gamma, t, grid);
        for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += td.values[i] / samples;
    }
    double worst = 0.0;
    for (const SpectralLine& l : st.lines) {
        const std::size_t i = nearest(st, l.frequency);
        worst = std::max(worst, std::abs(mean[i] / st.values[i] - 1.0));
    }
    return worst;
}

}  // namespace validation

inline std::vector<CheckResult> run_checks(const ValidationOptions& opt) {
    using namespace validation;
    const bool full = opt.level == ValidationLevel::full;
    const int top_block = full ? 10 : 6;
    std::vector<std::function<CheckResult()>> checks;

    checks.push_back([] {
        const int n = 10;
        const ExactExcitonRealization exact(n);
        double worst = 0.0;
        for (int ne = 0; 2 * ne <= n + 1; ++ne)
            worst = std::max(worst, std::abs(exciton_commutator_function(exact.occupation(ne), 1.0 / n) -
                                             (1.0 - 2.0 * ne / n)));
        return bound("commutator function = 1 - 2 n_e/N, N=10, n_e <= (N+1)/2", worst, 1e-12);
    });
    checks.push_back([] {
        const int n = 10;
        const ExactExcitonRealization exact(n);
        double worst = 0.0;
        for (int ne = n / 2 + 1; ne <= n; ++ne)
            worst = std::max(worst, std::abs(exciton_commutator_function(exact.occupation(ne), 1.0 / n) -
                                             (2.0 * ne - n - 2.0) / n));
        return bound("commutator function mirrors to (2 n_e - N - 2)/N above half filling", worst, 1e-12);
    });
    checks.push_back([] {
        const ExactExcitonRealization exact(10);
        const Matrix defect = exact.commutator() - exact.h();
        return bound("exact [b, b+] = 1 - 2 n_e/N, N=10", max_abs(defect), 1e-12);
    });
    checks.push_back([] {
        const ExactExcitonRealization exact(10);
        const Matrix up = exact.raising();
        const Matrix defect = exact.h() * up - up * exact.h() + (2.0 / 10.0) * up;
        return bound("[h, b+] = -(2/N) b+, N=10", max_abs(defect), 1e-12);
    });
    checks.push_back([] {
        const double r = q_commutator_residual(100) / q_commutator_residual(200);
        return within("q-commutator residual ratio N=100 -> 200", r, 3.0, 5.0);
    });
    checks.push_back([] {
        double worst = 0.0;
        for (int n : {10, 100, 10000})
            worst = std::max(worst, max_abs(dicke_block(fig1(n), 1).entries() - effective_block(fig1(n), 1).entries()));
        return bound("block-1 Dicke = effective model, N in {10, 100, 10000}", worst, 1e-12);
    });
    checks.push_back([top_block] {
        double worst = 0.0;
        for (int n = 0; n <= top_block; ++n) {
            const FockBlock block(n);
            const Matrix r = rotation_y(block, kPi / 2).entries();
            const AngularMomentum j = angular_momentum(block);
            worst = std::max(worst, max_abs(r * j.jz.entries() * r.adjoint() - j.jx.entries()));
        }
        return bound("R Jz R+ = Jx up to block " + std::to_string(top_block), worst, 1e-12);
    });
    checks.push_back([top_block] {
        double worst = 0.0;
        const ModelParams p = fig1();
        for (int n = 0; n <= top_block; ++n) {
            const FockBlock block(n);
            const Matrix hr = hprime_rotated(p, n).entries();
            for (int k = 0; k < block.dimension(); ++k) {
                const double numeric = p.omega * n + 2.0 * p.coupling_g * block.m(k) + hr(k, k).real();
                worst = std::max(worst, std::abs(numeric - closed_form_energy(p, block.j(), block.m(k))));
            }
        }
        return bound("closed-form energy = diagonal of R+ H' R (meV)", worst, 1e-10 * p.omega);
    });
    checks.push_back([top_block, tamper = opt.tamper] {
        double worst = 0.0;
        for (int n_mol : {10, 100, 10000}) {
            const ModelParams p = fig1(n_mol);
            for (int n = 0; n <= std::min(top_block, n_mol); ++n) {
                const OperatorMap hp = tamper ? detail::assemble_hprime(p, n, p.coupling_g, 1.0) : hprime_block(p, n);
                for (const OperatorMap& h : {dicke_block(p, n), h0_block(p, n), hp, h0_block(p, n) + hp})
                    worst = std::max(worst, h.hermiticity_defect());
            }
        }
        return bound(std::string("Hermiticity of all Hamiltonian blocks") + (tamper ? " (H' tampered)" : ""), worst,
                     1e-12);
    });
    checks.push_back([] {
        const ModelParams p = fig1();
        const double defect = detail::assemble_hprime(p, 3, p.coupling_g, 1.0).hermiticity_defect();
        return CheckResult{"negative control: H' without g on one cubic term is rejected", defect > 1e-12,
                           "defect " + sci(defect) + " > 1e-12"};
    });
    checks.push_back([] {
        double lo = 1e300, hi = 0.0;
        for (int n : {2, 3}) {
            const double r = perturbation_error(100, n) / perturbation_error(200, n);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        return CheckResult{"first order vs exact: error ratio N=100 -> 200, blocks 2, 3", lo >= 3.0 && hi <= 5.0,
                           sci(lo) + ".." + sci(hi) + " in [3, 5]"};
    });
    checks.push_back([] { return bound("first order vs exact, block 2, N=100 (meV)", perturbation_error(100, 2), 6.0); });
    if (full) {
        checks.push_back([] {
            double lo = 1e300, hi = 0.0;
            for (int n : {2, 3}) {
                const double e100 = perturbation_error(100, n);
                const double e200 = perturbation_error(200, n);
                const double e1000 = perturbation_error(1000, n);
                for (double slope : {std::log(e100 / e200) / std::log(2.0), std::log(e200 / e1000) / std::log(5.0)}) {
                    lo = std::min(lo, slope);
                    hi = std::max(hi, slope);
                }
            }
            return CheckResult{"first order vs exact: log-log slope over N in {100, 200, 1000}",
                               lo >= 1.75 && hi <= 2.25, sci(lo) + ".." + sci(hi) + " in [1.75, 2.25]"};
        });
    }
    checks.push_back([] {
        const ModelParams p = fig1(10000);
        const NormalModes modes = bogoliubov_modes(p);
        const double err = std::max(std::abs(modes.lower - (p.omega - p.coupling_g)),
                                    std::abs(modes.upper - (p.omega + p.coupling_g)));
        return bound("normal modes at N=10000 equal omega -+ g (meV)", err, 1e-9);
    });
    checks.push_back([] {
        return bound("time-domain vs stationary at gamma t = 20, block 1",
                     time_domain_deviation(fig1(), InitialState::bare_exciton(1), 20.0), 0.02);
    });
    checks.push_back([full] {
        double worst = 0.0;
        const std::vector<int> photons = full ? std::vector<int>{0, 1, 2} : std::vector<int>{0};
        for (int ph : photons)
            worst = std::max(worst, time_averaged_deviation(fig1(), InitialState::fock(2, ph, "basis"), full ? 200 : 100));
        return bound("time-averaged time-domain vs stationary, block 2", worst, 0.005);
    });
    checks.push_back([full] {
        double worst = 0.0;
        const ModelParams p = fig1();
        const Grid grid = Grid::centered(p.omega, 200.0, p.gamma / 10.0);
        const std::vector<int> photons = full ? std::vector<int>{0, 1, 2} : std::vector<int>{0};
        for (int ph : photons) {
            const SpectrumResult s = emission_spectrum(p, InitialState::fock(2, ph, "basis"), grid);
            worst = std::max(worst, std::abs(integrated_intensity(s) / sum_rule_target(s.lines) - 1.0));
        }
        return bound("integrated intensity = 2 pi sum of weights, +-200 meV", worst, 0.005);
    });
    checks.push_back([] {
        const ModelParams p = fig1();
        const Grid grid = Grid::centered(p.omega, 130.0, p.gamma / 10.0);
        double lowest = 0.0;
        for (Method m : {Method::first_order, Method::exact_numeric}) {
            const InitialState init = InitialState::bare_exciton(2);
            for (const SpectrumResult& s :
                 {emission_spectrum(p, init, grid, m), time_domain_spectrum(p, init, p.gamma, 37.0, grid, m)})
                for (double v : s.values) lowest = std::min(lowest, v);
        }
        return CheckResult{"spectra are non-negative", lowest >= 0.0, "min " + sci(lowest)};
    });

    std::vector<CheckResult> out;
    for (const auto& check : checks) {
        const auto start = std::chrono::steady_clock::now();
        CheckResult r;
        try {
            r = check();
        } catch (const std::exception& e) {
            r = {"(check raised)", false, e.what()};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.push_back(r);
    }
    return out;
}

/// Prints the pass/fail table; returns the exit status (0 when everything passed).
inline int run_validate(const ValidationOptions& opt, std::ostream& os = std::cout) {
    const auto start = std::chrono::steady_clock::now();
    const std::vector<CheckResult> results = run_checks(opt);
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    int failed = 0;
    for (const auto& r : results) {
        os << (r.passed ? "PASS  " : "FAIL  ") << std::left << std::setw(static_cast<int>(width)) << r.name << "  "
           << r.detail << "\n";
        failed += r.passed ? 0 : 1;
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    os << (results.size() - failed) << "/" << results.size() << " passed in " << std::fixed << std::setprecision(2)
       << seconds << " s\n";
    return failed == 0 ? 0 : 1;
}

}  // namespace qexciton
