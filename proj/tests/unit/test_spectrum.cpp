#include <catch2/catch.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "qexciton/spectrum.hpp"

using namespace qexciton;

namespace {

ModelParams fig1(int n_mol = 100) {
    ModelParams p;
    p.omega = 1562.0;
    p.coupling_g = 20.0;
    p.n_molecules = n_mol;
    p.gamma = 0.1;
    return p;
}

Grid default_grid(const ModelParams& p) { return Grid::centered(p.omega, 130.0, p.gamma / 10.0); }

std::size_t nearest_index(const SpectrumResult& s, double omega) {
    return static_cast<std::size_t>(std::lround((omega - s.grid.min) / s.grid.step));
}

// Physical spectrum by brute force: X(t1) = U_low(t1)† b_q U_up(t1)|i> from matrix exponentials
// of the effective Hamiltonian, then S = 2 gamma sum_components |int_0^t e^{-(gamma + i w)(t - t1)} X(t1) dt1|^2
// with composite Simpson quadrature.
double quadrature_spectrum(const ModelParams& p, const InitialState& init, double w, double t, int panels) {
    const Matrix h_up = effective_block(p, init.excitation).entries();
    const Matrix h_low = effective_block(p, init.excitation - 1).entries();
    const Matrix bq = qdeformed_lowering(FockBlock(init.excitation), p.deformation()).entries();
    const double dt = t / panels;
    Vector acc = Vector::Zero(h_low.rows());
    for (int k = 0; k <= panels; ++k) {
        const double t1 = k * dt;
        const Matrix u_up = (cplx(0, -t1) * h_up).exp();
        const Matrix u_low = (cplx(0, -t1) * h_low).exp();
        const Vector x = u_low.adjoint() * bq * u_up * init.amplitudes;
        const double simpson = (k == 0 || k == panels) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        acc += simpson * std::exp(-cplx(p.gamma, w) * (t - t1)) * x;
    }
    acc *= dt / 3.0;
    return 2.0 * p.gamma * acc.squaredNorm();
}

}  // namespace

TEST_CASE("doublet from the one-excitation block") {
    const ModelParams p = fig1();
    const std::vector<SpectralLine> lines = transition_amplitudes(p, InitialState::bare_exciton(1));
    REQUIRE(lines.size() == 2);
    CHECK(lines[0].frequency == Approx(1542.0).epsilon(1e-14));
    CHECK(lines[1].frequency == Approx(1582.0).epsilon(1e-14));
    // |<i|psi>|^2 = 1/2 and |<psi|b†|vac>|^2 = 1/2
    CHECK(lines[0].weight == Approx(0.25).epsilon(1e-12));
    CHECK(lines[1].weight == Approx(0.25).epsilon(1e-12));
    CHECK(lines[0].upper.m == -0.5);
    CHECK(lines[0].lower.j == 0.0);
}

TEST_CASE("sextet from the two-excitation block") {
    const ModelParams p = fig1();
    const std::vector<double> expected{1509.71, 1549.71, 1557.62, 1589.91, 1597.62, 1629.91};
    for (int photons : {0, 1, 2}) {
        const std::vector<SpectralLine> lines = transition_amplitudes(p, InitialState::fock(2, photons, "basis"));
        REQUIRE(lines.size() == 6);
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(lines[i].frequency == Approx(expected[i]).epsilon(1e-12));
            CHECK(lines[i].weight > 0.0);
        }
    }
    // same positions, different intensities
    const auto a = transition_amplitudes(p, InitialState::fock(2, 0, "a"));
    const auto b = transition_amplitudes(p, InitialState::fock(2, 2, "b"));
    CHECK(std::abs(a[3].weight - b[3].weight) > 1e-3);
}

TEST_CASE("transition input validation") {
    const ModelParams p = fig1();
    Vector v(3);
    v << 1.0, 1.0, 0.0;
    CHECK_THROWS_WITH(InitialState::from_amplitudes(2, v), Catch::Contains("not normalized"));
    InitialState raw{2, v, "raw"};
    CHECK_THROWS_WITH(transition_amplitudes(p, raw), Catch::Contains("not normalized"));
    CHECK_THROWS_WITH(transition_amplitudes(p, InitialState::fock(0, 0, "vac")), Catch::Contains("vacuum"));
    CHECK_THROWS(transition_amplitudes(p, InitialState::bare_exciton(2), Method::zeroth));
}

TEST_CASE("stationary spectrum") {
    SECTION("single line peaks at 2w/gamma") {
        const std::vector<SpectralLine> one{{1500.0, 0.7, {}, {}}};
        const SpectrumResult s = stationary_spectrum(one, 0.1, Grid(1490.0, 1510.0, 0.01));
        CHECK(s.values[nearest_index(s, 1500.0)] == Approx(2.0 * 0.7 / 0.1).epsilon(1e-12));
    }
    SECTION("two equal lines 40 meV apart are resolved") {
        const std::vector<SpectralLine> two{{1542.0, 1.0, {}, {}}, {1582.0, 1.0, {}, {}}};
        const SpectrumResult s = stationary_spectrum(two, 0.1, Grid(1500.0, 1625.0, 0.01));
        const std::vector<Peak> peaks = find_peaks(s);
        REQUIRE(peaks.size() == 2);
        CHECK(std::abs(peaks[0].position - 1542.0) <= 1e-4);
        CHECK(std::abs(peaks[1].position - 1582.0) <= 1e-4);
    }
    SECTION("no lines, no signal") {
        const SpectrumResult s = stationary_spectrum({}, 0.1, Grid(0.0, 10.0, 0.1));
        CHECK(std::all_of(s.values.begin(), s.values.end(), [](double v) { return v == 0.0; }));
        CHECK(find_peaks(s).empty());
    }
    SECTION("grid must cover every line with margin") {
        const std::vector<SpectralLine> lines{{1500.0, 1.0, {}, {}}, {1600.0, 1.0, {}, {}}};
        CHECK_THROWS_WITH(stationary_spectrum(lines, 0.1, Grid(1490.0, 1597.0, 0.01)), Catch::Contains("1600"));
        CHECK_THROWS(stationary_spectrum(lines, 0.0, Grid(1400.0, 1700.0, 0.01)));
    }
    SECTION("grid is uniform and strictly increasing") {
        const Grid g = Grid::centered(1562.0, 127.48, 0.01);
        const std::vector<double> pts = g.points();
        CHECK(pts.size() == 25497);
        for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] - pts[i - 1] == Approx(0.01));
        CHECK_THROWS(Grid(1.0, 0.0, 0.1));
        CHECK_THROWS(Grid(0.0, 1.0, 0.0));
    }
}

TEST_CASE("time-domain spectrum") {
    const ModelParams p = fig1();
    const Grid grid = default_grid(p);
    SECTION("closed-form integrals agree with brute-force quadrature") {
        for (int n : {1, 2}) {
            const InitialState init = InitialState::bare_exciton(n);
            const double t = 5.0;
            const Grid coarse(p.omega - 130.0, p.omega + 130.0, 0.5);
            const SpectrumResult s = time_domain_spectrum(p, init, p.gamma, t, coarse, Method::exact_numeric);
            for (double w : {1509.5, 1542.0, 1550.0, 1582.0, 1600.0}) {
                const double reference = quadrature_spectrum(p, init, w, t, 8000);
                const double value = s.values[nearest_index(s, w)];
                INFO("block " << n << " omega " << w);
                CHECK(value == Approx(reference).epsilon(1e-6));
            }
        }
    }
    SECTION("gamma t = 20 reproduces the stationary doublet within 1%") {
        const InitialState init = InitialState::bare_exciton(1);
        const SpectrumResult td = time_domain_spectrum(p, init, p.gamma, 20.0 / p.gamma, grid);
        const SpectrumResult st = emission_spectrum(p, init, grid);
        for (const auto& line : st.lines) {
            const std::size_t i = nearest_index(st, line.frequency);
            CHECK(std::abs(td.values[i] / st.values[i] - 1.0) <= 0.01);
        }
    }
    SECTION("vanishes as t -> 0") {
        const SpectrumResult td = time_domain_spectrum(p, InitialState::bare_exciton(2), p.gamma, 1e-6, grid);
        CHECK(*std::max_element(td.values.begin(), td.values.end()) < 1e-9);
    }
    SECTION("short windows depress the peak") {
        const InitialState init = InitialState::bare_exciton(1);
        const SpectrumResult early = time_domain_spectrum(p, init, p.gamma, 1.0 / p.gamma, grid);
        const SpectrumResult late = time_domain_spectrum(p, init, p.gamma, 20.0 / p.gamma, grid);
        const std::size_t i = nearest_index(late, 1582.0);
        // single-line response carries |1 - e^{-gamma t}|^2 at resonance
        CHECK(early.values[i] / late.values[i] == Approx(std::pow(1.0 - std::exp(-1.0), 2)).epsilon(0.02));
    }
    SECTION("non-negative everywhere") {
        for (Method m : {Method::first_order, Method::exact_numeric}) {
            const SpectrumResult td = time_domain_spectrum(p, InitialState::bare_exciton(2), p.gamma, 37.0, grid, m);
            CHECK(*std::min_element(td.values.begin(), td.values.end()) >= 0.0);
        }
    }
    CHECK_THROWS(time_domain_spectrum(p, InitialState::bare_exciton(1), p.gamma, 0.0, grid));
}

TEST_CASE("peak detection") {
    const ModelParams p = fig1();
    const Grid grid = default_grid(p);
    CHECK(find_peaks(emission_spectrum(p, InitialState::bare_exciton(1), grid)).size() == 2);
    for (int photons : {0, 1, 2})
        CHECK(find_peaks(emission_spectrum(p, InitialState::fock(2, photons, "basis"), grid)).size() == 6);
    CHECK(find_peaks(emission_spectrum(fig1(10000), InitialState::bare_exciton(2), grid)).size() == 2);

    // The weakest sextet line from |0,2> sits at 0.7% of the strongest, below a 1% cut.
    const SpectrumResult exciton = emission_spectrum(p, InitialState::bare_exciton(2), grid);
    CHECK(find_peaks(exciton, 0.01, 1.0).size() == 5);
    CHECK(find_peaks(emission_spectrum(p, InitialState::bare_photon(2), grid), 0.01, 1.0).size() == 6);

    CHECK_THROWS(find_peaks(exciton, 0.0, 1.0));
    CHECK_THROWS(find_peaks(exciton, 0.01, -1.0));

    SECTION("parabolic refinement recovers off-grid centres on the default gamma/10 step") {
        const std::vector<SpectralLine> line{{1561.2345, 1.0, {}, {}}};
        const SpectrumResult s = stationary_spectrum(line, 0.1, Grid(1550.0, 1570.0, 0.01));
        const std::vector<Peak> peaks = find_peaks(s);
        REQUIRE(peaks.size() == 1);
        CHECK(std::abs(peaks[0].position - 1561.2345) <= 1e-4);
        CHECK(peaks[0].height == Approx(20.0).epsilon(1e-3));
    }
}

TEST_CASE("integrated intensity") {
    const std::vector<SpectralLine> unit{{1562.0, 1.0, {}, {}}};
    const SpectrumResult s = stationary_spectrum(unit, 0.1, Grid::centered(1562.0, 200.0, 0.01));
    const double integral = integrated_intensity(s);
    CHECK(std::abs(integral / (2.0 * kPi) - 1.0) <= 0.005);
    CHECK(integral == Approx(4.0 * std::atan(200.0 / 0.1)).epsilon(1e-6));

    CHECK(integrated_intensity(stationary_spectrum({}, 0.1, Grid(0.0, 10.0, 0.1))) == 0.0);

    const std::vector<SpectralLine> doubled{{1562.0, 2.0, {}, {}}};
    CHECK(integrated_intensity(stationary_spectrum(doubled, 0.1, Grid::centered(1562.0, 200.0, 0.01))) ==
          Approx(2.0 * integral));
}

TEST_CASE("first-order and exact lines agree") {
    for (int n_mol : {1000, 2000}) {
        const ModelParams p = fig1(n_mol);
        const auto first = transition_amplitudes(p, InitialState::bare_exciton(2), Method::first_order);
        const auto exact = transition_amplitudes(p, InitialState::bare_exciton(2), Method::exact_numeric);
        REQUIRE(first.size() == exact.size());
        double max_w = 0.0;
        for (const auto& l : exact) max_w = std::max(max_w, l.weight);
        for (std::size_t i = 0; i < first.size(); ++i) {
            // two block energies, each within the second-order bound
            CHECK(std::abs(first[i].frequency - exact[i].frequency) <= 2.0 * 6.0 * 1e4 / (n_mol * n_mol));
            CHECK(std::abs(first[i].weight - exact[i].weight) <= 10.0 / n_mol * max_w);
        }
    }
}

TEST_CASE("total one-excitation weight does not depend on eigenvector phases") {
    const ModelParams p = fig1();
    std::mt19937 rng(7);
    std::normal_distribution<double> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Vector v(2);
        v << cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng));
        v.normalize();
        const InitialState init = InitialState::from_amplitudes(1, v);
        double total = 0.0;
        for (const auto& l : transition_amplitudes(p, init)) total += l.weight;

        // independent route: eigenvectors of H0 with random phases, lower block is the vacuum
        Eigen::SelfAdjointEigenSolver<Matrix> solver(h0_block(p, 1).entries());
        double oracle = 0.0;
        for (int l = 0; l < 2; ++l) {
            const Vector psi = solver.eigenvectors().col(l) * std::exp(cplx(0.0, gauss(rng)));
            oracle += std::norm(psi.dot(v)) * std::norm(psi(1));  // <psi|b†|vac> = conj(psi(0,1))
        }
        CHECK(total == Approx(oracle).epsilon(1e-12));
    }
}
