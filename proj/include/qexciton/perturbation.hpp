// perturbation.hpp: Block eigensystems from the rotated zeroth-order basis, with dense
// diagonalization as the reference.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "qexciton/fock_algebra.hpp"
#include "qexciton/models.hpp"

namespace qexciton {

enum class Method { zeroth, first_order, exact_numeric };

inline const char* to_string(Method m) {
    switch (m) {
    case Method::zeroth: return "zeroth";
    case Method::first_order: return "first_order";
    case Method::exact_numeric: return "exact_numeric";
    }
    return "?";
}

inline Method parse_method(const std::string& s) {
    if (s == "zeroth") return Method::zeroth;
    if (s == "first_order") return Method::first_order;
    if (s == "exact_numeric") return Method::exact_numeric;
    throw std::invalid_argument("unknown method '" + s + "'");
}

enum class Model { effective, dicke };

struct StateLabel {
    double j = 0.0;
    double m = 0.0;
};

/// Energies ascending, states as matching columns over the block's Fock basis.
struct EigenSystem {
    FockBlock block{0};
    Method method = Method::zeroth;
    std::vector<double> energies;
    Matrix states;
    std::vector<StateLabel> labels;
    double orthonormality_tolerance = 1e-10;

    double overlap_defect() const {
        const auto n = states.cols();
        return max_abs(states.adjoint() * states - Matrix::Identity(n, n));
    }

    Vector state(std::size_t i) const { return states.col(static_cast<Eigen::Index>(i)); }
};

namespace detail {

inline double residual_tolerance(double energy) { return 1e-10 * std::max(std::abs(energy), 1.0); }

inline void check_eigenpairs(const Matrix& h, const EigenSystem& eig, double scale) {
    for (std::size_t i = 0; i < eig.energies.size(); ++i) {
        const Vector psi = eig.state(i);
        const double r = (h * psi - eig.energies[i] * psi).norm();
        if (r > residual_tolerance(scale))
            throw std::logic_error("eigenpair residual " + std::to_string(r) + " exceeds tolerance");
    }
}

inline std::vector<double> zeroth_energies_by_index(const ModelParams& params, const FockBlock& block) {
    std::vector<double> e(static_cast<std::size_t>(block.dimension()));
    for (int k = 0; k < block.dimension(); ++k)
        e[static_cast<std::size_t>(k)] = params.omega * block.excitation() + 2.0 * params.coupling_g * block.m(k);
    return e;
}

// Index permutation that lists basis indices by ascending m (i.e. descending k).
inline std::vector<int> ascending_m_order(const FockBlock& block) {
    std::vector<int> order(static_cast<std::size_t>(block.dimension()));
    std::iota(order.rbegin(), order.rend(), 0);
    return order;
}

inline void require_nondegenerate(const ModelParams& params) {
    if (!(params.coupling_g > 0.0))
        throw std::invalid_argument("degenerate zeroth-order spectrum; first-order theory invalid (g = 0)");
}

}  // namespace detail

/// Eigenbasis of H0: psi_m = exp(-i pi/2 Jy)|j m>, E = omega N + 2 g m.
inline EigenSystem zeroth_spectrum(const ModelParams& params, int excitation) {
    const FockBlock block(excitation);
    const OperatorMap r = rotation_y(block, kPi / 2.0);
    const std::vector<double> e = detail::zeroth_energies_by_index(params, block);

    EigenSystem out;
    out.block = block;
    out.method = Method::zeroth;
    out.states = Matrix(block.dimension(), block.dimension());
    int col = 0;
    for (int k : detail::ascending_m_order(block)) {
        out.energies.push_back(e[static_cast<std::size_t>(k)]);
        out.states.col(col++) = r.entries().col(k);
        out.labels.push_back({block.j(), block.m(k)});
    }
    const Matrix h0 = h0_block(params, excitation).entries();
    for (std::size_t i = 0; i < out.energies.size(); ++i) {
        const Vector psi = out.state(i);
        const double res = (h0 * psi - out.energies[i] * psi).norm();
        if (res > detail::residual_tolerance(out.energies[i]))
            throw std::logic_error("zeroth-order state is not an H0 eigenvector (residual " + std::to_string(res) + ")");
    }
    return out;
}

/// <j m'| R† H' R |j m> with R = exp(-i pi/2 Jy); rows and columns in block index order (m = j - k).
inline OperatorMap hprime_rotated(const ModelParams& params, int excitation) {
    const FockBlock block(excitation);
    const OperatorMap r = rotation_y(block, kPi / 2.0);
    return (r.adjoint() * hprime_block(params, excitation) * r).as(Structure::hermitian);
}

/// Closed-form first-order energy
/// E = omega N + 2 g m + (omega/N)(j^2 - m^2) + ((omega+g)/4N)(j+m)(j+m-1) + ((omega-g)/4N)(j-m)(j-m-1).
inline double closed_form_energy(const ModelParams& params, double j, double m) {
    const double n = params.n_molecules;
    const double om = params.omega;
    const double g = params.coupling_g;
    return om * 2.0 * j + 2.0 * g * m + om / n * (j * j - m * m) + (om + g) / (4.0 * n) * (j + m) * (j + m - 1.0) +
           (om - g) / (4.0 * n) * (j - m) * (j - m - 1.0);
}

/// Prefactor of the second (2 omega - g) m -> m-1 term of the tabulated H' matrix.
enum class SixthTermPrefactor { literal, quarter };

/// Matrix of H' in the rotated basis as tabulated in closed form. With literal the table is
/// taken literally (1/N on the second m -> m-1 term); quarter uses 1/(4N) like its partners.
/// Kept for comparison only.
inline Matrix tabulated_perturbation_table(const ModelParams& params, int excitation,
                                           SixthTermPrefactor sixth = SixthTermPrefactor::literal) {
    const FockBlock block(excitation);
    const double n = params.n_molecules;
    const double om = params.omega;
    const double g = params.coupling_g;
    const double j = block.j();
    auto root = [](double x) { return std::sqrt(std::max(x, 0.0)); };

    Matrix t = Matrix::Zero(block.dimension(), block.dimension());
    for (int col = 0; col < block.dimension(); ++col) {
        const double m = block.m(col);
        auto add = [&](double m_prime, double value) {
            if (m_prime > j + 1e-9 || m_prime < -j - 1e-9) return;
            t(block.index_of_m(m_prime), col) += value;
        };
        add(m - 2, om / (4 * n) * root((j + m) * (j + m - 1)) * root((j - m + 1) * (j - m + 2)));
        add(m + 2, om / (4 * n) * root((j + m + 1) * (j + m + 2)) * root((j - m) * (j - m - 1)));
        add(m + 1, (2 * om - g) / (4 * n) * root((j - m) * (j + m + 1)) * (j - m - 1));
        add(m + 1, (2 * om + g) / (4 * n) * root((j - m) * (j + m + 1)) * (j + m));
        add(m - 1, (2 * om + g) / (4 * n) * root((j + m) * (j - m + 1)) * (j + m - 1));
        const double sixth_pre = sixth == SixthTermPrefactor::literal ? 1.0 / n : 1.0 / (4 * n);
        add(m - 1, (2 * om - g) * sixth_pre * root((j + m) * (j - m + 1)) * (j - m));
        add(m, (om + g) / (4 * n) * (j + m) * (j + m - 1));
        add(m, (om - g) / (4 * n) * (j - m) * (j - m - 1));
        add(m, om / n * (j * j - m * m));
    }
    return t;
}

struct TermDiscrepancy {
    int offset = 0;               // m' - m
    double max_abs_difference = 0.0;
    double max_abs_difference_quarter = 0.0;  // same, sixth term at 1/(4N)
    double max_abs_reference = 0.0;  // largest |R† H' R| entry on that offset
};

/// Per-offset comparison of the tabulated closed form against the direct R† H' R product.
inline std::vector<TermDiscrepancy> tabulated_discrepancy(const ModelParams& params, int excitation) {
    const FockBlock block(excitation);
    const Matrix direct = hprime_rotated(params, excitation).entries();
    const Matrix tabulated = tabulated_perturbation_table(params, excitation);
    const Matrix quarter = tabulated_perturbation_table(params, excitation, SixthTermPrefactor::quarter);
    std::vector<TermDiscrepancy> out;
    for (int offset = -2; offset <= 2; ++offset) {
        TermDiscrepancy d;
        d.offset = offset;
        for (int col = 0; col < block.dimension(); ++col) {
            // m' = m + offset  <=>  row = col - offset
            const int row = col - offset;
            if (row < 0 || row >= block.dimension()) continue;
            d.max_abs_difference = std::max(d.max_abs_difference, std::abs(direct(row, col) - tabulated(row, col)));
            d.max_abs_difference_quarter =
                std::max(d.max_abs_difference_quarter, std::abs(direct(row, col) - quarter(row, col)));
            d.max_abs_reference = std::max(d.max_abs_reference, std::abs(direct(row, col)));
        }
        out.push_back(d);
    }
    return out;
}

/// E(0) + diag(R† H' R), ascending. Cross-checked against closed_form_energy.
inline std::vector<double> first_order_energies(const ModelParams& params, int excitation) {
    detail::require_nondegenerate(params);
    const FockBlock block(excitation);
    const Matrix hr = hprime_rotated(params, excitation).entries();
    const std::vector<double> e0 = detail::zeroth_energies_by_index(params, block);
    std::vector<double> out;
    for (int k : detail::ascending_m_order(block)) {
        const double e = e0[static_cast<std::size_t>(k)] + hr(k, k).real();
        const double closed = closed_form_energy(params, block.j(), block.m(k));
        if (std::abs(e - closed) > 1e-10 * params.omega)
            throw std::logic_error("rotated H' diagonal disagrees with closed form at m = " +
                                   std::to_string(block.m(k)));
        out.push_back(e);
    }
    return out;
}

enum class Normalization { renormalized, raw };

/// psi_k = psi0_k + sum_{n != k} H'_nk / (E0_k - E0_n) psi0_n, optionally rescaled to unit norm.
inline EigenSystem first_order_states(const ModelParams& params, int excitation,
                                      Normalization norm = Normalization::renormalized) {
    detail::require_nondegenerate(params);
    const FockBlock block(excitation);
    const int d = block.dimension();
    const Matrix hr = hprime_rotated(params, excitation).entries();
    const std::vector<double> e0 = detail::zeroth_energies_by_index(params, block);

    Matrix coeff = Matrix::Identity(d, d);  // columns over the |j m> basis
    double largest = 0.0;
    for (int k = 0; k < d; ++k)
        for (int n = 0; n < d; ++n)
            if (n != k) {
                coeff(n, k) += hr(n, k) / (e0[static_cast<std::size_t>(k)] - e0[static_cast<std::size_t>(n)]);
                largest = std::max(largest, std::abs(coeff(n, k)));
            }
    const Matrix fock = rotation_y(block, kPi / 2.0).entries() * coeff;

    EigenSystem out;
    out.block = block;
    out.method = Method::first_order;
    out.energies = first_order_energies(params, excitation);
    out.states = Matrix(d, d);
    // <psi_k|psi_l> = sum_{n != k,l} conj(c_nk) c_nl: the first-order terms cancel, leaving
    // at most (d - 2) c_max^2, which is O(1/N^2).
    out.orthonormality_tolerance = std::max(0, d - 2) * largest * largest + 1e-10;
    int col = 0;
    for (int k : detail::ascending_m_order(block)) {
        Vector v = fock.col(k);
        if (norm == Normalization::renormalized) v.normalize();
        out.states.col(col++) = v;
        out.labels.push_back({block.j(), block.m(k)});
    }
    return out;
}

/// Dense Hermitian diagonalization of the effective (H0 + H') or Dicke block.
///
/// Labels follow the zeroth-order ancestry: with g > 0 the energy rank equals the rank of m.
/// Each eigenvector's phase is fixed so its overlap with the same-label zeroth state is real
/// and non-negative.
inline EigenSystem exact_block_spectrum(const ModelParams& params, int excitation, Model model = Model::effective) {
    const OperatorMap h = model == Model::effective ? effective_block(params, excitation)
                                                    : dicke_block(params, excitation);
    const FockBlock block(excitation);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.entries());
    if (solver.info() != Eigen::Success) throw std::runtime_error("block diagonalization failed");

    const EigenSystem zeroth = zeroth_spectrum(params, excitation);
    EigenSystem out;
    out.block = block;
    out.method = Method::exact_numeric;
    out.states = solver.eigenvectors();
    double scale = 0.0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
        out.energies.push_back(solver.eigenvalues()(i));
        scale = std::max(scale, std::abs(solver.eigenvalues()(i)));
        out.labels.push_back({block.j(), -block.j() + static_cast<double>(i)});
        const cplx overlap = zeroth.state(static_cast<std::size_t>(i)).dot(out.states.col(i));
        if (std::abs(overlap) > 0.0) out.states.col(i) *= std::conj(overlap) / std::abs(overlap);
    }
    detail::check_eigenpairs(h.entries(), out, scale);
    return out;
}

/// Spectral decomposition of the block propagator, U(t) = sum_k exp(-i E_k t)|psi_k><psi_k|.
class SpectralDecomposition {
public:
    explicit SpectralDecomposition(const EigenSystem& eig) : energies_(eig.energies), states_(eig.states) {
        const double defect = eig.overlap_defect();
        if (defect > eig.orthonormality_tolerance)
            throw std::invalid_argument("eigensystem is not orthonormal (overlap defect " + std::to_string(defect) +
                                        ")");
    }

    const std::vector<double>& energies() const { return energies_; }
    const Matrix& states() const { return states_; }

    Matrix propagator(double t) const {
        Vector phases(static_cast<Eigen::Index>(energies_.size()));
        for (std::size_t i = 0; i < energies_.size(); ++i)
            phases(static_cast<Eigen::Index>(i)) = std::exp(cplx(0.0, -energies_[i] * t));
        return states_ * phases.asDiagonal() * states_.adjoint();
    }

private:
    std::vector<double> energies_;
    Matrix states_;
};

inline SpectralDecomposition evolution_decomposition(const EigenSystem& eig) { return SpectralDecomposition(eig); }

}  // namespace qexciton
