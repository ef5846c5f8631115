// fock_algebra.hpp: Truncated two-mode Fock blocks and the operators acting on them

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qexciton {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Invariant subspace of fixed total excitation N = n_photon + n_exciton.
///
/// Basis index k holds (n_photon, n_exciton) = (N - k, k), i.e. descending photon
/// number. In the Schwinger picture this is |j m> with j = N/2 and m = j - k, so
/// index 0 carries m = +j.
class FockBlock {
public:
    explicit FockBlock(int excitation) : excitation_(excitation) {
        if (excitation < 0)
            throw std::invalid_argument("excitation must be non-negative, got " + std::to_string(excitation));
    }

    int excitation() const { return excitation_; }
    int dimension() const { return excitation_ + 1; }
    double j() const { return 0.5 * excitation_; }

    int photons(int index) const { return excitation_ - index; }
    int excitons(int index) const { return index; }
    double m(int index) const { return 0.5 * (photons(index) - excitons(index)); }

    int index_of_m(double m) const { return static_cast<int>(std::lround(j() - m)); }

    std::vector<std::pair<int, int>> basis() const {
        std::vector<std::pair<int, int>> out;
        out.reserve(static_cast<std::size_t>(dimension()));
        for (int k = 0; k < dimension(); ++k)
            out.emplace_back(photons(k), excitons(k));
        return out;
    }

    friend bool operator==(const FockBlock& a, const FockBlock& b) { return a.excitation_ == b.excitation_; }

private:
    int excitation_;
};

inline FockBlock make_block(int excitation) { return FockBlock(excitation); }

enum class Mode { photon, exciton };

/// Structural promise attached to a square map; checked once on construction.
enum class Structure { general, hermitian, unitary };

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kUnitaryTolerance = 1e-10;

/// Dense operator from one block into another (rows index the target basis).
class OperatorMap {
public:
    OperatorMap(FockBlock source, FockBlock target, Matrix entries, Structure structure = Structure::general)
        : source_(source), target_(target), entries_(std::move(entries)), structure_(structure) {
        if (entries_.rows() != target_.dimension() || entries_.cols() != source_.dimension())
            throw std::invalid_argument("operator shape does not match its blocks");
        enforce_structure();
    }

    static OperatorMap zero(FockBlock source, FockBlock target) {
        return OperatorMap(source, target, Matrix::Zero(target.dimension(), source.dimension()));
    }
    static OperatorMap identity(FockBlock block) {
        return OperatorMap(block, block, Matrix::Identity(block.dimension(), block.dimension()), Structure::unitary);
    }

    const FockBlock& source() const { return source_; }
    const FockBlock& target() const { return target_; }
    const Matrix& entries() const { return entries_; }
    Structure structure() const { return structure_; }
    bool is_square() const { return source_ == target_; }

    cplx operator()(int row, int col) const { return entries_(row, col); }

    OperatorMap adjoint() const {
        return OperatorMap(target_, source_, entries_.adjoint(), structure_);
    }

    /// Re-tag a square map; throws if the entries do not honour the new structure.
    OperatorMap as(Structure structure) const { return OperatorMap(source_, target_, entries_, structure); }

    double hermiticity_defect() const {
        if (!is_square()) return std::numeric_limits<double>::infinity();
        return max_abs(entries_ - entries_.adjoint());
    }

    double unitarity_defect() const {
        if (!is_square()) return std::numeric_limits<double>::infinity();
        const auto n = entries_.rows();
        return max_abs(entries_.adjoint() * entries_ - Matrix::Identity(n, n));
    }

    bool is_hermitian() const {
        return hermiticity_defect() <= kHermitianTolerance * (1.0 + max_abs(entries_));
    }
    bool is_unitary() const { return unitarity_defect() <= kUnitaryTolerance; }

    /// lhs after rhs; the intermediate blocks must agree.
    friend OperatorMap operator*(const OperatorMap& lhs, const OperatorMap& rhs) {
        if (!(lhs.source_ == rhs.target_))
            throw std::invalid_argument("cannot compose: block " + std::to_string(rhs.target_.excitation()) +
                                        " feeds an operator expecting block " +
                                        std::to_string(lhs.source_.excitation()));
        return OperatorMap(rhs.source_, lhs.target_, lhs.entries_ * rhs.entries_);
    }

    friend OperatorMap operator+(const OperatorMap& a, const OperatorMap& b) {
        check_same_blocks(a, b);
        return OperatorMap(a.source_, a.target_, a.entries_ + b.entries_);
    }
    friend OperatorMap operator-(const OperatorMap& a, const OperatorMap& b) {
        check_same_blocks(a, b);
        return OperatorMap(a.source_, a.target_, a.entries_ - b.entries_);
    }
    friend OperatorMap operator*(cplx s, const OperatorMap& a) {
        return OperatorMap(a.source_, a.target_, s * a.entries_);
    }
    friend OperatorMap operator*(double s, const OperatorMap& a) { return cplx(s, 0.0) * a; }

private:
    static void check_same_blocks(const OperatorMap& a, const OperatorMap& b) {
        if (!(a.source_ == b.source_) || !(a.target_ == b.target_))
            throw std::invalid_argument("operator sum over mismatched blocks");
    }

    void enforce_structure() const {
        switch (structure_) {
        case Structure::general:
            return;
        case Structure::hermitian:
            if (!is_hermitian())
                throw std::logic_error("map flagged hermitian deviates by " + std::to_string(hermiticity_defect()));
            return;
        case Structure::unitary:
            if (!is_unitary())
                throw std::logic_error("map flagged unitary deviates by " + std::to_string(unitarity_defect()));
            return;
        }
    }

    FockBlock source_;
    FockBlock target_;
    Matrix entries_;
    Structure structure_;
};

/// Molecule number N together with eta = 1/N and q = 1 - 2/N.
class DeformationContext {
public:
    explicit DeformationContext(int n_molecules) : n_(n_molecules) {
        if (n_molecules < 3)
            throw std::invalid_argument("deformation context invalid: N must be >= 3, got " +
                                        std::to_string(n_molecules));
    }

    int n_molecules() const { return n_; }
    double eta() const { return 1.0 / n_; }
    double q() const { return 1.0 - 2.0 * eta(); }

    // The 1/N operator expansion is unreliable below this.
    bool expansion_dubious() const { return n_ < 50; }

private:
    int n_;
};

/// Plain bosonic lowering on one mode: block N -> block N-1, <n-1|a|n> = sqrt(n).
inline OperatorMap ladder_lowering(const FockBlock& source, Mode mode) {
    if (source.excitation() < 1) throw std::invalid_argument("no lower block");
    FockBlock target(source.excitation() - 1);
    Matrix m = Matrix::Zero(target.dimension(), source.dimension());
    for (int k = 0; k < source.dimension(); ++k) {
        if (mode == Mode::photon) {
            const int n = source.photons(k);
            if (n > 0) m(k, k) = std::sqrt(static_cast<double>(n));
        } else {
            const int n = source.excitons(k);
            if (n > 0) m(k - 1, k) = std::sqrt(static_cast<double>(n));
        }
    }
    return OperatorMap(source, target, std::move(m));
}

inline OperatorMap ladder_raising(const FockBlock& source, Mode mode) {
    return ladder_lowering(FockBlock(source.excitation() + 1), mode).adjoint();
}

/// First-order exciton operator b_q = b - b†bb/(2N), block N -> block N-1.
///
/// The minus sign is the one carried by the exact realization b_g† b_e / sqrt(N),
/// whose matrix element sqrt(n (N - n + 1) / N) expands as sqrt(n) (1 - (n-1)/(2N)).
/// With it, b_q b_q† - q b_q† b_q = 1 holds up to O(1/N^2).
inline OperatorMap qdeformed_lowering(const FockBlock& source, const DeformationContext& ctx) {
    OperatorMap b = ladder_lowering(source, Mode::exciton);
    if (source.excitation() < 2) return b;  // b†bb annihilates n_exciton <= 1
    const FockBlock mid(source.excitation() - 1);
    OperatorMap cubic = ladder_raising(FockBlock(source.excitation() - 2), Mode::exciton) *
                        ladder_lowering(mid, Mode::exciton) * b;
    return b - (1.0 / (2.0 * ctx.n_molecules())) * cubic;
}

/// b_q† from block N to block N+1.
inline OperatorMap qdeformed_raising(const FockBlock& source, const DeformationContext& ctx) {
    return qdeformed_lowering(FockBlock(source.excitation() + 1), ctx).adjoint();
}

/// f(x; eta) = sqrt(1 + 2(1 - 2x) eta + eta^2) - eta, the exact exciton commutator
/// written as a function of x = b_q† b_q.
inline double exciton_commutator_function(double x, double eta) {
    const double radicand = 1.0 + 2.0 * (1.0 - 2.0 * x) * eta + eta * eta;
    if (radicand < 0.0)
        throw std::domain_error("exciton commutator function: negative radicand " + std::to_string(radicand));
    return std::sqrt(radicand) - eta;
}

inline double linearized_commutator_function(double x, double eta) { return 1.0 - 2.0 * eta * x; }

struct AngularMomentum {
    OperatorMap jx;
    OperatorMap jy;
    OperatorMap jz;
    OperatorMap jsq;
};

/// Schwinger generators on a block: J+ = a†b, J- = a b†, Jz = (a†a - b†b)/2.
inline AngularMomentum angular_momentum(const FockBlock& block) {
    if (block.excitation() == 0) {
        OperatorMap z = OperatorMap::zero(block, block);
        return {z.as(Structure::hermitian), z.as(Structure::hermitian), z.as(Structure::hermitian),
                z.as(Structure::hermitian)};
    }
    const FockBlock lower(block.excitation() - 1);
    OperatorMap a = ladder_lowering(block, Mode::photon);
    OperatorMap b = ladder_lowering(block, Mode::exciton);
    OperatorMap a_dag = ladder_raising(lower, Mode::photon);
    OperatorMap b_dag = ladder_raising(lower, Mode::exciton);

    OperatorMap j_plus = a_dag * b;
    OperatorMap j_minus = b_dag * a;
    OperatorMap jz = 0.5 * (a_dag * a - b_dag * b);
    OperatorMap jx = 0.5 * (j_plus + j_minus);
    OperatorMap jy = cplx(0.0, -0.5) * (j_plus - j_minus);

    Matrix sq = jx.entries() * jx.entries() + jy.entries() * jy.entries() + jz.entries() * jz.entries();
    return {jx.as(Structure::hermitian), jy.as(Structure::hermitian), jz.as(Structure::hermitian),
            OperatorMap(block, block, std::move(sq), Structure::hermitian)};
}

/// Unitary exp(-i angle Jy) obtained by diagonalizing Jy and exponentiating its spectrum.
inline OperatorMap rotation_y(const FockBlock& block, double angle) {
    const AngularMomentum jm = angular_momentum(block);
    Eigen::SelfAdjointEigenSolver<Matrix> solver(jm.jy.entries());
    if (solver.info() != Eigen::Success) throw std::runtime_error("Jy diagonalization failed");
    const Eigen::VectorXd& lambda = solver.eigenvalues();
    Vector phases(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i)
        phases(i) = std::exp(cplx(0.0, -angle * lambda(i)));
    const Matrix& v = solver.eigenvectors();
    Matrix r = v * phases.asDiagonal() * v.adjoint();
    return OperatorMap(block, block, std::move(r), Structure::unitary);
}

/// Exciton operator b_q = b_g† b_e / sqrt(N) on the genuine two-mode space of N molecules.
///
/// Basis index n is the excited-state count n_e = 0..N (ground count N - n_e). Only
/// used as a validation oracle, so N is capped.
class ExactExcitonRealization {
public:
    static constexpr int kMaxMolecules = 20;

    explicit ExactExcitonRealization(int n_molecules) : n_(n_molecules) {
        if (n_molecules < 1 || n_molecules > kMaxMolecules)
            throw std::invalid_argument("exact exciton realization supports 1 <= N <= " +
                                        std::to_string(kMaxMolecules));
    }

    int n_molecules() const { return n_; }
    int dimension() const { return n_ + 1; }

    Matrix excited_number() const {
        Matrix m = Matrix::Zero(dimension(), dimension());
        for (int n = 0; n <= n_; ++n) m(n, n) = n;
        return m;
    }

    Matrix lowering() const {
        // b_e: sqrt(n_e); then b_g† on n_g = N - n_e + 1 ground atoms after the move.
        Matrix m = Matrix::Zero(dimension(), dimension());
        for (int n = 1; n <= n_; ++n) {
            const double be = std::sqrt(static_cast<double>(n));
            const double bg_dag = std::sqrt(static_cast<double>(n_ - n + 1));
            m(n - 1, n) = be * bg_dag / std::sqrt(static_cast<double>(n_));
        }
        return m;
    }

    Matrix raising() const { return lowering().adjoint(); }

    Matrix commutator() const {
        const Matrix b = lowering();
        return b * b.adjoint() - b.adjoint() * b;
    }

    /// h = 1 - (2/N) n_e, the rescaled su(2) Cartan element.
    Matrix h() const {
        return Matrix::Identity(dimension(), dimension()) - (2.0 / n_) * excited_number();
    }

    /// Eigenvalue of b_q† b_q on |n_e>.
    double occupation(int n_e) const { return static_cast<double>(n_e) * (n_ - n_e + 1) / n_; }

private:
    int n_;
};

}  // namespace qexciton
