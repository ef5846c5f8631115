// models.hpp: Hamiltonians restricted to a fixed-excitation block

#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qexciton/fock_algebra.hpp"

namespace qexciton {

/// Physical inputs. Energies in meV, hbar = 1, cavity and transition resonant at omega.
struct ModelParams {
    double omega = 1562.0;      // transition / cavity energy
    double coupling_g = 20.0;   // collective coupling g = kappa sqrt(N)
    int n_molecules = 100;
    double gamma = 0.1;         // spectrometer half-bandwidth
    std::optional<double> kappa;  // per-molecule coupling, if supplied

    double kappa_value() const { return kappa ? *kappa : coupling_g / std::sqrt(static_cast<double>(n_molecules)); }

    DeformationContext deformation() const { return DeformationContext(n_molecules); }

    void validate() const {
        if (!(omega > 0.0)) throw std::invalid_argument("omega must be > 0");
        if (!(coupling_g >= 0.0)) throw std::invalid_argument("g must be >= 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
        if (n_molecules < 3) throw std::invalid_argument("N must be >= 3");
        if (kappa) {
            const double implied = *kappa * std::sqrt(static_cast<double>(n_molecules));
            if (std::abs(coupling_g - implied) > 1e-12 * coupling_g)
                throw std::invalid_argument("kappa inconsistent with g: kappa*sqrt(N) = " + std::to_string(implied));
        }
    }

    std::vector<std::string> warnings() const {
        std::vector<std::string> out;
        if (n_molecules < 50)
            out.push_back("N = " + std::to_string(n_molecules) + " < 50: first-order 1/N expansion is dubious");
        return out;
    }

    static ModelParams from_kappa(double omega, double kappa, int n_molecules, double gamma) {
        ModelParams p;
        p.omega = omega;
        p.n_molecules = n_molecules;
        p.gamma = gamma;
        p.kappa = kappa;
        p.coupling_g = kappa * std::sqrt(static_cast<double>(n_molecules));
        p.validate();
        return p;
    }
};

/// Collective-spin Dicke Hamiltonian on the block with n photons and n_e = N_exc - n excited molecules.
///
/// Same basis order as FockBlock (descending photons). The constant -omega N/2 from S_z is
/// dropped so that the empty block sits at zero.
inline OperatorMap dicke_block(const ModelParams& params, int excitation) {
    params.validate();
    if (excitation < 0) throw std::invalid_argument("excitation must be non-negative");
    if (excitation > params.n_molecules)
        throw std::invalid_argument("block exceeds spin capacity: excitation " + std::to_string(excitation) +
                                    " > N = " + std::to_string(params.n_molecules));
    const FockBlock block(excitation);
    const double kappa = params.kappa_value();
    const int n_mol = params.n_molecules;
    Matrix h = Matrix::Zero(block.dimension(), block.dimension());
    for (int k = 0; k < block.dimension(); ++k) h(k, k) = params.omega * excitation;
    // |n, n_e> <-> |n - 1, n_e + 1>: a S_+ with <n_e+1|S_+|n_e> = sqrt((N - n_e)(n_e + 1))
    for (int k = 0; k + 1 < block.dimension(); ++k) {
        const int n = block.photons(k);
        const int ne = block.excitons(k);
        const double c = kappa * std::sqrt(static_cast<double>(n)) *
                         std::sqrt(static_cast<double>(n_mol - ne) * static_cast<double>(ne + 1));
        h(k, k + 1) = c;
        h(k + 1, k) = c;
    }
    return OperatorMap(block, block, std::move(h), Structure::hermitian);
}

/// H0 = omega (a†a + b†b) + g (a†b + b†a), assembled from ladder maps.
inline OperatorMap h0_block(const ModelParams& params, int excitation) {
    const FockBlock block(excitation);
    if (excitation == 0) return OperatorMap::zero(block, block).as(Structure::hermitian);
    const FockBlock lower(excitation - 1);
    const OperatorMap a = ladder_lowering(block, Mode::photon);
    const OperatorMap b = ladder_lowering(block, Mode::exciton);
    const OperatorMap a_dag = ladder_raising(lower, Mode::photon);
    const OperatorMap b_dag = ladder_raising(lower, Mode::exciton);
    OperatorMap h = params.omega * (a_dag * a + b_dag * b) + params.coupling_g * (a_dag * b + b_dag * a);
    return h.as(Structure::hermitian);
}

namespace detail {

/// (1/2N)(2 omega b†b†bb + c_bbab b†b†ab + c_abbb a†b†bb) without any structural promise.
/// The production operator uses c_bbab = c_abbb = g; other choices exist for negative controls.
inline OperatorMap assemble_hprime(const ModelParams& params, int excitation, double c_bbab, double c_abbb) {
    const FockBlock block(excitation);
    if (excitation < 2) return OperatorMap::zero(block, block);
    const FockBlock mid(excitation - 1);
    const FockBlock bottom(excitation - 2);

    const OperatorMap b_top = ladder_lowering(block, Mode::exciton);
    const OperatorMap b_mid = ladder_lowering(mid, Mode::exciton);
    const OperatorMap a_mid = ladder_lowering(mid, Mode::photon);
    const OperatorMap b_dag_bottom = ladder_raising(bottom, Mode::exciton);
    const OperatorMap b_dag_mid = ladder_raising(mid, Mode::exciton);
    const OperatorMap a_dag_mid = ladder_raising(mid, Mode::photon);

    const OperatorMap bbdd = b_dag_mid * b_dag_bottom * b_mid * b_top;
    const OperatorMap bbab = b_dag_mid * b_dag_bottom * a_mid * b_top;
    const OperatorMap abbb = a_dag_mid * b_dag_bottom * b_mid * b_top;

    const double pre = 1.0 / (2.0 * params.n_molecules);
    return pre * (2.0 * params.omega * bbdd + c_bbab * bbab + c_abbb * abbb);
}

}  // namespace detail

/// First-order correction H' of the effective q-deformed model (g on both mixed terms).
inline OperatorMap hprime_block(const ModelParams& params, int excitation) {
    return detail::assemble_hprime(params, excitation, params.coupling_g, params.coupling_g)
        .as(Structure::hermitian);
}

inline OperatorMap effective_block(const ModelParams& params, int excitation) {
    return (h0_block(params, excitation) + hprime_block(params, excitation)).as(Structure::hermitian);
}

struct NormalModes {
    double upper;  // omega + g
    double lower;  // omega - g
};

/// Normal modes of the Bogoliubov two-oscillator Hamiltonian with N_c = N condensed molecules.
inline NormalModes bogoliubov_modes(const ModelParams& params) {
    params.validate();
    const double coupling = params.kappa_value() * std::sqrt(static_cast<double>(params.n_molecules));
    Eigen::Matrix2d h;
    h << params.omega, coupling, coupling, params.omega;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(h);
    return {solver.eigenvalues()(1), solver.eigenvalues()(0)};
}

}  // namespace qexciton
