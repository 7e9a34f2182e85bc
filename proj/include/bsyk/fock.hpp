#pragma once

// Fermionic operator algebra on the combined system+auxiliary Fock space.
//
// Mode convention: a basis state is a bitstring b in [0, 2^(2N)); occupation
// of mode m is bit m of b. System modes c_0..c_{N-1} occupy bits 0..N-1,
// auxiliary modes xi_0..xi_{N-1} occupy bits N..2N-1. Jordan-Wigner sign
// strings run over the lower modes in this fixed global order, so every
// operator matrix is reproducible bit-for-bit.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace bsyk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct ModeLayout {
    int n_system = 0;
    int n_aux = 0;

    int total_modes() const { return n_system + n_aux; }
    Eigen::Index dim() const { return Eigen::Index(1) << total_modes(); }
    Eigen::Index system_dim() const { return Eigen::Index(1) << n_system; }
    Eigen::Index aux_dim() const { return Eigen::Index(1) << n_aux; }

    // standard layout: N system modes paired with N auxiliary modes
    static ModeLayout paired(int n) { return ModeLayout{n, n}; }
    // system-only layout, used for operators acting on the c modes alone
    static ModeLayout system_only(int n) { return ModeLayout{n, 0}; }

    void validate() const {
        if (n_system < 1) throw std::invalid_argument("ModeLayout: n_system must be >= 1");
        if (n_aux < 0) throw std::invalid_argument("ModeLayout: n_aux must be >= 0");
        if (total_modes() > 14)
            throw std::invalid_argument("ModeLayout: more than 14 modes exceeds the dense desk-scale cap");
    }

    bool operator==(const ModeLayout&) const = default;
};

struct FockOperator {
    Matrix mat;
    ModeLayout layout;
};

struct StateVector {
    Vector amps;
    ModeLayout layout;

    double norm() const { return amps.norm(); }
};

// Q_total = sum_i (n_ci + n_xi - 1), Q_sys = sum_i n_ci, plus per-mode
// auxiliary number operators. All diagonal in the occupation basis.
struct ChargeSet {
    FockOperator q_total;
    FockOperator q_sys;
    std::vector<FockOperator> n_aux;
};

struct SectorProjector {
    FockOperator op;
    Eigen::Index sector_dim = 0;

    bool empty() const { return sector_dim == 0; }
};

// Annihilation operator for `mode` with Jordan-Wigner sign string over the
// lower modes. Throws std::out_of_range for an invalid mode index.
FockOperator build_annihilator(int mode, const ModeLayout& layout);

// |EPR> = prod_i (c_i^dag + xi_i^dag)/sqrt(2) |vac>: each (c_i, xi_i) pair
// carries exactly one particle.
StateVector build_epr_state(const ModeLayout& layout);

ChargeSet build_charges(const ModeLayout& layout);

// Orthogonal projector onto the eigenspace of a diagonal charge operator.
// An eigenvalue absent from the spectrum yields an empty (flagged) projector.
SectorProjector block_projector(int charge_value, const FockOperator& charge);

// -- helpers shared by the evolution engines ------------------------------

inline int popcount_below(unsigned long long bits, int mode) {
    return __builtin_popcountll(bits & ((1ull << mode) - 1));
}

// JW action of c_mode on basis state b: returns target state and sign, or
// target = -1 when annihilated.
inline void annihilate_bit(unsigned long long b, int mode, long long& target, double& sign) {
    if (!((b >> mode) & 1ull)) {
        target = -1;
        return;
    }
    target = (long long)(b ^ (1ull << mode));
    sign = (popcount_below(b, mode) & 1) ? -1.0 : 1.0;
}

inline void create_bit(unsigned long long b, int mode, long long& target, double& sign) {
    if ((b >> mode) & 1ull) {
        target = -1;
        return;
    }
    target = (long long)(b | (1ull << mode));
    sign = (popcount_below(b, mode) & 1) ? -1.0 : 1.0;
}

// System basis reordered by c-charge: states with q occupied modes form a
// contiguous block. Hamiltonian and jump operators are block structured in
// this order, which the fast evolution kernels rely on.
struct ChargeBasis {
    int n_modes = 0;
    int dim = 0;
    std::vector<int> to_canonical;    // ordered index -> bitstring
    std::vector<int> from_canonical;  // bitstring -> ordered index
    std::vector<int> block_offset;    // per charge q = 0..n_modes
    std::vector<int> block_size;
    std::vector<int> charge_of;       // ordered index -> q

    explicit ChargeBasis(int n);
};

}  // namespace bsyk
