#pragma once

#include <vector>

#include "bsyk/couplings.hpp"
#include "bsyk/fock.hpp"

namespace bsyk {

// Precomputed sparse action of the quartic monomials c_i^dag c_j^dag c_k c_l
// on the system Fock space: each monomial maps a basis state to at most one
// target with a JW sign.
struct MonomialTables {
    int n_modes = 0;
    int dim = 0;
    PairBasis pairs;
    // lower_tab[q][a]: state after c_k c_l applied to |a> (target<0 if killed)
    std::vector<std::vector<long long>> lower_target;
    std::vector<std::vector<double>> lower_sign;
    // raise_tab[p][a]: state after c_i^dag c_j^dag applied to |a>
    std::vector<std::vector<long long>> raise_target;
    std::vector<std::vector<double>> raise_sign;

    explicit MonomialTables(int n);
};

// Instantaneous system Hamiltonian H = sum_{PQ} J_PQ c_i^dag c_j^dag c_k c_l
// on the 2^N-dimensional system space. Hermitian because the pair matrix is.
Matrix build_system_hamiltonian(const CouplingSample& sample, const MonomialTables& tables);

// Same Hamiltonian embedded in the full system+auxiliary space (it acts as
// the identity on the auxiliary modes).
FockOperator build_hamiltonian(const CouplingSample& sample, const ModeLayout& layout);

// Charge-block form: H restricted to each c-charge sector, in ChargeBasis
// order. The quartic terms conserve charge, so this is the whole operator.
std::vector<Matrix> build_system_hamiltonian_blocks(const CouplingSample& sample,
                                                    const MonomialTables& tables,
                                                    const ChargeBasis& basis);

}  // namespace bsyk
