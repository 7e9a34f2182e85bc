#pragma once

#include <random>
#include <utility>
#include <vector>

#include "bsyk/fock.hpp"

namespace bsyk {

// Mode pairs (i < j) in lexicographic order; the coupling tensor is a matrix
// over this pair index.
struct PairBasis {
    int n_modes = 0;
    std::vector<std::pair<int, int>> pairs;

    explicit PairBasis(int n) : n_modes(n) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    }
    int size() const { return (int)pairs.size(); }
};

// One time step's coupling tensor J_{ij,kl}, Hermitian as a pair matrix:
// J_{kl,ij} = conj(J_{ij,kl}). Each entry carries per-step variance
// E|J|^2 = 2 J / (N^3 dt), the Ito discretization of the Brownian kernel.
struct CouplingSample {
    int n_modes = 0;
    Matrix pair_matrix;  // P x P, Hermitian

    double max_hermiticity_defect() const {
        return (pair_matrix - pair_matrix.adjoint()).cwiseAbs().maxCoeff();
    }
};

// Draw one step's tensor: independent complex Gaussians for every ordered
// pair quadruple, real and imaginary parts each of variance J/(N^3 dt), then
// the conjugate-transpose pairing (A + A^dag)/sqrt(2). The pairing keeps
// every final entry at the target variance 2J/(N^3 dt).
CouplingSample sample_couplings(std::mt19937_64& rng, int n_modes, double coupling_j, double dt);

}  // namespace bsyk
