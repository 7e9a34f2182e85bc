#pragma once

#include "bsyk/config.hpp"
#include "bsyk/fock.hpp"

namespace bsyk {

struct SteadyReport {
    long iterations = 0;
    double residual = 0.0;  // ||d rho/dt||_F at exit
    bool converged = false;
};

// Steady state of the disorder-averaged generator: the bath dissipator plus
// the Hamiltonian-noise dissipator (white-noise limit: one jump operator per
// quartic monomial, rate 2J/N^3). Obtained by evolving the EPR initial state
// until ||d rho/dt||_F < tol. Deterministic: this is the finite-N
// saturation benchmark the simulation is compared against.
Matrix steady_state(const SimConfig& cfg, SteadyReport* report = nullptr, double tol = 1e-10,
                    long max_steps = 2000000);

// Disorder-averaged generator applied to a dense state (bath + noise terms);
// used by tests to verify stationarity independently.
Matrix averaged_generator_apply(const Matrix& rho, const SimConfig& cfg);

}  // namespace bsyk
