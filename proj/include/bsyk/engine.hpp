#pragma once

// Two interchangeable evolution engines for the Lindblad dynamics:
//
//  * ReferenceStepper - literal dense formulas on the full 4^N space. Serial,
//    obviously correct, used as the cross-check oracle and benchmark baseline.
//  * FastStepper - charge-blocked kernels on the strong-symmetry support.
//    The density matrix of an EPR-initialized, charge-conserving evolution
//    only populates matrix elements whose system and auxiliary charges are
//    complementary on both sides; the fast engine stores exactly that block
//    structure and applies the dissipator as a precomposed sparse map.
//
// Both engines consume identical random streams and agree to rounding noise;
// tests assert it.

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsyk/config.hpp"
#include "bsyk/couplings.hpp"
#include "bsyk/fock.hpp"
#include "bsyk/hamiltonian.hpp"

namespace bsyk {

struct TrajectoryState {
    Matrix rho;  // canonical dense, full system+auxiliary space
    double t = 0.0;
    int traj_index = 0;
    std::mt19937_64 rng;
    double max_trace_drift = 0.0;
    long renorm_count = 0;
};

struct TrajectoryAbort : std::runtime_error {
    int traj_index;
    double t;
    TrajectoryAbort(int idx, double time, const std::string& what)
        : std::runtime_error(what), traj_index(idx), t(time) {}
};

// gamma/N sum_ij [L rho L^dag - 1/2 {L^dag L, rho}] with L_ij = c_i c_j^dag,
// summed over all ordered mode pairs (the i=j terms are kept unless the
// config excludes them). Dense literal evaluation.
Matrix dissipator(const Matrix& rho, const ModeLayout& layout, double gamma,
                  bool include_diagonal = true);

class ReferenceStepper {
  public:
    explicit ReferenceStepper(const SimConfig& cfg);

    // One Strang step: half-step dissipator (RK4), exact unitary from the
    // freshly sampled Hamiltonian, half-step dissipator. Renormalizes the
    // trace only when the drift exceeds 1e-12.
    void step(TrajectoryState& state) const;

    Matrix apply_dissipator(const Matrix& rho) const;
    TrajectoryState make_initial(int traj_index) const;

  private:
    void rk4_half(Matrix& rho) const;

    SimConfig cfg_;
    ModeLayout layout_;
    MonomialTables tables_;
    std::vector<Matrix> jump_ops_;  // full-space L_ij, ordered (i major)
    Eigen::VectorXd gdiag_;         // diagonal of sum L^dag L on the full space
};

// Charge-blocked engine. State lives in a compact sector layout; canonical
// density matrices are imported/exported at checkpoints.
class FastStepper {
  public:
    explicit FastStepper(const SimConfig& cfg);

    void reset(int traj_index);  // EPR initial state, per-trajectory stream
    void load(const Matrix& rho, int traj_index, std::mt19937_64 rng, double t);
    void step();

    void extract(Matrix& rho_out) const;
    double t() const { return t_; }
    int traj_index() const { return traj_index_; }
    const std::mt19937_64& rng() const { return rng_; }
    double trace() const;
    double max_trace_drift() const { return max_trace_drift_; }
    long renorm_count() const { return renorm_count_; }

  private:
    struct Sector {
        int qa = 0, qb = 0;
        int rows = 0, cols = 0;   // rows = sa*sb, cols likewise (C(N,q) symmetric)
        long offset = 0;          // into the compact array
        int sa = 0, sb = 0;       // c-block sizes
        int ca = 0, cb = 0;       // xi-block sizes (= sa, sb)
        // CSR of the dissipator superoperator restricted to this sector
        std::vector<int> row_ptr;
        std::vector<int> col_idx;
        std::vector<double> weight;
    };

    void build_dissipator();
    void apply_dissipator_compact(const std::vector<Complex>& in, std::vector<Complex>& out) const;
    void rk4_half();
    void apply_unitary(const std::vector<Matrix>& ublocks);

    SimConfig cfg_;
    ModeLayout layout_;
    ChargeBasis cb_;
    MonomialTables tables_;
    std::vector<Sector> sectors_;
    long total_size_ = 0;

    std::vector<Complex> state_, buf_y_, buf_tmp_;
    double t_ = 0.0;
    int traj_index_ = 0;
    std::mt19937_64 rng_;
    double max_trace_drift_ = 0.0;
    long renorm_count_ = 0;
};

// Convenience wrapper: one step with the backend selected by the config.
// The reference path operates on the dense state in place; the fast path
// round-trips through the compact layout.
void step(TrajectoryState& state, const SimConfig& cfg);

}  // namespace bsyk
