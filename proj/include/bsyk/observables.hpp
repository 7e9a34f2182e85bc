#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsyk/config.hpp"
#include "bsyk/fock.hpp"

namespace bsyk {

// Checkpoint-time series of an ensemble-averaged scalar with bootstrap
// errors. For complex observables (the conventional correlator) the real
// part is stored and the full complex mean is kept alongside.
struct ObservableSeries {
    std::string name;
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> stderr_;
    std::vector<Complex> complex_mean;  // optional, same length as times when used
    int pair_i = -1, pair_j = -1;
    std::string convention;  // annealed | quenched | sample
    std::string config_hash;

    void validate() const;
};

// ------------------------------------------------------------ scalar kernels

// tr[rho c_i c_j^dag] on the full space
Complex corr_value(const Matrix& rho, const ModeLayout& layout, int i, int j);

// tr[W A W A^dag] with A = c_i c_j^dag; W is rho (n=2) or sqrt(rho) (n=1).
// Real for Hermitian W.
double renyi_num_value(const Matrix& w, const ModeLayout& layout, int i, int j);

// eigendecompose, clamp negatives to zero, rebuild; eigenvalues below -1e-6
// mean a corrupted state and throw.
Matrix psd_sqrt(const Matrix& rho);

double purity_value(const Matrix& rho);
double vn_entropy_value(const Matrix& rho);         // 0 ln 0 := 0, clamp 1e-8
double min_eigenvalue(const Matrix& rho);

// ||(1-P0) rho (1-P0)||_F + ||P0 rho (1-P0)||_F with P0 the Q_total = 0 block
double leakage_value(const Matrix& rho, const ModeLayout& layout);

// ---------------------------------------------------------------- bootstrap

double bootstrap_stderr(const std::vector<double>& values, int resamples, uint64_t seed);
// stderr of mean(num)/mean(den) under joint resampling
double bootstrap_ratio_stderr(const std::vector<double>& num, const std::vector<double>& den,
                              int resamples, uint64_t seed);
// combined error sqrt(var Re + var Im) of a complex mean
double bootstrap_stderr_complex(const std::vector<Complex>& values, int resamples, uint64_t seed);

inline constexpr int kBootstrapResamples = 400;

// --------------------------------------------------- series over snapshots
// snapshots[k][m]: density matrix of trajectory m at checkpoint k

using SnapshotGrid = std::vector<std::vector<Matrix>>;

ObservableSeries conventional_correlator(const SnapshotGrid& snapshots,
                                         const std::vector<double>& times,
                                         const ModeLayout& layout, int i, int j, uint64_t seed);

// F^(n) = avg_m tr[rho^{n/2} c_i c_j^dag rho^{n/2} c_j c_i^dag] / avg_m tr[rho^n],
// n in {1,2}; disorder averages taken separately (annealed).
ObservableSeries renyi_correlator(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                  const ModeLayout& layout, int n, int i, int j, uint64_t seed);

// annealed -ln avg tr rho^2; `quenched` selects avg(-ln tr rho^2)
ObservableSeries renyi2_entropy(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                bool quenched, uint64_t seed);

ObservableSeries von_neumann_entropy(const SnapshotGrid& snapshots,
                                     const std::vector<double>& times, uint64_t seed);

// ensemble-max leakage per checkpoint (stderr column = 0)
ObservableSeries symmetry_leakage(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                  const ModeLayout& layout);

// ------------------------------------------------------------ two-point fit

struct DecayFit {
    double rate = 0.0;
    double residual = 0.0;  // rms relative deviation of the fitted exponential
    bool flagged = false;   // residual above 10%
};

// least-squares exponential fit of G(u) = 1/2 exp(-rate u) over u <= u_max
DecayFit fit_exponential_decay(const std::vector<double>& u, const std::vector<double>& g,
                               double u_max);

}  // namespace bsyk
