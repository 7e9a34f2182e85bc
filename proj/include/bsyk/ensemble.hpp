#pragma once

#include <memory>
#include <vector>

#include "bsyk/config.hpp"
#include "bsyk/engine.hpp"
#include "bsyk/observables.hpp"

namespace bsyk {

// Receives checkpoint snapshots. Implementations must tolerate concurrent
// calls for different trajectory indices; the (checkpoint, trajectory) pair
// is unique per call. Throwing TrajectoryAbort cancels that trajectory.
class SnapshotSink {
  public:
    virtual ~SnapshotSink() = default;
    virtual void consume(int checkpoint, int trajectory, double t, const Matrix& rho) = 0;
};

struct EnsembleDiagnostics {
    double max_trace_drift = 0.0;
    long total_renorms = 0;
};

// n_traj independent trajectories, trajectory k seeded from
// (master_seed, k); OpenMP-parallel over trajectories with per-slot writes,
// so results are bit-identical for any thread count.
EnsembleDiagnostics run_ensemble(const SimConfig& cfg, const std::vector<int>& checkpoint_steps,
                                 SnapshotSink& sink);

// Streaming measurement sink: per-(checkpoint, trajectory) scalar
// contributions for every observable the CLI emits, plus invariant checks.
class MeasurementSet : public SnapshotSink {
  public:
    MeasurementSet(const SimConfig& cfg, std::vector<int> checkpoint_steps);

    void consume(int checkpoint, int trajectory, double t, const Matrix& rho) override;

    // raw tables, [checkpoint][trajectory]
    struct Raw {
        std::vector<std::vector<Complex>> c_fixed;
        std::vector<std::vector<Complex>> c_avg;
        std::vector<std::vector<double>> f1_num_fixed, f1_num_avg;
        std::vector<std::vector<double>> f2_num_fixed, f2_num_avg;
        std::vector<std::vector<double>> purity;
        std::vector<std::vector<double>> svn;
        std::vector<std::vector<double>> leakage;
        std::vector<std::vector<double>> min_eig;
        std::vector<std::vector<double>> trace_err;
        std::vector<std::vector<double>> herm_err;
    };
    const Raw& raw() const { return raw_; }
    const std::vector<double>& times() const { return times_; }

    // assembled series (bootstrap seeds derive from the master seed)
    ObservableSeries series_c(bool pair_averaged) const;
    ObservableSeries series_f(int n, bool pair_averaged) const;
    ObservableSeries series_s2(bool quenched) const;
    ObservableSeries series_svn() const;
    ObservableSeries series_leakage() const;

    std::vector<ObservableSeries> all_series() const;

  private:
    SimConfig cfg_;
    ModeLayout layout_;
    std::vector<int> steps_;
    std::vector<double> times_;
    Raw raw_;
};

// gamma = 0 two-point run: G(u) = <EPR| U^dag(u) c_i U(u) c_i^dag |EPR>,
// averaged over modes and trajectories; records every `record_every` steps.
struct TwoPointData {
    std::vector<double> u;
    std::vector<std::vector<double>> g;  // [trajectory][u index]
    ObservableSeries series(uint64_t seed) const;
};

TwoPointData run_two_point(const SimConfig& cfg);

}  // namespace bsyk
