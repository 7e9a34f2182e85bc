#include <doctest.h>

#include <cmath>

#include "bsyk/ensemble.hpp"
#include "bsyk/rng.hpp"

using namespace bsyk;

namespace {

SimConfig small_config(int n_traj, int threads, uint64_t seed = 2024) {
    SimConfig c;
    c.n_modes = 2;
    c.gamma = 0.05;
    c.coupling_j = 1.0;
    c.dt = 0.02;
    c.t_max = 0.6;
    c.checkpoint_count = 4;
    c.n_traj = n_traj;
    c.master_seed = seed;
    c.threads = threads;
    return c;
}

}  // namespace

TEST_CASE("rerun with the same seed reproduces checkpoint statistics exactly") {
    const SimConfig cfg = small_config(4, 1);
    MeasurementSet a(cfg, cfg.checkpoint_steps());
    run_ensemble(cfg, cfg.checkpoint_steps(), a);
    MeasurementSet b(cfg, cfg.checkpoint_steps());
    run_ensemble(cfg, cfg.checkpoint_steps(), b);
    for (size_t k = 0; k < a.raw().purity.size(); ++k)
        for (size_t m = 0; m < a.raw().purity[k].size(); ++m) {
            CHECK(a.raw().purity[k][m] == b.raw().purity[k][m]);
            CHECK(a.raw().c_fixed[k][m] == b.raw().c_fixed[k][m]);
            CHECK(a.raw().svn[k][m] == b.raw().svn[k][m]);
        }
}

TEST_CASE("ensemble results are bit-identical for any thread count") {
    const SimConfig c1 = small_config(8, 1);
    const SimConfig c4 = small_config(8, 4);
    MeasurementSet a(c1, c1.checkpoint_steps());
    run_ensemble(c1, c1.checkpoint_steps(), a);
    MeasurementSet b(c4, c4.checkpoint_steps());
    run_ensemble(c4, c4.checkpoint_steps(), b);
    for (size_t k = 0; k < a.raw().purity.size(); ++k)
        for (size_t m = 0; m < a.raw().purity[k].size(); ++m) {
            CHECK(a.raw().purity[k][m] == b.raw().purity[k][m]);
            CHECK(a.raw().c_fixed[k][m] == b.raw().c_fixed[k][m]);
            CHECK(a.raw().f1_num_avg[k][m] == b.raw().f1_num_avg[k][m]);
        }
    // and the assembled series agree bit-for-bit (fixed bootstrap seeds)
    const ObservableSeries sa = a.series_s2(false), sb = b.series_s2(false);
    for (size_t k = 0; k < sa.mean.size(); ++k) {
        CHECK(sa.mean[k] == sb.mean[k]);
        CHECK(sa.stderr_[k] == sb.stderr_[k]);
    }
}

TEST_CASE("trajectory seeds are decoupled from n_traj") {
    // trajectory k draws the same stream no matter how many trajectories run
    const SimConfig c3 = small_config(3, 1);
    const SimConfig c5 = small_config(5, 1);
    MeasurementSet a(c3, c3.checkpoint_steps());
    run_ensemble(c3, c3.checkpoint_steps(), a);
    MeasurementSet b(c5, c5.checkpoint_steps());
    run_ensemble(c5, c5.checkpoint_steps(), b);
    for (size_t k = 0; k < a.raw().purity.size(); ++k)
        for (size_t m = 0; m < 3; ++m) CHECK(a.raw().purity[k][m] == b.raw().purity[k][m]);
}

TEST_CASE("two-point data: G(0) = 1/2 exactly, J = 0 stays flat") {
    SimConfig cfg = small_config(3, 1);
    cfg.n_modes = 3;
    cfg.gdecay_u_max = 1.0;
    TwoPointData d = run_two_point(cfg);
    for (const auto& traj : d.g) CHECK(traj[0] == doctest::Approx(0.5).epsilon(1e-12));

    SimConfig free_cfg = cfg;
    free_cfg.coupling_j = 0.0;
    free_cfg.gdecay_u_max = 0.4;
    TwoPointData df = run_two_point(free_cfg);
    for (const auto& traj : df.g)
        for (double v : traj) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("bootstrap error of C scales as 1/sqrt(n_traj)") {
    // N=3, gamma/J = 0.05: compare bootstrap errors across ensemble sizes
    auto run_err = [&](int n_traj) {
        SimConfig c;
        c.n_modes = 3;
        c.gamma = 0.05;
        c.coupling_j = 1.0;
        c.dt = 0.05;
        c.t_max = 1.0;
        c.checkpoints = {1.0};
        c.n_traj = n_traj;
        c.master_seed = 31;
        MeasurementSet m(c, c.checkpoint_steps());
        run_ensemble(c, c.checkpoint_steps(), m);
        return m.series_c(false).stderr_.back();
    };
    const double e50 = run_err(50);
    const double e200 = run_err(200);
    const double e800 = run_err(800);
    CHECK(e50 / e200 == doctest::Approx(2.0).epsilon(0.30));
    CHECK(e200 / e800 == doctest::Approx(2.0).epsilon(0.30));
}

TEST_CASE("step-size convergence: halving dt moves observables within error bars") {
    auto run_at = [&](double dt) {
        SimConfig c;
        c.n_modes = 3;
        c.gamma = 0.06;
        c.coupling_j = 1.0;
        c.dt = dt;
        c.t_max = 4.0;
        c.checkpoints = {2.0, 4.0};
        c.n_traj = 160;
        c.master_seed = 17;
        MeasurementSet m(c, c.checkpoint_steps());
        run_ensemble(c, c.checkpoint_steps(), m);
        return std::make_pair(m.series_s2(false), m.series_f(2, true));
    };
    const auto [s2a, f2a] = run_at(0.04);
    const auto [s2b, f2b] = run_at(0.02);
    for (size_t k = 0; k < s2a.mean.size(); ++k) {
        const double tol_s2 =
            3.0 * std::sqrt(s2a.stderr_[k] * s2a.stderr_[k] + s2b.stderr_[k] * s2b.stderr_[k]);
        CHECK(std::abs(s2a.mean[k] - s2b.mean[k]) < std::max(tol_s2, 1e-4));
        const double tol_f2 =
            3.0 * std::sqrt(f2a.stderr_[k] * f2a.stderr_[k] + f2b.stderr_[k] * f2b.stderr_[k]);
        CHECK(std::abs(f2a.mean[k] - f2b.mean[k]) < std::max(tol_f2, 1e-4));
    }
}
