#include "bsyk/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Eigenvalues>

#include "bsyk/rng.hpp"

namespace bsyk {

namespace {

int thread_count(const SimConfig& cfg) {
#ifdef _OPENMP
    return cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#else
    (void)cfg;
    return 1;
#endif
}

// advance one trajectory through the step grid, emitting checkpoints via
// `emit(ckpt_index, t)`; `advance()` performs one step
template <class Emit, class Advance>
void walk_grid(int n_steps, double dt, const std::vector<int>& steps, Emit&& emit,
               Advance&& advance) {
    int next_ckpt = 0;
    for (int s = 0; s <= n_steps; ++s) {
        while (next_ckpt < (int)steps.size() && steps[next_ckpt] == s) {
            emit(next_ckpt, s * dt);
            ++next_ckpt;
        }
        if (s == n_steps) break;
        advance();
    }
}

}  // namespace

EnsembleDiagnostics run_ensemble(const SimConfig& cfg, const std::vector<int>& checkpoint_steps,
                                 SnapshotSink& sink) {
    const int n_traj = cfg.n_traj;
    EnsembleDiagnostics diag;
    std::mutex diag_mutex;
    std::atomic<bool> failed{false};
    std::unique_ptr<TrajectoryAbort> first_abort;

    if (cfg.backend == Backend::reference) {
        const ReferenceStepper stepper(cfg);
#pragma omp parallel for schedule(dynamic) num_threads(thread_count(cfg))
        for (int k = 0; k < n_traj; ++k) {
            if (failed.load()) continue;
            try {
                TrajectoryState st = stepper.make_initial(k);
                walk_grid(
                    cfg.n_steps(), cfg.dt, checkpoint_steps,
                    [&](int ckpt, double t) { sink.consume(ckpt, k, t, st.rho); },
                    [&] { stepper.step(st); });
                std::lock_guard<std::mutex> lock(diag_mutex);
                diag.max_trace_drift = std::max(diag.max_trace_drift, st.max_trace_drift);
                diag.total_renorms += st.renorm_count;
            } catch (const TrajectoryAbort& abort) {
                std::lock_guard<std::mutex> lock(diag_mutex);
                if (!first_abort || abort.traj_index < first_abort->traj_index)
                    first_abort = std::make_unique<TrajectoryAbort>(abort);
                failed.store(true);
            }
        }
    } else {
#pragma omp parallel num_threads(thread_count(cfg))
        {
            FastStepper stepper(cfg);
            Matrix rho_buf;
#pragma omp for schedule(dynamic)
            for (int k = 0; k < n_traj; ++k) {
                if (failed.load()) continue;
                try {
                    stepper.reset(k);
                    walk_grid(
                        cfg.n_steps(), cfg.dt, checkpoint_steps,
                        [&](int ckpt, double t) {
                            stepper.extract(rho_buf);
                            sink.consume(ckpt, k, t, rho_buf);
                        },
                        [&] { stepper.step(); });
                    std::lock_guard<std::mutex> lock(diag_mutex);
                    diag.max_trace_drift = std::max(diag.max_trace_drift, stepper.max_trace_drift());
                    diag.total_renorms += stepper.renorm_count();
                } catch (const TrajectoryAbort& abort) {
                    std::lock_guard<std::mutex> lock(diag_mutex);
                    if (!first_abort || abort.traj_index < first_abort->traj_index)
                        first_abort = std::make_unique<TrajectoryAbort>(abort);
                    failed.store(true);
                }
            }
        }
    }
    if (first_abort) throw *first_abort;
    return diag;
}

MeasurementSet::MeasurementSet(const SimConfig& cfg, std::vector<int> checkpoint_steps)
    : cfg_(cfg), layout_(ModeLayout::paired(cfg.n_modes)), steps_(std::move(checkpoint_steps)) {
    for (int s : steps_) times_.push_back(s * cfg_.dt);
    const size_t nc = steps_.size();
    const size_t nt = (size_t)cfg_.n_traj;
    auto init = [&](auto& table) { table.assign(nc, {}); for (auto& row : table) row.resize(nt); };
    init(raw_.c_fixed);
    init(raw_.c_avg);
    init(raw_.f1_num_fixed);
    init(raw_.f1_num_avg);
    init(raw_.f2_num_fixed);
    init(raw_.f2_num_avg);
    init(raw_.purity);
    init(raw_.svn);
    init(raw_.leakage);
    init(raw_.min_eig);
    init(raw_.trace_err);
    init(raw_.herm_err);
}

void MeasurementSet::consume(int checkpoint, int trajectory, double t, const Matrix& rho) {
    const int n = cfg_.n_modes;
    const size_t c = (size_t)checkpoint, m = (size_t)trajectory;

    raw_.trace_err[c][m] = std::abs(rho.trace().real() - 1.0);
    raw_.herm_err[c][m] = (rho - rho.adjoint()).norm();
    raw_.leakage[c][m] = leakage_value(rho, layout_);
    raw_.purity[c][m] = purity_value(rho);

    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const Eigen::VectorXd& ev = es.eigenvalues();
    raw_.min_eig[c][m] = ev.minCoeff();
    if (ev.minCoeff() < -1e-6)
        throw TrajectoryAbort(trajectory, t,
                              "positivity violation: min eigenvalue " +
                                  std::to_string(ev.minCoeff()) + " at t=" + std::to_string(t));
    double svn = 0.0;
    Eigen::VectorXd sq = ev;
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) > 1e-8) svn -= ev(k) * std::log(ev(k));
        sq(k) = ev(k) > 1e-8 ? std::sqrt(ev(k)) : 0.0;
    }
    raw_.svn[c][m] = svn;
    const Matrix sqrt_rho = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().adjoint();

    raw_.c_fixed[c][m] = corr_value(rho, layout_, cfg_.pair_i, cfg_.pair_j);
    raw_.f1_num_fixed[c][m] = renyi_num_value(sqrt_rho, layout_, cfg_.pair_i, cfg_.pair_j);
    raw_.f2_num_fixed[c][m] = renyi_num_value(rho, layout_, cfg_.pair_i, cfg_.pair_j);

    Complex c_sum = 0.0;
    double f1_sum = 0.0, f2_sum = 0.0;
    int count = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            c_sum += corr_value(rho, layout_, i, j);
            f1_sum += renyi_num_value(sqrt_rho, layout_, i, j);
            f2_sum += renyi_num_value(rho, layout_, i, j);
            ++count;
        }
    raw_.c_avg[c][m] = c_sum / double(count);
    raw_.f1_num_avg[c][m] = f1_sum / count;
    raw_.f2_num_avg[c][m] = f2_sum / count;
}

namespace {

uint64_t series_seed(const SimConfig& cfg, const char* name) {
    uint64_t h = splitmix64(cfg.master_seed ^ 0xB5EA);
    for (const char* p = name; *p; ++p) h = splitmix64(h ^ (uint64_t)(unsigned char)*p);
    return h;
}

}  // namespace

ObservableSeries MeasurementSet::series_c(bool pair_averaged) const {
    const auto& table = pair_averaged ? raw_.c_avg : raw_.c_fixed;
    ObservableSeries s;
    s.name = pair_averaged ? "C_pairavg" : "C";
    s.pair_i = pair_averaged ? -1 : cfg_.pair_i;
    s.pair_j = pair_averaged ? -1 : cfg_.pair_j;
    s.convention = "annealed";
    s.config_hash = cfg_.hash();
    const uint64_t seed = series_seed(cfg_, s.name.c_str());
    for (size_t k = 0; k < table.size(); ++k) {
        Complex m = 0.0;
        for (const auto& v : table[k]) m += v;
        m /= double(table[k].size());
        s.times.push_back(times_[k]);
        s.mean.push_back(m.real());
        s.complex_mean.push_back(m);
        s.stderr_.push_back(bootstrap_stderr_complex(table[k], kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

ObservableSeries MeasurementSet::series_f(int n, bool pair_averaged) const {
    const auto& nums = n == 1 ? (pair_averaged ? raw_.f1_num_avg : raw_.f1_num_fixed)
                              : (pair_averaged ? raw_.f2_num_avg : raw_.f2_num_fixed);
    ObservableSeries s;
    s.name = std::string(n == 1 ? "F1" : "F2") + (pair_averaged ? "_pairavg" : "");
    s.pair_i = pair_averaged ? -1 : cfg_.pair_i;
    s.pair_j = pair_averaged ? -1 : cfg_.pair_j;
    s.convention = "annealed";
    s.config_hash = cfg_.hash();
    const uint64_t seed = series_seed(cfg_, s.name.c_str());
    for (size_t k = 0; k < nums.size(); ++k) {
        s.times.push_back(times_[k]);
        if (n == 1) {
            double m = 0.0;
            for (double v : nums[k]) m += v;
            s.mean.push_back(m / nums[k].size());
            s.stderr_.push_back(bootstrap_stderr(nums[k], kBootstrapResamples, seed + k));
        } else {
            double mn = 0.0, md = 0.0;
            for (size_t q = 0; q < nums[k].size(); ++q) {
                mn += nums[k][q];
                md += raw_.purity[k][q];
            }
            s.mean.push_back(mn / md);
            s.stderr_.push_back(
                bootstrap_ratio_stderr(nums[k], raw_.purity[k], kBootstrapResamples, seed + k));
        }
    }
    s.validate();
    return s;
}

ObservableSeries MeasurementSet::series_s2(bool quenched) const {
    ObservableSeries s;
    s.name = quenched ? "S2_quenched" : "S2_annealed";
    s.convention = quenched ? "quenched" : "annealed";
    s.config_hash = cfg_.hash();
    const uint64_t seed = series_seed(cfg_, s.name.c_str());
    for (size_t k = 0; k < raw_.purity.size(); ++k) {
        const auto& pur = raw_.purity[k];
        s.times.push_back(times_[k]);
        if (quenched) {
            std::vector<double> logs;
            for (double p : pur) logs.push_back(-std::log(p));
            double m = 0.0;
            for (double v : logs) m += v;
            s.mean.push_back(m / logs.size());
            s.stderr_.push_back(bootstrap_stderr(logs, kBootstrapResamples, seed + k));
        } else {
            double m = 0.0;
            for (double p : pur) m += p;
            m /= pur.size();
            s.mean.push_back(-std::log(m));
            std::mt19937_64 rng(seed + k);
            std::uniform_int_distribution<size_t> pick(0, pur.size() - 1);
            double s1 = 0.0, s2 = 0.0;
            for (int b = 0; b < kBootstrapResamples; ++b) {
                double bm = 0.0;
                for (size_t q = 0; q < pur.size(); ++q) bm += pur[pick(rng)];
                const double v = -std::log(bm / pur.size());
                s1 += v;
                s2 += v * v;
            }
            s1 /= kBootstrapResamples;
            s2 /= kBootstrapResamples;
            s.stderr_.push_back(std::sqrt(std::max(0.0, s2 - s1 * s1)));
        }
    }
    s.validate();
    return s;
}

ObservableSeries MeasurementSet::series_svn() const {
    ObservableSeries s;
    s.name = "SvN";
    s.convention = "sample";
    s.config_hash = cfg_.hash();
    const uint64_t seed = series_seed(cfg_, s.name.c_str());
    for (size_t k = 0; k < raw_.svn.size(); ++k) {
        double m = 0.0;
        for (double v : raw_.svn[k]) m += v;
        s.times.push_back(times_[k]);
        s.mean.push_back(m / raw_.svn[k].size());
        s.stderr_.push_back(bootstrap_stderr(raw_.svn[k], kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

ObservableSeries MeasurementSet::series_leakage() const {
    ObservableSeries s;
    s.name = "leakage";
    s.convention = "sample";
    s.config_hash = cfg_.hash();
    for (size_t k = 0; k < raw_.leakage.size(); ++k) {
        double mx = 0.0;
        for (double v : raw_.leakage[k]) mx = std::max(mx, v);
        s.times.push_back(times_[k]);
        s.mean.push_back(mx);
        s.stderr_.push_back(0.0);
    }
    s.validate();
    return s;
}

std::vector<ObservableSeries> MeasurementSet::all_series() const {
    std::vector<ObservableSeries> out;
    out.push_back(series_c(false));
    out.push_back(series_f(1, false));
    out.push_back(series_f(2, false));
    if (cfg_.pair_average) {
        out.push_back(series_c(true));
        out.push_back(series_f(1, true));
        out.push_back(series_f(2, true));
    }
    out.push_back(series_s2(false));
    out.push_back(series_s2(true));
    out.push_back(series_svn());
    out.push_back(series_leakage());
    return out;
}

ObservableSeries TwoPointData::series(uint64_t seed) const {
    ObservableSeries s;
    s.name = "Gdecay";
    s.convention = "annealed";
    for (size_t k = 0; k < u.size(); ++k) {
        std::vector<double> vals;
        vals.reserve(g.size());
        for (const auto& traj : g) vals.push_back(traj[k]);
        double m = 0.0;
        for (double v : vals) m += v;
        s.times.push_back(u[k]);
        s.mean.push_back(m / vals.size());
        s.stderr_.push_back(bootstrap_stderr(vals, kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

TwoPointData run_two_point(const SimConfig& cfg) {
    const int n = cfg.n_modes;
    const ModeLayout layout = ModeLayout::paired(n);
    const Eigen::Index dc = layout.system_dim();
    const Eigen::Index dxi = layout.aux_dim();
    const MonomialTables tables(n);

    const double decay_rate = cfg.coupling_j / 4.0;  // quasi-particle rate at q = 4
    const double u_max = cfg.gdecay_u_max > 0.0 ? cfg.gdecay_u_max : 4.0 / decay_rate;
    const int n_steps = (int)std::llround(u_max / cfg.dt);
    const int every = cfg.gdecay_record_every;

    TwoPointData data;
    for (int s = 0; s <= n_steps; s += every) data.u.push_back(s * cfg.dt);
    data.g.assign(cfg.n_traj, std::vector<double>(data.u.size(), 0.0));

    const StateVector epr = build_epr_state(layout);

    using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

#pragma omp parallel for schedule(dynamic) num_threads(thread_count(cfg))
    for (int traj = 0; traj < cfg.n_traj; ++traj) {
        auto rng = make_stream(cfg.master_seed, (uint64_t)traj, StreamTag::two_point);
        // vb = U |EPR>, va_i = U c_i^dag |EPR>; G_i(u) = <vb| c_i |va_i>
        RowMat vb(dxi, dc);
        for (Eigen::Index x = 0; x < dxi; ++x)
            for (Eigen::Index a = 0; a < dc; ++a) vb(x, a) = epr.amps(x * dc + a);
        std::vector<RowMat> va(n, RowMat::Zero(dxi, dc));
        for (int i = 0; i < n; ++i)
            for (Eigen::Index x = 0; x < dxi; ++x)
                for (Eigen::Index a = 0; a < dc; ++a) {
                    long long t;
                    double sg = 1.0;
                    create_bit((unsigned long long)a, i, t, sg);
                    if (t >= 0) va[i](x, t) = sg * epr.amps(x * dc + a);
                }
        auto record = [&](int slot) {
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                Complex gi = 0.0;
                for (Eigen::Index x = 0; x < dxi; ++x)
                    for (Eigen::Index a = 0; a < dc; ++a) {
                        long long t;
                        double sg = 1.0;
                        annihilate_bit((unsigned long long)a, i, t, sg);
                        if (t >= 0) gi += std::conj(vb(x, t)) * sg * va[i](x, a);
                    }
                acc += gi.real();
            }
            data.g[traj][slot] = acc / n;
        };
        record(0);
        int slot = 1;
        for (int s = 1; s <= n_steps; ++s) {
            const CouplingSample sample = sample_couplings(rng, n, cfg.coupling_j, cfg.dt);
            const Matrix h = build_system_hamiltonian(sample, tables);
            Eigen::SelfAdjointEigenSolver<Matrix> es(h);
            Vector phases(dc);
            for (Eigen::Index k = 0; k < dc; ++k)
                phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * cfg.dt));
            const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
            const Matrix ut = u.transpose();
            vb = vb * ut;
            for (int i = 0; i < n; ++i) va[i] = va[i] * ut;
            if (s % every == 0) {
                record(slot);
                ++slot;
            }
        }
    }
    return data;
}

}  // namespace bsyk
