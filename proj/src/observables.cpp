#include "bsyk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Eigenvalues>

#include "bsyk/rng.hpp"

namespace bsyk {

void ObservableSeries::validate() const {
    if (times.size() != mean.size() || times.size() != stderr_.size())
        throw std::logic_error("ObservableSeries: column length mismatch");
    for (size_t k = 0; k < times.size(); ++k) {
        if (k > 0 && !(times[k] > times[k - 1]))
            throw std::logic_error("ObservableSeries: times must be strictly increasing");
        if (!std::isfinite(mean[k])) throw std::logic_error("ObservableSeries: mean not finite");
        if (stderr_[k] < 0.0) throw std::logic_error("ObservableSeries: negative error");
    }
}

namespace {

// apply A = c_i c_j^dag from the left: A is I_aux (x) (a_i a_j^dag); each
// column of the system factor has at most one entry, so this is a gather.
void apply_pair_op_left(const Matrix& in, Matrix& out, const ModeLayout& layout, int i, int j) {
    const Eigen::Index dc = layout.system_dim();
    const Eigen::Index dxi = layout.aux_dim();
    const Eigen::Index d = in.rows();
    out.setZero(d, in.cols());
    for (Eigen::Index a = 0; a < dc; ++a) {
        long long t1, t2;
        double s1 = 1.0, s2 = 1.0;
        create_bit((unsigned long long)a, j, t1, s1);
        if (t1 < 0) continue;
        annihilate_bit((unsigned long long)t1, i, t2, s2);
        if (t2 < 0) continue;
        const double w = s1 * s2;
        for (Eigen::Index x = 0; x < dxi; ++x)
            out.row(x * dc + t2) += w * in.row(x * dc + a);
    }
}

}  // namespace

Complex corr_value(const Matrix& rho, const ModeLayout& layout, int i, int j) {
    if (i < 0 || i >= layout.n_system || j < 0 || j >= layout.n_system)
        throw std::out_of_range("corr_value: mode index out of range");
    // tr[rho c_i c_j^dag] = sum_a <a| c_i c_j^dag rho |a> via the sparse op
    const Eigen::Index dc = layout.system_dim();
    const Eigen::Index dxi = layout.aux_dim();
    Complex tr = 0.0;
    for (Eigen::Index a = 0; a < dc; ++a) {
        long long t1, t2;
        double s1 = 1.0, s2 = 1.0;
        create_bit((unsigned long long)a, j, t1, s1);
        if (t1 < 0) continue;
        annihilate_bit((unsigned long long)t1, i, t2, s2);
        if (t2 < 0) continue;
        const double w = s1 * s2;
        for (Eigen::Index x = 0; x < dxi; ++x) tr += w * rho(x * dc + a, x * dc + t2);
    }
    return tr;
}

double renyi_num_value(const Matrix& w, const ModeLayout& layout, int i, int j) {
    // tr[W A W A^dag] = tr[(A^dag W)(A W)]: two sparse gathers and an
    // elementwise trace, no dense product
    Matrix aw, adw;
    apply_pair_op_left(w, aw, layout, i, j);   // A W
    apply_pair_op_left(w, adw, layout, j, i);  // A^dag W
    const Eigen::Index d = w.rows();
    Complex tr = 0.0;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) tr += adw(r, c) * aw(c, r);
    return tr.real();
}

Matrix psd_sqrt(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    Eigen::VectorXd ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-6)
        throw std::runtime_error("psd_sqrt: eigenvalue " + std::to_string(ev.minCoeff()) +
                                 " below -1e-6, state corrupted");
    // eigenvalues below the stepper's positivity drift bound are treated as
    // zero; the square root would otherwise amplify them to the 1e-8 scale
    for (Eigen::Index k = 0; k < ev.size(); ++k) ev(k) = ev(k) > 1e-8 ? std::sqrt(ev(k)) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

double purity_value(const Matrix& rho) { return rho.squaredNorm(); }

double vn_entropy_value(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    if (ev.minCoeff() < -1e-6)
        throw std::runtime_error("vn_entropy: eigenvalue below -1e-6, state corrupted");
    double s = 0.0;
    for (Eigen::Index k = 0; k < ev.size(); ++k)
        if (ev(k) > 1e-8) s -= ev(k) * std::log(ev(k));
    return s;
}

double min_eigenvalue(const Matrix& rho) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

double leakage_value(const Matrix& rho, const ModeLayout& layout) {
    const Eigen::Index d = rho.rows();
    const int n = layout.n_system;
    std::vector<char> in_block(d);
    for (Eigen::Index b = 0; b < d; ++b)
        in_block[b] = __builtin_popcountll((unsigned long long)b) == n;
    double off_off = 0.0, in_off = 0.0;
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) {
            if (in_block[r] && in_block[c]) continue;
            const double a = std::norm(rho(r, c));
            if (!in_block[r] && !in_block[c]) off_off += a;
            else if (in_block[r] && !in_block[c]) in_off += a;
        }
    return std::sqrt(off_off) + std::sqrt(in_off);
}

// ------------------------------------------------------------------ bootstrap

double bootstrap_stderr(const std::vector<double>& values, int resamples, uint64_t seed) {
    const size_t n = values.size();
    if (n < 2) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < resamples; ++b) {
        double m = 0.0;
        for (size_t k = 0; k < n; ++k) m += values[pick(rng)];
        m /= double(n);
        s1 += m;
        s2 += m * m;
    }
    s1 /= resamples;
    s2 /= resamples;
    return std::sqrt(std::max(0.0, s2 - s1 * s1));
}

double bootstrap_ratio_stderr(const std::vector<double>& num, const std::vector<double>& den,
                              int resamples, uint64_t seed) {
    const size_t n = num.size();
    if (n < 2 || den.size() != n) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<size_t> pick(0, n - 1);
    double s1 = 0.0, s2 = 0.0;
    for (int b = 0; b < resamples; ++b) {
        double mn = 0.0, md = 0.0;
        for (size_t k = 0; k < n; ++k) {
            const size_t idx = pick(rng);
            mn += num[idx];
            md += den[idx];
        }
        const double r = mn / md;
        s1 += r;
        s2 += r * r;
    }
    s1 /= resamples;
    s2 /= resamples;
    return std::sqrt(std::max(0.0, s2 - s1 * s1));
}

double bootstrap_stderr_complex(const std::vector<Complex>& values, int resamples, uint64_t seed) {
    std::vector<double> re(values.size()), im(values.size());
    for (size_t k = 0; k < values.size(); ++k) {
        re[k] = values[k].real();
        im[k] = values[k].imag();
    }
    const double er = bootstrap_stderr(re, resamples, seed);
    const double ei = bootstrap_stderr(im, resamples, splitmix64(seed));
    return std::sqrt(er * er + ei * ei);
}

// ----------------------------------------------------- snapshot-grid series

ObservableSeries conventional_correlator(const SnapshotGrid& snapshots,
                                         const std::vector<double>& times,
                                         const ModeLayout& layout, int i, int j, uint64_t seed) {
    ObservableSeries s;
    s.name = "C";
    s.pair_i = i;
    s.pair_j = j;
    s.convention = "annealed";
    for (size_t k = 0; k < snapshots.size(); ++k) {
        std::vector<Complex> vals;
        vals.reserve(snapshots[k].size());
        for (const auto& rho : snapshots[k]) vals.push_back(corr_value(rho, layout, i, j));
        Complex m = 0.0;
        for (const auto& v : vals) m += v;
        m /= double(vals.size());
        s.times.push_back(times[k]);
        s.mean.push_back(m.real());
        s.complex_mean.push_back(m);
        s.stderr_.push_back(bootstrap_stderr_complex(vals, kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

ObservableSeries renyi_correlator(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                  const ModeLayout& layout, int n, int i, int j, uint64_t seed) {
    if (n != 1 && n != 2)
        throw std::invalid_argument("renyi_correlator: finite-N engine implements n in {1,2}");
    if (i == j) throw std::invalid_argument("renyi_correlator: requires i != j");
    ObservableSeries s;
    s.name = n == 1 ? "F1" : "F2";
    s.pair_i = i;
    s.pair_j = j;
    s.convention = "annealed";
    for (size_t k = 0; k < snapshots.size(); ++k) {
        std::vector<double> nums, dens;
        for (const auto& rho : snapshots[k]) {
            const Matrix w = (n == 1) ? psd_sqrt(rho) : rho;
            nums.push_back(renyi_num_value(w, layout, i, j));
            dens.push_back(n == 1 ? 1.0 : purity_value(rho));
        }
        double mn = 0.0, md = 0.0;
        for (size_t m = 0; m < nums.size(); ++m) {
            mn += nums[m];
            md += dens[m];
        }
        s.times.push_back(times[k]);
        s.mean.push_back(mn / md);
        s.stderr_.push_back(bootstrap_ratio_stderr(nums, dens, kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

ObservableSeries renyi2_entropy(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                bool quenched, uint64_t seed) {
    ObservableSeries s;
    s.name = quenched ? "S2_quenched" : "S2_annealed";
    s.convention = quenched ? "quenched" : "annealed";
    for (size_t k = 0; k < snapshots.size(); ++k) {
        std::vector<double> purities;
        for (const auto& rho : snapshots[k]) purities.push_back(purity_value(rho));
        s.times.push_back(times[k]);
        if (quenched) {
            std::vector<double> logs;
            for (double p : purities) logs.push_back(-std::log(p));
            double m = 0.0;
            for (double v : logs) m += v;
            s.mean.push_back(m / logs.size());
            s.stderr_.push_back(bootstrap_stderr(logs, kBootstrapResamples, seed + k));
        } else {
            double m = 0.0;
            for (double p : purities) m += p;
            m /= purities.size();
            s.mean.push_back(-std::log(m));
            // delta method via bootstrap on the purity mean
            std::mt19937_64 rng(seed + k);
            std::uniform_int_distribution<size_t> pick(0, purities.size() - 1);
            std::vector<double> res;
            for (int b = 0; b < kBootstrapResamples; ++b) {
                double bm = 0.0;
                for (size_t q = 0; q < purities.size(); ++q) bm += purities[pick(rng)];
                res.push_back(-std::log(bm / purities.size()));
            }
            double s1 = 0.0, s2 = 0.0;
            for (double v : res) {
                s1 += v;
                s2 += v * v;
            }
            s1 /= res.size();
            s2 /= res.size();
            s.stderr_.push_back(std::sqrt(std::max(0.0, s2 - s1 * s1)));
        }
    }
    s.validate();
    return s;
}

ObservableSeries von_neumann_entropy(const SnapshotGrid& snapshots,
                                     const std::vector<double>& times, uint64_t seed) {
    ObservableSeries s;
    s.name = "SvN";
    s.convention = "sample";
    for (size_t k = 0; k < snapshots.size(); ++k) {
        std::vector<double> vals;
        for (const auto& rho : snapshots[k]) vals.push_back(vn_entropy_value(rho));
        double m = 0.0;
        for (double v : vals) m += v;
        s.times.push_back(times[k]);
        s.mean.push_back(m / vals.size());
        s.stderr_.push_back(bootstrap_stderr(vals, kBootstrapResamples, seed + k));
    }
    s.validate();
    return s;
}

ObservableSeries symmetry_leakage(const SnapshotGrid& snapshots, const std::vector<double>& times,
                                  const ModeLayout& layout) {
    ObservableSeries s;
    s.name = "leakage";
    s.convention = "sample";
    for (size_t k = 0; k < snapshots.size(); ++k) {
        double mx = 0.0;
        for (const auto& rho : snapshots[k]) mx = std::max(mx, leakage_value(rho, layout));
        s.times.push_back(times[k]);
        s.mean.push_back(mx);
        s.stderr_.push_back(0.0);
    }
    s.validate();
    return s;
}

DecayFit fit_exponential_decay(const std::vector<double>& u, const std::vector<double>& g,
                               double u_max) {
    // linear fit of ln(2 g) = -rate * u over the window, g > 0 required
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long n = 0;
    for (size_t k = 0; k < u.size(); ++k) {
        if (u[k] > u_max + 1e-12 || g[k] <= 1e-4) continue;
        const double y = std::log(2.0 * g[k]);
        sx += u[k];
        sy += y;
        sxx += u[k] * u[k];
        sxy += u[k] * y;
        ++n;
    }
    DecayFit fit;
    if (n < 3) {
        fit.flagged = true;
        return fit;
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double icept = (sy - slope * sx) / n;
    fit.rate = -slope;
    double ss = 0.0;
    long m = 0;
    for (size_t k = 0; k < u.size(); ++k) {
        if (u[k] > u_max + 1e-12 || g[k] <= 1e-4) continue;
        const double model = 0.5 * std::exp(icept) * std::exp(slope * u[k]);
        ss += (model - g[k]) * (model - g[k]) / (g[k] * g[k]);
        ++m;
    }
    fit.residual = std::sqrt(ss / m);
    fit.flagged = fit.residual > 0.10;
    return fit;
}

}  // namespace bsyk
