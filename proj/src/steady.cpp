#include "bsyk/steady.hpp"

#include <cmath>
#include <map>

#include "bsyk/engine.hpp"
#include "bsyk/hamiltonian.hpp"

namespace bsyk {

namespace {

// Compact sector representation of the averaged generator, mirroring the
// fast engine's layout (see engine.cpp). Rows are system index pairs (a,b)
// grouped by (charge a, charge b); the xi columns ride along.
struct AveragedGenerator {
    struct Sector {
        int qa, qb, sa, sb, ca, cb, rows, cols;
        long offset;
        std::vector<int> row_ptr, col_idx;
        std::vector<double> weight;
    };
    int n;
    ChargeBasis cb;
    std::vector<Sector> sectors;
    long total = 0;

    AveragedGenerator(const SimConfig& cfg) : n(cfg.n_modes), cb(cfg.n_modes) {
        const MonomialTables tables(n);
        const int p = tables.pairs.size();
        const double noise_rate = 2.0 * cfg.coupling_j / (double(n) * n * n);
        const double bath_rate = cfg.gamma / n;

        // survival weight of the monomial anticommutator, per basis state
        std::vector<double> noise_diag(1 << n, 0.0);
        for (int a = 0; a < (1 << n); ++a)
            for (int q = 0; q < p; ++q) {
                const long long mid = tables.lower_target[q][a];
                if (mid < 0) continue;
                for (int pi = 0; pi < p; ++pi)
                    if (tables.raise_target[pi][mid] >= 0) noise_diag[a] += noise_rate;
            }

        long off = 0;
        sectors.resize((n + 1) * (n + 1));
        for (int qa = 0; qa <= n; ++qa)
            for (int qb = 0; qb <= n; ++qb) {
                Sector& s = sectors[qa * (n + 1) + qb];
                s.qa = qa;
                s.qb = qb;
                s.sa = cb.block_size[qa];
                s.sb = cb.block_size[qb];
                s.ca = cb.block_size[n - qa];
                s.cb = cb.block_size[n - qb];
                s.rows = s.sa * s.sb;
                s.cols = s.ca * s.cb;
                s.offset = off;
                off += (long)s.rows * s.cols;
            }
        total = off;

        for (auto& s : sectors) {
            std::vector<std::map<int, double>> per_target(s.rows);
            auto local_row = [&](int a2, int b2) {
                return (cb.from_canonical[a2] - cb.block_offset[s.qa]) * s.sb +
                       (cb.from_canonical[b2] - cb.block_offset[s.qb]);
            };
            for (int ai = 0; ai < s.sa; ++ai)
                for (int bi = 0; bi < s.sb; ++bi) {
                    const int src = ai * s.sb + bi;
                    const unsigned a = (unsigned)cb.to_canonical[cb.block_offset[s.qa] + ai];
                    const unsigned b = (unsigned)cb.to_canonical[cb.block_offset[s.qb] + bi];
                    // bath jumps
                    for (int j = 0; j < n; ++j) {
                        if ((a >> j) & 1u || (b >> j) & 1u) continue;
                        const unsigned a1 = a | (1u << j), b1 = b | (1u << j);
                        const double sj =
                            ((popcount_below(a, j) + popcount_below(b, j)) & 1) ? -1.0 : 1.0;
                        for (int i = 0; i < n; ++i) {
                            if (i == j && !cfg.include_diagonal_jumps) continue;
                            if (!((a1 >> i) & 1u) || !((b1 >> i) & 1u)) continue;
                            const double si =
                                ((popcount_below(a1, i) + popcount_below(b1, i)) & 1) ? -1.0 : 1.0;
                            per_target[local_row(int(a1 ^ (1u << i)), int(b1 ^ (1u << i)))][src] +=
                                bath_rate * sj * si;
                        }
                    }
                    auto gval = [&](int q) {
                        return cfg.include_diagonal_jumps ? double(n - q) * (q + 1)
                                                          : double(n - q) * q;
                    };
                    per_target[src][src] += -0.5 * bath_rate * (gval(s.qa) + gval(s.qb));
                    // noise jumps: O X O^dag per quartic monomial
                    if (cfg.coupling_j > 0.0) {
                        for (int q = 0; q < p; ++q) {
                            const long long am = tables.lower_target[q][(int)a];
                            const long long bm = tables.lower_target[q][(int)b];
                            if (am < 0 || bm < 0) continue;
                            const double sl = tables.lower_sign[q][(int)a] * tables.lower_sign[q][(int)b];
                            for (int pi = 0; pi < p; ++pi) {
                                const long long a2 = tables.raise_target[pi][am];
                                const long long b2 = tables.raise_target[pi][bm];
                                if (a2 < 0 || b2 < 0) continue;
                                const double sr =
                                    tables.raise_sign[pi][am] * tables.raise_sign[pi][bm];
                                per_target[local_row((int)a2, (int)b2)][src] += noise_rate * sl * sr;
                            }
                        }
                        per_target[src][src] += -0.5 * (noise_diag[a] + noise_diag[b]);
                    }
                }
            s.row_ptr.assign(s.rows + 1, 0);
            for (int r = 0; r < s.rows; ++r)
                s.row_ptr[r + 1] = s.row_ptr[r] + (int)per_target[r].size();
            s.col_idx.resize(s.row_ptr[s.rows]);
            s.weight.resize(s.row_ptr[s.rows]);
            int k = 0;
            for (int r = 0; r < s.rows; ++r)
                for (const auto& [c, w] : per_target[r]) {
                    s.col_idx[k] = c;
                    s.weight[k] = w;
                    ++k;
                }
        }
    }

    void apply(const std::vector<Complex>& in, std::vector<Complex>& out) const {
        for (const auto& s : sectors) {
            const int nc = s.cols;
            for (int r = 0; r < s.rows; ++r) {
                Complex* o = out.data() + s.offset + (long)r * nc;
                std::fill(o, o + nc, Complex(0.0));
                for (int k = s.row_ptr[r]; k < s.row_ptr[r + 1]; ++k) {
                    const Complex* src = in.data() + s.offset + (long)s.col_idx[k] * nc;
                    const double w = s.weight[k];
                    for (int c = 0; c < nc; ++c) o[c] += w * src[c];
                }
            }
        }
    }

    void import_dense(const Matrix& rho, std::vector<Complex>& out) const {
        const Eigen::Index dc = Eigen::Index(1) << n;
        out.assign(total, Complex(0.0));
        for (const auto& s : sectors)
            for (int ai = 0; ai < s.sa; ++ai)
                for (int bi = 0; bi < s.sb; ++bi)
                    for (int xi = 0; xi < s.ca; ++xi)
                        for (int xj = 0; xj < s.cb; ++xj) {
                            const int a = cb.to_canonical[cb.block_offset[s.qa] + ai];
                            const int b = cb.to_canonical[cb.block_offset[s.qb] + bi];
                            const int x = cb.to_canonical[cb.block_offset[n - s.qa] + xi];
                            const int y = cb.to_canonical[cb.block_offset[n - s.qb] + xj];
                            out[s.offset + ((long)ai * s.sb + bi) * s.cols + (long)xi * s.cb + xj] =
                                rho((Eigen::Index)x * dc + a, (Eigen::Index)y * dc + b);
                        }
    }

    Matrix export_dense(const std::vector<Complex>& in) const {
        const Eigen::Index dc = Eigen::Index(1) << n;
        const Eigen::Index d = dc * dc;
        Matrix rho = Matrix::Zero(d, d);
        for (const auto& s : sectors)
            for (int ai = 0; ai < s.sa; ++ai)
                for (int bi = 0; bi < s.sb; ++bi)
                    for (int xi = 0; xi < s.ca; ++xi)
                        for (int xj = 0; xj < s.cb; ++xj) {
                            const int a = cb.to_canonical[cb.block_offset[s.qa] + ai];
                            const int b = cb.to_canonical[cb.block_offset[s.qb] + bi];
                            const int x = cb.to_canonical[cb.block_offset[n - s.qa] + xi];
                            const int y = cb.to_canonical[cb.block_offset[n - s.qb] + xj];
                            rho((Eigen::Index)x * dc + a, (Eigen::Index)y * dc + b) =
                                in[s.offset + ((long)ai * s.sb + bi) * s.cols + (long)xi * s.cb + xj];
                        }
        return rho;
    }
};

double norm2(const std::vector<Complex>& v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

}  // namespace

Matrix steady_state(const SimConfig& cfg, SteadyReport* report, double tol, long max_steps) {
    if (!(cfg.gamma > 0.0))
        throw std::invalid_argument("steady_state: requires gamma > 0");
    const AveragedGenerator gen(cfg);
    const ModeLayout layout = ModeLayout::paired(cfg.n_modes);
    const StateVector epr = build_epr_state(layout);
    const Matrix rho0 = epr.amps * epr.amps.adjoint();

    std::vector<Complex> x, y, tmp;
    gen.import_dense(rho0, x);
    y.assign(gen.total, Complex(0.0));
    tmp.assign(gen.total, Complex(0.0));

    // RK4 with a step bounded by the generator's diagonal scale
    double diag_scale = cfg.gamma * 2.0 * cfg.n_modes;
    const int pairs = cfg.n_modes * (cfg.n_modes - 1) / 2;
    diag_scale += 4.0 * cfg.coupling_j * pairs * pairs / std::pow((double)cfg.n_modes, 3);
    const double h = 0.5 / std::max(diag_scale, 1e-6);

    SteadyReport rep;
    double residual = 0.0;
    for (long it = 0; it < max_steps; ++it) {
        y = x;
        for (int m = 4; m >= 1; --m) {
            gen.apply(y, tmp);
            const double c = h / m;
            for (long k = 0; k < gen.total; ++k) y[k] = x[k] + c * tmp[k];
        }
        x.swap(y);
        if (it % 16 == 0 || it == max_steps - 1) {
            gen.apply(x, tmp);
            residual = norm2(tmp);
            if (residual < tol) {
                rep.converged = true;
                rep.iterations = it + 1;
                break;
            }
        }
        rep.iterations = it + 1;
    }
    rep.residual = residual;
    if (report) *report = rep;
    if (!rep.converged)
        throw std::runtime_error("steady_state: no convergence within the step budget (residual " +
                                 std::to_string(residual) + ")");
    return gen.export_dense(x);
}

Matrix averaged_generator_apply(const Matrix& rho, const SimConfig& cfg) {
    // bath part via the literal dense dissipator, noise part via monomials
    const ModeLayout layout = ModeLayout::paired(cfg.n_modes);
    Matrix out = dissipator(rho, layout, cfg.gamma, cfg.include_diagonal_jumps);
    if (cfg.coupling_j > 0.0) {
        const int n = cfg.n_modes;
        const double rate = 2.0 * cfg.coupling_j / (double(n) * n * n);
        const PairBasis pb(n);
        std::vector<Matrix> ann;
        for (int m = 0; m < n; ++m) ann.push_back(build_annihilator(m, layout).mat);
        Matrix gsum = Matrix::Zero(rho.rows(), rho.cols());
        for (const auto& [i, j] : pb.pairs)
            for (const auto& [k, l] : pb.pairs) {
                const Matrix o = ann[i].adjoint() * ann[j].adjoint() * ann[k] * ann[l];
                out += rate * (o * rho * o.adjoint());
                gsum += rate * (o.adjoint() * o);
            }
        out -= 0.5 * (gsum * rho + rho * gsum);
    }
    return out;
}

}  // namespace bsyk
