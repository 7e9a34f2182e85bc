#include "bsyk/engine.hpp"

#include <cmath>
#include <map>

#include <Eigen/Eigenvalues>

#include "bsyk/rng.hpp"

namespace bsyk {

using RowMat = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace {

// full-space annihilator product L_ij = c_i c_j^dag
Matrix full_jump(int i, int j, const ModeLayout& layout) {
    const Matrix ci = build_annihilator(i, layout).mat;
    const Matrix cj = build_annihilator(j, layout).mat;
    return ci * cj.adjoint();
}

std::vector<Matrix> unitary_blocks(const CouplingSample& sample, const MonomialTables& tables,
                                   const ChargeBasis& cb, double dt) {
    std::vector<Matrix> ublocks = build_system_hamiltonian_blocks(sample, tables, cb);
    for (auto& h : ublocks) {
        if (h.rows() == 0) continue;
        if (h.cwiseAbs().maxCoeff() == 0.0) {
            h = Matrix::Identity(h.rows(), h.cols());
            continue;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        Vector phases(h.rows());
        for (Eigen::Index k = 0; k < h.rows(); ++k)
            phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * dt));
        h = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    }
    return ublocks;
}

}  // namespace

Matrix dissipator(const Matrix& rho, const ModeLayout& layout, double gamma,
                  bool include_diagonal) {
    const int n = layout.n_system;
    const Eigen::Index d = layout.dim();
    if (rho.rows() != d || rho.cols() != d)
        throw std::invalid_argument("dissipator: density matrix does not match layout");
    Matrix out = Matrix::Zero(d, d);
    Matrix gsum = Matrix::Zero(d, d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j && !include_diagonal) continue;
            const Matrix l = full_jump(i, j, layout);
            out += l * rho * l.adjoint();
            gsum += l.adjoint() * l;
        }
    }
    out -= 0.5 * (gsum * rho + rho * gsum);
    out *= gamma / n;
    return out;
}

// ---------------------------------------------------------------- reference

ReferenceStepper::ReferenceStepper(const SimConfig& cfg)
    : cfg_(cfg), layout_(ModeLayout::paired(cfg.n_modes)), tables_(cfg.n_modes) {
    const int n = cfg_.n_modes;
    Matrix gsum = Matrix::Zero(layout_.dim(), layout_.dim());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j && !cfg_.include_diagonal_jumps) continue;
            jump_ops_.push_back(full_jump(i, j, layout_));
            gsum += jump_ops_.back().adjoint() * jump_ops_.back();
        }
    gdiag_ = gsum.diagonal().real();
}

Matrix ReferenceStepper::apply_dissipator(const Matrix& rho) const {
    const double rate = cfg_.gamma / cfg_.n_modes;
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& l : jump_ops_) out += l * rho * l.adjoint();
    out.noalias() -= 0.5 * (gdiag_.asDiagonal() * rho + rho * gdiag_.asDiagonal());
    return rate * out;
}

void ReferenceStepper::rk4_half(Matrix& rho) const {
    const double h = 0.5 * cfg_.dt;
    const Matrix k1 = apply_dissipator(rho);
    const Matrix k2 = apply_dissipator(rho + (0.5 * h) * k1);
    const Matrix k3 = apply_dissipator(rho + (0.5 * h) * k2);
    const Matrix k4 = apply_dissipator(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

TrajectoryState ReferenceStepper::make_initial(int traj_index) const {
    TrajectoryState st;
    const StateVector epr = build_epr_state(layout_);
    st.rho = epr.amps * epr.amps.adjoint();
    st.t = 0.0;
    st.traj_index = traj_index;
    st.rng = make_stream(cfg_.master_seed, (uint64_t)traj_index, StreamTag::trajectory);
    return st;
}

void ReferenceStepper::step(TrajectoryState& state) const {
    CouplingSample sample;
    if (cfg_.coupling_j > 0.0)
        sample = sample_couplings(state.rng, cfg_.n_modes, cfg_.coupling_j, cfg_.dt);
    if (cfg_.gamma > 0.0) rk4_half(state.rho);
    if (cfg_.coupling_j > 0.0) {
        const FockOperator h = build_hamiltonian(sample, layout_);
        Eigen::SelfAdjointEigenSolver<Matrix> es(h.mat);
        Vector phases(h.mat.rows());
        for (Eigen::Index k = 0; k < h.mat.rows(); ++k)
            phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * cfg_.dt));
        const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
        state.rho = u * state.rho * u.adjoint();
    }
    if (cfg_.gamma > 0.0) rk4_half(state.rho);
    const double tr = state.rho.trace().real();
    const double drift = std::abs(tr - 1.0);
    state.max_trace_drift = std::max(state.max_trace_drift, drift);
    if (drift > 1e-12) {
        state.rho /= tr;
        ++state.renorm_count;
    }
    state.t += cfg_.dt;
}

// --------------------------------------------------------------------- fast

FastStepper::FastStepper(const SimConfig& cfg)
    : cfg_(cfg),
      layout_(ModeLayout::paired(cfg.n_modes)),
      cb_(cfg.n_modes),
      tables_(cfg.n_modes) {
    const int n = cfg_.n_modes;
    sectors_.resize((n + 1) * (n + 1));
    long off = 0;
    for (int qa = 0; qa <= n; ++qa)
        for (int qb = 0; qb <= n; ++qb) {
            Sector& s = sectors_[qa * (n + 1) + qb];
            s.qa = qa;
            s.qb = qb;
            s.sa = cb_.block_size[qa];
            s.sb = cb_.block_size[qb];
            s.ca = cb_.block_size[n - qa];
            s.cb = cb_.block_size[n - qb];
            s.rows = s.sa * s.sb;
            s.cols = s.ca * s.cb;
            s.offset = off;
            off += (long)s.rows * s.cols;
        }
    total_size_ = off;
    state_.assign(total_size_, Complex(0.0));
    buf_y_.assign(total_size_, Complex(0.0));
    buf_tmp_.assign(total_size_, Complex(0.0));
    build_dissipator();
}

void FastStepper::build_dissipator() {
    const int n = cfg_.n_modes;
    const double rate = cfg_.gamma / n;
    for (auto& s : sectors_) {
        // bucket contributions by target row; weights are real (JW signs)
        std::vector<std::map<int, double>> per_target(s.rows);
        auto local_row = [&](int a2, int b2) {
            const int ai = cb_.from_canonical[a2] - cb_.block_offset[s.qa];
            const int bi = cb_.from_canonical[b2] - cb_.block_offset[s.qb];
            return ai * s.sb + bi;
        };
        for (int ai = 0; ai < s.sa; ++ai)
            for (int bi = 0; bi < s.sb; ++bi) {
                const int src = ai * s.sb + bi;
                const unsigned a = (unsigned)cb_.to_canonical[cb_.block_offset[s.qa] + ai];
                const unsigned b = (unsigned)cb_.to_canonical[cb_.block_offset[s.qb] + bi];
                // jump part: sum_{ij} L_ij X L_ij^dag with L_ij = c_i c_j^dag;
                // raise mode j on both sides, then lower mode i
                for (int j = 0; j < n; ++j) {
                    if ((a >> j) & 1u || (b >> j) & 1u) continue;
                    const unsigned a1 = a | (1u << j), b1 = b | (1u << j);
                    const double sj = ((popcount_below(a, j) + popcount_below(b, j)) & 1) ? -1.0 : 1.0;
                    for (int i = 0; i < n; ++i) {
                        if (i == j && !cfg_.include_diagonal_jumps) continue;
                        if (!((a1 >> i) & 1u) || !((b1 >> i) & 1u)) continue;
                        const unsigned a2 = a1 ^ (1u << i), b2 = b1 ^ (1u << i);
                        const double si =
                            ((popcount_below(a1, i) + popcount_below(b1, i)) & 1) ? -1.0 : 1.0;
                        per_target[local_row((int)a2, (int)b2)][src] += rate * sj * si;
                    }
                }
                // -1/2 {sum L^dag L, X}: diagonal with g(q) per side
                auto gval = [&](int q) {
                    return cfg_.include_diagonal_jumps ? double(n - q) * (q + 1) : double(n - q) * q;
                };
                per_target[src][src] += -0.5 * rate * (gval(s.qa) + gval(s.qb));
            }
        s.row_ptr.assign(s.rows + 1, 0);
        for (int r = 0; r < s.rows; ++r) s.row_ptr[r + 1] = s.row_ptr[r] + (int)per_target[r].size();
        s.col_idx.resize(s.row_ptr[s.rows]);
        s.weight.resize(s.row_ptr[s.rows]);
        int k = 0;
        for (int r = 0; r < s.rows; ++r)
            for (const auto& [src, w] : per_target[r]) {
                s.col_idx[k] = src;
                s.weight[k] = w;
                ++k;
            }
    }
}

void FastStepper::apply_dissipator_compact(const std::vector<Complex>& in,
                                           std::vector<Complex>& out) const {
    for (const auto& s : sectors_) {
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

void FastStepper::rk4_half() {
    // For the constant linear generator the classical RK4 step equals the
    // degree-4 Taylor polynomial of exp(h D); evaluate it Horner-style.
    const double h = 0.5 * cfg_.dt;
    buf_y_ = state_;
    for (int m = 4; m >= 1; --m) {
        apply_dissipator_compact(buf_y_, buf_tmp_);
        const double c = h / m;
        for (long k = 0; k < total_size_; ++k) buf_y_[k] = state_[k] + c * buf_tmp_[k];
    }
    state_.swap(buf_y_);
}

void FastStepper::apply_unitary(const std::vector<Matrix>& ublocks) {
    // rho -> U rho U^dag: contract U on the left c index (a), conj(U) on the
    // right c index (b); the xi columns ride along.
    for (const auto& s : sectors_) {
        const long width = (long)s.sb * s.cols;
        Eigen::Map<const RowMat> in(state_.data() + s.offset, s.sa, width);
        Eigen::Map<RowMat> mid(buf_tmp_.data() + s.offset, s.sa, width);
        mid.noalias() = ublocks[s.qa] * in;
        for (int ai = 0; ai < s.sa; ++ai) {
            Eigen::Map<const RowMat> inb(buf_tmp_.data() + s.offset + (long)ai * width, s.sb, s.cols);
            Eigen::Map<RowMat> outb(state_.data() + s.offset + (long)ai * width, s.sb, s.cols);
            outb.noalias() = ublocks[s.qb].conjugate() * inb;
        }
    }
}

double FastStepper::trace() const {
    const int n = cfg_.n_modes;
    double tr = 0.0;
    for (int q = 0; q <= n; ++q) {
        const Sector& s = sectors_[q * (n + 1) + q];
        for (int ai = 0; ai < s.sa; ++ai)
            for (int xi = 0; xi < s.ca; ++xi)
                tr += state_[s.offset + ((long)ai * s.sb + ai) * s.cols + (long)xi * s.cb + xi].real();
    }
    return tr;
}

void FastStepper::reset(int traj_index) {
    const StateVector epr = build_epr_state(layout_);
    const Matrix rho = epr.amps * epr.amps.adjoint();
    load(rho, traj_index, make_stream(cfg_.master_seed, (uint64_t)traj_index, StreamTag::trajectory),
         0.0);
    max_trace_drift_ = 0.0;
    renorm_count_ = 0;
}

void FastStepper::load(const Matrix& rho, int traj_index, std::mt19937_64 rng, double t) {
    const int n = cfg_.n_modes;
    const Eigen::Index dc = layout_.system_dim();
    double captured = 0.0;
    for (const auto& s : sectors_) {
        for (int ai = 0; ai < s.sa; ++ai)
            for (int bi = 0; bi < s.sb; ++bi) {
                const int a = cb_.to_canonical[cb_.block_offset[s.qa] + ai];
                const int b = cb_.to_canonical[cb_.block_offset[s.qb] + bi];
                for (int xi = 0; xi < s.ca; ++xi)
                    for (int xj = 0; xj < s.cb; ++xj) {
                        const int x = cb_.to_canonical[cb_.block_offset[n - s.qa] + xi];
                        const int y = cb_.to_canonical[cb_.block_offset[n - s.qb] + xj];
                        const Complex v = rho((Eigen::Index)x * dc + a, (Eigen::Index)y * dc + b);
                        state_[s.offset + ((long)ai * s.sb + bi) * s.cols + (long)xi * s.cb + xj] = v;
                        captured += std::norm(v);
                    }
            }
    }
    const double total = rho.squaredNorm();
    if (total > 0.0 && total - captured > 1e-10 * total)
        throw std::invalid_argument(
            "FastStepper::load: state has weight outside the strong-symmetry support");
    traj_index_ = traj_index;
    rng_ = std::move(rng);
    t_ = t;
}

void FastStepper::extract(Matrix& rho_out) const {
    const int n = cfg_.n_modes;
    const Eigen::Index dc = layout_.system_dim();
    const Eigen::Index d = layout_.dim();
    rho_out = Matrix::Zero(d, d);
    for (const auto& s : sectors_) {
        for (int ai = 0; ai < s.sa; ++ai)
            for (int bi = 0; bi < s.sb; ++bi) {
                const int a = cb_.to_canonical[cb_.block_offset[s.qa] + ai];
                const int b = cb_.to_canonical[cb_.block_offset[s.qb] + bi];
                for (int xi = 0; xi < s.ca; ++xi)
                    for (int xj = 0; xj < s.cb; ++xj) {
                        const int x = cb_.to_canonical[cb_.block_offset[n - s.qa] + xi];
                        const int y = cb_.to_canonical[cb_.block_offset[n - s.qb] + xj];
                        rho_out((Eigen::Index)x * dc + a, (Eigen::Index)y * dc + b) =
                            state_[s.offset + ((long)ai * s.sb + bi) * s.cols + (long)xi * s.cb + xj];
                    }
            }
    }
}

void FastStepper::step() {
    CouplingSample sample;
    if (cfg_.coupling_j > 0.0)
        sample = sample_couplings(rng_, cfg_.n_modes, cfg_.coupling_j, cfg_.dt);
    if (cfg_.gamma > 0.0) rk4_half();
    if (cfg_.coupling_j > 0.0)
        apply_unitary(unitary_blocks(sample, tables_, cb_, cfg_.dt));
    if (cfg_.gamma > 0.0) rk4_half();
    const double tr = trace();
    const double drift = std::abs(tr - 1.0);
    max_trace_drift_ = std::max(max_trace_drift_, drift);
    if (drift > 1e-12) {
        const double inv = 1.0 / tr;
        for (auto& v : state_) v *= inv;
        ++renorm_count_;
    }
    t_ += cfg_.dt;
}

void step(TrajectoryState& state, const SimConfig& cfg) {
    if (cfg.backend == Backend::reference) {
        const ReferenceStepper stepper(cfg);
        stepper.step(state);
    } else {
        FastStepper stepper(cfg);
        stepper.load(state.rho, state.traj_index, state.rng, state.t);
        stepper.step();
        stepper.extract(state.rho);
        state.t = stepper.t();
        state.rng = stepper.rng();
        state.max_trace_drift = std::max(state.max_trace_drift, stepper.max_trace_drift());
        state.renorm_count += stepper.renorm_count();
    }
}

}  // namespace bsyk
