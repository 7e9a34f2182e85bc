#include "bsyk/fock.hpp"

#include <cmath>

namespace bsyk {

FockOperator build_annihilator(int mode, const ModeLayout& layout) {
    layout.validate();
    if (mode < 0 || mode >= layout.total_modes())
        throw std::out_of_range("build_annihilator: mode index out of range");
    const Eigen::Index d = layout.dim();
    Matrix m = Matrix::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        long long target;
        double sign = 1.0;
        annihilate_bit((unsigned long long)b, mode, target, sign);
        if (target >= 0) m(target, b) = sign;
    }
    return {std::move(m), layout};
}

StateVector build_epr_state(const ModeLayout& layout) {
    layout.validate();
    if (layout.n_aux != layout.n_system)
        throw std::invalid_argument("build_epr_state: requires one auxiliary mode per system mode");
    const int n = layout.n_system;
    const Eigen::Index d = layout.dim();
    Vector psi = Vector::Zero(d);
    psi(0) = 1.0;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < n; ++i) {
        Vector next = Vector::Zero(d);
        for (Eigen::Index b = 0; b < d; ++b) {
            if (psi(b) == Complex(0.0)) continue;
            long long t;
            double s = 1.0;
            create_bit((unsigned long long)b, i, t, s);
            if (t >= 0) next(t) += s * inv_sqrt2 * psi(b);
            create_bit((unsigned long long)b, n + i, t, s);
            if (t >= 0) next(t) += s * inv_sqrt2 * psi(b);
        }
        psi.swap(next);
    }
    return {std::move(psi), layout};
}

ChargeSet build_charges(const ModeLayout& layout) {
    layout.validate();
    if (layout.n_aux != layout.n_system)
        throw std::invalid_argument("build_charges: requires one auxiliary mode per system mode");
    const int n = layout.n_system;
    const Eigen::Index d = layout.dim();
    ChargeSet cs;
    cs.q_total.layout = cs.q_sys.layout = layout;
    cs.q_total.mat = Matrix::Zero(d, d);
    cs.q_sys.mat = Matrix::Zero(d, d);
    cs.n_aux.resize(n);
    for (int i = 0; i < n; ++i) {
        cs.n_aux[i].layout = layout;
        cs.n_aux[i].mat = Matrix::Zero(d, d);
    }
    for (Eigen::Index b = 0; b < d; ++b) {
        const auto bits = (unsigned long long)b;
        const int q_sys = __builtin_popcountll(bits & ((1ull << n) - 1));
        const int q_all = __builtin_popcountll(bits);
        cs.q_sys.mat(b, b) = double(q_sys);
        cs.q_total.mat(b, b) = double(q_all - n);
        for (int i = 0; i < n; ++i)
            if ((bits >> (n + i)) & 1ull) cs.n_aux[i].mat(b, b) = 1.0;
    }
    return cs;
}

SectorProjector block_projector(int charge_value, const FockOperator& charge) {
    const Eigen::Index d = charge.mat.rows();
    SectorProjector p;
    p.op.layout = charge.layout;
    p.op.mat = Matrix::Zero(d, d);
    for (Eigen::Index b = 0; b < d; ++b) {
        if (std::abs(charge.mat(b, b) - double(charge_value)) < 1e-9) {
            p.op.mat(b, b) = 1.0;
            ++p.sector_dim;
        }
    }
    return p;
}

ChargeBasis::ChargeBasis(int n) : n_modes(n), dim(1 << n) {
    to_canonical.reserve(dim);
    from_canonical.assign(dim, -1);
    block_offset.assign(n + 1, 0);
    block_size.assign(n + 1, 0);
    charge_of.assign(dim, 0);
    for (int q = 0; q <= n; ++q) {
        block_offset[q] = (int)to_canonical.size();
        for (int b = 0; b < dim; ++b) {
            if (__builtin_popcount((unsigned)b) == q) {
                from_canonical[b] = (int)to_canonical.size();
                charge_of[(int)to_canonical.size()] = q;
                to_canonical.push_back(b);
                ++block_size[q];
            }
        }
    }
}

}  // namespace bsyk
