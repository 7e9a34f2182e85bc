#include "bsyk/hamiltonian.hpp"

namespace bsyk {

MonomialTables::MonomialTables(int n) : n_modes(n), dim(1 << n), pairs(n) {
    const int p = pairs.size();
    lower_target.assign(p, std::vector<long long>(dim));
    lower_sign.assign(p, std::vector<double>(dim, 1.0));
    raise_target.assign(p, std::vector<long long>(dim));
    raise_sign.assign(p, std::vector<double>(dim, 1.0));
    for (int q = 0; q < p; ++q) {
        const auto [k, l] = pairs.pairs[q];
        for (int a = 0; a < dim; ++a) {
            long long t1, t2;
            double s1 = 1.0, s2 = 1.0;
            annihilate_bit((unsigned long long)a, l, t1, s1);
            if (t1 < 0) {
                lower_target[q][a] = -1;
                continue;
            }
            annihilate_bit((unsigned long long)t1, k, t2, s2);
            lower_target[q][a] = t2;
            lower_sign[q][a] = s1 * s2;
        }
    }
    for (int pi = 0; pi < p; ++pi) {
        const auto [i, j] = pairs.pairs[pi];
        for (int a = 0; a < dim; ++a) {
            long long t1, t2;
            double s1 = 1.0, s2 = 1.0;
            create_bit((unsigned long long)a, j, t1, s1);
            if (t1 < 0) {
                raise_target[pi][a] = -1;
                continue;
            }
            create_bit((unsigned long long)t1, i, t2, s2);
            raise_target[pi][a] = t2;
            raise_sign[pi][a] = s1 * s2;
        }
    }
}

Matrix build_system_hamiltonian(const CouplingSample& sample, const MonomialTables& tables) {
    if (sample.n_modes != tables.n_modes)
        throw std::invalid_argument("build_system_hamiltonian: sample/table dimension mismatch");
    const int d = tables.dim;
    const int p = tables.pairs.size();
    Matrix h = Matrix::Zero(d, d);
    for (int a = 0; a < d; ++a) {
        for (int q = 0; q < p; ++q) {
            const long long mid = tables.lower_target[q][a];
            if (mid < 0) continue;
            const double s1 = tables.lower_sign[q][a];
            for (int pi = 0; pi < p; ++pi) {
                const long long out = tables.raise_target[pi][mid];
                if (out < 0) continue;
                h(out, a) += sample.pair_matrix(pi, q) * (s1 * tables.raise_sign[pi][mid]);
            }
        }
    }
    return h;
}

FockOperator build_hamiltonian(const CouplingSample& sample, const ModeLayout& layout) {
    layout.validate();
    if (sample.n_modes != layout.n_system)
        throw std::invalid_argument("build_hamiltonian: sample does not match layout");
    const MonomialTables tables(layout.n_system);
    const Matrix hc = build_system_hamiltonian(sample, tables);
    const Eigen::Index dc = layout.system_dim();
    const Eigen::Index dxi = layout.aux_dim();
    FockOperator h;
    h.layout = layout;
    h.mat = Matrix::Zero(layout.dim(), layout.dim());
    // c modes are the low bits: the full operator is I_aux (x) H_c
    for (Eigen::Index x = 0; x < dxi; ++x)
        h.mat.block(x * dc, x * dc, dc, dc) = hc;
    return h;
}

std::vector<Matrix> build_system_hamiltonian_blocks(const CouplingSample& sample,
                                                    const MonomialTables& tables,
                                                    const ChargeBasis& basis) {
    const int n = tables.n_modes;
    const int p = tables.pairs.size();
    std::vector<Matrix> blocks(n + 1);
    for (int q = 0; q <= n; ++q) blocks[q] = Matrix::Zero(basis.block_size[q], basis.block_size[q]);
    for (int idx = 0; idx < basis.dim; ++idx) {
        const int a = basis.to_canonical[idx];
        const int qa = basis.charge_of[idx];
        const int col = idx - basis.block_offset[qa];
        for (int q = 0; q < p; ++q) {
            const long long mid = tables.lower_target[q][a];
            if (mid < 0) continue;
            const double s1 = tables.lower_sign[q][a];
            for (int pi = 0; pi < p; ++pi) {
                const long long out = tables.raise_target[pi][mid];
                if (out < 0) continue;
                const int row = basis.from_canonical[out] - basis.block_offset[qa];
                blocks[qa](row, col) += sample.pair_matrix(pi, q) * (s1 * tables.raise_sign[pi][mid]);
            }
        }
    }
    return blocks;
}

}  // namespace bsyk
