#include "bsyk/couplings.hpp"

#include <cmath>

namespace bsyk {

CouplingSample sample_couplings(std::mt19937_64& rng, int n_modes, double coupling_j, double dt) {
    const PairBasis pb(n_modes);
    const int p = pb.size();
    CouplingSample s;
    s.n_modes = n_modes;
    if (coupling_j == 0.0) {
        s.pair_matrix = Matrix::Zero(p, p);
        return s;
    }
    const double n3 = double(n_modes) * n_modes * n_modes;
    const double sd = std::sqrt(coupling_j / (n3 * dt));
    std::normal_distribution<double> gauss(0.0, sd);
    Matrix a(p, p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            a(r, c) = Complex(re, im);
        }
    s.pair_matrix = (a + a.adjoint()) / std::sqrt(2.0);
    return s;
}

}  // namespace bsyk
