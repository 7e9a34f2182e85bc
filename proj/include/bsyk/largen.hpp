#pragma once

#include <string>

namespace bsyk::largen {

// Saddle-point evaluation of the large-N theory. Inputs are the replica
// index n (real, >= 1), the decoherence strength gamma, the coupling J and
// the interaction order q (the simulator is quartic; generic q lives only
// here).
struct SaddleInput {
    double n = 2.0;
    double gamma = 0.05;
    double coupling_j = 1.0;
    int q = 4;

    double decay() const;            // Gamma = J / 2^(q-2)
    bool weak_coupling_ok() const;   // gamma/Gamma <= 0.2 validity window
    void validate() const;
};

struct SaddleResult {
    double phi_star = 0.0;
    double action_density = 0.0;  // delta S / (t N)
    double entropy_rate = 0.0;    // per fermion per unit time
    double correlator = 0.0;      // F^(n)
    std::string saddle_label;     // "early" | "late"
    bool validity_warning = false;
    bool boundary_fallback = false;  // numeric minimizer pinned to phi = 0
};

enum class PhiMethod { closed, numeric };

// Gamma function on [0.1, 30], relative error < 1e-10.
double gamma_fn(double x);

// quasi-particle decay rate Gamma = J / 2^(q-2); q even, q >= 4
double decay_rate(double coupling_j, int q);

// c_n = 2^(n-1) Gamma(n - 1/2) / (sqrt(pi) Gamma(n))
double phi_n_coefficient(double n);

// action density per (N t):
//   n g/4 + n phi^2/g - n phi^2/(2 Gamma) - c_n Gamma^(1-n) phi^n
double action_density(double phi, const SaddleInput& in);

// without the phi^2/(2 Gamma) cross term; the closed-form minimizer solves
// the stationarity of this leading-order (in gamma/Gamma) density
double action_density_leading(double phi, const SaddleInput& in);
// d/dphi of the leading-order density
double stationarity_residual(double phi, const SaddleInput& in);

// Inter-replica field at the early-time saddle. The closed form is the
// printed minimizer, valid for n in [1, 2); n = 2 gives phi = 0. The
// numeric method root-finds the leading-order stationarity condition on
// [0, Gamma] to 1e-12 in phi; above n = 2 no interior minimum connected to
// phi = 0 exists and the boundary value 0 is returned flagged.
SaddleResult phi_star(const SaddleInput& in, PhiMethod method);

// early-time correlator: (2^n/pi) (G((n+1)/2)/G(n/2+2))^2 (phi/Gamma)^n,
// with the closed n -> 1 limit 16 gamma / (9 pi^2 Gamma)
double early_correlator(const SaddleInput& in);

// per-fermion entropy growth rate: gamma/2 at n = 2, s0 at n = 1, otherwise
// the leading-order action density at the saddle divided by (n-1)
double entropy_rate(const SaddleInput& in);

// s0 = (gamma/2) ln(4 sqrt(e) Gamma/gamma)
double s0_rate(double gamma, double decay);

// numeric n -> 1 continuation of the rate (evaluated at n = 1 + 1e-6); it
// approaches (gamma/2) ln(4 e Gamma/gamma), which differs from s0 by a
// factor sqrt(e) inside the logarithm. Reported side by side, never
// silently substituted.
double entropy_rate_continuation(const SaddleInput& in);

// crossing of N * rate * t with the 2 N ln 2 ceiling
double page_time(const SaddleInput& in);

SaddleResult early_saddle(const SaddleInput& in);
// phi = gamma/2, entropy 2 ln 2 per fermion, F = 1/4, independent of n, gamma
SaddleResult late_saddle(const SaddleInput& in);

struct PiecewisePoint {
    double t = 0.0;
    double entropy_per_fermion = 0.0;  // min(rate * t, 2 ln 2)
    double correlator = 0.0;
    std::string saddle_label;
};

// early values for t < t_Page, late values beyond; entropy continuous at the
// crossing, correlator jumps (first-order transition)
PiecewisePoint dominant_saddle(const SaddleInput& in, double t);

// two-point function (1/2) exp(-Gamma |u| / 2)
double two_point_g(double u, const SaddleInput& in);

}  // namespace bsyk::largen
