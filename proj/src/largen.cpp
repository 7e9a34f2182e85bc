#include "bsyk/largen.hpp"

#include <cmath>
#include <stdexcept>

namespace bsyk::largen {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kLn2 = 0.69314718055994530942;
}  // namespace

double SaddleInput::decay() const { return decay_rate(coupling_j, q); }

bool SaddleInput::weak_coupling_ok() const { return gamma / decay() <= 0.2 + 1e-12; }

void SaddleInput::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("SaddleInput: gamma must be > 0");
    if (!(coupling_j > 0.0)) throw std::invalid_argument("SaddleInput: J must be > 0");
    if (!(n >= 1.0)) throw std::invalid_argument("SaddleInput: n must be >= 1");
    decay_rate(coupling_j, q);
    if (gamma / decay() > 0.5)
        throw std::invalid_argument("SaddleInput: gamma/Gamma > 0.5 is outside the weak-decoherence regime");
}

double gamma_fn(double x) {
    if (!(x >= 0.1 && x <= 30.0)) throw std::domain_error("gamma_fn: argument outside [0.1, 30]");
    return std::tgamma(x);
}

double decay_rate(double coupling_j, int q) {
    if (q < 4 || q % 2 != 0) throw std::invalid_argument("decay_rate: q must be even and >= 4");
    return coupling_j / std::pow(2.0, q - 2);
}

double phi_n_coefficient(double n) {
    return std::pow(2.0, n - 1.0) * gamma_fn(n - 0.5) / (std::sqrt(kPi) * gamma_fn(n));
}

double action_density(double phi, const SaddleInput& in) {
    if (phi < 0.0) throw std::invalid_argument("action_density: phi must be >= 0");
    const double g = in.gamma, n = in.n, dec = in.decay();
    return n * g / 4.0 + n * phi * phi / g - n * phi * phi / (2.0 * dec) -
           phi_n_coefficient(n) * std::pow(dec, 1.0 - n) * std::pow(phi, n);
}

double action_density_leading(double phi, const SaddleInput& in) {
    const double g = in.gamma, n = in.n, dec = in.decay();
    return n * g / 4.0 + n * phi * phi / g -
           phi_n_coefficient(n) * std::pow(dec, 1.0 - n) * std::pow(phi, n);
}

double stationarity_residual(double phi, const SaddleInput& in) {
    const double g = in.gamma, n = in.n, dec = in.decay();
    return 2.0 * n * phi / g -
           n * phi_n_coefficient(n) * std::pow(dec, 1.0 - n) * std::pow(phi, n - 1.0);
}

namespace {

double phi_star_closed(const SaddleInput& in) {
    const double n = in.n, dec = in.decay();
    if (std::abs(n - 2.0) < 1e-14) return 0.0;
    if (n > 2.0)
        throw std::invalid_argument("phi_star: closed form is exposed only for n in [1, 2)");
    const double inner =
        in.gamma / std::sqrt(kPi) * std::pow(dec, 1.0 - n) * gamma_fn(n - 0.5) / gamma_fn(n);
    return 0.5 * std::pow(inner, 1.0 / (2.0 - n));
}

// root of the leading-order stationarity condition in (0, Gamma]; the
// bracket function h(phi) = 2 phi^(2-n)/gamma - c_n Gamma^(1-n) is monotone
// for n < 2. Bisection runs on ln(phi): the root shrinks like a power
// 1/(2-n) and a linear-scale bracket cannot resolve it near n = 2.
double phi_star_numeric(const SaddleInput& in, bool& boundary) {
    const double n = in.n, dec = in.decay();
    boundary = false;
    if (std::abs(n - 2.0) < 1e-14) return 0.0;
    const double target = phi_n_coefficient(n) * std::pow(dec, 1.0 - n);
    auto h = [&](double x) { return 2.0 * std::exp((2.0 - n) * x) / in.gamma - target; };
    if (n > 2.0) {
        // interior stationary point is a maximum of the leading action;
        // the minimizer continuously connected to phi = 0 is the boundary
        boundary = true;
        return 0.0;
    }
    double lo = std::log(1e-280), hi = std::log(dec);
    if (h(hi) <= 0.0 || h(lo) >= 0.0) {
        boundary = true;
        return 0.0;
    }
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

}  // namespace

SaddleResult phi_star(const SaddleInput& in, PhiMethod method) {
    in.validate();
    SaddleResult r;
    r.saddle_label = "early";
    r.validity_warning = !in.weak_coupling_ok();
    if (method == PhiMethod::closed) {
        r.phi_star = phi_star_closed(in);
    } else {
        r.phi_star = phi_star_numeric(in, r.boundary_fallback);
    }
    r.action_density = action_density(r.phi_star, in);
    return r;
}

namespace {

// saddle value of phi across the full n range: closed form below n = 2,
// boundary zero at and above
double saddle_phi(const SaddleInput& in) {
    if (in.n < 2.0) return phi_star(in, PhiMethod::closed).phi_star;
    return phi_star(in, PhiMethod::numeric).phi_star;
}

}  // namespace

double early_correlator(const SaddleInput& in) {
    in.validate();
    const double n = in.n, dec = in.decay();
    if (std::abs(n - 1.0) < 1e-14) return 16.0 / (9.0 * kPi * kPi) * in.gamma / dec;
    const double phi = saddle_phi(in);
    const double ratio = gamma_fn((n + 1.0) / 2.0) / gamma_fn(n / 2.0 + 2.0);
    return std::pow(2.0, n) / kPi * ratio * ratio * std::pow(phi / dec, n);
}

double s0_rate(double gamma, double decay) {
    if (!(gamma > 0.0) || gamma >= decay)
        throw std::invalid_argument("s0_rate: requires 0 < gamma < Gamma");
    return 0.5 * gamma * std::log(4.0 * std::sqrt(std::exp(1.0)) * decay / gamma);
}

double entropy_rate(const SaddleInput& in) {
    in.validate();
    if (std::abs(in.n - 2.0) < 1e-14) return in.gamma / 2.0;
    if (std::abs(in.n - 1.0) < 1e-14) return s0_rate(in.gamma, in.decay());
    return action_density_leading(saddle_phi(in), in) / (in.n - 1.0);
}

double entropy_rate_continuation(const SaddleInput& in) {
    SaddleInput shifted = in;
    shifted.n = 1.0 + 1e-6;
    const double phi = phi_star(shifted, PhiMethod::closed).phi_star;
    return action_density_leading(phi, shifted) / (shifted.n - 1.0);
}

double page_time(const SaddleInput& in) {
    const double rate = entropy_rate(in);
    if (!(rate > 0.0)) throw std::invalid_argument("page_time: entropy rate must be > 0");
    return 2.0 * kLn2 / rate;
}

SaddleResult early_saddle(const SaddleInput& in) {
    SaddleResult r = phi_star(in, in.n < 2.0 ? PhiMethod::closed : PhiMethod::numeric);
    r.entropy_rate = entropy_rate(in);
    r.correlator = early_correlator(in);
    return r;
}

SaddleResult late_saddle(const SaddleInput& in) {
    SaddleResult r;
    r.saddle_label = "late";
    r.phi_star = in.gamma / 2.0;
    r.entropy_rate = 0.0;  // saturated
    r.action_density = 0.0;
    r.correlator = 0.25;
    return r;
}

PiecewisePoint dominant_saddle(const SaddleInput& in, double t) {
    if (t < 0.0) throw std::invalid_argument("dominant_saddle: t must be >= 0");
    const double t_page = page_time(in);
    const double rate = entropy_rate(in);
    PiecewisePoint p;
    p.t = t;
    p.entropy_per_fermion = std::min(rate * t, 2.0 * kLn2);
    if (t <= t_page) {
        p.correlator = early_correlator(in);
        p.saddle_label = "early";
    } else {
        p.correlator = 0.25;
        p.saddle_label = "late";
    }
    return p;
}

double two_point_g(double u, const SaddleInput& in) {
    return 0.5 * std::exp(-in.decay() * std::abs(u) / 2.0);
}

}  // namespace bsyk::largen
