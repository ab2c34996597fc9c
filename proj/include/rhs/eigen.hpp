#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>

#include "rhs/model.hpp"

namespace rhs {

// The seven eigenfunction families.  Chi-type families are anchored at the
// origin (region 1 seed: sin, cos, or sinh-like), Theta-type families at
// infinity (region 3 seed: a single decaying or outgoing exponential).
enum class Family {
    Chi,          // sin(kr) at the origin, valid off the negative axis
    ThetaPlus,    // exp(+ikr) at infinity, upper half-plane
    ThetaMinus,   // exp(-ikr) at infinity, lower half-plane
    ChiTilde,     // exp(ktr) - exp(-ktr) at the origin, Re E < 0
    ThetaTilde,   // exp(-ktr) at infinity, Re E < 0
    Sigma1Tilde,  // exp(+ktr) at infinity, Re E < 0
    Sigma2,       // cos(kr) at the origin, valid off the negative axis
};

inline const char* to_string(Family f) {
    switch (f) {
        case Family::Chi: return "chi";
        case Family::ThetaPlus: return "theta_plus";
        case Family::ThetaMinus: return "theta_minus";
        case Family::ChiTilde: return "chi_tilde";
        case Family::ThetaTilde: return "theta_tilde";
        case Family::Sigma1Tilde: return "sigma1_tilde";
        case Family::Sigma2: return "sigma2";
    }
    return "?";
}

// Validity map.  Chi appears in both half-plane resolvent kernels, so it is
// admitted above and below the axis alongside Sigma2.
inline bool family_admits(Family f, EnergyRegion region) {
    switch (f) {
        case Family::Chi:
        case Family::Sigma2:
            return region != EnergyRegion::NegativeRe;
        case Family::ThetaPlus:
            return region == EnergyRegion::UpperHalf || region == EnergyRegion::PositiveReal;
        case Family::ThetaMinus:
            return region == EnergyRegion::LowerHalf || region == EnergyRegion::PositiveReal;
        case Family::ChiTilde:
        case Family::ThetaTilde:
        case Family::Sigma1Tilde:
            return region == EnergyRegion::NegativeRe;
    }
    return false;
}

inline void require_family_region(Family f, Complex e) {
    const EnergyRegion region = energy_region(e);
    if (!family_admits(f, region))
        throw IncompatibleRegion(std::string("family ") + to_string(f) +
                                 " is not defined for energies in region " + to_string(region));
}

// The four matching coefficients of one family, in the order the family's
// display equation lists them (region 2 then 3 for origin-anchored families,
// region 1 then 2 for infinity-anchored ones).
struct RegionCoefficients {
    Complex c1, c2, c3, c4;
};

// Assembled piecewise solution: on each radial region the value is
// alpha*exp(omega r) + beta*exp(-omega r).
struct PiecewiseWave {
    struct Piece {
        Complex alpha, beta, omega;
        // Zero amplitudes short-circuit so that an over/underflowing
        // exponential on the dead branch cannot produce NaN.
        Complex term_plus(double r) const {
            return alpha == Complex{} ? Complex{} : alpha * std::exp(omega * r);
        }
        Complex term_minus(double r) const {
            return beta == Complex{} ? Complex{} : beta * std::exp(-omega * r);
        }
        Complex value(double r) const { return term_plus(r) + term_minus(r); }
        Complex derivative(double r) const {
            return omega * (term_plus(r) - term_minus(r));
        }
        Complex second_derivative(double r) const {
            return omega * omega * value(r);
        }
        // Natural magnitude scale of the piece at r, |alpha e^{wr}| + |beta e^{-wr}|.
        double envelope(double r) const {
            return std::abs(alpha) * std::exp(omega.real() * r) +
                   std::abs(beta) * std::exp(-omega.real() * r);
        }
    };

    Piece inner, barrier, outer;
    double a = 0.0, b = 0.0;

    // r = a and r = b use the left-limit piece.
    const Piece& piece_at(double r) const {
        if (r < 0.0) throw DomainError("eigenfunction evaluated at r < 0");
        if (r <= a) return inner;
        if (r <= b) return barrier;
        return outer;
    }
    Complex value(double r) const { return piece_at(r).value(r); }
    Complex derivative(double r) const { return piece_at(r).derivative(r); }
    Complex second_derivative(double r) const { return piece_at(r).second_derivative(r); }
};

namespace detail {

inline constexpr Complex I{0.0, 1.0};

struct CoeffQuad {
    Complex q1, q2, q3, q4;
};

// chi-tilde matching functions (real-exponential basis, Re E < 0).
inline CoeffQuad chi_tilde_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex kt = w.k_tilde, qt = w.q_tilde;
    const Complex j1 = 0.5 * std::exp(-qt * a) *
                       ((1.0 + kt / qt) * std::exp(kt * a) + (-1.0 + kt / qt) * std::exp(-kt * a));
    const Complex j2 = 0.5 * std::exp(qt * a) *
                       ((1.0 - kt / qt) * std::exp(kt * a) + (-1.0 - kt / qt) * std::exp(-kt * a));
    const Complex j3 = 0.5 * std::exp(-kt * b) *
                       ((1.0 + qt / kt) * std::exp(qt * b) * j1 + (1.0 - qt / kt) * std::exp(-qt * b) * j2);
    const Complex j4 = 0.5 * std::exp(kt * b) *
                       ((1.0 - qt / kt) * std::exp(qt * b) * j1 + (1.0 + qt / kt) * std::exp(-qt * b) * j2);
    return {j1, j2, j3, j4};
}

// theta-tilde matching functions.  The region-1 coefficient with the
// exp(-qt*a) factor is the symmetric partner of the one above it; see the
// continuity tests which pin this form.
inline CoeffQuad theta_tilde_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex kt = w.k_tilde, qt = w.q_tilde;
    const Complex a3 = 0.5 * std::exp(-qt * b) * (1.0 - kt / qt) * std::exp(-kt * b);
    const Complex a4 = 0.5 * std::exp(qt * b) * (1.0 + kt / qt) * std::exp(-kt * b);
    const Complex a1 = 0.5 * std::exp(-kt * a) *
                       ((1.0 + qt / kt) * std::exp(qt * a) * a3 + (1.0 - qt / kt) * std::exp(-qt * a) * a4);
    const Complex a2 = 0.5 * std::exp(kt * a) *
                       ((1.0 - qt / kt) * std::exp(qt * a) * a3 + (1.0 + qt / kt) * std::exp(-qt * a) * a4);
    return {a1, a2, a3, a4};
}

// chi matching functions (oscillatory basis).
inline CoeffQuad chi_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex k = w.k, q = w.q;
    const Complex j1 = 0.5 * std::exp(-I * q * a) * (std::sin(k * a) + k / (I * q) * std::cos(k * a));
    const Complex j2 = 0.5 * std::exp(I * q * a) * (std::sin(k * a) - k / (I * q) * std::cos(k * a));
    const Complex j3 = 0.5 * std::exp(-I * k * b) *
                       ((1.0 + q / k) * std::exp(I * q * b) * j1 + (1.0 - q / k) * std::exp(-I * q * b) * j2);
    const Complex j4 = 0.5 * std::exp(I * k * b) *
                       ((1.0 - q / k) * std::exp(I * q * b) * j1 + (1.0 + q / k) * std::exp(-I * q * b) * j2);
    return {j1, j2, j3, j4};
}

inline CoeffQuad theta_plus_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex k = w.k, q = w.q;
    const Complex a3 = 0.5 * std::exp(-I * q * b) * (1.0 + k / q) * std::exp(I * k * b);
    const Complex a4 = 0.5 * std::exp(I * q * b) * (1.0 - k / q) * std::exp(I * k * b);
    const Complex a1 = 0.5 * std::exp(-I * k * a) *
                       ((1.0 + q / k) * std::exp(I * q * a) * a3 + (1.0 - q / k) * std::exp(-I * q * a) * a4);
    const Complex a2 = 0.5 * std::exp(I * k * a) *
                       ((1.0 - q / k) * std::exp(I * q * a) * a3 + (1.0 + q / k) * std::exp(-I * q * a) * a4);
    return {a1, a2, a3, a4};
}

inline CoeffQuad theta_minus_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex k = w.k, q = w.q;
    const Complex a3 = 0.5 * std::exp(-I * q * b) * (1.0 - k / q) * std::exp(-I * k * b);
    const Complex a4 = 0.5 * std::exp(I * q * b) * (1.0 + k / q) * std::exp(-I * k * b);
    const Complex a1 = 0.5 * std::exp(-I * k * a) *
                       ((1.0 + q / k) * std::exp(I * q * a) * a3 + (1.0 - q / k) * std::exp(-I * q * a) * a4);
    const Complex a2 = 0.5 * std::exp(I * k * a) *
                       ((1.0 - q / k) * std::exp(I * q * a) * a3 + (1.0 + q / k) * std::exp(-I * q * a) * a4);
    return {a1, a2, a3, a4};
}

inline CoeffQuad sigma1_tilde_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex kt = w.k_tilde, qt = w.q_tilde;
    const Complex b3 = 0.5 * std::exp(-qt * b) * (1.0 + kt / qt) * std::exp(kt * b);
    const Complex b4 = 0.5 * std::exp(qt * b) * (1.0 - kt / qt) * std::exp(kt * b);
    const Complex b1 = 0.5 * std::exp(-kt * a) *
                       ((1.0 + qt / kt) * std::exp(qt * a) * b3 + (1.0 - qt / kt) * std::exp(-qt * a) * b4);
    const Complex b2 = 0.5 * std::exp(kt * a) *
                       ((1.0 - qt / kt) * std::exp(qt * a) * b3 + (1.0 + qt / kt) * std::exp(-qt * a) * b4);
    return {b1, b2, b3, b4};
}

inline CoeffQuad sigma2_coeffs(const Wavenumbers& w, double a, double b) {
    const Complex k = w.k, q = w.q;
    const Complex c1 = 0.5 * std::exp(-I * q * a) * (std::cos(k * a) - k / (I * q) * std::sin(k * a));
    const Complex c2 = 0.5 * std::exp(I * q * a) * (std::cos(k * a) + k / (I * q) * std::sin(k * a));
    const Complex c3 = 0.5 * std::exp(-I * k * b) *
                       ((1.0 + q / k) * std::exp(I * q * b) * c1 + (1.0 - q / k) * std::exp(-I * q * b) * c2);
    const Complex c4 = 0.5 * std::exp(I * k * b) *
                       ((1.0 - q / k) * std::exp(I * q * b) * c1 + (1.0 + q / k) * std::exp(-I * q * b) * c2);
    return {c1, c2, c3, c4};
}

inline bool anchored_at_origin(Family f) {
    return f == Family::Chi || f == Family::ChiTilde || f == Family::Sigma2;
}

inline bool tilde_basis(Family f) {
    return f == Family::ChiTilde || f == Family::ThetaTilde || f == Family::Sigma1Tilde;
}

// Seed amplitudes in the anchored region, in the exp(+wr)/exp(-wr) basis.
inline std::pair<Complex, Complex> seed_amplitudes(Family f) {
    switch (f) {
        case Family::Chi: return {0.5 / I, -0.5 / I};     // sin(kr)
        case Family::Sigma2: return {0.5, 0.5};           // cos(kr)
        case Family::ChiTilde: return {1.0, -1.0};        // 2 sinh(kt r)
        case Family::ThetaPlus: return {1.0, 0.0};        // exp(+ikr)
        case Family::ThetaMinus: return {0.0, 1.0};       // exp(-ikr)
        case Family::ThetaTilde: return {0.0, 1.0};       // exp(-kt r)
        case Family::Sigma1Tilde: return {1.0, 0.0};      // exp(+kt r)
    }
    return {0.0, 0.0};
}

}  // namespace detail

// Matching coefficients transcribed from the closed forms, with the nested
// structure preserved (coefficients 3 and 4 built from 1 and 2).
inline RegionCoefficients closed_form_coefficients(const BarrierConfig& cfg, Family f, Complex e) {
    e = normalize_energy(e);
    require_nondegenerate(cfg, e);
    require_family_region(f, e);
    const Wavenumbers w = wavenumbers(cfg, e);
    detail::CoeffQuad q{};
    switch (f) {
        case Family::Chi: q = detail::chi_coeffs(w, cfg.a, cfg.b); break;
        case Family::ThetaPlus: q = detail::theta_plus_coeffs(w, cfg.a, cfg.b); break;
        case Family::ThetaMinus: q = detail::theta_minus_coeffs(w, cfg.a, cfg.b); break;
        case Family::ChiTilde: q = detail::chi_tilde_coeffs(w, cfg.a, cfg.b); break;
        case Family::ThetaTilde: q = detail::theta_tilde_coeffs(w, cfg.a, cfg.b); break;
        case Family::Sigma1Tilde: q = detail::sigma1_tilde_coeffs(w, cfg.a, cfg.b); break;
        case Family::Sigma2: q = detail::sigma2_coeffs(w, cfg.a, cfg.b); break;
    }
    return {q.q1, q.q2, q.q3, q.q4};
}

namespace detail {

// Propagates (alpha, beta, omega) across an interface at x onto the basis
// with rate omega_next by imposing continuity of value and derivative.
inline PiecewiseWave::Piece propagate(const PiecewiseWave::Piece& from, double x, Complex omega_next) {
    if (omega_next == Complex(0.0, 0.0))
        throw DegenerateEnergy("singular matching system: vanishing wavenumber");
    const Complex v = from.value(x);
    const Complex d = from.derivative(x);
    const Complex ep = std::exp(omega_next * x);
    return {0.5 * (v + d / omega_next) / ep, 0.5 * (v - d / omega_next) * ep, omega_next};
}

inline PiecewiseWave assemble_by_matching(const BarrierConfig& cfg, Family f, const Wavenumbers& w) {
    const Complex w_outer = tilde_basis(f) ? w.k_tilde : I * w.k;
    const Complex w_barrier = tilde_basis(f) ? w.q_tilde : I * w.q;
    const auto [alpha, beta] = seed_amplitudes(f);

    PiecewiseWave pw;
    pw.a = cfg.a;
    pw.b = cfg.b;
    if (anchored_at_origin(f)) {
        pw.inner = {alpha, beta, w_outer};
        pw.barrier = propagate(pw.inner, cfg.a, w_barrier);
        pw.outer = propagate(pw.barrier, cfg.b, w_outer);
    } else {
        pw.outer = {alpha, beta, w_outer};
        pw.barrier = propagate(pw.outer, cfg.b, w_barrier);
        pw.inner = propagate(pw.barrier, cfg.a, w_outer);
    }
    return pw;
}

}  // namespace detail

// Independent oracle: the same coefficients obtained by solving the 2x2
// continuity systems at r = a and r = b from the family's seed region.
inline RegionCoefficients transfer_matrix_coefficients(const BarrierConfig& cfg, Family f, Complex e) {
    e = normalize_energy(e);
    require_nondegenerate(cfg, e);
    require_family_region(f, e);
    const PiecewiseWave pw = detail::assemble_by_matching(cfg, f, wavenumbers(cfg, e));
    if (detail::anchored_at_origin(f))
        return {pw.barrier.alpha, pw.barrier.beta, pw.outer.alpha, pw.outer.beta};
    return {pw.inner.alpha, pw.inner.beta, pw.barrier.alpha, pw.barrier.beta};
}

// Piecewise assembly from a given coefficient set (closed form by default).
inline PiecewiseWave assemble_eigenfunction(const BarrierConfig& cfg, Family f, Complex e,
                                            const RegionCoefficients& c) {
    e = normalize_energy(e);
    require_nondegenerate(cfg, e);
    require_family_region(f, e);
    const Wavenumbers w = wavenumbers(cfg, e);
    const Complex w_outer = detail::tilde_basis(f) ? w.k_tilde : detail::I * w.k;
    const Complex w_barrier = detail::tilde_basis(f) ? w.q_tilde : detail::I * w.q;
    const auto [alpha, beta] = detail::seed_amplitudes(f);

    PiecewiseWave pw;
    pw.a = cfg.a;
    pw.b = cfg.b;
    if (detail::anchored_at_origin(f)) {
        pw.inner = {alpha, beta, w_outer};
        pw.barrier = {c.c1, c.c2, w_barrier};
        pw.outer = {c.c3, c.c4, w_outer};
    } else {
        pw.inner = {c.c1, c.c2, w_outer};
        pw.barrier = {c.c3, c.c4, w_barrier};
        pw.outer = {alpha, beta, w_outer};
    }
    return pw;
}

inline PiecewiseWave assemble_eigenfunction(const BarrierConfig& cfg, Family f, Complex e) {
    return assemble_eigenfunction(cfg, f, e, closed_form_coefficients(cfg, f, e));
}

inline Complex eval_eigenfunction(const BarrierConfig& cfg, Family f, Complex e, double r) {
    return assemble_eigenfunction(cfg, f, e).value(r);
}

// Relative mismatch of value and derivative across the interfaces at a and
// b, normalized by the local piece envelopes.  Zero for exactly matched
// coefficients; order one when a coefficient formula is wrong.
struct MatchResidual {
    double value_a, deriv_a, value_b, deriv_b;
    double max() const {
        return std::max(std::max(value_a, deriv_a), std::max(value_b, deriv_b));
    }
};

inline MatchResidual continuity_residual(const PiecewiseWave& pw) {
    auto rel = [](Complex left, Complex right, double scale) {
        const double d = std::abs(left - right);
        return scale > 0.0 ? d / scale : d;
    };
    const double sa = std::max(pw.inner.envelope(pw.a), pw.barrier.envelope(pw.a));
    const double sb = std::max(pw.barrier.envelope(pw.b), pw.outer.envelope(pw.b));
    const double da = sa * std::max(std::abs(pw.inner.omega), std::abs(pw.barrier.omega));
    const double db = sb * std::max(std::abs(pw.barrier.omega), std::abs(pw.outer.omega));
    return {rel(pw.inner.value(pw.a), pw.barrier.value(pw.a), sa),
            rel(pw.inner.derivative(pw.a), pw.barrier.derivative(pw.a), da),
            rel(pw.barrier.value(pw.b), pw.outer.value(pw.b), sb),
            rel(pw.barrier.derivative(pw.b), pw.outer.derivative(pw.b), db)};
}

// W(f, g) = f g' - f' g, evaluated with analytic piece derivatives.
// Constant in r for two solutions at the same energy.
inline Complex wronskian(const BarrierConfig& cfg, Family fa, Family fb, Complex e, double r) {
    if (r == cfg.a || r == cfg.b)
        throw DomainError("wronskian: r must avoid the derivative jump points a and b");
    const PiecewiseWave wa = assemble_eigenfunction(cfg, fa, e);
    const PiecewiseWave wb = assemble_eigenfunction(cfg, fb, e);
    return wa.value(r) * wb.derivative(r) - wa.derivative(r) * wb.value(r);
}

}  // namespace rhs
