#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "rhs/errors.hpp"

namespace rhs {

using Complex = std::complex<double>;

constexpr double pi = 3.14159265358979323846;

// Physical parameters of a single problem instance.  kappa bundles the
// recurring 2m/hbar^2 factor, so every matching formula can be written with
// kappa*E under the square roots.  hbar only enters the evolution phase.
struct BarrierConfig {
    double kappa = 1.0;       // 2m/hbar^2, > 0
    double hbar = 1.0;        // action scale for exp(-iEt/hbar)
    double v0 = 1.0;          // barrier height, >= 0
    double a = 1.0;           // inner radius, > 0
    double b = 2.0;           // outer radius, > a
    double eps_energy = 0.0;  // degeneracy half-width; 0 selects the default

    // Exclusion half-width around E = 0 and E = v0.
    double eps() const {
        return eps_energy > 0.0 ? eps_energy : 1e-9 * std::max(1.0, v0);
    }

    void validate() const {
        if (!(kappa > 0.0)) throw ConfigError("BarrierConfig: kappa must be > 0");
        if (!(hbar > 0.0)) throw ConfigError("BarrierConfig: hbar must be > 0");
        if (!(v0 >= 0.0)) throw ConfigError("BarrierConfig: v0 must be >= 0");
        if (!(a > 0.0)) throw ConfigError("BarrierConfig: a must be > 0");
        if (!(b > a)) throw ConfigError("BarrierConfig: b must be > a");
        if (!(eps_energy >= 0.0)) throw ConfigError("BarrierConfig: eps_energy must be >= 0");
    }
};

// Classification of a complex energy relative to the cut [0, inf) and the
// sign of Re E, which selects the eigenfunction basis to use.
enum class EnergyRegion {
    NegativeRe,    // Re E < 0 (includes the real negative axis)
    UpperHalf,     // Im E > 0, Re E >= 0
    LowerHalf,     // Im E < 0, Re E >= 0
    PositiveReal,  // Im E = 0, Re E > 0 (the continuous spectrum)
};

inline const char* to_string(EnergyRegion r) {
    switch (r) {
        case EnergyRegion::NegativeRe: return "NegativeRe";
        case EnergyRegion::UpperHalf: return "UpperHalf";
        case EnergyRegion::LowerHalf: return "LowerHalf";
        case EnergyRegion::PositiveReal: return "PositiveReal";
    }
    return "?";
}

// Folds im = -0.0 to +0.0 so real energies classify unambiguously.
inline Complex normalize_energy(Complex e) {
    if (e.imag() == 0.0) e = Complex(e.real(), 0.0);
    return e;
}

inline EnergyRegion energy_region(Complex e) {
    e = normalize_energy(e);
    if (e.real() < 0.0) return EnergyRegion::NegativeRe;
    if (e.imag() > 0.0) return EnergyRegion::UpperHalf;
    if (e.imag() < 0.0) return EnergyRegion::LowerHalf;
    return EnergyRegion::PositiveReal;
}

// Square barrier potential.  The value at the discontinuity points r = a and
// r = b is v0 (closure convention; irrelevant to every integral but fixed so
// tests are deterministic).
inline double potential_value(const BarrierConfig& cfg, double r) {
    if (r < 0.0) throw DomainError("potential_value: r must be >= 0");
    if (r < cfg.a) return 0.0;
    if (r <= cfg.b) return cfg.v0;
    return 0.0;
}

// Square root mapping arg(z) in (-pi, pi] to arg in (-pi/2, pi/2]: the
// image lies in the closed right half-plane, with the negative real axis
// sent to the positive imaginary axis exactly.
inline Complex branch_sqrt(Complex z) {
    z = normalize_energy(z);
    if (z.imag() == 0.0) {
        if (z.real() >= 0.0) return Complex(std::sqrt(z.real()), 0.0);
        return Complex(0.0, std::sqrt(-z.real()));
    }
    return std::sqrt(z);  // principal branch, identical off the real axis
}

// The four branch-correct wavenumbers at a complex energy.
struct Wavenumbers {
    Complex k;        // sqrt(kappa E)
    Complex q;        // sqrt(kappa (E - v0))
    Complex k_tilde;  // sqrt(-kappa E)
    Complex q_tilde;  // sqrt(-kappa (E - v0))
};

// True when E falls inside an exclusion band around 0 or v0.
inline bool is_degenerate_energy(const BarrierConfig& cfg, Complex e) {
    e = normalize_energy(e);
    return std::abs(e) <= cfg.eps() || std::abs(e - Complex(cfg.v0, 0.0)) <= cfg.eps();
}

inline void require_nondegenerate(const BarrierConfig& cfg, Complex e) {
    e = normalize_energy(e);
    if (std::abs(e) <= cfg.eps())
        throw DegenerateEnergy("energy within " + std::to_string(cfg.eps()) +
                               " of the threshold E = 0");
    if (std::abs(e - Complex(cfg.v0, 0.0)) <= cfg.eps())
        throw DegenerateEnergy("energy within " + std::to_string(cfg.eps()) +
                               " of the barrier top E = " + std::to_string(cfg.v0));
}

inline Wavenumbers wavenumbers(const BarrierConfig& cfg, Complex e) {
    e = normalize_energy(e);
    require_nondegenerate(cfg, e);
    const Complex shifted = e - Complex(cfg.v0, 0.0);
    return Wavenumbers{
        branch_sqrt(cfg.kappa * e),
        branch_sqrt(cfg.kappa * shifted),
        branch_sqrt(-cfg.kappa * e),
        branch_sqrt(-cfg.kappa * shifted),
    };
}

}  // namespace rhs
