#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "rhs/eigen.hpp"
#include "rhs/quadrature.hpp"

namespace rhs {

struct SpectralDensity {
    double energy;
    double rho;  // 1/energy units
};

// rho(E) = (1/4pi) (kappa/k) / |J4|^2 on (0, inf).
inline SpectralDensity spectral_density(const BarrierConfig& cfg, double e) {
    if (!(e > 0.0)) throw DomainError("spectral density defined for E > 0");
    require_nondegenerate(cfg, {e, 0.0});
    const Complex j4 = closed_form_coefficients(cfg, Family::Chi, {e, 0.0}).c4;
    const double k = std::sqrt(cfg.kappa * e);
    return {e, cfg.kappa / k / (4.0 * pi * std::norm(j4))};
}

inline double rho(const BarrierConfig& cfg, double e) { return spectral_density(cfg, e).rho; }

// Delta-normalized eigenfunction sigma(.;E) = sqrt(rho(E)) chi(.;E) at one
// real energy, with its analytic derivative and per-region sup envelope.
class SigmaBasis {
  public:
    SigmaBasis(const BarrierConfig& cfg, double e)
        : cfg_(cfg), energy_(e), chi_(assemble_eigenfunction(cfg, Family::Chi, {e, 0.0})) {
        rho_ = rho(cfg, e);
        sqrt_rho_ = std::sqrt(rho_);
    }

    double energy() const { return energy_; }
    double density() const { return rho_; }
    double scale() const { return sqrt_rho_; }
    const PiecewiseWave& chi() const { return chi_; }

    double operator()(double r) const { return sqrt_rho_ * real_checked(chi_.value(r)); }
    double derivative(double r) const { return sqrt_rho_ * real_checked(chi_.derivative(r)); }

    // sup_r |sigma(r;E)| from closed-form per-region envelopes.
    double sup() const {
        return sqrt_rho_ * std::max({inner_sup(), barrier_sup(), outer_sup()});
    }

  private:
    static double real_checked(Complex v) {
        if (std::abs(v.imag()) > 1e-12 * std::max(1.0, std::abs(v)))
            throw NonRealEigenfunction("chi carries a non-negligible imaginary part: " +
                                       std::to_string(v.imag()));
        return v.real();
    }

    double inner_sup() const {
        const double k = std::abs(chi_.inner.omega);  // omega = ik, k real
        const double ka = k * cfg_.a;
        return ka >= pi / 2 ? 1.0 : std::sin(ka);
    }

    // max over [lo, hi] of |c1 e^{w r} + c2 e^{-w r}|
    static double pair_sup(Complex c1, Complex c2, Complex w, double lo, double hi) {
        if (std::abs(w.real()) > 1e-14 * std::abs(w)) {
            // real exponentials: |f|^2 is convex in e^{2w r}, ends dominate
            const double g = w.real();
            auto at = [&](double r) {
                return std::abs(c1 * std::exp(g * r) + c2 * std::exp(-g * r));
            };
            return std::max(at(lo), at(hi));
        }
        // oscillatory: |f|^2 = |c1|^2 + |c2|^2 + 2 Re(c1 conj(c2) e^{2i q r})
        const double q = w.imag();
        const Complex cross = c1 * std::conj(c2);
        const double amp = std::abs(cross);
        if (amp == 0.0) return std::sqrt(std::norm(c1) + std::norm(c2));
        const double phase0 = std::arg(cross);
        const double t1 = phase0 + 2.0 * q * lo, t2 = phase0 + 2.0 * q * hi;
        const double tlo = std::min(t1, t2), thi = std::max(t1, t2);
        double cos_max;
        if (thi - tlo >= 2.0 * pi || std::floor(thi / (2.0 * pi)) >= std::ceil(tlo / (2.0 * pi)))
            cos_max = 1.0;  // a crest lies inside
        else
            cos_max = std::max(std::cos(tlo), std::cos(thi));
        return std::sqrt(std::norm(c1) + std::norm(c2) + 2.0 * amp * cos_max);
    }

    double barrier_sup() const {
        return pair_sup(chi_.barrier.alpha, chi_.barrier.beta, chi_.barrier.omega, cfg_.a, cfg_.b);
    }

    double outer_sup() const {
        // unbounded interval: every phase is visited
        return std::abs(chi_.outer.alpha) + std::abs(chi_.outer.beta);
    }

    BarrierConfig cfg_;
    double energy_;
    PiecewiseWave chi_;
    double rho_ = 0.0, sqrt_rho_ = 0.0;
};

inline double sigma_delta(const BarrierConfig& cfg, double e, double r) {
    if (r < 0.0) throw DomainError("sigma_delta: r must be >= 0");
    return SigmaBasis(cfg, e)(r);
}

// Boundary values of the resolvent coefficient matrices.
struct ThetaMatrix {
    enum class Half { MinusRegion, UpperHalf, LowerHalf };
    std::array<std::array<Complex, 2>, 2> entries{};  // [row i][col j]
    Half half{};
};

inline ThetaMatrix theta_matrices(const BarrierConfig& cfg, Complex e) {
    e = normalize_energy(e);
    require_nondegenerate(cfg, e);
    const EnergyRegion region = energy_region(e);
    const Wavenumbers w = wavenumbers(cfg, e);
    ThetaMatrix out;
    switch (region) {
        case EnergyRegion::NegativeRe: {
            const auto jt = closed_form_coefficients(cfg, Family::ChiTilde, e);
            const Complex pref = -(cfg.kappa / w.k_tilde) * 0.5;
            out.half = ThetaMatrix::Half::MinusRegion;
            out.entries[0][1] = pref;
            out.entries[1][1] = pref * jt.c4 / jt.c3;
            break;
        }
        case EnergyRegion::UpperHalf: {
            const auto j = closed_form_coefficients(cfg, Family::Chi, e);
            const auto c = closed_form_coefficients(cfg, Family::Sigma2, e);
            const Complex wron = j.c4 * c.c3 - j.c3 * c.c4;
            const Complex pref = (cfg.kappa / w.k) / (2.0 * detail::I);
            out.half = ThetaMatrix::Half::UpperHalf;
            out.entries[0][0] = pref * (-c.c4 / (j.c4 * wron));
            out.entries[1][0] = pref / wron;
            break;
        }
        case EnergyRegion::LowerHalf: {
            const auto j = closed_form_coefficients(cfg, Family::Chi, e);
            const auto c = closed_form_coefficients(cfg, Family::Sigma2, e);
            const Complex wron = j.c4 * c.c3 - j.c3 * c.c4;
            const Complex pref = (cfg.kappa / w.k) / (2.0 * detail::I);
            out.half = ThetaMatrix::Half::LowerHalf;
            out.entries[0][0] = -pref * (c.c3 / (j.c3 * wron));
            out.entries[1][0] = pref / wron;
            break;
        }
        case EnergyRegion::PositiveReal:
            throw OnSpectrum("theta matrices require E off the real positive axis");
    }
    return out;
}

struct StoneResult {
    double rho11 = 0.0;           // extrapolated measure of (E1, E2)
    double error_estimate = 0.0;  // from the extrapolation table
    Complex rho12, rho21, rho22;  // zero-check entries, extrapolated
    std::vector<double> rho11_raw;  // one value per epsilon, before extrapolation
};

namespace detail {

// Neville evaluation at 0 of the polynomial through (x_i, y_i); the error
// estimate is the difference between the last two diagonal entries.
template <class T>
std::pair<T, double> extrapolate_to_zero(const std::vector<double>& x, std::vector<T> y) {
    const size_t n = x.size();
    T prev = y[n - 1];
    double est = 0.0;
    for (size_t level = 1; level < n; ++level) {
        for (size_t i = n - 1; i >= level; --i) {
            y[i] = (y[i] * (0.0 - x[i - level]) - y[i - 1] * (0.0 - x[i])) / (x[i] - x[i - level]);
            if (i == level) break;
        }
        est = std::abs(y[n - 1] - prev);
        prev = y[n - 1];
    }
    return {y[n - 1], est};
}

}  // namespace detail

// Titchmarsh-Kodaira recovery of the spectral measure from the boundary
// values theta11(E -+ i eps), extrapolated in eps to the axis.
inline StoneResult stone_measure(const BarrierConfig& cfg, double e1, double e2,
                                 std::vector<double> eps_sequence = {1e-2, 5e-3, 2.5e-3},
                                 const QuadratureSpec& spec = {}, double tol = 1e-4) {
    if (!(0.0 < e1 && e1 < e2)) throw DomainError("stone_measure requires 0 < E1 < E2");
    if (eps_sequence.size() < 2)
        throw ConfigError("stone_measure needs at least two epsilon values");

    // Band-clipped domain with panel edges uniform in k, which resolves the
    // 1/sqrt(E) growth of the integrand toward the threshold.
    PanelSet panels;
    panels.nodes_per_panel = spec.nodes_per_panel;
    for (const auto& [lo, hi] : energy_blocks(cfg, e1, e2)) {
        const double k_lo = std::sqrt(cfg.kappa * lo), k_hi = std::sqrt(cfg.kappa * hi);
        const int pieces = std::max(8, static_cast<int>(std::ceil((k_hi - k_lo) * 12.0)));
        for (int j = 0; j < pieces; ++j) {
            const double ka = k_lo + (k_hi - k_lo) * j / pieces;
            const double kb = k_lo + (k_hi - k_lo) * (j + 1) / pieces;
            panels.panels.push_back({ka * ka / cfg.kappa, kb * kb / cfg.kappa});
        }
    }
    if (panels.panels.empty())
        throw DegenerateEnergy("stone_measure: interval lies inside the exclusion bands");

    std::vector<std::array<Complex, 4>> per_eps;
    for (double eps : eps_sequence) {
        std::array<Complex, 4> acc{};
        for (int idx = 0; idx < 4; ++idx) {
            const int i = idx / 2, j = idx % 2;
            acc[static_cast<size_t>(idx)] = panels.integrate([&](double e) {
                const Complex below = theta_matrices(cfg, {e, -eps}).entries[static_cast<size_t>(i)][static_cast<size_t>(j)];
                const Complex above = theta_matrices(cfg, {e, eps}).entries[static_cast<size_t>(i)][static_cast<size_t>(j)];
                return (below - above) / (2.0 * pi * detail::I);
            });
        }
        per_eps.push_back(acc);
    }

    StoneResult out;
    std::vector<Complex> y11, y12, y21, y22;
    for (const auto& v : per_eps) {
        y11.push_back(v[0]);
        y12.push_back(v[1]);
        y21.push_back(v[2]);
        y22.push_back(v[3]);
        out.rho11_raw.push_back(v[0].real());
    }
    const auto [v11, err11] = detail::extrapolate_to_zero(eps_sequence, y11);
    out.rho11 = v11.real();
    out.error_estimate = err11;
    out.rho12 = detail::extrapolate_to_zero(eps_sequence, y12).first;
    out.rho21 = detail::extrapolate_to_zero(eps_sequence, y21).first;
    out.rho22 = detail::extrapolate_to_zero(eps_sequence, y22).first;

    if (err11 > tol * std::max(std::abs(out.rho11), 1e-12))
        throw ExtrapolationFailure("stone_measure extrapolation did not converge", err11);
    return out;
}

// Pure metadata: continuous spectrum [0, inf), no eigenvalues, resolvent
// set is the complement of the half-line.
struct SpectrumInfo {
    double continuous_min = 0.0;
    bool continuous_unbounded = true;
    bool point_spectrum_empty = true;
    std::string continuous = "[0,inf)";
    std::string point = "{}";
    std::string resolvent_set = "C \\ [0,inf)";
};

inline SpectrumInfo spectrum_info(const BarrierConfig& cfg) {
    cfg.validate();
    return SpectrumInfo{};
}

}  // namespace rhs
