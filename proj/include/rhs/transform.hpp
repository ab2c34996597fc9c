#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "rhs/functions.hpp"
#include "rhs/quadrature.hpp"
#include "rhs/spectral.hpp"

namespace rhs {

// Reported alongside transform outputs for reproducibility.
struct TransformDiagnostics {
    double r_cutoff_used = 0.0;
    double e_cutoff_used = 0.0;
    size_t panel_count = 0;
    double error_estimate = 0.0;
};

namespace detail {

// Fast evaluator for sigma(r;E) = sqrt(rho) chi(r;E) at one real energy,
// with the complex amplitudes kept for the closed-form transform path.
// All real coefficients carry the sqrt(rho) scale already.
struct SigmaNode {
    double e = 0.0, k = 0.0, sqrt_rho = 0.0;
    double a = 0.0, b = 0.0;
    bool osc_barrier = false;
    double q = 0.0;  // |Q| (oscillatory) or decay rate (tunneling)
    double in_s = 0.0;
    double b_cos = 0.0, b_sin = 0.0, b_exp_p = 0.0, b_exp_m = 0.0;
    double o_cos = 0.0, o_sin = 0.0;
    Complex j1, j2, j3, j4;  // chi amplitudes, not rho-scaled
    Complex q_complex;

    double value(double r) const {
        if (r <= a) return in_s * std::sin(k * r);
        if (r <= b) {
            if (osc_barrier) return b_cos * std::cos(q * r) + b_sin * std::sin(q * r);
            return b_exp_p * std::exp(q * r) + b_exp_m * std::exp(-q * r);
        }
        return o_cos * std::cos(k * r) + o_sin * std::sin(k * r);
    }

    double derivative(double r) const {
        if (r <= a) return in_s * k * std::cos(k * r);
        if (r <= b) {
            if (osc_barrier) return q * (-b_cos * std::sin(q * r) + b_sin * std::cos(q * r));
            return q * (b_exp_p * std::exp(q * r) - b_exp_m * std::exp(-q * r));
        }
        return k * (-o_cos * std::sin(k * r) + o_sin * std::cos(k * r));
    }
};

// delta_normalized: sigma = sqrt(rho) chi; otherwise the bare chi used by
// the rho-normalized transform.
inline SigmaNode make_sigma_node(const BarrierConfig& cfg, double e, bool delta_normalized = true) {
    SigmaNode n;
    n.e = e;
    n.a = cfg.a;
    n.b = cfg.b;
    const auto c = closed_form_coefficients(cfg, Family::Chi, {e, 0.0});
    n.j1 = c.c1;
    n.j2 = c.c2;
    n.j3 = c.c3;
    n.j4 = c.c4;
    const Wavenumbers w = wavenumbers(cfg, {e, 0.0});
    n.k = w.k.real();
    n.q_complex = w.q;
    n.sqrt_rho = delta_normalized
                     ? std::sqrt(cfg.kappa / n.k / (4.0 * pi * std::norm(c.c4)))
                     : 1.0;
    n.in_s = n.sqrt_rho;
    if (e > cfg.v0) {
        n.osc_barrier = true;
        n.q = w.q.real();
        n.b_cos = n.sqrt_rho * (c.c1 + c.c2).real();
        n.b_sin = n.sqrt_rho * (detail::I * (c.c1 - c.c2)).real();
    } else {
        n.osc_barrier = false;
        n.q = w.q.imag();  // Q = i q, barrier pieces are real exponentials
        n.b_exp_p = n.sqrt_rho * c.c2.real();
        n.b_exp_m = n.sqrt_rho * c.c1.real();
    }
    n.o_cos = n.sqrt_rho * (c.c3 + c.c4).real();
    n.o_sin = n.sqrt_rho * (detail::I * (c.c3 - c.c4)).real();
    return n;
}

// int_lo^hi r^p exp(-beta r) dr, exact; hi may be infinite (Re beta > 0).
inline Complex exp_integral(int p, Complex beta, double lo, double hi) {
    const bool unbounded = hi == infinity;
    if (!unbounded && std::abs(beta) * (hi - lo) < 1.0) {
        // short low-phase window: plain quadrature avoids the cancellation
        // in the antiderivative difference
        const auto& rule = gauss_legendre(16);
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        Complex acc{};
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double r = mid + half * rule.nodes[i];
            acc += std::pow(r, p) * std::exp(-beta * r) * rule.weights[i];
        }
        return acc * half;
    }
    Complex ilow{}, ihigh{};
    const Complex elo = std::exp(-beta * lo);
    const Complex ehi = unbounded ? Complex{} : std::exp(-beta * hi);
    Complex acc = (elo - ehi) / beta;  // p = 0
    for (int j = 1; j <= p; ++j) {
        const Complex boundary =
            (std::pow(lo, j) * elo - (unbounded ? Complex{} : std::pow(hi, j) * ehi)) / beta;
        acc = boundary + static_cast<double>(j) / beta * acc;
    }
    return acc;
}

// Closed-form (Uf)(E) for sums of windowed r^p exp(-rate r) terms: sigma is
// piecewise exponential, so each region contributes exp_integral terms.
inline Complex transform_exp_terms(const BarrierConfig& cfg, const ExpTermRadial& f,
                                   const SigmaNode& s) {
    struct Wave {
        Complex amp, rate;  // amp * exp(rate * r)
    };
    const Complex ik{0.0, s.k};
    const Complex iq = detail::I * s.q_complex;
    const Complex half_i = Complex(0.0, -0.5);  // 1/(2i)
    const auto region_waves = [&](int region) {
        std::vector<Wave> w;
        const double sr = s.sqrt_rho;
        if (region == 0) {
            w.push_back({sr * half_i, ik});
            w.push_back({-sr * half_i, -ik});
        } else if (region == 1) {
            w.push_back({sr * s.j1, iq});
            w.push_back({sr * s.j2, -iq});
        } else {
            w.push_back({sr * s.j3, ik});
            w.push_back({sr * s.j4, -ik});
        }
        return w;
    };

    Complex total{};
    for (const auto& t : f.terms) {
        const double edges[4] = {0.0, cfg.a, cfg.b, infinity};
        for (int region = 0; region < 3; ++region) {
            const double lo = std::max(t.lo, edges[region]);
            const double hi = std::min(t.hi, edges[region + 1]);
            if (!(hi > lo)) continue;
            for (const auto& wv : region_waves(region))
                total += t.amp * wv.amp * exp_integral(t.power, t.rate - wv.rate, lo, hi);
        }
    }
    return total;
}

// C2 roll-off window: 1 on [0, t0], smootherstep down to 0 at t1.
inline double taper_window(double r, double t0, double t1) {
    if (r <= t0) return 1.0;
    if (r >= t1) return 0.0;
    const double u = (r - t0) / (t1 - t0);
    return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

// r-side integration plan for one source function.
struct RadialPlan {
    double lo = 0.0, hi = 0.0;
    double taper_start = infinity;  // == hi when no taper
    std::vector<double> breaks;     // a, b, graded support edges
    bool closed_form = false;       // ExpTermRadial path
    bool is_zero = false;
};

inline RadialPlan plan_radial(const BarrierConfig& cfg, const RadialImpl& f,
                              const QuadratureSpec& spec) {
    RadialPlan plan;
    if (dynamic_cast<const ZeroRadial*>(&f)) {
        plan.is_zero = true;
        return plan;
    }
    if (dynamic_cast<const ExpTermRadial*>(&f)) {
        plan.closed_form = true;
        return plan;
    }
    plan.lo = std::max(0.0, f.support_lo());
    plan.hi = std::min(f.support_hi(), f.decay_radius());
    if (spec.r_cutoff > 0.0) plan.hi = std::min(plan.hi, spec.r_cutoff);
    if (!(plan.hi > plan.lo)) {
        plan.is_zero = true;
        return plan;
    }
    plan.breaks = {cfg.a, cfg.b};
    if (f.support_hi() != infinity) {
        // compactly supported smooth-but-not-analytic templates: grade
        // the panels toward the support edges
        const double g = 0.5 * (plan.hi - plan.lo);
        for (double x : graded_breaks(plan.lo, g)) plan.breaks.push_back(x);
        for (double x : graded_breaks(plan.hi, -g)) plan.breaks.push_back(x);
    } else {
        // noncompact quadrature-backed source: smooth truncation kills the
        // spectral ringing a hard cutoff would imprint on the transform
        plan.taper_start = plan.lo + 0.7 * (plan.hi - plan.lo);
    }
    return plan;
}

// (Uf)(E) for one sigma node under a fixed radial plan.
inline Complex transform_value(const BarrierConfig& cfg, const RadialImpl& f, const SigmaNode& s,
                               const QuadratureSpec& spec, const RadialPlan& plan) {
    if (plan.is_zero) return {};
    if (plan.closed_form)
        return transform_exp_terms(cfg, static_cast<const ExpTermRadial&>(f), s);

    const double k_eff = std::max({s.k, std::abs(s.q_complex), f.max_wavenumber(), 1e-3});
    PanelSet panels = radial_panels(cfg, plan.lo, plan.hi, k_eff, spec, plan.breaks);
    const bool tapered = plan.taper_start < plan.hi;
    return panels.integrate([&](double r) {
        Complex v = f.value(r) * s.value(r);
        if (tapered) v *= taper_window(r, plan.taper_start, plan.hi);
        return v;
    });
}

// Energy grid with cached sigma nodes.
// Energy nodes with weights carrying the dE = (2k/kappa) dk Jacobian: the
// panel sets live in k, where every integrand here is analytic, and the
// accumulated sums are plain integrals over dE.
struct EnergyGrid {
    std::vector<double> nodes, weights;  // E_i and dE-weights
    std::vector<SigmaNode> sigma;
    double e_lo = 0.0, e_hi = 0.0;
    bool delta_normalized = true;

    void append_k(const BarrierConfig& cfg, const PanelSet& k_panels) {
        const auto ks = k_panels.all_nodes();
        const auto ws = k_panels.all_weights();
        for (size_t i = 0; i < ks.size(); ++i) {
            const double e = ks[i] * ks[i] / cfg.kappa;
            nodes.push_back(e);
            weights.push_back(ws[i] * 2.0 * ks[i] / cfg.kappa);
            sigma.push_back(make_sigma_node(cfg, e, delta_normalized));
        }
        for (const auto& [klo, khi] : k_panels.panels) {
            const double elo = klo * klo / cfg.kappa, ehi = khi * khi / cfg.kappa;
            e_lo = e_lo == 0.0 ? elo : std::min(e_lo, elo);
            e_hi = std::max(e_hi, ehi);
        }
    }
};

// Head grid resolving both the integrand oscillation (for later synthesis
// up to radius r_phase) and the structure of the transforms themselves.
inline EnergyGrid head_grid(const BarrierConfig& cfg, double e_lo, double e_hi, double r_phase,
                            const QuadratureSpec& spec) {
    EnergyGrid grid;
    grid.append_k(cfg, energy_k_panels(cfg, e_lo, e_hi, r_phase, spec));
    return grid;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Synthesis-backed radial functions (inverse transform images)
// ---------------------------------------------------------------------------

namespace detail {

// f(r) = int g(E) sigma(r;E) dE over a fixed sigma grid; the workhorse for
// spectral test functions and for the inverse transform.  h acts by
// multiplying the profile by E, exactly.
struct SynthesisRadial final : RadialImpl {
    BarrierConfig cfg;
    EnergyFunction profile;      // base profile g
    int pow_n = 0;               // extra E^n factor from h applications
    double shift_power = 0;      // (E+1)^m factor from (h+1) applications
    std::shared_ptr<const EnergyGrid> grid;
    std::vector<Complex> coef;   // w_i * g(E_i) * E_i^n (E_i+1)^m
    double r_valid = 0.0;        // phase-resolved evaluation radius
    double k_lo = 0.0, k_hi = 0.0;

    static std::shared_ptr<SynthesisRadial> create(const BarrierConfig& cfg,
                                                   const EnergyFunction& profile,
                                                   const QuadratureSpec& spec, double r_valid,
                                                   int pow_n = 0, int pow_m = 0) {
        auto p = std::make_shared<SynthesisRadial>();
        p->cfg = cfg;
        p->profile = profile;
        p->pow_n = pow_n;
        p->shift_power = pow_m;
        p->r_valid = r_valid;
        const double e_lo = std::max(cfg.eps(), profile.support_lo());
        const double e_hi = profile.decay_cutoff();
        if (!(e_hi > e_lo)) throw SupportError("synthesis profile has empty support");
        auto grid = std::make_shared<EnergyGrid>();
        grid->append_k(cfg, energy_k_panels(cfg, e_lo, e_hi, r_valid, spec));
        p->grid = grid;
        p->k_lo = std::sqrt(cfg.kappa * e_lo);
        p->k_hi = std::sqrt(cfg.kappa * e_hi);
        p->rebuild_coefficients();
        return p;
    }

    void rebuild_coefficients() {
        coef.resize(grid->nodes.size());
        for (size_t i = 0; i < grid->nodes.size(); ++i) {
            const double e = grid->nodes[i];
            Complex c = profile(e) * grid->weights[i];
            for (int j = 0; j < pow_n; ++j) c *= e;
            for (int j = 0; j < static_cast<int>(shift_power); ++j) c *= (e + 1.0);
            coef[i] = c;
        }
    }

    Complex value(double r) const override {
        Complex acc{};
        for (size_t i = 0; i < coef.size(); ++i) acc += coef[i] * grid->sigma[i].value(r);
        return acc;
    }

    bool has_derivatives() const override { return true; }
    Complex derivative(double r, int order) const override {
        if (order == 0) return value(r);
        if (order == 1) {
            Complex acc{};
            for (size_t i = 0; i < coef.size(); ++i) acc += coef[i] * grid->sigma[i].derivative(r);
            return acc;
        }
        throw CapabilityError("synthesis functions expose first derivatives only");
    }

    bool has_h_application() const override { return true; }
    std::shared_ptr<const RadialImpl> h_power(const BarrierConfig&, int n) const override {
        auto p = std::make_shared<SynthesisRadial>(*this);
        p->pow_n += n;
        p->rebuild_coefficients();
        return p;
    }
    std::shared_ptr<const RadialImpl> h_plus_one_power(const BarrierConfig&, int m) const override {
        auto p = std::make_shared<SynthesisRadial>(*this);
        p->shift_power += m;
        p->rebuild_coefficients();
        return p;
    }

    double decay_radius() const override { return r_valid; }
    double phase_radius() const override { return 48.0; }
    double max_wavenumber() const override { return k_hi; }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Transform operations
// ---------------------------------------------------------------------------

namespace detail {

inline double extension_phase_radius(const RadialPlan& plan) {
    return std::min(std::max(plan.hi, 8.0), 160.0);
}

// Adaptive upper cutoff: grow the grid blockwise (geometric in k) until the
// newest block's largest |f_hat| falls below tol * global max, twice.
inline void extend_until_decayed(const BarrierConfig& cfg, const RadialImpl& f,
                                 const QuadratureSpec& spec, const RadialPlan& plan,
                                 EnergyGrid& grid, std::vector<Complex>& values, double tol,
                                 double e_cap) {
    double global_max = 0.0;
    for (const Complex& v : values) global_max = std::max(global_max, std::abs(v));
    int quiet = 0;
    while (grid.e_hi < e_cap && quiet < 2) {
        const double k_hi = std::sqrt(cfg.kappa * grid.e_hi);
        const double k_new = k_hi * 1.25;
        PanelSet block;
        block.nodes_per_panel = spec.nodes_per_panel;
        const double dk = spec.max_panel_phase / extension_phase_radius(plan);
        const int pieces = std::max(1, static_cast<int>(std::ceil((k_new - k_hi) / dk)));
        for (int j = 0; j < pieces; ++j) {
            const double ka = k_hi + (k_new - k_hi) * j / pieces;
            const double kb = k_hi + (k_new - k_hi) * (j + 1) / pieces;
            block.panels.push_back({ka, kb});
        }
        const size_t old = grid.nodes.size();
        grid.append_k(cfg, block);
        double block_max = 0.0;
        for (size_t i = old; i < grid.nodes.size(); ++i) {
            values.push_back(transform_value(cfg, f, grid.sigma[i], spec, plan));
            block_max = std::max(block_max, std::abs(values.back()));
        }
        global_max = std::max(global_max, block_max);
        quiet = block_max <= tol * global_max ? quiet + 1 : 0;
    }
}

}  // namespace detail

namespace detail {

inline EnergyFunction to_energy_impl(const BarrierConfig& cfg, const RadialFunction& f,
                                     const QuadratureSpec& spec, TransformDiagnostics* diag,
                                     bool delta_normalized) {
    spec.validate();
    const auto plan = plan_radial(cfg, f.impl(), spec);
    if (plan.is_zero) return EnergyFunction::zero();

    const double r_phase = std::min(f.impl().phase_radius(), 160.0);
    const double e_head =
        spec.e_cutoff > 0.0 ? spec.e_cutoff : std::max(4.0, 2.0 * cfg.v0 + 2.0);
    EnergyGrid grid;
    grid.delta_normalized = delta_normalized;
    grid.append_k(cfg, energy_k_panels(cfg, cfg.eps(), e_head, r_phase, spec));
    std::vector<Complex> values(grid.nodes.size());
    for (size_t i = 0; i < grid.nodes.size(); ++i)
        values[i] = transform_value(cfg, f.impl(), grid.sigma[i], spec, plan);

    if (spec.e_cutoff == 0.0)
        extend_until_decayed(cfg, f.impl(), spec, plan, grid, values, std::max(spec.tol, 1e-7),
                             1e6);

    if (diag) {
        diag->r_cutoff_used = plan.closed_form ? f.decay_radius() : plan.hi;
        diag->e_cutoff_used = grid.e_hi;
        diag->panel_count = grid.nodes.size() / static_cast<size_t>(spec.nodes_per_panel);
        // error estimate: re-evaluate a mid-grid node with half the nodes
        if (!grid.nodes.empty() && !plan.closed_form) {
            QuadratureSpec coarse = spec;
            coarse.nodes_per_panel = std::max(4, spec.nodes_per_panel / 2);
            const size_t mid = grid.nodes.size() / 2;
            const Complex again = transform_value(cfg, f.impl(), grid.sigma[mid], coarse, plan);
            diag->error_estimate = std::abs(again - values[mid]);
        }
    }

    auto impl = f.share();
    auto exact = [cfg, impl, spec, plan, delta_normalized](double e) {
        return transform_value(cfg, *impl, make_sigma_node(cfg, e, delta_normalized), spec, plan);
    };
    return EnergyFunction::sampled(grid.nodes, values, exact)
        .as_rho_normalized(!delta_normalized);
}

}  // namespace detail

// Forward transform: f_hat(E) = int f(r) sigma(r;E) dr, delta-normalized.
// The returned grid carries an exact re-evaluation closure.
inline EnergyFunction to_energy(const BarrierConfig& cfg, const RadialFunction& f,
                                const QuadratureSpec& spec, TransformDiagnostics* diag = nullptr) {
    return detail::to_energy_impl(cfg, f, spec, diag, true);
}

// rho-normalized variant: f_tilde(E) = int f(r) conj(chi(r;E)) dr.  chi is
// real on the spectrum, so the conjugation is a no-op; the integral is run
// against the bare chi rather than by rescaling the delta-normalized
// result, which keeps the f_hat = sqrt(rho) f_tilde identity a genuine
// cross-check.
inline EnergyFunction to_energy_rho(const BarrierConfig& cfg, const RadialFunction& f,
                                    const QuadratureSpec& spec,
                                    TransformDiagnostics* diag = nullptr) {
    return detail::to_energy_impl(cfg, f, spec, diag, false);
}

namespace detail {

// Smallest energy beyond which |fhat| stays below rel_thresh times its
// maximum; grid transforms are scanned sample by sample, other kinds fall
// back on their decay cutoff.
inline double energy_budget(const EnergyFunction& fhat, double rel_thresh) {
    const auto* grid = dynamic_cast<const GridEnergy*>(&fhat.impl());
    if (!grid) return fhat.decay_cutoff();
    const auto& xs = grid->spline.xs();
    const auto& ys = grid->spline.ys();
    double vmax = 0.0;
    for (const Complex& y : ys) vmax = std::max(vmax, std::abs(y));
    if (vmax == 0.0) return xs.front();
    size_t last = 0;
    for (size_t i = 0; i < ys.size(); ++i)
        if (std::abs(ys[i]) >= rel_thresh * vmax) last = i;
    return std::min(xs[last] * 1.2 + 0.5, xs.back());
}

// Coarse geometric panels for the negligible high-energy tail.
inline void append_tail_panels(const BarrierConfig& cfg, EnergyGrid& grid, double e_from,
                               double e_to, const QuadratureSpec& spec) {
    if (!(e_to > e_from)) return;
    PanelSet block;
    block.nodes_per_panel = spec.nodes_per_panel;
    double k = std::sqrt(cfg.kappa * e_from);
    const double k_end = std::sqrt(cfg.kappa * e_to);
    while (k < k_end) {
        const double k2 = std::min(k * 1.05 + 1e-3, k_end);
        block.panels.push_back({k, k2});
        k = k2;
    }
    grid.append_k(cfg, block);
}

// Shared synthesis core: out(r_i) = sum_j coef_j sigma_j(r_i) over an
// oscillation-resolved output grid carrying its quadrature weights.
inline RadialFunction synthesize_on_window(const BarrierConfig& cfg, const EnergyGrid& grid,
                                           const std::vector<Complex>& coef, double window,
                                           double k_budget, const QuadratureSpec& spec) {
    PanelSet rpanels = radial_panels(cfg, 0.0, window, k_budget, spec);
    std::vector<double> rnodes = rpanels.all_nodes();
    std::vector<double> rweights = rpanels.all_weights();
    std::vector<Complex> rvalues(rnodes.size(), Complex{});
    for (size_t j = 0; j < coef.size(); ++j) {
        const auto& s = grid.sigma[j];
        const Complex c = coef[j];
        if (c == Complex{}) continue;
        for (size_t i = 0; i < rnodes.size(); ++i) rvalues[i] += c * s.value(rnodes[i]);
    }
    std::vector<double> spline_nodes{0.0};
    std::vector<Complex> spline_vals{Complex{}};  // sigma(0;E) = 0 for every E
    for (size_t i = 0; i < rnodes.size(); ++i) {
        spline_nodes.push_back(rnodes[i]);
        spline_vals.push_back(rvalues[i]);
    }
    auto impl = std::make_shared<GridRadial>();
    impl->spline = CubicSpline(spline_nodes, spline_vals);
    impl->k_hint = k_budget;
    impl->qnodes = std::move(rnodes);
    impl->qweights = std::move(rweights);
    impl->qvalues = std::move(rvalues);
    return RadialFunction(impl);
}

}  // namespace detail

// Inverse transform: f(r) = int f_hat(E) sigma(r;E) dE, sampled on an
// oscillation-resolved grid over [0, window].  Energies whose amplitude is
// negligible are integrated on a coarse geometric tail: their mass cannot
// move the result at working tolerances, and resolving their phases against
// the full window would dominate the cost.
inline RadialFunction to_position(const BarrierConfig& cfg, const EnergyFunction& fhat,
                                  const QuadratureSpec& spec,
                                  TransformDiagnostics* diag = nullptr) {
    spec.validate();
    const double e_lo = std::max(cfg.eps(), fhat.support_lo());
    double e_hi = fhat.decay_cutoff();
    if (spec.e_cutoff > 0.0) e_hi = std::min(e_hi, spec.e_cutoff);
    if (!(e_hi > e_lo)) return RadialFunction::zero();

    const double window = spec.r_cutoff > 0.0 ? spec.r_cutoff : 40.0;
    const double e_budget = std::min(detail::energy_budget(fhat, 1e-6), e_hi);
    detail::EnergyGrid grid;
    grid.append_k(cfg, energy_k_panels(cfg, e_lo, e_budget, window, spec));
    detail::append_tail_panels(cfg, grid, e_budget, e_hi, spec);

    std::vector<Complex> coef(grid.nodes.size());
    for (size_t i = 0; i < grid.nodes.size(); ++i)
        coef[i] = fhat(grid.nodes[i]) * grid.weights[i];

    if (diag) {
        diag->r_cutoff_used = window;
        diag->e_cutoff_used = e_hi;
        diag->panel_count = grid.nodes.size() / static_cast<size_t>(spec.nodes_per_panel);
    }
    const double k_budget = std::sqrt(cfg.kappa * e_budget);
    return detail::synthesize_on_window(cfg, grid, coef, window, k_budget, spec);
}

// ---------------------------------------------------------------------------
// Scalar products, moments, dispersion, evolution
// ---------------------------------------------------------------------------

namespace detail {

// Common energy-side machinery for Parseval / H^n moments: shared grid,
// geometric tail extension keyed on the weighted integrand.  When
// rho_variant is set the integrand is conj(phi_hat/sqrt(rho)) *
// (psi_hat/sqrt(rho)) * rho(E): the same quantity reached through the
// rho-normalized representation, computed step by step.
struct MomentAccumulator {
    const BarrierConfig& cfg;
    QuadratureSpec spec;
    RadialPlan plan_phi, plan_psi;
    const RadialImpl& phi;
    const RadialImpl& psi;
    int n;
    bool rho_variant = false;

    Complex node_integrand(const EnergyGrid& grid, size_t i) const {
        Complex ph = transform_value(cfg, phi, grid.sigma[i], spec, plan_phi);
        Complex ps =
            &phi == &psi ? ph : transform_value(cfg, psi, grid.sigma[i], spec, plan_psi);
        Complex w;
        if (rho_variant) {
            const double sr = grid.sigma[i].sqrt_rho;
            w = std::conj(ph / sr) * (ps / sr) * (sr * sr) * grid.weights[i];
        } else {
            w = std::conj(ph) * ps * grid.weights[i];
        }
        for (int j = 0; j < n; ++j) w *= grid.nodes[i];
        return w;
    }

    // geometric block [k, 1.2 k], clipped to k_cap
    PanelSet tail_block(double e_from, double k_cap, double r_phase) const {
        const double k_hi = std::sqrt(cfg.kappa * e_from);
        const double k_new = std::min(k_hi * 1.2, k_cap);
        PanelSet block;
        block.nodes_per_panel = spec.nodes_per_panel;
        const double dk = std::min(0.05 * k_hi, spec.max_panel_phase / r_phase);
        const int pieces = std::max(1, static_cast<int>(std::ceil((k_new - k_hi) / dk)));
        for (int j = 0; j < pieces; ++j) {
            const double ka = k_hi + (k_new - k_hi) * j / pieces;
            const double kb = k_hi + (k_new - k_hi) * (j + 1) / pieces;
            block.panels.push_back({ka, kb});
        }
        return block;
    }

    Complex run(double* tail_indicator = nullptr, double e_cap = 1e16) {
        const double r_phase =
            std::min(std::max(phi.phase_radius(), psi.phase_radius()), 160.0);
        const double explicit_cap = spec.e_cutoff > 0.0 ? spec.e_cutoff : e_cap;
        const double e_head = std::min(std::max(4.0, 2.0 * cfg.v0 + 2.0), explicit_cap);
        EnergyGrid grid = head_grid(cfg, cfg.eps(), e_head, r_phase, spec);

        Complex acc{};
        for (size_t i = 0; i < grid.nodes.size(); ++i) acc += node_integrand(grid, i);

        // geometric tail blocks until two consecutive blocks are negligible
        int quiet = 0;
        double last_block = 0.0;
        while (grid.e_hi < explicit_cap * 0.999999 && quiet < 2) {
            const size_t old = grid.nodes.size();
            grid.append_k(cfg, tail_block(grid.e_hi, std::sqrt(cfg.kappa * explicit_cap), r_phase));
            double block_abs = 0.0;
            for (size_t i = old; i < grid.nodes.size(); ++i) {
                const Complex w = node_integrand(grid, i);
                acc += w;
                block_abs += std::abs(w);
            }
            last_block = block_abs;
            quiet = block_abs <= 0.5 * spec.tol * std::max(std::abs(acc), 1e-300) ? quiet + 1 : 0;
        }

        if (spec.e_cutoff > 0.0 && quiet < 2) {
            // probe the excluded tail; a geometric series of such blocks
            // bounds what the cutoff discards
            EnergyGrid probe;
            probe.append_k(cfg, tail_block(grid.e_hi, std::sqrt(cfg.kappa * grid.e_hi * 1.5), r_phase));
            double leak = 0.0;
            for (size_t i = 0; i < probe.nodes.size(); ++i)
                leak += std::abs(node_integrand(probe, i));
            last_block = leak;
            if (leak * 6.0 > 10.0 * spec.tol * std::max(std::abs(acc), 1e-300))
                throw CutoffTooSmall("energy cutoff " + std::to_string(spec.e_cutoff) +
                                     " dominates the H^" + std::to_string(n) + " moment error");
        }
        if (tail_indicator) *tail_indicator = last_block;
        return acc;
    }
};

}  // namespace detail

struct ParsevalResult {
    Complex lhs;      // position-side scalar product
    Complex rhs;      // energy-side scalar product
    double residual;  // |lhs - rhs| / max(|lhs|, eps)
};

// Position-side scalar product int conj(phi) psi dr by direct quadrature.
inline Complex position_inner_product(const BarrierConfig& cfg, const RadialFunction& phi,
                                      const RadialFunction& psi, const QuadratureSpec& spec) {
    const double lo = std::max(0.0, std::min(phi.support_lo(), psi.support_lo()));
    double hi = std::min(std::max(phi.support_hi(), psi.support_hi()),
                         std::max(phi.decay_radius(), psi.decay_radius()));
    if (spec.r_cutoff > 0.0) hi = std::min(hi, spec.r_cutoff);
    if (!(hi > lo)) return {};
    const double k_eff = std::max({phi.max_wavenumber(), psi.max_wavenumber(), 1e-3});
    std::vector<double> breaks;
    for (const RadialFunction* f : {&phi, &psi}) {
        if (f->support_hi() != infinity) {
            const double g = 0.5 * (f->support_hi() - f->support_lo());
            if (g > 0.0) {
                for (double x : graded_breaks(f->support_lo(), g)) breaks.push_back(x);
                for (double x : graded_breaks(f->support_hi(), -g)) breaks.push_back(x);
            }
        }
    }
    PanelSet panels = radial_panels(cfg, lo, hi, k_eff, spec, breaks);
    return panels.integrate([&](double r) { return std::conj(phi(r)) * psi(r); });
}

inline double norm_l2(const BarrierConfig& cfg, const RadialFunction& f,
                      const QuadratureSpec& spec) {
    if (const auto* grid = dynamic_cast<const detail::GridRadial*>(&f.impl());
        grid && !grid->qnodes.empty()) {
        double acc = 0.0;
        for (size_t i = 0; i < grid->qnodes.size(); ++i)
            acc += grid->qweights[i] * std::norm(grid->qvalues[i]);
        return std::sqrt(acc);
    }
    return std::sqrt(std::abs(position_inner_product(cfg, f, f, spec)));
}

inline Complex matrix_element_hn(const BarrierConfig& cfg, const RadialFunction& phi,
                                 const RadialFunction& psi, int n, const QuadratureSpec& spec) {
    if (n < 0) throw DomainError("matrix_element_hn: n must be >= 0");
    spec.validate();
    detail::MomentAccumulator acc{cfg,
                                  spec,
                                  detail::plan_radial(cfg, phi.impl(), spec),
                                  detail::plan_radial(cfg, psi.impl(), spec),
                                  phi.impl(),
                                  psi.impl(),
                                  n};
    if (acc.plan_phi.is_zero || acc.plan_psi.is_zero) return {};
    return acc.run();
}

inline ParsevalResult parseval(const BarrierConfig& cfg, const RadialFunction& phi,
                               const RadialFunction& psi, const QuadratureSpec& spec) {
    const Complex lhs = position_inner_product(cfg, phi, psi, spec);
    const Complex rhs = matrix_element_hn(cfg, phi, psi, 0, spec);
    const double scale = std::max(std::abs(lhs), 1e-12);
    return {lhs, rhs, std::abs(lhs - rhs) / scale};
}

struct DispersionResult {
    double mean;
    double disp;
    double delta;
};

inline DispersionResult dispersion(const BarrierConfig& cfg, const RadialFunction& phi,
                                   const QuadratureSpec& spec) {
    const double nrm = norm_l2(cfg, phi, spec);
    if (std::abs(nrm - 1.0) > 1e-8)
        throw NormalizationError("dispersion requires a normalized state; got ||phi|| = " +
                                 std::to_string(nrm));
    const double mean = matrix_element_hn(cfg, phi, phi, 1, spec).real();
    const double second = matrix_element_hn(cfg, phi, phi, 2, spec).real();
    double disp = second - mean * mean;
    if (disp < 0.0) {
        if (disp < -1e-10 * std::max(1.0, mean * mean))
            throw Error("dispersion came out negative beyond tolerance: " + std::to_string(disp));
        disp = 0.0;
    }
    return {mean, disp, std::sqrt(disp)};
}

// Spectral time evolution: phi(r, t) = int exp(-iEt/hbar) phi_hat(E)
// sigma(r;E) dE, sampled over the (possibly moving) window.  The window
// and the grid rules follow the energies that carry amplitude; the
// negligible tail rides on coarse geometric panels.
inline RadialFunction evolve(const BarrierConfig& cfg, const RadialFunction& phi, double t,
                             const QuadratureSpec& spec, TransformDiagnostics* diag = nullptr) {
    spec.validate();
    EnergyFunction fhat = to_energy(cfg, phi, spec);
    const double e_lo = std::max(cfg.eps(), fhat.support_lo());
    const double e_hi = fhat.decay_cutoff();
    if (!(e_hi > e_lo)) return RadialFunction::zero();

    const double e_budget = std::min(detail::energy_budget(fhat, 1e-6), e_hi);
    const double k_budget = std::sqrt(cfg.kappa * e_budget);
    const double group_speed = 2.0 * k_budget / (cfg.kappa * cfg.hbar);
    const double window = spec.r_cutoff > 0.0
                              ? spec.r_cutoff
                              : std::min(phi.decay_radius(), 60.0) + group_speed * std::abs(t) + 10.0;

    detail::EnergyGrid grid;
    grid.append_k(cfg, energy_k_panels(cfg, e_lo, e_budget, window, spec, std::abs(t) / cfg.hbar));
    detail::append_tail_panels(cfg, grid, e_budget, e_hi, spec);

    std::vector<Complex> coef(grid.nodes.size());
    for (size_t i = 0; i < grid.nodes.size(); ++i) {
        const double e = grid.nodes[i];
        coef[i] = fhat(e) * grid.weights[i] * std::exp(Complex(0.0, -e * t / cfg.hbar));
    }

    if (diag) {
        diag->r_cutoff_used = window;
        diag->e_cutoff_used = e_hi;
        diag->panel_count = grid.nodes.size() / static_cast<size_t>(spec.nodes_per_panel);
    }
    return detail::synthesize_on_window(cfg, grid, coef, window, k_budget, spec);
}

// || U(h f) - E U(f) || / || E U(f) || over a shared grid.
inline double diagonalization_residual(const BarrierConfig& cfg, const RadialFunction& f,
                                       const QuadratureSpec& spec) {
    if (!f.has_h_application())
        throw CapabilityError("diagonalization residual needs an h-applicable function");
    const RadialFunction hf = f.h_applied(cfg);
    const auto plan_f = detail::plan_radial(cfg, f.impl(), spec);
    const auto plan_hf = detail::plan_radial(cfg, hf.impl(), spec);
    if (plan_f.is_zero) return 0.0;

    const double r_phase = std::min(f.impl().phase_radius(), 160.0);
    const double e_head = std::max(4.0, 2.0 * cfg.v0 + 2.0);
    detail::EnergyGrid grid = detail::head_grid(cfg, cfg.eps(), e_head, r_phase, spec);
    std::vector<Complex> uf(grid.nodes.size());
    for (size_t i = 0; i < grid.nodes.size(); ++i)
        uf[i] = detail::transform_value(cfg, f.impl(), grid.sigma[i], spec, plan_f);
    if (spec.e_cutoff == 0.0)
        detail::extend_until_decayed(cfg, f.impl(), spec, plan_f, grid, uf,
                                     std::max(spec.tol, 1e-7), 1e5);

    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < grid.nodes.size(); ++i) {
        const Complex uhf =
            detail::transform_value(cfg, hf.impl(), grid.sigma[i], spec, plan_hf);
        const Complex target = grid.nodes[i] * uf[i];
        num += grid.weights[i] * std::norm(uhf - target);
        den += grid.weights[i] * std::norm(target);
    }
    if (den == 0.0) return 0.0;
    return std::sqrt(num / den);
}

struct DeltaNormalizationResult {
    Complex direct;      // position-side integral
    Complex via_energy;  // energy-side profile integral
    double residual;
};

// Smeared normalization check: the position-side product of two states must
// equal the energy-side product of their profiles; the rho variant divides
// the profiles by sqrt(rho) and integrates against rho(E) dE.
inline DeltaNormalizationResult delta_normalization_check(const BarrierConfig& cfg,
                                                          const RadialFunction& phi,
                                                          const RadialFunction& psi,
                                                          const QuadratureSpec& spec,
                                                          bool rho_variant = false) {
    const Complex direct = position_inner_product(cfg, phi, psi, spec);

    // energy-side: conj(phi_hat) psi_hat dE, or the rho-normalized chain
    // conj(phi_tilde) psi_tilde rho(E) dE
    detail::MomentAccumulator acc{cfg,
                                  spec,
                                  detail::plan_radial(cfg, phi.impl(), spec),
                                  detail::plan_radial(cfg, psi.impl(), spec),
                                  phi.impl(),
                                  psi.impl(),
                                  0,
                                  rho_variant};
    const Complex via = acc.plan_phi.is_zero || acc.plan_psi.is_zero ? Complex{} : acc.run();
    const double scale = std::max({std::abs(direct), std::abs(via), 1e-12});
    return {direct, via, std::abs(direct - via) / scale};
}

}  // namespace rhs
