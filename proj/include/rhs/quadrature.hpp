#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "rhs/model.hpp"

namespace rhs {

// Panel decomposition, node counts and cutoffs shared by every integral
// over r and E.  Zero cutoffs mean "derive from the integrand's hints".
struct QuadratureSpec {
    double r_cutoff = 0.0;
    double e_cutoff = 0.0;
    int nodes_per_panel = 16;
    double max_panel_phase = pi / 2;  // limits k*dr and dphase/dE*dE per panel
    double tol = 1e-9;                // target relative error

    void validate() const {
        if (nodes_per_panel < 4) throw ConfigError("QuadratureSpec: nodes_per_panel must be >= 4");
        if (!(max_panel_phase > 0)) throw ConfigError("QuadratureSpec: max_panel_phase must be > 0");
        if (!(tol > 0)) throw ConfigError("QuadratureSpec: tol must be > 0");
        if (r_cutoff < 0 || e_cutoff < 0) throw ConfigError("QuadratureSpec: cutoffs must be >= 0");
    }
};

struct GaussLegendre {
    std::vector<double> nodes;    // ascending, on (-1, 1)
    std::vector<double> weights;
};

// Nodes and weights by Newton iteration on the Legendre recurrence.
inline GaussLegendre compute_gauss_legendre(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int j = 0; j < (n + 1) / 2; ++j) {
        double x = std::cos(pi * (j + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int l = 2; l <= n; ++l) {
                const double p2 = ((2 * l - 1) * x * p1 - (l - 1) * p0) / l;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.nodes[j] = -x;
        rule.nodes[n - 1 - j] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[j] = w;
        rule.weights[n - 1 - j] = w;
    }
    return rule;
}

inline const GaussLegendre& gauss_legendre(int n) {
    static const std::vector<GaussLegendre> cache = [] {
        std::vector<GaussLegendre> c;
        for (int i = 0; i <= 64; ++i) c.push_back(i >= 2 ? compute_gauss_legendre(i) : GaussLegendre{});
        return c;
    }();
    if (n < 2 || n > 64) throw ConfigError("gauss_legendre: node count out of range [2, 64]");
    return cache[static_cast<size_t>(n)];
}

using Interval = std::pair<double, double>;

// Phase capacity of an n-node Gauss-Legendre panel at full accuracy; the
// panel rules for pure quadrature may use this instead of the (much
// stricter) grid-resolution phase limit.
inline double gl_phase_budget(int n) { return 0.55 * n; }

// Composite integration domain: disjoint ascending panels.
struct PanelSet {
    std::vector<Interval> panels;
    int nodes_per_panel = 16;

    size_t node_count() const { return panels.size() * static_cast<size_t>(nodes_per_panel); }

    template <class F>
    auto integrate(F&& f) const {
        const auto& rule = gauss_legendre(nodes_per_panel);
        using R = decltype(f(0.0) * 1.0);
        R total{};
        for (const auto& [lo, hi] : panels) {
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            R acc{};
            for (size_t i = 0; i < rule.nodes.size(); ++i)
                acc += f(mid + half * rule.nodes[i]) * rule.weights[i];
            total += acc * half;
        }
        return total;
    }

    // Same integral with a coarser companion rule; the difference is the
    // error estimate used for QuadratureFailure reporting.
    template <class F>
    auto integrate_with_estimate(F&& f, double* estimate) const {
        const auto value = integrate(f);
        if (estimate) {
            PanelSet coarse = *this;
            coarse.nodes_per_panel = std::max(4, nodes_per_panel / 2);
            *estimate = std::abs(value - coarse.integrate(f));
        }
        return value;
    }

    std::vector<double> all_nodes() const {
        const auto& rule = gauss_legendre(nodes_per_panel);
        std::vector<double> out;
        out.reserve(node_count());
        for (const auto& [lo, hi] : panels) {
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (double x : rule.nodes) out.push_back(mid + half * x);
        }
        return out;
    }

    std::vector<double> all_weights() const {
        const auto& rule = gauss_legendre(nodes_per_panel);
        std::vector<double> out;
        out.reserve(node_count());
        for (const auto& [lo, hi] : panels) {
            const double half = 0.5 * (hi - lo);
            for (double w : rule.weights) out.push_back(w * half);
        }
        return out;
    }
};

namespace detail {

// Splits [lo, hi] at the interior break points, then subdivides each block
// uniformly until no panel exceeds max_width.
inline void subdivide_into(std::vector<Interval>& out, double lo, double hi, double max_width,
                           const std::vector<double>& breaks) {
    if (!(hi > lo)) return;
    std::vector<double> edges{lo};
    for (double br : breaks)
        if (br > lo && br < hi) edges.push_back(br);
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
        const double l = edges[i], h = edges[i + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((h - l) / max_width)));
        for (int j = 0; j < pieces; ++j)
            out.push_back({l + (h - l) * j / pieces, l + (h - l) * (j + 1) / pieces});
    }
}

}  // namespace detail

// Geometric refinement sequence toward `edge`, reaching in by `extent`
// (signed).  Used where an integrand is smooth but non-analytic at a
// support edge, e.g. the compactly supported bump templates: panels
// touching such an edge otherwise dominate the quadrature error.
inline std::vector<double> graded_breaks(double edge, double extent, int levels = 14) {
    std::vector<double> out;
    double step = extent;
    for (int j = 0; j < levels; ++j) {
        step *= 0.5;
        out.push_back(edge + step);
    }
    return out;
}

// Panels over [lo, hi] in radius, splitting at the potential interfaces and
// keeping the local phase k_eff * dr below the phase budget (the spec's
// grid rule by default; pass phase_override = gl_phase_budget(n) for pure
// quadrature uses).
inline PanelSet radial_panels(const BarrierConfig& cfg, double lo, double hi, double k_eff,
                              const QuadratureSpec& spec, std::vector<double> extra_breaks = {},
                              double phase_override = 0.0) {
    PanelSet set;
    set.nodes_per_panel = spec.nodes_per_panel;
    extra_breaks.push_back(cfg.a);
    extra_breaks.push_back(cfg.b);
    const double span = hi - lo;
    if (!(span > 0)) return set;
    const double phase = phase_override > 0.0 ? phase_override : spec.max_panel_phase;
    double width = phase / std::max(k_eff, 1e-12);
    width = std::min(width, span);
    width = std::max(width, span / 16384.0);  // panel-count ceiling
    detail::subdivide_into(set.panels, lo, hi, width, extra_breaks);
    return set;
}

// [e_lo, e_hi] with the exclusion bands around 0 and v0 removed.  Their
// contribution is bounded by band width times the integrand bound, far
// below every working tolerance.
inline std::vector<Interval> energy_blocks(const BarrierConfig& cfg, double e_lo, double e_hi) {
    const double eps = cfg.eps();
    e_lo = std::max(e_lo, eps);
    std::vector<Interval> blocks;
    if (!(e_hi > e_lo)) return blocks;
    if (cfg.v0 > 0.0 && e_lo < cfg.v0 + eps && e_hi > cfg.v0 - eps) {
        if (cfg.v0 - eps > e_lo) blocks.push_back({e_lo, cfg.v0 - eps});
        if (e_hi > cfg.v0 + eps) blocks.push_back({cfg.v0 + eps, e_hi});
    } else {
        blocks.push_back({e_lo, e_hi});
    }
    return blocks;
}

// Panels in the wavenumber variable k = sqrt(kappa E) covering [e_lo, e_hi]
// with the exclusion bands around 0 and v0 removed.  Every energy integral
// runs in k, where the integrands are analytic up to the spectrum edge;
// in E they carry sqrt(E) cusps.  Edges are uniform in k so the
// position-side phase r_eff * dk stays below the budget; an optional
// evolution phase rate |t|/hbar additionally limits dE = 2k dk / kappa.
inline PanelSet energy_k_panels(const BarrierConfig& cfg, double e_lo, double e_hi, double r_eff,
                                const QuadratureSpec& spec, double phase_rate_in_e = 0.0,
                                double phase_override = 0.0) {
    PanelSet set;
    set.nodes_per_panel = spec.nodes_per_panel;
    const std::vector<Interval> blocks = energy_blocks(cfg, e_lo, e_hi);
    if (blocks.empty()) return set;

    const double phase = phase_override > 0.0 ? phase_override : spec.max_panel_phase;
    const double dk_max = phase / std::max(r_eff, 1e-12);
    for (const auto& [lo, hi] : blocks) {
        const double k_lo = std::sqrt(cfg.kappa * lo), k_hi = std::sqrt(cfg.kappa * hi);
        int pieces = std::max(1, static_cast<int>(std::ceil((k_hi - k_lo) / dk_max)));
        pieces = std::min(pieces, 1 << 16);
        for (int j = 0; j < pieces; ++j) {
            const double ka = k_lo + (k_hi - k_lo) * j / pieces;
            const double kb = k_lo + (k_hi - k_lo) * (j + 1) / pieces;
            int sub = 1;
            if (phase_rate_in_e > 0.0) {
                const double de = (kb * kb - ka * ka) / cfg.kappa;
                sub = std::max(1, static_cast<int>(std::ceil(de * phase_rate_in_e / phase)));
            }
            for (int s = 0; s < sub; ++s)
                set.panels.push_back({ka + (kb - ka) * s / sub, ka + (kb - ka) * (s + 1) / sub});
        }
    }
    return set;
}

}  // namespace rhs
