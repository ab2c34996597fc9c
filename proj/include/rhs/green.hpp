#pragma once

#include <algorithm>
#include <memory>
#include <string>
#include <vector>

#include "rhs/eigen.hpp"
#include "rhs/functions.hpp"
#include "rhs/quadrature.hpp"

namespace rhs {

struct GreenEvaluation {
    Complex value;
    EnergyRegion region;
    bool ordered;  // true when the r < s branch was used
};

// Resolvent kernel at fixed energy: prefactor * left(min) * right(max),
// with the (left, right) pair and prefactor selected by the region of E.
class GreenKernel {
  public:
    GreenKernel(const BarrierConfig& cfg, Complex e) : cfg_(cfg) {
        e = normalize_energy(e);
        require_nondegenerate(cfg, e);
        region_ = energy_region(e);
        const Wavenumbers w = wavenumbers(cfg, e);
        switch (region_) {
            case EnergyRegion::NegativeRe: {
                left_ = assemble_eigenfunction(cfg, Family::ChiTilde, e);
                right_ = assemble_eigenfunction(cfg, Family::ThetaTilde, e);
                const Complex j3t = left_.outer.alpha;
                prefactor_ = -(cfg.kappa / w.k_tilde) / (2.0 * j3t);
                break;
            }
            case EnergyRegion::UpperHalf: {
                left_ = assemble_eigenfunction(cfg, Family::Chi, e);
                right_ = assemble_eigenfunction(cfg, Family::ThetaPlus, e);
                const Complex j4 = left_.outer.beta;
                prefactor_ = (cfg.kappa / w.k) / (2.0 * detail::I * j4);
                break;
            }
            case EnergyRegion::LowerHalf: {
                left_ = assemble_eigenfunction(cfg, Family::Chi, e);
                right_ = assemble_eigenfunction(cfg, Family::ThetaMinus, e);
                const Complex j3 = left_.outer.alpha;
                prefactor_ = -(cfg.kappa / w.k) / (2.0 * detail::I * j3);
                break;
            }
            case EnergyRegion::PositiveReal:
                throw OnSpectrum("green function undefined on the spectrum [0, inf); E = " +
                                 std::to_string(e.real()));
        }
    }

    Complex operator()(double r, double s) const {
        if (r < 0.0 || s < 0.0) throw DomainError("green kernel arguments must be >= 0");
        const double lo = std::min(r, s), hi = std::max(r, s);
        return prefactor_ * left_.value(lo) * right_.value(hi);
    }

    EnergyRegion region() const { return region_; }
    const BarrierConfig& config() const { return cfg_; }

  private:
    BarrierConfig cfg_;
    EnergyRegion region_{};
    PiecewiseWave left_, right_;
    Complex prefactor_{};
};

inline Complex green_function(const BarrierConfig& cfg, double r, double s, Complex e) {
    return GreenKernel(cfg, e)(r, s);
}

inline GreenEvaluation green_evaluation(const BarrierConfig& cfg, double r, double s, Complex e) {
    const GreenKernel kernel(cfg, e);
    return {kernel(r, s), kernel.region(), r < s};
}

namespace detail {

// g(r) = int G(r,s;E) f(s) ds, evaluated point by point.  The panel layout
// over the support of f is fixed once; the derivative kink at s = r is an
// extra break inserted per evaluation, so nearby evaluations share the rest
// of the decomposition and finite differences of g stay quiet.
struct ResolventImage final : RadialImpl {
    std::shared_ptr<const GreenKernel> kernel;
    std::shared_ptr<const RadialImpl> source;
    PanelSet base_panels;
    int nodes = 16;

    Complex value(double r) const override {
        const auto& rule = gauss_legendre(nodes);
        Complex total{};
        for (const auto& [lo, hi] : base_panels.panels) {
            if (lo < r && r < hi) {
                total += piece(lo, r, rule, r);
                total += piece(r, hi, rule, r);
            } else {
                total += piece(lo, hi, rule, r);
            }
        }
        return total;
    }

    Complex piece(double lo, double hi, const GaussLegendre& rule, double r) const {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        Complex acc{};
        for (size_t i = 0; i < rule.nodes.size(); ++i) {
            const double s = mid + half * rule.nodes[i];
            acc += (*kernel)(r, s) * source->value(s) * rule.weights[i];
        }
        return acc * half;
    }

    double decay_radius() const override {
        // kernel decays beyond max(support, b); keep a generous factor
        return std::max(source->decay_radius(), kernel->config().b) + 30.0;
    }
    double max_wavenumber() const override { return 0.0; }
};

}  // namespace detail

// (E - H)^{-1} f as a fresh radial function backed by quadrature.
inline RadialFunction apply_resolvent(const BarrierConfig& cfg, const RadialFunction& f, Complex e,
                                      const QuadratureSpec& spec) {
    spec.validate();
    auto img = std::make_shared<detail::ResolventImage>();
    img->kernel = std::make_shared<GreenKernel>(cfg, e);
    img->source = f.share();
    img->nodes = spec.nodes_per_panel;
    const double lo = std::max(0.0, f.support_lo());
    double hi = std::min(f.support_hi(), f.decay_radius());
    if (spec.r_cutoff > 0.0) hi = std::min(hi, spec.r_cutoff);
    if (!(hi > lo)) return RadialFunction::zero();
    const Wavenumbers w = wavenumbers(cfg, e);
    const double k_eff = std::max({std::abs(w.k), std::abs(w.q), f.max_wavenumber()});
    const double grade = 0.5 * (hi - lo);
    std::vector<double> breaks = graded_breaks(lo, grade);
    for (double x : graded_breaks(hi, -grade)) breaks.push_back(x);
    img->base_panels = radial_panels(cfg, lo, hi, k_eff, spec, std::move(breaks));
    return RadialFunction(img);
}

}  // namespace rhs
