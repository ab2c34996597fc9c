#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <utility>
#include <vector>

#include "rhs/model.hpp"

namespace rhs {

constexpr double infinity = std::numeric_limits<double>::infinity();

namespace detail {

// Natural cubic spline through (x_i, y_i) with complex ordinates.
class CubicSpline {
  public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<Complex> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const size_t n = x_.size();
        if (n < 2 || y_.size() != n) throw ConfigError("CubicSpline: need >= 2 matching nodes");
        for (size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw ConfigError("CubicSpline: nodes must be strictly increasing");
        m_.assign(n, Complex{});
        if (n == 2) return;
        // tridiagonal system for interior second derivatives, natural ends
        std::vector<double> diag(n, 2.0), sub(n, 0.0);
        std::vector<Complex> rhs(n, Complex{});
        std::vector<double> h(n - 1);
        for (size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
        for (size_t i = 1; i + 1 < n; ++i) {
            sub[i] = h[i - 1] / (h[i - 1] + h[i]);
            rhs[i] = 6.0 / (h[i - 1] + h[i]) *
                     ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
        }
        std::vector<double> c(n, 0.0);
        std::vector<Complex> d(n, Complex{});
        for (size_t i = 1; i + 1 < n; ++i) {
            const double up = 1.0 - sub[i];
            const double denom = diag[i] - sub[i] * c[i - 1];
            c[i] = up / denom;
            d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
        }
        for (size_t i = n - 2; i >= 1; --i) m_[i] = d[i] - c[i] * m_[i + 1];
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }
    const std::vector<double>& xs() const { return x_; }
    const std::vector<Complex>& ys() const { return y_; }

    Complex operator()(double x) const {
        if (x < x_.front() || x > x_.back()) return {};
        size_t i = static_cast<size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        i = std::min(std::max<size_t>(i, 1), x_.size() - 1) - 1;
        const double h = x_[i + 1] - x_[i];
        const double t1 = (x_[i + 1] - x) / h, t2 = (x - x_[i]) / h;
        return m_[i] * (t1 * t1 * t1 * h * h / 6.0 - t1 * h * h / 6.0) +
               m_[i + 1] * (t2 * t2 * t2 * h * h / 6.0 - t2 * h * h / 6.0) + y_[i] * t1 +
               y_[i + 1] * t2;
    }

  private:
    std::vector<double> x_;
    std::vector<Complex> y_;
    std::vector<Complex> m_;
};

// Polynomial prefactors of the bump template derivatives:
//   d^n/dx^n exp(-1/(1-x^2)) = A_n(x) * (1-x^2)^(-2n) * exp(-1/(1-x^2))
// by the recurrence A_{n+1} = A_n' u^2 + (4n x u - 2x) A_n, u = 1 - x^2.
inline const std::vector<std::vector<double>>& bump_prefactors() {
    static const std::vector<std::vector<double>> table = [] {
        constexpr int max_order = 16;
        std::vector<std::vector<double>> t;
        t.push_back({1.0});
        for (int n = 0; n < max_order; ++n) {
            const auto& an = t.back();
            // A' u^2 with u^2 = 1 - 2x^2 + x^4
            std::vector<double> next(an.size() + 3, 0.0);
            for (size_t i = 1; i < an.size(); ++i) {
                const double da = an[i] * static_cast<double>(i);  // coefficient of x^(i-1)
                next[i - 1] += da;
                if (i + 1 < next.size()) next[i + 1] -= 2.0 * da;
                next[i + 3] += da;
            }
            // (4n x u - 2x) A = (4n x - 4n x^3 - 2x) A
            for (size_t i = 0; i < an.size(); ++i) {
                next[i + 1] += (4.0 * n - 2.0) * an[i];
                next[i + 3] -= 4.0 * n * an[i];
            }
            t.push_back(std::move(next));
        }
        return t;
    }();
    return table;
}

// n-th derivative of exp(-1/(1-x^2)) on (-1, 1), zero outside.
inline double bump_template_derivative(double x, int n) {
    const double u = 1.0 - x * x;
    if (!(u > 0.0)) return 0.0;
    const auto& table = bump_prefactors();
    if (n < 0 || n >= static_cast<int>(table.size()))
        throw CapabilityError("bump derivative order out of the precomputed range");
    const auto& poly = table[static_cast<size_t>(n)];
    double acc = 0.0;
    for (size_t i = poly.size(); i-- > 0;) acc = acc * x + poly[i];
    const double log_scale = -1.0 / u - 2.0 * n * std::log(u);
    if (log_scale < -745.0) return 0.0;
    return acc * std::exp(log_scale);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Radial functions
// ---------------------------------------------------------------------------

// One function descriptor on [0, inf).  Implementations may offer analytic
// derivatives and repeated applications of the formal operator
// h = -(1/kappa) d^2/dr^2 + V(r); sampled grids offer neither.
struct RadialImpl {
    virtual ~RadialImpl() = default;
    virtual Complex value(double r) const = 0;

    virtual bool has_derivatives() const { return false; }
    virtual Complex derivative(double, int) const {
        throw CapabilityError("this radial function has no analytic derivatives");
    }

    virtual bool has_h_application() const { return false; }
    virtual std::shared_ptr<const RadialImpl> h_power(const BarrierConfig&, int) const {
        throw CapabilityError("this radial function does not admit h-application");
    }
    virtual std::shared_ptr<const RadialImpl> h_plus_one_power(const BarrierConfig&, int) const {
        throw CapabilityError("this radial function does not admit h-application");
    }

    virtual double support_lo() const { return 0.0; }
    virtual double support_hi() const { return infinity; }
    // Truncation radius beyond which |f| < 1e-12.
    virtual double decay_radius() const = 0;
    // Largest oscillation wavenumber present (quadrature hint).
    virtual double max_wavenumber() const { return 0.0; }
    // Radius of the region carrying the bulk of the mass; controls how
    // finely transforms of this function must be sampled in energy.
    virtual double phase_radius() const { return decay_radius(); }
};

class RadialFunction {
  public:
    RadialFunction();  // zero
    explicit RadialFunction(std::shared_ptr<const RadialImpl> impl) : impl_(std::move(impl)) {}

    Complex operator()(double r) const { return impl_->value(r); }
    bool has_derivatives() const { return impl_->has_derivatives(); }
    Complex derivative(double r, int order = 1) const { return impl_->derivative(r, order); }
    bool has_h_application() const { return impl_->has_h_application(); }
    RadialFunction h_applied(const BarrierConfig& cfg) const {
        return RadialFunction(impl_->h_power(cfg, 1));
    }
    RadialFunction h_power(const BarrierConfig& cfg, int n) const {
        return RadialFunction(impl_->h_power(cfg, n));
    }
    RadialFunction h_plus_one_power(const BarrierConfig& cfg, int m) const {
        return RadialFunction(impl_->h_plus_one_power(cfg, m));
    }
    double support_lo() const { return impl_->support_lo(); }
    double support_hi() const { return impl_->support_hi(); }
    double decay_radius() const { return impl_->decay_radius(); }
    double max_wavenumber() const { return impl_->max_wavenumber(); }
    const RadialImpl& impl() const { return *impl_; }
    std::shared_ptr<const RadialImpl> share() const { return impl_; }

    static RadialFunction zero() { return RadialFunction(); }
    // amplitude * r^power * exp(-rate r) on [0, inf)
    static RadialFunction exp_monomial(Complex amplitude, int power, Complex rate);
    // amplitude * exp(-1/(1-x^2)), x = (r-center)/halfwidth
    static RadialFunction bump(double center, double halfwidth, Complex amplitude);
    // cubic-spline sampled grid; first node must be 0
    static RadialFunction sampled(std::vector<double> nodes, std::vector<Complex> values,
                                  double max_wavenumber_hint = 0.0);

  private:
    std::shared_ptr<const RadialImpl> impl_;
};

namespace detail {

struct ZeroRadial final : RadialImpl {
    Complex value(double) const override { return {}; }
    bool has_derivatives() const override { return true; }
    Complex derivative(double, int) const override { return {}; }
    bool has_h_application() const override { return true; }
    std::shared_ptr<const RadialImpl> h_power(const BarrierConfig&, int) const override {
        return std::make_shared<ZeroRadial>();
    }
    std::shared_ptr<const RadialImpl> h_plus_one_power(const BarrierConfig&, int) const override {
        return std::make_shared<ZeroRadial>();
    }
    double support_hi() const override { return 0.0; }
    double decay_radius() const override { return 0.0; }
};

// Finite sum of windowed terms  amp * r^power * exp(-rate r) on [lo, hi).
// Closed under differentiation and under multiplication by the piecewise
// constant potential, hence under h.
struct ExpTermRadial final : RadialImpl {
    struct Term {
        Complex amp;
        int power = 0;
        Complex rate;
        double lo = 0.0;
        double hi = infinity;
    };
    std::vector<Term> terms;

    Complex value(double r) const override {
        Complex acc{};
        for (const auto& t : terms)
            if (r >= t.lo && r < t.hi) acc += t.amp * std::pow(r, t.power) * std::exp(-t.rate * r);
        return acc;
    }

    bool has_derivatives() const override { return true; }

    static std::vector<Term> differentiate(const std::vector<Term>& in) {
        std::vector<Term> out;
        for (const auto& t : in) {
            if (t.power > 0) out.push_back({t.amp * static_cast<double>(t.power), t.power - 1, t.rate, t.lo, t.hi});
            out.push_back({-t.amp * t.rate, t.power, t.rate, t.lo, t.hi});
        }
        return out;
    }

    Complex derivative(double r, int order) const override {
        std::vector<Term> cur = terms;
        for (int i = 0; i < order; ++i) cur = differentiate(cur);
        ExpTermRadial tmp;
        tmp.terms = std::move(cur);
        return tmp.value(r);
    }

    bool has_h_application() const override { return true; }

    static std::vector<Term> split_at(const std::vector<Term>& in, double x) {
        std::vector<Term> out;
        for (const auto& t : in) {
            if (t.lo < x && x < t.hi) {
                out.push_back({t.amp, t.power, t.rate, t.lo, x});
                out.push_back({t.amp, t.power, t.rate, x, t.hi});
            } else {
                out.push_back(t);
            }
        }
        return out;
    }

    std::shared_ptr<const RadialImpl> h_power(const BarrierConfig& cfg, int n) const override {
        auto cur = std::make_shared<ExpTermRadial>(*this);
        for (int i = 0; i < n; ++i) cur = apply_h_once(cfg, *cur, 0.0);
        return cur;
    }
    std::shared_ptr<const RadialImpl> h_plus_one_power(const BarrierConfig& cfg, int m) const override {
        auto cur = std::make_shared<ExpTermRadial>(*this);
        for (int i = 0; i < m; ++i) cur = apply_h_once(cfg, *cur, 1.0);
        return cur;
    }

    // (h + shift) f  = -(1/kappa) f'' + (V + shift) f
    static std::shared_ptr<ExpTermRadial> apply_h_once(const BarrierConfig& cfg,
                                                       const ExpTermRadial& f, double shift) {
        auto out = std::make_shared<ExpTermRadial>();
        auto dd = differentiate(differentiate(f.terms));
        for (auto& t : dd) {
            t.amp *= -1.0 / cfg.kappa;
            out->terms.push_back(t);
        }
        auto windowed = split_at(split_at(f.terms, cfg.a), cfg.b);
        for (auto& t : windowed) {
            const double vmid = potential_value(cfg, 0.5 * (t.lo + std::min(t.hi, cfg.b + 1.0)));
            const double factor = vmid + shift;
            if (factor != 0.0) {
                t.amp *= factor;
                out->terms.push_back(t);
            }
        }
        return out;
    }

    double envelope_radius(double threshold_log) const {
        double r_max = 1.0;
        for (const auto& t : terms) {
            if (std::abs(t.amp) == 0.0) continue;
            if (t.rate.real() <= 0.0) {
                r_max = std::max(r_max, t.hi < infinity ? t.hi : 1e6);
                continue;
            }
            double r = 1.0;
            for (int i = 0; i < 64; ++i)
                r = (std::log(std::abs(t.amp)) + t.power * std::log(std::max(r, 1.0)) +
                     threshold_log) /
                    t.rate.real();
            r_max = std::max(r_max, std::min(r, t.hi));
        }
        return r_max;
    }

    double decay_radius() const override { return envelope_radius(27.7); }   // 1e-12
    double phase_radius() const override { return envelope_radius(9.3); }    // 1e-4

    double max_wavenumber() const override {
        // |rate| rather than Im(rate): the decay scale bounds panel sizes
        // exactly like an oscillation does
        double k = 0.0;
        for (const auto& t : terms) k = std::max(k, std::abs(t.rate));
        return k;
    }
};

// Linear combination of derivatives of one bump template.  The support
// avoids {0, a, b} by construction, so the potential is a single constant
// on it and h maps the class to itself.
struct BumpRadial final : RadialImpl {
    double center = 0.0, halfwidth = 1.0;
    std::vector<std::pair<int, Complex>> parts;  // (derivative order, coefficient)

    static std::shared_ptr<BumpRadial> plain(double center, double halfwidth, Complex amplitude) {
        auto p = std::make_shared<BumpRadial>();
        p->center = center;
        p->halfwidth = halfwidth;
        p->parts = {{0, amplitude}};
        return p;
    }

    Complex value(double r) const override { return derivative(r, 0); }

    bool has_derivatives() const override { return true; }
    Complex derivative(double r, int order) const override {
        const double x = (r - center) / halfwidth;
        Complex acc{};
        for (const auto& [n, c] : parts)
            acc += c * detail::bump_template_derivative(x, n + order) *
                   std::pow(halfwidth, -(n + order));
        return acc;
    }

    bool has_h_application() const override { return true; }

    std::shared_ptr<const RadialImpl> apply(const BarrierConfig& cfg, double shift, int times) const {
        const double lo = center - halfwidth, hi = center + halfwidth;
        if ((lo < cfg.a && hi > cfg.a) || (lo < cfg.b && hi > cfg.b))
            throw CapabilityError("h-application requires the bump support inside one potential region");
        const double v = potential_value(cfg, center) + shift;
        auto cur = std::make_shared<BumpRadial>(*this);
        for (int i = 0; i < times; ++i) {
            auto next = std::make_shared<BumpRadial>();
            next->center = center;
            next->halfwidth = halfwidth;
            std::vector<Complex> acc(cur->max_order() + 3, Complex{});
            for (const auto& [n, c] : cur->parts) {
                acc[static_cast<size_t>(n) + 2] += -c / cfg.kappa;
                if (v != 0.0) acc[static_cast<size_t>(n)] += c * v;
            }
            for (size_t n = 0; n < acc.size(); ++n)
                if (acc[n] != Complex{}) next->parts.push_back({static_cast<int>(n), acc[n]});
            cur = next;
        }
        return cur;
    }

    int max_order() const {
        int m = 0;
        for (const auto& [n, c] : parts) m = std::max(m, n);
        return m;
    }

    std::shared_ptr<const RadialImpl> h_power(const BarrierConfig& cfg, int n) const override {
        return apply(cfg, 0.0, n);
    }
    std::shared_ptr<const RadialImpl> h_plus_one_power(const BarrierConfig& cfg, int m) const override {
        return apply(cfg, 1.0, m);
    }

    double support_lo() const override { return center - halfwidth; }
    double support_hi() const override { return center + halfwidth; }
    double decay_radius() const override { return center + halfwidth; }
    double max_wavenumber() const override { return 2.0 / halfwidth; }
};

struct GridRadial final : RadialImpl {
    CubicSpline spline;
    double k_hint = 0.0;
    // quadrature metadata when the grid was produced by panel sampling:
    // inner products over the same panels are then exact
    std::vector<double> qnodes, qweights;
    std::vector<Complex> qvalues;
    Complex value(double r) const override { return spline(r); }
    double support_hi() const override { return spline.back(); }
    double decay_radius() const override { return spline.back(); }
    double max_wavenumber() const override { return k_hint; }
};

// Quadrature- or closure-backed function with explicit hints.
struct CallableRadial final : RadialImpl {
    std::function<Complex(double)> fn;
    double lo = 0.0, hi = infinity, decay = infinity, k_hint = 0.0;
    Complex value(double r) const override { return fn(r); }
    double support_lo() const override { return lo; }
    double support_hi() const override { return hi; }
    double decay_radius() const override { return decay; }
    double max_wavenumber() const override { return k_hint; }
};

}  // namespace detail

inline RadialFunction::RadialFunction() : impl_(std::make_shared<detail::ZeroRadial>()) {}

inline RadialFunction RadialFunction::exp_monomial(Complex amplitude, int power, Complex rate) {
    auto p = std::make_shared<detail::ExpTermRadial>();
    p->terms.push_back({amplitude, power, rate, 0.0, infinity});
    return RadialFunction(p);
}

inline RadialFunction RadialFunction::bump(double center, double halfwidth, Complex amplitude) {
    if (!(halfwidth > 0.0)) throw ConfigError("bump: halfwidth must be > 0");
    return RadialFunction(detail::BumpRadial::plain(center, halfwidth, amplitude));
}

inline RadialFunction RadialFunction::sampled(std::vector<double> nodes, std::vector<Complex> values,
                                              double max_wavenumber_hint) {
    if (nodes.empty() || nodes.front() != 0.0)
        throw ConfigError("sampled radial function: first node must be r = 0");
    auto p = std::make_shared<detail::GridRadial>();
    p->spline = detail::CubicSpline(std::move(nodes), std::move(values));
    p->k_hint = max_wavenumber_hint;
    return RadialFunction(p);
}

// ---------------------------------------------------------------------------
// Energy functions
// ---------------------------------------------------------------------------

struct EnergyImpl {
    virtual ~EnergyImpl() = default;
    virtual Complex value(double e) const = 0;
    // Highest-accuracy evaluation (fresh quadrature where available);
    // identical to value() unless the implementation interpolates.
    virtual Complex exact_value(double e) const { return value(e); }
    virtual double support_lo() const { return 0.0; }
    virtual double support_hi() const { return infinity; }
    virtual double decay_cutoff() const = 0;  // tail below 1e-12 beyond
};

class EnergyFunction {
  public:
    EnergyFunction();  // zero
    explicit EnergyFunction(std::shared_ptr<const EnergyImpl> impl, bool rho_normalized = false)
        : impl_(std::move(impl)), rho_normalized_(rho_normalized) {}

    Complex operator()(double e) const { return impl_->value(e); }
    Complex exact_value(double e) const { return impl_->exact_value(e); }
    double support_lo() const { return impl_->support_lo(); }
    double support_hi() const { return impl_->support_hi(); }
    double decay_cutoff() const { return impl_->decay_cutoff(); }
    bool rho_normalized() const { return rho_normalized_; }
    EnergyFunction as_rho_normalized(bool flag) const {
        EnergyFunction out = *this;
        out.rho_normalized_ = flag;
        return out;
    }
    const EnergyImpl& impl() const { return *impl_; }
    std::shared_ptr<const EnergyImpl> share() const { return impl_; }

    // E^n (E+1)^m g(E); exact on the profile side.
    EnergyFunction times_power(int n, int m = 0) const;
    EnergyFunction scaled(Complex factor) const;

    static EnergyFunction zero() { return EnergyFunction(); }
    // amplitude * exp(-1/(1-x^2)), x = (E-center)/halfwidth; support must
    // stay inside (0, inf)
    static EnergyFunction profile_bump(double center, double halfwidth, Complex amplitude);
    // sampled grid with optional exact re-evaluation closure
    static EnergyFunction sampled(std::vector<double> nodes, std::vector<Complex> values,
                                  std::function<Complex(double)> exact = nullptr);
    static EnergyFunction callable(std::function<Complex(double)> fn, double lo, double hi);

  private:
    std::shared_ptr<const EnergyImpl> impl_;
    bool rho_normalized_ = false;
};

namespace detail {

struct ZeroEnergy final : EnergyImpl {
    Complex value(double) const override { return {}; }
    double support_hi() const override { return 0.0; }
    double decay_cutoff() const override { return 0.0; }
};

struct BumpEnergy final : EnergyImpl {
    double center = 0.0, halfwidth = 1.0;
    Complex amplitude{1.0, 0.0};
    Complex value(double e) const override {
        return amplitude * bump_template_derivative((e - center) / halfwidth, 0);
    }
    double support_lo() const override { return center - halfwidth; }
    double support_hi() const override { return center + halfwidth; }
    double decay_cutoff() const override { return center + halfwidth; }
};

struct GridEnergy final : EnergyImpl {
    CubicSpline spline;
    std::function<Complex(double)> exact;
    Complex value(double e) const override { return spline(e); }
    Complex exact_value(double e) const override {
        if (exact && e >= spline.front() && e <= spline.back()) return exact(e);
        return spline(e);
    }
    double support_lo() const override { return spline.front(); }
    double support_hi() const override { return spline.back(); }
    double decay_cutoff() const override { return spline.back(); }
};

struct CallableEnergy final : EnergyImpl {
    std::function<Complex(double)> fn;
    double lo = 0.0, hi = infinity;
    Complex value(double e) const override { return (e < lo || e > hi) ? Complex{} : fn(e); }
    double support_lo() const override { return lo; }
    double support_hi() const override { return hi; }
    double decay_cutoff() const override { return hi; }
};

struct PolyTimesEnergy final : EnergyImpl {
    std::shared_ptr<const EnergyImpl> base;
    int n = 0, m = 0;
    Complex factor{1.0, 0.0};
    Complex weight(double e) const {
        Complex w = factor;
        for (int i = 0; i < n; ++i) w *= e;
        for (int i = 0; i < m; ++i) w *= (e + 1.0);
        return w;
    }
    Complex value(double e) const override { return base->value(e) * weight(e); }
    Complex exact_value(double e) const override { return base->exact_value(e) * weight(e); }
    double support_lo() const override { return base->support_lo(); }
    double support_hi() const override { return base->support_hi(); }
    double decay_cutoff() const override { return base->decay_cutoff(); }
};

}  // namespace detail

inline EnergyFunction::EnergyFunction() : impl_(std::make_shared<detail::ZeroEnergy>()) {}

inline EnergyFunction EnergyFunction::times_power(int n, int m) const {
    auto p = std::make_shared<detail::PolyTimesEnergy>();
    p->base = impl_;
    p->n = n;
    p->m = m;
    return EnergyFunction(p, rho_normalized_);
}

inline EnergyFunction EnergyFunction::scaled(Complex factor) const {
    auto p = std::make_shared<detail::PolyTimesEnergy>();
    p->base = impl_;
    p->factor = factor;
    return EnergyFunction(p, rho_normalized_);
}

inline EnergyFunction EnergyFunction::profile_bump(double center, double halfwidth, Complex amplitude) {
    if (!(halfwidth > 0.0)) throw ConfigError("profile_bump: halfwidth must be > 0");
    auto p = std::make_shared<detail::BumpEnergy>();
    p->center = center;
    p->halfwidth = halfwidth;
    p->amplitude = amplitude;
    return EnergyFunction(p);
}

inline EnergyFunction EnergyFunction::sampled(std::vector<double> nodes, std::vector<Complex> values,
                                              std::function<Complex(double)> exact) {
    if (nodes.empty() || !(nodes.front() > 0.0))
        throw ConfigError("sampled energy function: first node must be > 0");
    auto p = std::make_shared<detail::GridEnergy>();
    p->spline = detail::CubicSpline(std::move(nodes), std::move(values));
    p->exact = std::move(exact);
    return EnergyFunction(p);
}

inline EnergyFunction EnergyFunction::callable(std::function<Complex(double)> fn, double lo, double hi) {
    auto p = std::make_shared<detail::CallableEnergy>();
    p->fn = std::move(fn);
    p->lo = lo;
    p->hi = hi;
    return EnergyFunction(p);
}

}  // namespace rhs
