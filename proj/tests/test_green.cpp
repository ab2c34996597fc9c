#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "rhs/green.hpp"

using namespace rhs;

namespace {

// five-point second derivative at step h
template <class F>
Complex d2_fd(F&& f, double r, double h) {
    return (-f(r - 2 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2 * h)) /
           (12.0 * h * h);
}

}  // namespace

TEST_CASE("gauss-legendre integrates smooth things to machine accuracy") {
    const auto& rule = gauss_legendre(16);
    double sum = 0.0, x4 = 0.0;
    for (size_t i = 0; i < rule.nodes.size(); ++i) {
        sum += rule.weights[i];
        x4 += rule.weights[i] * std::pow(rule.nodes[i], 4);
    }
    CHECK(sum == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(x4 == Catch::Approx(0.4).epsilon(1e-12));

    BarrierConfig cfg;
    QuadratureSpec spec;
    auto panels = radial_panels(cfg, 0.0, 10.0, 3.0, spec);
    const double val = panels.integrate([](double r) { return std::sin(3.0 * r) * std::exp(-r); });
    const double want = (3.0 - std::exp(-10.0) * (std::sin(30.0) + 3.0 * std::cos(30.0))) / 10.0;
    CHECK(val == Catch::Approx(want).epsilon(1e-13));
}

TEST_CASE("free half-line green function closed form") {
    BarrierConfig cfg;
    cfg.v0 = 0.0;
    const Complex g = green_function(cfg, 0.5, 1.5, {-1.0, 0.0});
    CHECK(std::abs(g - Complex(-std::sinh(0.5) * std::exp(-1.5), 0.0)) < 1e-12);
}

TEST_CASE("green kernel is symmetric and conjugates across the axis") {
    BarrierConfig cfg;
    CHECK(green_function(cfg, 1.2, 0.7, {-1.0, 0.0}) == green_function(cfg, 0.7, 1.2, {-1.0, 0.0}));
    for (Complex e : {Complex{2.0, 0.8}, Complex{-1.0, 0.4}}) {
        for (double r : {0.4, 1.5, 2.5}) {
            const Complex up = green_function(cfg, r, 2.2, e);
            const Complex dn = green_function(cfg, r, 2.2, std::conj(e));
            CHECK(std::abs(dn - std::conj(up)) < 1e-10 * std::abs(up));
        }
    }
}

TEST_CASE("real negative axis agrees with its one-sided limits") {
    BarrierConfig cfg;
    const Complex g0 = green_function(cfg, 0.8, 1.6, {-1.0, 0.0});
    const Complex gp = green_function(cfg, 0.8, 1.6, {-1.0, 1e-9});
    const Complex gm = green_function(cfg, 0.8, 1.6, {-1.0, -1e-9});
    CHECK(std::abs(gp - g0) < 1e-7 * std::abs(g0));
    CHECK(std::abs(gm - g0) < 1e-7 * std::abs(g0));
}

TEST_CASE("spectrum and degeneracy rejections") {
    BarrierConfig cfg;
    CHECK_THROWS_AS(green_function(cfg, 0.5, 1.5, {2.0, 0.0}), rhs::OnSpectrum);
    CHECK_THROWS_AS(green_function(cfg, 0.5, 1.5, {0.0, 0.0}), rhs::DegenerateEnergy);
    CHECK_THROWS_AS(green_function(cfg, -0.5, 1.5, {-1.0, 0.0}), rhs::DomainError);
}

TEST_CASE("jump across the cut stays bounded away from zero") {
    BarrierConfig cfg;
    const double e = 2.0;
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4}) {
        const Complex up = green_function(cfg, 0.7, 1.4, {e, eps});
        const Complex dn = green_function(cfg, 0.7, 1.4, {e, -eps});
        const double jump = std::abs(up - dn);
        CHECK(jump > 1e-3);
        prev = jump;
    }
    (void)prev;
}

TEST_CASE("green function is analytic off the spectrum") {
    BarrierConfig cfg;
    const double h = 1e-5;
    for (Complex e : {Complex{-1.5, 0.5}, Complex{2.5, 1.0}, Complex{1.5, -0.8}}) {
        auto g = [&](Complex z) { return green_function(cfg, 0.6, 1.8, z); };
        const Complex cr = (g(e + h) - g(e - h)) + Complex(0, 1) * (g(e + Complex(0, h)) - g(e - Complex(0, h)));
        CHECK(std::abs(cr) / (2 * h) < 1e-5);
    }
}

TEST_CASE("resolvent identity (E - h) g = f at interior probes") {
    QuadratureSpec spec;
    const double h = 1e-4;

    auto run = [&](const BarrierConfig& cfg, const RadialFunction& f, Complex e,
                   std::initializer_list<double> probes) {
        auto g = apply_resolvent(cfg, f, e, spec);
        double fmax = 0.0;
        for (double s = f.support_lo(); s <= f.support_hi(); s += 0.01)
            fmax = std::max(fmax, std::abs(f(s)));
        for (double r : probes) {
            const Complex d2 = d2_fd([&](double x) { return g(x); }, r, h);
            const Complex lhs = e * g(r) + d2 / cfg.kappa - potential_value(cfg, r) * g(r);
            CAPTURE(e, r);
            CHECK(std::abs(lhs - f(r)) < 1e-6 * fmax);
        }
    };

    SECTION("free particle, bump away from the origin") {
        BarrierConfig cfg;
        cfg.v0 = 0.0;
        auto f = RadialFunction::bump(4.0, 1.0, 1.0);
        run(cfg, f, {-1.0, 0.0}, {0.5, 2.3, 3.6, 4.4, 6.1});
    }

    SECTION("barrier, bump inside the core region") {
        BarrierConfig cfg;
        auto f = RadialFunction::bump(0.5, 0.3, 1.0);
        run(cfg, f, {-2.0, 0.0}, {0.35, 0.6, 1.5, 2.8});
    }

    SECTION("complex energies") {
        BarrierConfig cfg;
        auto f = RadialFunction::bump(4.0, 1.0, 1.0);
        run(cfg, f, {2.0, 1.0}, {0.5, 3.6, 4.3, 6.2});
        run(cfg, f, {2.0, -1.0}, {0.5, 3.6, 4.3, 6.2});
    }
}

TEST_CASE("resolvent of zero is zero") {
    BarrierConfig cfg;
    QuadratureSpec spec;
    auto g = apply_resolvent(cfg, RadialFunction::zero(), {-1.0, 0.0}, spec);
    CHECK(g(0.7) == Complex{});
    CHECK(g(3.0) == Complex{});
}
