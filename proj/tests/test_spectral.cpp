#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>

#include "rhs/spectral.hpp"

using namespace rhs;

namespace {

// band-clipped quadrature of the closed-form density
double rho_integral(const BarrierConfig& cfg, double e1, double e2) {
    PanelSet panels;
    for (const auto& [lo, hi] : energy_blocks(cfg, e1, e2))
        detail::subdivide_into(panels.panels, lo, hi, (e2 - e1) / 32.0, {});
    return panels.integrate([&](double e) { return rho(cfg, e); });
}

}  // namespace

TEST_CASE("free-particle density is 1/(pi sqrt(E))") {
    BarrierConfig cfg;
    cfg.v0 = 0.0;
    CHECK(rho(cfg, 1.0) == Catch::Approx(1.0 / pi).epsilon(1e-12));
    CHECK(rho(cfg, 4.0) == Catch::Approx(0.5 / pi).epsilon(1e-12));
}

TEST_CASE("density composes from the chi coefficients") {
    BarrierConfig cfg;
    const Complex j4 = closed_form_coefficients(cfg, Family::Chi, {4.0, 0.0}).c4;
    CHECK(rho(cfg, 4.0) ==
          Catch::Approx((1.0 / (4.0 * pi)) * 0.5 / std::norm(j4)).epsilon(1e-14));
    CHECK(rho(cfg, 0.5) > 0.0);
}

TEST_CASE("density is positive and continuous across the barrier top") {
    BarrierConfig cfg;
    for (double e = 0.05; e < 10.0; e *= 1.37) {
        if (is_degenerate_energy(cfg, {e, 0.0})) continue;
        CHECK(rho(cfg, e) > 0.0);
    }
    // one-sided linear extrapolations meet at v0
    const double d1 = 1e-3, d2 = 2e-3;
    const double below = 2.0 * rho(cfg, cfg.v0 - d1) - rho(cfg, cfg.v0 - d2);
    const double above = 2.0 * rho(cfg, cfg.v0 + d1) - rho(cfg, cfg.v0 + d2);
    CHECK(std::abs(below - above) < 1e-3 * std::abs(below));
}

TEST_CASE("conjugate-pair identity J3 = conj(J4) on the spectrum") {
    BarrierConfig cfg;
    for (int i = 0; i < 50; ++i) {
        const double e = std::pow(10.0, -1.5 + 3.0 * i / 49.0);
        if (is_degenerate_energy(cfg, {e, 0.0})) continue;
        const auto c = closed_form_coefficients(cfg, Family::Chi, {e, 0.0});
        CAPTURE(e);
        CHECK(std::abs(c.c3 - std::conj(c.c4)) <= 1e-10 * std::abs(c.c4));
    }
}

TEST_CASE("delta-normalized eigenfunction") {
    BarrierConfig free;
    free.v0 = 0.0;
    CHECK(sigma_delta(free, 1.0, pi / 2) == Catch::Approx(std::sqrt(1.0 / pi)).epsilon(1e-12));
    CHECK(sigma_delta(free, 1.0, 0.0) == 0.0);

    BarrierConfig cfg;
    const SigmaBasis basis(cfg, 0.5);
    CHECK(sigma_delta(cfg, 0.5, 1.5) ==
          Catch::Approx(basis.scale() * eval_eigenfunction(cfg, Family::Chi, {0.5, 0.0}, 1.5).real())
              .epsilon(1e-12));
}

TEST_CASE("sigma sup envelope dominates dense sampling") {
    BarrierConfig cfg;
    BarrierConfig free = cfg;
    free.v0 = 0.0;
    const SigmaBasis mfree(free, 1.0);
    CHECK(mfree.sup() == Catch::Approx(std::sqrt(1.0 / pi)).epsilon(1e-12));

    for (double e : {0.3, 0.5, 2.0, 7.0}) {
        const SigmaBasis basis(cfg, e);
        double grid_max = 0.0;
        for (double r = 0.0; r < 60.0; r += 0.003)
            grid_max = std::max(grid_max, std::abs(basis(r)));
        CAPTURE(e);
        CHECK(basis.sup() >= grid_max * (1.0 - 1e-9));
        CHECK(basis.sup() <= grid_max * 1.05);  // envelope is tight
    }
}

TEST_CASE("theta matrices have the displayed zero columns") {
    BarrierConfig cfg;
    const auto up = theta_matrices(cfg, {2.0, 0.5});
    CHECK(up.half == ThetaMatrix::Half::UpperHalf);
    CHECK(up.entries[0][1] == Complex{});
    CHECK(up.entries[1][1] == Complex{});
    CHECK(std::abs(up.entries[0][0]) > 0.0);

    const auto dn = theta_matrices(cfg, {2.0, -0.5});
    CHECK(dn.half == ThetaMatrix::Half::LowerHalf);
    CHECK(dn.entries[0][1] == Complex{});
    CHECK(dn.entries[1][1] == Complex{});

    const auto mn = theta_matrices(cfg, {-1.0, 0.5});
    CHECK(mn.half == ThetaMatrix::Half::MinusRegion);
    CHECK(mn.entries[0][0] == Complex{});
    CHECK(mn.entries[1][0] == Complex{});

    CHECK_THROWS_AS(theta_matrices(cfg, {2.0, 0.0}), rhs::OnSpectrum);
}

TEST_CASE("theta11 jumps across the axis and is analytic off it") {
    BarrierConfig cfg;
    const Complex above = theta_matrices(cfg, {2.0, 0.01}).entries[0][0];
    const Complex below = theta_matrices(cfg, {2.0, -0.01}).entries[0][0];
    CHECK(std::abs(above - below) > 1e-2);

    const double h = 1e-5;
    for (Complex e : {Complex{2.0, 0.6}, Complex{1.5, -0.8}}) {
        auto f = [&](Complex z) { return theta_matrices(cfg, z).entries[0][0]; };
        const Complex cr =
            (f(e + h) - f(e - h)) + Complex(0, 1) * (f(e + Complex(0, h)) - f(e - Complex(0, h)));
        CHECK(std::abs(cr) / (2 * h) < 1e-5);
    }
}

TEST_CASE("stone formula recovers the spectral density") {
    BarrierConfig cfg;

    SECTION("free particle closed form on (1,4)") {
        BarrierConfig free = cfg;
        free.v0 = 0.0;
        const auto res = stone_measure(free, 1.0, 4.0);
        CHECK(res.rho11 == Catch::Approx(2.0 / pi).epsilon(1e-4));
    }

    SECTION("barrier vs quadrature of rho on (1,2)") {
        const auto res = stone_measure(cfg, 1.0, 2.0);
        const double direct = rho_integral(cfg, 1.0, 2.0);
        CHECK(std::abs(res.rho11 - direct) / direct < 1e-4);
        CHECK(std::abs(res.rho12) < 1e-6);
        CHECK(std::abs(res.rho21) < 1e-6);
        CHECK(std::abs(res.rho22) < 1e-6);
    }

    SECTION("random subintervals integrate consistently") {
        std::mt19937_64 rng(11);
        std::uniform_real_distribution<double> pick(0.05, 10.0);
        for (int i = 0; i < 8; ++i) {
            double lo = pick(rng), hi = pick(rng);
            if (lo > hi) std::swap(lo, hi);
            if (hi - lo < 0.1) hi = lo + 0.1;
            // the inner limit needs eps well below the distance to the
            // threshold at E = 0
            const double s = std::min(1e-2, lo / 12.0);
            const auto res = stone_measure(cfg, lo, hi, {s, s / 2, s / 4});
            const double direct = rho_integral(cfg, lo, hi);
            CAPTURE(lo, hi);
            CHECK(std::abs(res.rho11 - direct) / direct < 1e-4);
        }
    }
}

TEST_CASE("spectrum info reports the half-line") {
    BarrierConfig cfg;
    const auto info = spectrum_info(cfg);
    CHECK(info.continuous_min == 0.0);
    CHECK(info.continuous_unbounded);
    CHECK(info.point_spectrum_empty);

    BarrierConfig free = cfg;
    free.v0 = 0.0;
    CHECK(spectrum_info(free).continuous == "[0,inf)");
}
