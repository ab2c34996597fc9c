#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "rhs/eigen.hpp"

using namespace rhs;

namespace {

double rel_err(Complex got, Complex want) {
    const double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}

// Log-spaced sample energies in the validity region of a family.
std::vector<Complex> sample_energies(const BarrierConfig& cfg, Family f, int count) {
    std::vector<Complex> out;
    for (int i = 0; i < count; ++i) {
        const double mag = std::pow(10.0, -1.5 + 3.0 * i / (count - 1));
        Complex e;
        switch (f) {
            case Family::ChiTilde:
            case Family::ThetaTilde:
            case Family::Sigma1Tilde:
                e = {-mag, (i % 3 - 1) * 0.3 * mag};
                break;
            case Family::ThetaPlus:
                e = {mag, 0.4 * mag * (i % 2)};
                break;
            case Family::ThetaMinus:
                e = {mag, -0.4 * mag * (i % 2)};
                break;
            default:
                e = {mag, 0.4 * mag * (i % 3 - 1)};
                break;
        }
        if (!is_degenerate_energy(cfg, e)) out.push_back(e);
    }
    return out;
}

const Family kAllFamilies[] = {Family::Chi,        Family::ThetaPlus,   Family::ThetaMinus,
                               Family::ChiTilde,   Family::ThetaTilde,  Family::Sigma1Tilde,
                               Family::Sigma2};

}  // namespace

TEST_CASE("free-particle limit pins the outer chi coefficients") {
    BarrierConfig cfg;
    cfg.v0 = 0.0;
    const auto c = closed_form_coefficients(cfg, Family::Chi, {1.0, 0.0});
    CHECK(rel_err(c.c3, {0.0, -0.5}) < 1e-12);  // J3 = -i/2
    CHECK(rel_err(c.c4, {0.0, 0.5}) < 1e-12);   // J4 = +i/2

    // chi reduces to sin(kr) everywhere
    CHECK(rel_err(eval_eigenfunction(cfg, Family::Chi, {1.0, 0.0}, pi / 2), {1.0, 0.0}) < 1e-12);
    for (double r : {0.2, 1.3, 2.7, 6.0})
        CHECK(rel_err(eval_eigenfunction(cfg, Family::Chi, {2.0, 0.0}, r),
                      {std::sin(std::sqrt(2.0) * r), 0.0}) < 1e-12);
}

TEST_CASE("free-particle theta_plus has no reflection") {
    BarrierConfig cfg;
    cfg.v0 = 0.0;
    const Complex e{2.0, 0.0};
    const Complex k = std::sqrt(Complex(2.0, 0.0));
    for (double r : {0.2, 1.5, 3.0})
        CHECK(rel_err(eval_eigenfunction(cfg, Family::ThetaPlus, e, r),
                      std::exp(Complex(0, 1) * k * r)) < 1e-12);
    const auto c = transfer_matrix_coefficients(cfg, Family::ThetaPlus, e);
    CHECK(std::abs(c.c2) < 1e-14);
    CHECK(std::abs(c.c4) < 1e-14);
}

TEST_CASE("theta_plus outer region is its seed") {
    BarrierConfig cfg;
    const Complex e{2.0, 0.0};
    const Complex k = std::sqrt(Complex(2.0, 0.0));
    CHECK(rel_err(eval_eigenfunction(cfg, Family::ThetaPlus, e, 3.0),
                  std::exp(Complex(0, 1) * k * 3.0)) < 1e-12);
}

TEST_CASE("closed-form and transfer-matrix coefficients agree on log grids") {
    BarrierConfig cfg;
    for (Family f : kAllFamilies) {
        for (Complex e : sample_energies(cfg, f, 50)) {
            CAPTURE(to_string(f), e);
            const auto cf = closed_form_coefficients(cfg, f, e);
            const auto tm = transfer_matrix_coefficients(cfg, f, e);
            const double scale =
                std::max({std::abs(tm.c1), std::abs(tm.c2), std::abs(tm.c3), std::abs(tm.c4)});
            CHECK(std::abs(cf.c1 - tm.c1) / scale < 1e-10);
            CHECK(std::abs(cf.c2 - tm.c2) / scale < 1e-10);
            CHECK(std::abs(cf.c3 - tm.c3) / scale < 1e-10);
            CHECK(std::abs(cf.c4 - tm.c4) / scale < 1e-10);
        }
    }
}

TEST_CASE("assembled eigenfunctions are C1 at the interfaces") {
    BarrierConfig cfg;
    for (Family f : kAllFamilies) {
        for (Complex e : sample_energies(cfg, f, 12)) {
            CAPTURE(to_string(f), e);
            const auto pw = assemble_eigenfunction(cfg, f, e);
            CHECK(continuity_residual(pw).max() < 1e-10);
        }
    }
}

TEST_CASE("corrupting the theta_tilde region-1 coefficient breaks continuity") {
    // Regression guard: the symmetric exponent in the second region-1
    // coefficient is the only one that matches; the variant with the
    // sqrt-mangled exponent must fail the continuity check loudly.
    BarrierConfig cfg;
    const Complex e{-1.0, 0.0};
    const Wavenumbers w = wavenumbers(cfg, e);
    const Complex kt = w.k_tilde, qt = w.q_tilde;
    auto good = closed_form_coefficients(cfg, Family::ThetaTilde, e);
    RegionCoefficients bad = good;
    bad.c2 = 0.5 * std::exp(kt * cfg.a) *
             ((1.0 - qt / kt) * std::exp(qt * cfg.a) * good.c3 +
              (1.0 + qt / kt) * std::exp(-branch_sqrt(-qt) * cfg.a) * good.c4);
    const auto pw_good = assemble_eigenfunction(cfg, Family::ThetaTilde, e, good);
    const auto pw_bad = assemble_eigenfunction(cfg, Family::ThetaTilde, e, bad);
    CHECK(continuity_residual(pw_good).max() < 1e-12);
    CHECK(continuity_residual(pw_bad).max() > 1e-3);
}

TEST_CASE("chi is real on the positive real axis") {
    BarrierConfig cfg;
    for (double e : {0.3, 0.7, 2.0, 5.0, 20.0}) {
        const auto c = closed_form_coefficients(cfg, Family::Chi, {e, 0.0});
        CHECK(std::abs(c.c4 - std::conj(c.c3)) <= 1e-12 * std::abs(c.c3));
        if (e > cfg.v0) {
            // above the barrier the two barrier amplitudes pair up by
            // conjugation; below it the exponentials are real and so are
            // the amplitudes themselves
            CHECK(std::abs(c.c2 - std::conj(c.c1)) <= 1e-12 * std::abs(c.c1));
        } else {
            CHECK(std::abs(c.c1.imag()) <= 1e-12 * std::abs(c.c1));
            CHECK(std::abs(c.c2.imag()) <= 1e-12 * std::abs(c.c2));
        }
        for (double r : {0.4, 1.2, 1.9, 3.5, 8.0})
            CHECK(std::abs(eval_eigenfunction(cfg, Family::Chi, {e, 0.0}, r).imag()) < 1e-12);
    }
}

TEST_CASE("wronskian values and constancy") {
    BarrierConfig cfg;

    SECTION("free particle anchor") {
        BarrierConfig free = cfg;
        free.v0 = 0.0;
        CHECK(rel_err(wronskian(free, Family::Chi, Family::ThetaPlus, {1.0, 0.0}, 0.3),
                      {-1.0, 0.0}) < 1e-12);
    }

    SECTION("W(chi, theta_plus) = 2ik J4, constant in r") {
        const Complex e{2.0, 0.0};
        const Complex k = wavenumbers(cfg, e).k;
        const Complex j4 = closed_form_coefficients(cfg, Family::Chi, e).c4;
        const Complex expected = 2.0 * Complex(0, 1) * k * j4;
        for (double r : {0.5, 1.5, 3.0})
            CHECK(rel_err(wronskian(cfg, Family::Chi, Family::ThetaPlus, e, r), expected) < 1e-10);
    }

    SECTION("W(chi, theta_minus) = -2ik J3") {
        const Complex e{2.0, 0.0};
        const Complex k = wavenumbers(cfg, e).k;
        const Complex j3 = closed_form_coefficients(cfg, Family::Chi, e).c3;
        const Complex expected = -2.0 * Complex(0, 1) * k * j3;
        for (double r : {0.5, 1.5, 3.0})
            CHECK(rel_err(wronskian(cfg, Family::Chi, Family::ThetaMinus, e, r), expected) < 1e-10);
    }

    SECTION("W(chi_tilde, theta_tilde) = -2kt J3t") {
        const Complex e{-1.0, 0.0};
        const Complex kt = wavenumbers(cfg, e).k_tilde;
        const Complex j3t = closed_form_coefficients(cfg, Family::ChiTilde, e).c3;
        const Complex expected = -2.0 * kt * j3t;
        for (double r : {0.5, 1.5, 3.0})
            CHECK(rel_err(wronskian(cfg, Family::ChiTilde, Family::ThetaTilde, e, r), expected) < 1e-10);
    }

    SECTION("jump points rejected") {
        CHECK_THROWS_AS(wronskian(cfg, Family::Chi, Family::ThetaPlus, {2.0, 0.0}, cfg.a),
                        rhs::DomainError);
    }
}

TEST_CASE("five-point finite differences satisfy the eigenvalue equation") {
    BarrierConfig cfg;
    const double h = 1e-4;
    for (Family f : kAllFamilies) {
        for (Complex e : sample_energies(cfg, f, 8)) {
            const auto pw = assemble_eigenfunction(cfg, f, e);
            for (double r : {0.4, 1.5, 2.6}) {
                const Complex m2 = pw.value(r - 2 * h), m1 = pw.value(r - h), c0 = pw.value(r);
                const Complex p1 = pw.value(r + h), p2 = pw.value(r + 2 * h);
                const Complex d2 = (-m2 + 16.0 * m1 - 30.0 * c0 + 16.0 * p1 - p2) / (12.0 * h * h);
                const Complex hval = -d2 / cfg.kappa + potential_value(cfg, r) * c0;
                CAPTURE(to_string(f), e, r);
                CHECK(std::abs(hval - e * c0) <=
                      1e-6 * (1.0 + std::abs(e)) * std::max(std::abs(c0), pw.piece_at(r).envelope(r)));
            }
        }
    }
}

TEST_CASE("conjugation symmetry for the spectral basis families") {
    BarrierConfig cfg;
    for (double r : {0.5, 1.5, 3.0}) {
        const Complex e{2.0, 0.7};
        CHECK(rel_err(eval_eigenfunction(cfg, Family::Sigma2, std::conj(e), r),
                      std::conj(eval_eigenfunction(cfg, Family::Sigma2, e, r))) < 1e-12);
        const Complex em{-2.0, 0.7};
        CHECK(rel_err(eval_eigenfunction(cfg, Family::Sigma1Tilde, std::conj(em), r),
                      std::conj(eval_eigenfunction(cfg, Family::Sigma1Tilde, em, r))) < 1e-12);
    }
}

TEST_CASE("family/region mismatches are rejected") {
    BarrierConfig cfg;
    CHECK_THROWS_AS(closed_form_coefficients(cfg, Family::ThetaPlus, {2.0, -0.5}),
                    rhs::IncompatibleRegion);
    CHECK_THROWS_AS(closed_form_coefficients(cfg, Family::ThetaMinus, {2.0, 0.5}),
                    rhs::IncompatibleRegion);
    CHECK_THROWS_AS(closed_form_coefficients(cfg, Family::ChiTilde, {2.0, 0.0}),
                    rhs::IncompatibleRegion);
    CHECK_THROWS_AS(closed_form_coefficients(cfg, Family::Chi, {-2.0, 0.0}),
                    rhs::IncompatibleRegion);
    CHECK_THROWS_AS(eval_eigenfunction(cfg, Family::Chi, {2.0, 0.0}, -1.0), rhs::DomainError);
}

TEST_CASE("degenerate energies propagate") {
    BarrierConfig cfg;
    CHECK_THROWS_AS(closed_form_coefficients(cfg, Family::Chi, {cfg.v0, 0.0}),
                    rhs::DegenerateEnergy);
    CHECK_THROWS_AS(transfer_matrix_coefficients(cfg, Family::Chi, {1e-13, 0.0}),
                    rhs::DegenerateEnergy);
}
