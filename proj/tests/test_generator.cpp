#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "doctest.h"

#include "coefficients.hpp"
#include "errors.hpp"
#include "generator.hpp"

using namespace ssde;

namespace {

constexpr double kPi = std::numbers::pi;

// A C^2 bump supported on [-1, 1].
double bump(double x) {
    if (std::abs(x) >= 1.0)
        return 0.0;
    double w = 1.0 - x * x;
    return w * w * w;
}

double bump_d2(double x) {
    if (std::abs(x) >= 1.0)
        return 0.0;
    double w = 1.0 - x * x;
    return -6.0 * w * w + 24.0 * x * x * w;
}

SmoothFn bump_fn() {
    SmoothFn f;
    f.value = [](double x) { return bump(x); };
    f.d2 = [](double x) { return bump_d2(x); };
    f.growth_c = 1.0;
    f.growth_exponent = 0.0;
    return f;
}

} // namespace

TEST_CASE("k_alpha closed form and sign") {
    CHECK(k_alpha(1.5) == doctest::Approx(4.0 * kPi / 3.0).epsilon(1e-13));
    for (double alpha : {1.05, 1.2, 1.5, 1.8, 1.95})
        CHECK(k_alpha(alpha) > 0.0);
    // Diverges at the alpha -> 2 boundary (pole of the cotangent at pi);
    // boundary values themselves are rejected rather than approximated.
    CHECK(k_alpha(1.9999) > 1e4);
    CHECK_THROWS_AS(k_alpha(1.0), ParameterError);
    CHECK_THROWS_AS(k_alpha(2.0), ParameterError);
    CHECK_THROWS_AS(k_alpha(0.5), ParameterError);
}

TEST_CASE("quadrature spec validation") {
    SmoothFn f = bump_fn();
    QuadratureSpec bad;
    bad.inner_cutoff = 0.0;
    CHECK_THROWS_AS(apply_generator(f, 0.0, 1.5, bad), ParameterError);
    bad = {};
    bad.tolerance = 0.5; // above the 1e-2 ceiling
    CHECK_THROWS_AS(apply_generator(f, 0.0, 1.5, bad), ParameterError);
    CHECK_THROWS_AS(apply_generator(f, 0.0, 2.5, {}), ParameterError);
}

TEST_CASE("generator of a compact bump far from the support: direct oracle") {
    SmoothFn f = bump_fn();
    const double alpha = 1.5, x = 5.0;
    // Support of f is [-1,1] and x - 1 = 4 > 1, so the compensator and the
    // f(x) terms drop: L f(x) = int f(u) |u - x|^{-1-alpha} du.
    double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double u) { return bump(u) * std::pow(std::abs(u - x), -1.0 - alpha); }, -1.0, 1.0,
        10, 1e-12);
    auto got = apply_generator(f, x, alpha);
    CHECK(got.value > 0.0);
    CHECK(got.value == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("generator kills functions that are odd around the evaluation point") {
    // f globally bounded and linear on a width-4 window around 0; the
    // symmetrized integrand vanishes identically, so L f(0) = 0.
    SmoothFn f;
    f.value = [](double x) { return std::clamp(x, -3.0, 3.0); };
    f.d2 = [](double) { return 0.0; };
    f.growth_c = 3.0;
    f.growth_exponent = 0.0;
    auto got = apply_generator(f, 0.0, 1.5);
    CHECK(std::abs(got.value) <= 1e-8);
}

TEST_CASE("generator linearity") {
    SmoothFn f = bump_fn();
    SmoothFn g;
    g.value = [](double x) { return 1.0 / (1.0 + x * x); };
    g.d2 = [](double x) {
        double d = 1.0 + x * x;
        return (8.0 * x * x - 2.0 * d) / (d * d * d);
    };

    SmoothFn combo;
    combo.value = [&](double x) { return 2.0 * f.value(x) - 3.0 * g.value(x); };
    combo.d2 = [&](double x) { return 2.0 * f.d2(x) - 3.0 * g.d2(x); };
    combo.growth_c = 5.0;

    const double x = 0.4, alpha = 1.7;
    double lf = apply_generator(f, x, alpha).value;
    double lg = apply_generator(g, x, alpha).value;
    double lc = apply_generator(combo, x, alpha).value;
    CHECK(lc == doctest::Approx(2.0 * lf - 3.0 * lg).epsilon(1e-5));
}

TEST_CASE("generator translation covariance") {
    SmoothFn f = bump_fn();
    const double c = 0.8, x = 0.25, alpha = 1.4;

    SmoothFn shifted;
    shifted.value = [&](double z) { return f.value(z - c); };
    shifted.d2 = [&](double z) { return f.d2(z - c); };

    double base = apply_generator(f, x, alpha).value;
    double moved = apply_generator(shifted, x + c, alpha).value;
    CHECK(moved == doctest::Approx(base).epsilon(1e-6));
}

TEST_CASE("generator order-alpha scaling") {
    SmoothFn f;
    f.value = [](double x) { return 1.0 / (1.0 + x * x); };
    f.d2 = [](double x) {
        double d = 1.0 + x * x;
        return (8.0 * x * x - 2.0 * d) / (d * d * d);
    };

    const double lam = 2.0, x = 0.3, alpha = 1.5;
    SmoothFn scaled;
    scaled.value = [&](double z) { return f.value(lam * z); };
    scaled.d2 = [&](double z) { return lam * lam * f.d2(lam * z); };

    double lhs = apply_generator(scaled, x, alpha).value;
    double rhs = std::pow(lam, alpha) * apply_generator(f, lam * x, alpha).value;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-5));
}

TEST_CASE("growth envelope violations are rejected") {
    SmoothFn f;
    f.value = [](double x) { return x * x; };
    f.d2 = [](double) { return 2.0; };
    f.growth_c = 1.0;
    f.growth_exponent = 0.0; // declared bounded, actually quadratic
    CHECK_THROWS_AS(apply_generator(f, 0.0, 1.5), NumericalError);
}

TEST_CASE("identity L u_m = K_alpha phi_m: spot check") {
    auto family = MollifierFamily::komatsu(Modulus::linear(1.0), 1.5, 1);
    double a_hi = family.a[0];
    double a_lo = family.a[1];
    // A small grid: inside the support, at zero, and in the far field where
    // phi_1 = 0 and L u_1 must vanish relative to 1.
    std::vector<double> grid = {0.0, 0.5 * (a_lo + a_hi), -0.5 * (a_lo + a_hi), 1.5,
                                a_hi + 1.0};
    auto report = verify_identity(family, 1, grid);
    CHECK(report.pass);
    CHECK(report.max_rel_err <= 1e-3);
    REQUIRE(report.rows.size() == grid.size());
    // phi_1 vanishes at 0 and beyond the support: rhs = 0 there.
    CHECK(report.rows[0].rhs == 0.0);
    CHECK(report.rows[4].rhs == 0.0);
    CHECK(std::abs(report.rows[4].lhs) <= 1e-3);
}

TEST_CASE("identity default grid covers the core and the far field") {
    auto grid = identity_default_grid(1.0, 200);
    CHECK(grid.size() >= 200);
    double lo = *std::min_element(grid.begin(), grid.end());
    double hi = *std::max_element(grid.begin(), grid.end());
    CHECK(lo <= -2.0);
    CHECK(hi >= 2.0);
    CHECK(hi >= 11.0); // far-field probes
}
