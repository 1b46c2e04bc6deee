#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include "doctest.h"

#include "coefficients.hpp"
#include "errors.hpp"

using namespace ssde;

namespace {

double integrate(const std::function<double(double)>& f, double lo, double hi) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, lo, hi, 10, 1e-10);
}

} // namespace

TEST_CASE("a-sequence closed forms") {
    SUBCASE("rho(x) = x gives a_m = exp(-m(m+1)/2)") {
        auto a = solve_a_sequence(Modulus::linear(1.0), 3);
        REQUIRE(a.size() == 4);
        CHECK(a[0] == 1.0);
        CHECK(a[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
        CHECK(a[2] == doctest::Approx(std::exp(-3.0)).epsilon(1e-10));
        CHECK(a[3] == doctest::Approx(std::exp(-6.0)).epsilon(1e-10));
    }

    SUBCASE("rho(x) = x^2 gives a_m = 1 / (1 + m(m+1)/2)") {
        auto a = solve_a_sequence(Modulus::power(1.0, 2.0), 3);
        CHECK(a[1] == doctest::Approx(1.0 / 2.0).epsilon(1e-10));
        CHECK(a[2] == doctest::Approx(1.0 / 4.0).epsilon(1e-10));
        CHECK(a[3] == doctest::Approx(1.0 / 7.0).epsilon(1e-10));
    }

    SUBCASE("sequence is strictly decreasing with residuals under tolerance") {
        auto a = solve_a_sequence(Modulus::linear(2.0), 4);
        for (std::size_t m = 1; m < a.size(); ++m) {
            CHECK(a[m] < a[m - 1]);
            // Residual of int_{a_m}^{a_{m-1}} dx/(2x) - m.
            double residual = 0.5 * std::log(a[m - 1] / a[m]) - static_cast<double>(m);
            CHECK(std::abs(residual) <= 1e-8 * static_cast<double>(m));
        }
    }

    SUBCASE("inadmissible modulus is refused") {
        // rho(x) = sqrt(x): int_0^1 dx/rho = 2 < 3, so m = 2 is unreachable.
        CHECK_THROWS_AS(solve_a_sequence(Modulus::power(1.0, 0.5), 2), CertificateError);
    }

    SUBCASE("parameter validation") {
        CHECK_THROWS_AS(solve_a_sequence(Modulus::linear(1.0), 0), ParameterError);
    }
}

TEST_CASE("BO a-sequence: a_m = a_{m-1} e^{-m}") {
    auto a = bo_a_sequence(3);
    CHECK(a[0] == 1.0);
    CHECK(a[1] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(a[2] == doctest::Approx(std::exp(-3.0)).epsilon(1e-12));
    CHECK(a[3] == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
}

TEST_CASE("mollifier bump: support, cap, normalization") {
    auto family = MollifierFamily::komatsu(Modulus::linear(1.0), 1.5, 2);

    for (int m : {1, 2}) {
        auto phi = family.build(m);
        double lo = phi.a_lo(), hi = phi.a_hi();
        CAPTURE(m);

        // Support condition: zero at 0, at the endpoints, and beyond.
        CHECK(phi.phi(0.0) == 0.0);
        CHECK(phi.phi(lo) == 0.0);
        CHECK(phi.phi(hi) == 0.0);
        CHECK(phi.phi(-hi) == 0.0);
        CHECK(phi.phi(hi + 0.5) == 0.0);
        CHECK(phi.phi(0.5 * lo) == 0.0);

        // Even, and strictly positive inside.
        double mid = 0.5 * (lo + hi);
        CHECK(phi.phi(mid) > 0.0);
        CHECK(phi.phi(mid) == phi.phi(-mid));

        // Cap: phi_m(x) * m * rho(x) <= 1 on a dense support grid.
        double worst = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            double x = lo + (hi - lo) * i / 2000.0;
            worst = std::max(worst, phi.phi(x) * static_cast<double>(m) * x);
        }
        CHECK(worst <= 1.0 + 1e-9);

        // Total integral 1 (both sides).
        double mass = 2.0 * integrate([&](double x) { return phi.phi(x); }, lo, hi);
        CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("mollifier reported sup respects the cap (rho(x) = x, m = 1)") {
    auto family = MollifierFamily::komatsu(Modulus::linear(1.0), 1.5, 1);
    auto phi = family.build(1);
    CHECK(phi.a_lo() == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));
    CHECK(phi.a_hi() == 1.0);
    // The cap 1/(m rho) is largest at a_m, so the bump peak obeys
    // sup phi_1 * rho(a_1) <= 1; and the reported sup dominates samples.
    CHECK(phi.sup_phi() * 1.0 * phi.a_lo() <= 1.0 + 1e-9);
    double mid = 0.5 * (phi.a_lo() + phi.a_hi());
    CHECK(phi.sup_phi() >= phi.phi(mid));
}

TEST_CASE("BO mollifier feasibility") {
    // Cap integral (2/m) ln(a_{m-1}/a_m) must reach 1; a ratio too close to 1
    // cannot carry unit mass under the cap.
    Modulus none;
    CHECK_THROWS_AS(Mollifier(1, 0.9, 1.0, MollifierVariant::BO, none, 1.5),
                    FeasibilityError);
    // The shipped BO sequence is feasible by construction.
    auto family = MollifierFamily::bo(1.5, 2);
    auto phi = family.build(2);
    double mass =
        2.0 * integrate([&](double x) { return phi.phi(x); }, phi.a_lo(), phi.a_hi());
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("u_m: sandwich, evenness, positivity at zero") {
    auto family = MollifierFamily::komatsu(Modulus::linear(1.0), 1.5, 2);
    for (int m : {1, 2}) {
        auto phi = family.build(m);
        double band = std::pow(phi.a_hi(), 0.5); // a_{m-1}^{alpha-1}
        CAPTURE(m);

        for (double x : {1.5, 2.0, 5.0, 25.0}) {
            double u = phi.u(x);
            CHECK(u >= std::pow(std::abs(x), 0.5) - band - 1e-6);
            CHECK(u <= std::pow(std::abs(x), 0.5) + band + 1e-6);
            CHECK(phi.u(-x) == doctest::Approx(u).epsilon(1e-12));
        }
        CHECK(phi.u(0.0) > 0.0);

        // Convenience wrapper agrees with the member.
        CHECK(convolve_u(phi, 1.5, 2.0) == phi.u(2.0));
    }
}

TEST_CASE("certificate: constant coefficient passes with zero modulus usage") {
    auto coeff = catalog_coefficient("constant", 1.5, 2.0);
    auto report = check_certificate(coeff, 1.5, {});
    CHECK(report.pass);
    for (const auto& [name, margin] : report.margins)
        CHECK(margin >= -1e-12);
}

TEST_CASE("certificate: Hoelder catalog entry passes under its slack modulus") {
    auto coeff = catalog_coefficient("holder", 1.5);
    auto report = check_certificate(coeff, 1.5, {});
    CHECK(report.pass);
}

TEST_CASE("certificate: BO step coefficient passes condition (C)") {
    auto coeff = catalog_coefficient("bo-step", 1.5, 1.0, 1.0, 2.0);
    CHECK(coeff.kind == ConditionKind::C);
    auto report = check_certificate(coeff, 1.5, {});
    CHECK(report.pass);
}

TEST_CASE("certificate: declared eps schedule is verified, not trusted") {
    auto limit = catalog_coefficient("constant", 1.5, 1.0);

    CoefficientSequence seq;
    seq.limit = limit;
    seq.member = [limit](int n) {
        Coefficient member = limit;
        double offset = 1.0 / static_cast<double>(n);
        member.sigma = [offset](double, double) { return 1.0 + offset; };
        member.m1 = limit.m1 + offset;
        return member;
    };

    SUBCASE("eps_n = (1/n)^alpha dominates the true sup distance") {
        seq.eps = [](int n) { return std::pow(1.0 / n, 1.5); };
        auto report = check_certificate(seq, 1.5, {});
        CHECK(report.pass);
    }

    SUBCASE("an understated schedule fails, and stays failed on a larger plan") {
        seq.eps = [](int n) { return 0.1 * std::pow(1.0 / n, 1.5); };
        SamplePlan small;
        small.pair_count = 100;
        auto report_small = check_certificate(seq, 1.5, small);
        CHECK_FALSE(report_small.pass);

        SamplePlan big;
        big.pair_count = 20000;
        auto report_big = check_certificate(seq, 1.5, big);
        CHECK_FALSE(report_big.pass); // enlarging the plan never flips FAIL to PASS
    }
}

TEST_CASE("catalog rejects unknown names and invalid BO bounds") {
    CHECK_THROWS_AS(catalog_coefficient("nope", 1.5), ParameterError);
    CHECK_THROWS_AS(catalog_coefficient("bo-constant", 1.5, 5.0, 1.0, 2.0), ParameterError);
}
