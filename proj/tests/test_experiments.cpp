#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"

#include "errors.hpp"
#include "experiments.hpp"
#include "rng.hpp"

using namespace ssde;

namespace {

PathGrid flat_path(const std::vector<double>& times, double level) {
    PathGrid p;
    p.times = times;
    p.values.assign(times.size(), level);
    p.x0 = level;
    return p;
}

CoefficientSequence constant_sequence(double value, double alpha) {
    CoefficientSequence seq;
    seq.limit = catalog_coefficient("constant", alpha, value);
    Coefficient limit = seq.limit;
    seq.member = [limit](int) { return limit; };
    seq.eps = [](int) { return 0.0; };
    return seq;
}

} // namespace

TEST_CASE("mc_estimate: degenerate and two-point samples") {
    SUBCASE("constant replications give the value with zero dispersion") {
        std::vector<double> v(64, 3.25);
        for (auto est : {Estimator::Mean, Estimator::MedianOfMeans}) {
            auto r = mc_estimate(v, est, 1.1, 1.5);
            CHECK(r.estimate == 3.25);
            CHECK(r.dispersion == 0.0);
        }
    }

    SUBCASE("two-point {0,2} sample concentrates near 1") {
        std::mt19937_64 gen(7);
        const int n = 20000;
        std::vector<double> v(n);
        for (auto& x : v)
            x = (gen() & 1) ? 2.0 : 0.0;
        auto mean = mc_estimate(v, Estimator::Mean, 1.1, 1.5);
        CHECK(std::abs(mean.estimate - 1.0) <= 3.0 / std::sqrt(static_cast<double>(n)) * 1.0);

        // Median-of-means of symmetric data agrees with the mean within the band.
        auto mom = mc_estimate(v, Estimator::MedianOfMeans, 1.1, 1.5);
        CHECK(std::abs(mom.estimate - mean.estimate) <=
              mean.dispersion + mom.dispersion + 1e-12);
    }

    SUBCASE("median-of-means is invariant under replication order") {
        std::mt19937_64 gen(11);
        std::vector<double> v(900);
        for (auto& x : v)
            x = std::exponential_distribution<double>(1.0)(gen);
        auto base = mc_estimate(v, Estimator::MedianOfMeans, 1.1, 1.5);
        std::shuffle(v.begin(), v.end(), gen);
        auto shuffled = mc_estimate(v, Estimator::MedianOfMeans, 1.1, 1.5);
        CHECK(base.estimate == shuffled.estimate);
    }

    SUBCASE("auto estimator switches in the heavy-tail regime") {
        std::vector<double> v(100, 1.0);
        // beta >= (1+alpha)/2 = 1.25 -> median-of-means.
        CHECK(mc_estimate(v, Estimator::Auto, 1.3, 1.5).estimator == "median-of-means");
        CHECK(mc_estimate(v, Estimator::Auto, 1.1, 1.5).estimator == "mean");
    }

    SUBCASE("validation") {
        std::vector<double> few(10, 1.0);
        CHECK_THROWS_AS(mc_estimate(few, Estimator::Mean, 1.1, 1.5), ParameterError);
        std::vector<double> neg(40, -1.0);
        CHECK_THROWS_AS(mc_estimate(neg, Estimator::Mean, 1.1, 1.5), ParameterError);
    }
}

TEST_CASE("sup_error_beta basics") {
    std::vector<double> times = {0.0, 0.25, 0.5, 0.75, 1.0};
    auto a = flat_path(times, 1.0);
    auto b = flat_path(times, 1.0);

    CHECK(sup_error_beta(a, b, 1.25) == 0.0);

    auto c = flat_path(times, 1.5); // constant offset 0.5
    CHECK(sup_error_beta(a, c, 1.25) == doctest::Approx(std::pow(0.5, 1.25)).epsilon(1e-15));

    // Positive homogeneity: scaling both paths by s scales the result by s^beta.
    auto a2 = flat_path(times, 2.0);
    auto c2 = flat_path(times, 3.0);
    CHECK(sup_error_beta(a2, c2, 1.25) ==
          doctest::Approx(std::pow(2.0, 1.25) * sup_error_beta(a, c, 1.25)).epsilon(1e-14));

    auto misaligned = flat_path({0.0, 0.5, 1.0}, 1.0);
    CHECK_THROWS_AS(sup_error_beta(a, misaligned, 1.25), AlignmentError);
}

TEST_CASE("step_extend realizes the eta convention") {
    PathGrid coarse;
    coarse.times = {0.0, 0.5, 1.0};
    coarse.values = {1.0, 2.0, 3.0};
    std::vector<double> fine = {0.0, 0.25, 0.5, 0.75, 1.0};
    auto extended = step_extend(coarse, fine);
    REQUIRE(extended.values.size() == 5);
    CHECK(extended.values[0] == 1.0);
    CHECK(extended.values[1] == 1.0); // value at eta(0.25) = 0
    CHECK(extended.values[2] == 2.0);
    CHECK(extended.values[3] == 2.0); // value at eta(0.75) = 0.5
    CHECK(extended.values[4] == 3.0);
}

TEST_CASE("moment_term at a knot") {
    std::vector<double> times = {0.0, 0.5, 1.0};
    auto a = flat_path(times, 1.0);
    auto b = flat_path(times, 1.4);
    CHECK(moment_term(a, a, 1.0, 0.5) == 0.0);
    CHECK(moment_term(a, b, 1.0, 0.5) == doctest::Approx(std::sqrt(0.4)).epsilon(1e-12));
    CHECK_THROWS_AS(moment_term(a, b, 0.3, 0.5), AlignmentError);
}

TEST_CASE("convergence_study: constant sigma gives an exactly zero table") {
    auto coeff = catalog_coefficient("constant", 1.5, 1.0);
    auto table = convergence_study(coeff, {1.5, 1.0}, {16, 64}, 256, 0.0, 1.25, 30, 9);
    REQUIRE(table.estimates.size() == 2);
    CHECK(table.index[0] > table.index[1]); // sorted by mesh descending
    for (double e : table.estimates)
        CHECK(e == 0.0);
    for (double m : table.moment_at_horizon)
        CHECK(m == 0.0);
}

TEST_CASE("convergence_study validates the ladder and beta") {
    auto coeff = catalog_coefficient("constant", 1.5, 1.0);
    CHECK_THROWS_AS(convergence_study(coeff, {1.5, 1.0}, {24}, 256, 0.0, 1.25, 30, 9),
                    GridError);
    CHECK_THROWS_AS(convergence_study(coeff, {1.5, 1.0}, {16}, 256, 0.0, 1.75, 30, 9),
                    ParameterError);
    CHECK_THROWS_AS(convergence_study(coeff, {1.5, 1.0}, {16}, 256, 0.0, 1.25, 10, 9),
                    ParameterError);
}

TEST_CASE("study outputs are deterministic in (config, seed)") {
    auto coeff = catalog_coefficient("holder", 1.5);
    auto t1 = convergence_study(coeff, {1.5, 1.0}, {16, 32}, 512, 0.0, 1.25, 30, 77);
    auto t2 = convergence_study(coeff, {1.5, 1.0}, {16, 32}, 512, 0.0, 1.25, 30, 77);
    CHECK(t1.estimates == t2.estimates); // bitwise
    CHECK(t1.dispersions == t2.dispersions);
}

TEST_CASE("stability_study: identical dynamics give zero estimates") {
    auto seq = constant_sequence(1.0, 1.5);
    auto table = stability_study(seq, 0.25, [](int) { return 0.25; }, {1.5, 1.0}, 128, 1.25, 30,
                                 3, {1, 2, 4});
    for (double e : table.estimates)
        CHECK(e == 0.0);
}

TEST_CASE("stability_study: initial-offset subcase equals n^{-beta} exactly") {
    auto seq = constant_sequence(1.0, 1.5);
    auto table = stability_study(seq, 0.0, [](int n) { return 1.0 / n; }, {1.5, 1.0}, 128, 1.25,
                                 30, 3, {1, 2, 4, 8});
    REQUIRE(table.index.size() == 4);
    for (std::size_t i = 0; i < table.index.size(); ++i)
        CHECK(std::abs(table.estimates[i] - std::pow(table.index[i], -1.25)) <= 1e-12);
}

TEST_CASE("stability_study refuses a failing certificate") {
    auto seq = constant_sequence(1.0, 1.5);
    // Understate the schedule: member distance is 1/n but eps_n claims less.
    Coefficient limit = seq.limit;
    seq.member = [limit](int n) {
        Coefficient m = limit;
        double off = 1.0 / static_cast<double>(n);
        m.sigma = [off](double, double) { return 1.0 + off; };
        m.m1 = limit.m1 + off;
        return m;
    };
    seq.eps = [](int n) { return 1e-6 / static_cast<double>(n); };
    CHECK_THROWS_AS(stability_study(seq, 0.0, [](int) { return 0.0; }, {1.5, 1.0}, 128, 1.25,
                                    30, 3, {1, 2}),
                    CertificateError);
}

TEST_CASE("stability_study_bo requires a condition-C limit") {
    auto seq = constant_sequence(1.0, 1.5); // condition A entry
    CHECK_THROWS_AS(stability_study_bo(seq, 0.0, [](int) { return 0.0; }, {1.5, 1.0}, 128, 1.25,
                                       30, 3, {1, 2}),
                    CertificateError);
}

TEST_CASE("stability_study_bo: constant sigma in [d, K]") {
    CoefficientSequence seq;
    seq.limit = catalog_coefficient("bo-constant", 1.5, 1.5, 1.0, 2.0);
    Coefficient limit = seq.limit;
    seq.member = [limit](int) { return limit; };
    seq.eps = [](int) { return 0.0; };

    auto table = stability_study_bo(seq, 0.0, [](int) { return 0.0; }, {1.5, 1.0}, 128, 1.25,
                                    30, 3, {1, 2, 4});
    REQUIRE(table.lemma6_bounds.size() == 3);
    for (double e : table.estimates)
        CHECK(e == 0.0);
    for (std::size_t i = 0; i < table.lemma6_bounds.size(); ++i) {
        CHECK(table.lemma6_bounds[i] > 0.0);
        CHECK(std::isfinite(table.lemma6_bounds[i]));
        if (i > 0) {
            CHECK(table.m_n[i] >= table.m_n[i - 1]);
            CHECK(table.lemma6_bounds[i] <= table.lemma6_bounds[i - 1]);
        }
    }
}

TEST_CASE("tail_check: validation, monotonicity, homogeneity") {
    StableParams params{1.5, 1.0};
    std::vector<double> lambdas;
    for (int i = 0; i <= 8; ++i)
        lambdas.push_back(std::pow(10.0, 0.0 + 1.6 * i / 8.0));

    SUBCASE("input validation") {
        CHECK_THROWS_AS(tail_check(1.0, params, {}, 128, 10000, 4), ParameterError);
        CHECK_THROWS_AS(tail_check(1.0, params, {1.0, 2.0}, 128, 10000, 4), ParameterError);
        CHECK_THROWS_AS(tail_check(1.0, params, lambdas, 128, 100, 4), ParameterError);
    }

    SUBCASE("probabilities are non-increasing and exceed 1/2 below the median") {
        auto report = tail_check(1.0, params, lambdas, 128, 10000, 4);
        for (std::size_t i = 1; i < report.probabilities.size(); ++i)
            CHECK(report.probabilities[i] <= report.probabilities[i - 1]);
        // lambda = 1 sits below the median of sup_t |Z(t)| on [0,1].
        CHECK(report.probabilities.front() > 0.5);
        for (double p : report.probabilities) {
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
        }
    }

    SUBCASE("doubling H shifts the exceedance curve: P_2H(2 lambda) = P_H(lambda)") {
        auto base = tail_check(1.0, params, lambdas, 128, 10000, 4);
        std::vector<double> doubled_grid = lambdas;
        for (auto& l : doubled_grid)
            l *= 2.0;
        auto doubled = tail_check(2.0, params, doubled_grid, 128, 10000, 4);
        CHECK(doubled.probabilities == base.probabilities); // same seed, same events
    }
}
