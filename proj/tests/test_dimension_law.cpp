#include <catch_amalgamated.hpp>
#include <cmath>

#include "gfd/dimension_law.hpp"
#include "gfd/rng.hpp"
#include "gfd/verify.hpp"

using namespace gfd;

TEST_CASE("geometric tails and pmf") {
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    for (int i = 1; i <= 20; ++i)
        REQUIRE(law.tail(i) == Catch::Approx(std::pow(0.5, i - 1)).epsilon(1e-14));
    double mass = 0.0;
    for (int i = 1; i <= 60; ++i) mass += law.pmf(i);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("shifted poisson tails") {
    const DimensionLaw law = DimensionLaw::shifted_poisson(2.0);
    REQUIRE(law.tail(1) == 1.0);
    // P[K >= 2] = P[Poisson(2) >= 1] = 1 - e^-2
    REQUIRE(law.tail(2) == Catch::Approx(1.0 - std::exp(-2.0)).epsilon(1e-12));
    REQUIRE(law.pmf(1) == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
    double mass = 0.0;
    for (int i = 1; i <= law.quantile_index(1.0 - 1e-13) + 5; ++i) mass += law.pmf(i);
    REQUIRE(mass == Catch::Approx(1.0).margin(1e-11));
}

TEST_CASE("gamma for the geometric law with tail preconditioner") {
    // E[t_K | K >= i] = sum_{j>=i} (1/2)^{2(j-1)} (1/2)^j normalized: (2/3) t_i.
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(1.0);
    for (int i = 1; i <= 30; ++i)
        REQUIRE(gamma(law, sched, i) ==
                Catch::Approx((2.0 / 3.0) * law.tail(i)).epsilon(1e-12));
}

TEST_CASE("gamma is exactly one for the unit preconditioner") {
    const DimensionLaw law = DimensionLaw::geometric(0.3);
    PreconditionSchedule sched = PreconditionSchedule::unit_constant(2);
    REQUIRE(gamma(law, sched, 5) == 1.0);
}

TEST_CASE("gamma rejects finite support under the tail preconditioner") {
    const DimensionLaw law = DimensionLaw::deterministic(4);
    const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(1.0);
    REQUIRE_THROWS_AS(gamma(law, sched, 1), std::domain_error);
}

TEST_CASE("tail expectation sandwich on shipped laws") {
    REQUIRE(lemma_tail_check(DimensionLaw::geometric(0.5), 200) <= 1e-12);
    REQUIRE(lemma_tail_check(DimensionLaw::shifted_poisson(10.0), 200) <= 1e-12);
    REQUIRE(lemma_tail_check(DimensionLaw::shifted_poisson(100.0), 200) <= 1e-12);
}

TEST_CASE("explicit tails validate and continue harmonically") {
    REQUIRE_THROWS_AS(DimensionLaw::explicit_tails({0.9}), ConfigError);
    REQUIRE_THROWS_AS(DimensionLaw::explicit_tails({1.0, 0.5, 0.6}), ConfigError);
    const DimensionLaw law = DimensionLaw::explicit_tails({1.0, 0.5});
    REQUIRE(law.tail(2) == 0.5);
    REQUIRE(law.tail(3) == Catch::Approx(1.0 / 3.0).epsilon(1e-14));
    REQUIRE(law.tail(10) == Catch::Approx(1.0 / 10.0).epsilon(1e-14));
    REQUIRE(lemma_tail_check(law, 100) <= 1e-12);
}

TEST_CASE("trigamma_minus_inv matches the defining series") {
    for (double x : {0.5, 3.0, 10.0, 250.0}) {
        const int terms = 2000000;
        double direct = 0.5 / ((x + terms) * (x + terms));  // analytic tail of the series
        for (int m = terms - 1; m >= 0; --m) {  // ascending magnitudes
            const double xm = x + m;
            direct += 1.0 / (xm * xm * (xm + 1.0));
        }
        REQUIRE(trigamma_minus_inv(x) == Catch::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("staircase tail construction hits 1/i on the dyadic target") {
    std::vector<double> theta(64);
    for (int i = 0; i < 64; ++i) theta[i] = std::pow(2.0, -(i + 1));
    const DimensionLaw law = tails_for_target(theta);
    // remaining mass beyond i is exactly 2^-i, so every breakpoint advances by one
    for (int i = 1; i <= 64; ++i)
        REQUIRE(law.tail(i) == Catch::Approx(1.0 / i).epsilon(1e-14));
}

TEST_CASE("sampling respects the tails") {
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    auto rng = substream(42, 0, 0);
    const int n = 40000;
    int ge3 = 0;
    for (int s = 0; s < n; ++s)
        if (law.sample(rng) >= 3) ++ge3;
    const double p = law.tail(3);
    const double se = std::sqrt(p * (1.0 - p) / n);
    REQUIRE(std::abs(ge3 / static_cast<double>(n) - p) <= 4.0 * se);
}

TEST_CASE("schedule formulas") {
    const PreconditionSchedule s = PreconditionSchedule::tail_ceil(2.0);
    REQUIRE(s.sample_size(1) == 1);
    REQUIRE(s.sample_size(4) == 2);
    REQUIRE(s.sample_size(5) == 3);
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    REQUIRE(s.lambda(law, 3) == law.tail(3));
    const PreconditionSchedule u = PreconditionSchedule::unit_constant(7);
    REQUIRE(u.lambda(law, 3) == 1.0);
    REQUIRE(u.sample_size(100) == 7);
}
