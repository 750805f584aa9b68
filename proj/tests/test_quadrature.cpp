#include <catch_amalgamated.hpp>
#include <cmath>

#include "gfd/quadrature.hpp"

using namespace gfd;

TEST_CASE("roberts_phi(1) is the golden ratio") {
    REQUIRE(roberts_phi(1) == Catch::Approx(1.6180339887498949).epsilon(1e-14));
}

TEST_CASE("roberts sequence first point in 1d") {
    // frac(0.5 + 1/phi) with phi the golden ratio.
    auto pts = roberts_sequence(1, 3);
    REQUIRE(pts[0][0] == Catch::Approx(0.1180339887498949).margin(1e-12));
    for (const auto& p : pts) {
        REQUIRE(p[0] >= 0.0);
        REQUIRE(p[0] < 1.0);
    }
}

TEST_CASE("roberts sequence is prefix stable") {
    auto small = roberts_sequence(2, 8);
    auto big = roberts_sequence(2, 32);
    for (std::size_t i = 0; i < small.size(); ++i)
        for (int d = 0; d < 2; ++d) REQUIRE(small[i][d] == big[i][d]);
}

TEST_CASE("interior quadrature weights sum to the box measure") {
    BoxDomain box({0.0, -1.0}, {2.0, 1.0});
    auto q = interior_quadrature(box, 1u << 10);
    REQUIRE(q.size() == 1u << 10);
    REQUIRE(q.total_weight() == Catch::Approx(box.measure()).epsilon(1e-12));
    for (const auto& p : q.nodes) {
        REQUIRE(p[0] > 0.0);
        REQUIRE(p[0] < 2.0);
        REQUIRE(p[1] > -1.0);
        REQUIRE(p[1] < 1.0);
    }
}

TEST_CASE("integrate sin over (0, pi)") {
    BoxDomain box({0.0}, {M_PI});
    auto q = interior_quadrature(box, 1u << 12);
    const double val = integrate([](const std::vector<double>& x) { return std::sin(x[0]); }, q);
    REQUIRE(val == Catch::Approx(2.0).margin(1e-3));
}

TEST_CASE("boundary quadrature embeds faces at their fixed value") {
    BoxDomain xline({0.0}, {2.0 * M_PI});
    BoundaryComponent bottom{0, 0.0, xline};
    BoundaryComponent left{1, -3.0, BoxDomain({0.0}, {5.0})};
    auto q = boundary_quadrature({bottom, left}, 64);
    REQUIRE(q.size() == 128);
    REQUIRE(q.total_weight() == Catch::Approx(2.0 * M_PI + 5.0).epsilon(1e-12));
    for (std::size_t i = 0; i < 64; ++i) {
        REQUIRE(q.nodes[i][0] == 0.0);
        REQUIRE(q.nodes[i][1] > 0.0);
        REQUIRE(q.nodes[i][1] < 2.0 * M_PI);
    }
    for (std::size_t i = 64; i < 128; ++i) REQUIRE(q.nodes[i][1] == -3.0);
}

TEST_CASE("zero-dimensional face gives a single unit-weight node") {
    BoundaryComponent corner{0, 1.5, BoxDomain{}};
    auto q = boundary_quadrature({corner}, 16);
    REQUIRE(q.size() == 1);
    REQUIRE(q.nodes[0][0] == 1.5);
    REQUIRE(q.weights[0] == 1.0);
}

TEST_CASE("config validation") {
    REQUIRE_THROWS_AS(BoxDomain({0.0}, {0.0}), ConfigError);
    REQUIRE_THROWS_AS(roberts_sequence(0, 4), ConfigError);
    BoxDomain box({0.0}, {1.0});
    REQUIRE_THROWS_AS(interior_quadrature(box, 0), ConfigError);
}
