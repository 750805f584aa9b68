#include <catch_amalgamated.hpp>
#include <cmath>

#include "gfd/expansion.hpp"
#include "gfd/prebasis.hpp"

using namespace gfd;

namespace {

PreBasis& shared_pb() {
    static PreBasis pb(MaternParams{2.5, 2.0}, BoxDomain({0.0, 0.0}, {1.0, 2.0 * M_PI}), 2,
                       1u << 8);
    return pb;
}

}  // namespace

TEST_CASE("zero expansion evaluates to zero") {
    PreBasisExpansion h;
    REQUIRE(evaluate(h, {0.5, 1.0}) == 0.0);
    REQUIRE(h.length() == 0);
    REQUIRE(h.coeff_norm() == 0.0);
}

TEST_CASE("single translate evaluates to the kernel") {
    PreBasis& pb = shared_pb();
    PreBasisExpansion h(&pb, {2.0});
    const auto& c = pb.centers(1)[0];
    REQUIRE(evaluate(h, c) == Catch::Approx(2.0).margin(1e-14));
    const double r = 0.3;
    REQUIRE(evaluate(h, {c[0] + r, c[1]}) ==
            Catch::Approx(2.0 * matern_eval(pb.params(), r)).margin(1e-14));
}

TEST_CASE("evaluate_partial sums kernel partials") {
    PreBasis& pb = shared_pb();
    PreBasisExpansion h(&pb, {1.0, -0.5});
    const auto& centers = pb.centers(2);
    const std::vector<double> x{0.4, 2.0};
    const MultiIndex idx({1, 0});
    const double expect = 1.0 * matern_partial(pb.params(), centers[0], x, idx) -
                          0.5 * matern_partial(pb.params(), centers[1], x, idx);
    REQUIRE(evaluate_partial(h, x, idx) == Catch::Approx(expect).margin(1e-14));
}

TEST_CASE("axpy pads and combines coefficients") {
    PreBasis& pb = shared_pb();
    PreBasisExpansion x(&pb, {1.0, 2.0, 3.0});
    PreBasisExpansion y(&pb, {10.0});
    PreBasisExpansion out = axpy(2.0, x, y);
    REQUIRE(out.length() == 3);
    REQUIRE(out.coeffs()[0] == 12.0);
    REQUIRE(out.coeffs()[1] == 4.0);
    REQUIRE(out.coeffs()[2] == 6.0);

    PreBasisExpansion diff = x - x;
    for (double c : diff.coeffs()) REQUIRE(c == 0.0);
    PreBasisExpansion scaled = 0.5 * x;
    REQUIRE(scaled.coeffs()[2] == 1.5);
}

TEST_CASE("sobolev inner product uses the gram matrix") {
    PreBasis& pb = shared_pb();
    pb.assemble_gram(3);
    PreBasisExpansion e1(&pb, {1.0});
    PreBasisExpansion e2(&pb, {0.0, 1.0});
    REQUIRE(sobolev_inner(e1, e2, 2) == Catch::Approx(pb.gram()(0, 1)).margin(1e-14));
    REQUIRE(sobolev_inner(e1, e1, 2) == Catch::Approx(pb.gram()(0, 0)).margin(1e-14));

    // bilinearity
    PreBasisExpansion a(&pb, {0.3, -1.2, 0.7});
    PreBasisExpansion b(&pb, {1.1, 0.4, -0.2});
    const double lhs = sobolev_inner(axpy(2.0, a, b), a, 2);
    const double rhs = 2.0 * sobolev_inner(a, a, 2) + sobolev_inner(b, a, 2);
    REQUIRE(lhs == Catch::Approx(rhs).epsilon(1e-12));

    REQUIRE_THROWS_AS(sobolev_inner(a, b, 1), ContractViolation);
}

TEST_CASE("l2 distance against a reference function") {
    PreBasis& pb = shared_pb();
    const Quadrature q = interior_quadrature(pb.domain(), 1u << 10);
    PreBasisExpansion zero(&pb);
    const double d = l2_distance(zero, [](const std::vector<double>&) { return 1.0; }, q);
    REQUIRE(d == Catch::Approx(std::sqrt(pb.domain().measure())).epsilon(1e-10));
}
