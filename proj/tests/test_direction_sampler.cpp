#include <catch_amalgamated.hpp>
#include <cmath>

#include "gfd/direction.hpp"
#include "gfd/expansion.hpp"
#include "gfd/prebasis.hpp"
#include "gfd/rng.hpp"

using namespace gfd;

namespace {

PreBasis& shared_pb() {
    static PreBasis pb(MaternParams{2.5, 2.0}, BoxDomain({0.0, 0.0}, {1.0, 2.0 * M_PI}), 2,
                       1u << 9);
    return pb;
}

}  // namespace

TEST_CASE("sampled coefficients solve R w = T^-1/2 z") {
    PreBasis& pb = shared_pb();
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    const int k = 8;
    auto rng = substream(3, 1, 1);
    PreBasisExpansion v = sample_direction(pb, law, k, rng);
    REQUIRE(v.length() == k);

    // replay the normal draws with an identical substream
    auto replay = substream(3, 1, 1);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) rhs[i] = draw_normal(replay) / std::sqrt(law.tail(i + 1));
    Eigen::Map<const Eigen::VectorXd> w(v.coeffs().data(), k);
    const Eigen::VectorXd resid =
        pb.chol_r().topLeftCorner(k, k).triangularView<Eigen::Upper>() * w - rhs;
    REQUIRE(resid.cwiseAbs().maxCoeff() <= 1e-9 * rhs.cwiseAbs().maxCoeff());
}

TEST_CASE("same substream reproduces the direction bitwise") {
    PreBasis& pb = shared_pb();
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    auto r1 = substream(11, 2, 3);
    auto r2 = substream(11, 2, 3);
    PreBasisExpansion a = sample_direction(pb, law, 6, r1);
    PreBasisExpansion b = sample_direction(pb, law, 6, r2);
    for (int i = 0; i < 6; ++i) REQUIRE(a.coeffs()[i] == b.coeffs()[i]);
}

TEST_CASE("weak second-order identity E[<v,h>^2] = |h|^2 with unit tails") {
    // deterministic law has t_i = 1, so v = B_k R_k^-1 z and <v,h> ~ N(0, |P_k h|^2)
    PreBasis& pb = shared_pb();
    const DimensionLaw law = DimensionLaw::deterministic(5);
    const int k = 5;
    pb.ensure(k);
    PreBasisExpansion h(&pb, {0.7, -0.3, 0.5, 0.1, -0.9});
    const double target = sobolev_inner(h, h, 2);

    auto rng = substream(19, 0, 0);
    const int reps = 20000;
    double acc = 0.0, accsq = 0.0;
    for (int s = 0; s < reps; ++s) {
        PreBasisExpansion v = sample_direction(pb, law, k, rng);
        const double ip = sobolev_inner(v, h, 2);
        acc += ip * ip;
        accsq += ip * ip * ip * ip;
    }
    const double mean = acc / reps;
    const double se = std::sqrt(std::max(0.0, (accsq / reps - mean * mean) / (reps - 1.0)));
    REQUIRE(std::abs(mean - target) <= 4.0 * se);
}
