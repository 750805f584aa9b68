#include <catch_amalgamated.hpp>
#include <cmath>
#include <limits>

#include "gfd/surrogate.hpp"

using namespace gfd;

TEST_CASE("surrogate space invariants") {
    const SurrogateSpace s = SurrogateSpace::random(8, 21);
    const Eigen::MatrixXd qwq = s.q.transpose() * s.w * s.q;
    REQUIRE((qwq - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-10);
    REQUIRE((s.r.transpose() * s.r - s.gram).cwiseAbs().maxCoeff() <= 1e-10);
    // coords invert the orthonormal expansion
    Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(8, -1.0, 1.0);
    REQUIRE((s.q * s.coords(x) - x).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("quadratic risk gradient solves the Riesz system") {
    const SurrogateSpace s = SurrogateSpace::random(6, 22);
    const QuadraticRisk risk = QuadraticRisk::random(s, 22);
    Eigen::VectorXd h = Eigen::VectorXd::Ones(6);
    const Eigen::VectorXd g = risk.gradient(s, h);
    const Eigen::VectorXd resid = s.w * g - risk.a.transpose() * (risk.a * h - risk.y);
    REQUIRE(resid.cwiseAbs().maxCoeff() <= 1e-10);
    // directional derivative is the W-pairing with the gradient
    Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(6, 0.5, 2.0);
    REQUIRE(risk.directional(h, v) == Catch::Approx(s.inner(g, v)).epsilon(1e-10));
    REQUIRE(risk.value(risk.minimizer()) <= 1e-18);
}

TEST_CASE("galerkin projection at full dimension recovers the gradient") {
    const SurrogateSpace s = SurrogateSpace::random(5, 23);
    const QuadraticRisk risk = QuadraticRisk::random(s, 23);
    Eigen::VectorXd h(5);
    h << 0.3, -1.0, 0.2, 0.8, -0.4;
    const Eigen::VectorXd g = risk.gradient(s, h);
    const Eigen::VectorXd gk = galerkin_gradient(s, risk, h, 5);
    REQUIRE((gk - g).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("galerkin projection matches independent gaussian elimination") {
    const SurrogateSpace s = SurrogateSpace::random(4, 24);
    const QuadraticRisk risk = QuadraticRisk::random(s, 24);
    Eigen::VectorXd h(4);
    h << 1.0, 0.0, -0.5, 0.25;
    const int k = 3;
    // hand-rolled partial-pivot elimination on the k x k Gram system
    Eigen::MatrixXd m = s.gram.topLeftCorner(k, k);
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d[i] = risk.directional(h, s.b.col(i));
    for (int col = 0; col < k; ++col) {
        int piv = col;
        for (int r = col + 1; r < k; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col))) piv = r;
        m.row(col).swap(m.row(piv));
        std::swap(d[col], d[piv]);
        for (int r = col + 1; r < k; ++r) {
            const double f = m(r, col) / m(col, col);
            m.row(r) -= f * m.row(col);
            d[r] -= f * d[col];
        }
    }
    Eigen::VectorXd coef(k);
    for (int r = k - 1; r >= 0; --r) {
        double acc = d[r];
        for (int c = r + 1; c < k; ++c) acc -= m(r, c) * coef[c];
        coef[r] = acc / m(r, r);
    }
    const Eigen::VectorXd expect = s.b.leftCols(k) * coef;
    const Eigen::VectorXd got = galerkin_gradient(s, risk, h, k);
    REQUIRE((got - expect).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("second moment formula reduces in the deterministic full-dim case") {
    const SurrogateSpace s = SurrogateSpace::random(7, 25);
    const QuadraticRisk risk = QuadraticRisk::random(s, 25);
    const DimensionLaw det = DimensionLaw::deterministic(7);
    Eigen::VectorXd h = Eigen::VectorXd::Constant(7, 0.4);
    const Eigen::VectorXd g = risk.gradient(s, h);
    const Eigen::VectorXd ge = s.coords(g);
    for (int m = 1; m <= 4; ++m) {
        const PreconditionSchedule sched = PreconditionSchedule::unit_constant(m);
        const double formula = second_moment_formula(ge, det, sched, 7);
        const double expect = s.inner(g, g) * (m + 7 + 1) / static_cast<double>(m);
        REQUIRE(formula == Catch::Approx(expect).epsilon(1e-12));
    }
    REQUIRE(second_moment_formula(Eigen::VectorXd::Zero(7), det,
                                  PreconditionSchedule::unit_constant(1), 7) == 0.0);
}

TEST_CASE("second moment is non-increasing in the sample size") {
    const SurrogateSpace s = SurrogateSpace::random(6, 26);
    const QuadraticRisk risk = QuadraticRisk::random(s, 26);
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    Eigen::VectorXd h = Eigen::VectorXd::Constant(6, -0.3);
    const Eigen::VectorXd ge = s.coords(risk.gradient(s, h));
    double prev = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= 5; ++m) {
        PreconditionSchedule sched = PreconditionSchedule::tail_ceil(1.0);
        sched.sample_size_kind = PreconditionSchedule::SampleSize::Constant;
        sched.constant_m = m;
        const double val = second_moment_formula(ge, law, sched, 6);
        REQUIRE(val <= prev + 1e-14);
        prev = val;
    }
}

TEST_CASE("second moment formula agrees with monte carlo") {
    const SurrogateSpace s = SurrogateSpace::random(6, 27);
    const QuadraticRisk risk = QuadraticRisk::random(s, 27);
    const DimensionLaw law = DimensionLaw::geometric(0.5);
    const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(1.0);
    Eigen::VectorXd h = Eigen::VectorXd::Constant(6, 0.7);
    const Eigen::VectorXd ge = s.coords(risk.gradient(s, h));
    const double formula = second_moment_formula(ge, law, sched, 6);
    const EstimatorStats st = mc_estimator_stats(s, risk, h, law, sched, 27, 40000);
    REQUIRE(std::abs(st.mean_cnorm2 - formula) <= 4.0 * st.se_cnorm2);
}

TEST_CASE("gaussian fourth moment identity") {
    Eigen::MatrixXd one(1, 1);
    one << 1.0;
    const FourthMomentResult scalar = fourth_moment_check(one, 31, 200000);
    // E[z^4] = 3 = tr + 2
    REQUIRE(scalar.worst_ratio <= 4.0);
    const FourthMomentResult zero = fourth_moment_check(Eigen::MatrixXd::Zero(3, 3), 32, 1000);
    REQUIRE(zero.max_abs_dev == 0.0);
}

TEST_CASE("directions with unit tails satisfy the weak second-order identity") {
    const SurrogateSpace s = SurrogateSpace::random(5, 33);
    const DimensionLaw det = DimensionLaw::deterministic(5);
    Eigen::VectorXd h(5);
    h << 0.9, -0.2, 0.4, 0.0, -1.1;
    auto rng = substream(33, 1, 0);
    const int reps = 20000;
    double acc = 0.0;
    for (int rep = 0; rep < reps; ++rep) {
        const Eigen::VectorXd v = surrogate_direction(s, det, 5, rng);
        const double ip = s.inner(v, h);
        acc += ip * ip;
    }
    const double target = s.inner(h, h);
    REQUIRE(std::abs(acc / reps - target) <= 0.05 * target);
}
