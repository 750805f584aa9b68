#ifndef GFD_VERIFY_HPP
#define GFD_VERIFY_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "gfd/dimension_law.hpp"
#include "gfd/optimizer.hpp"
#include "gfd/prebasis.hpp"
#include "gfd/risks.hpp"
#include "gfd/rng.hpp"
#include "gfd/surrogate.hpp"

namespace gfd {

struct CheckRow {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

/// Exact-arithmetic check of t_i/2 <= gamma_i <= t_i for the tail
/// preconditioner. Returns the worst signed violation relative to t_i
/// (nonpositive means the bounds hold everywhere).
inline double lemma_tail_check(const DimensionLaw& law, int i_max) {
    const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(1.0);
    double worst = -1.0;
    for (int i = 1; i <= i_max; ++i) {
        const double ti = law.tail(i);
        const double gi = gamma(law, sched, i);
        const double viol = std::max(ti / 2.0 - gi, gi - ti) / ti;
        worst = std::max(worst, viol);
    }
    return worst;
}

struct VerifyOptions {
    std::uint64_t seed = 1;
    bool unit_lambda = false;  // negative control: breaks the variance bound row
    int unbiased_replicates = 100000;
    int moment_replicates = 100000;
    int bound_replicates = 50000;
    int rate_replicates = 50;
    int fourth_moment_samples = 1000000;
};

namespace detail {

inline CheckRow unbiasedness_row(const std::string& name, const SurrogateSpace& space,
                                 const QuadraticRisk& risk, const DimensionLaw& law,
                                 const PreconditionSchedule& sched, const VerifyOptions& opt,
                                 std::uint64_t salt) {
    const Eigen::VectorXd h = Eigen::VectorXd::Zero(space.dim);
    const Eigen::VectorXd ge = space.coords(risk.gradient(space, h));
    const EstimatorStats st = mc_estimator_stats(space, risk, h, law, sched,
                                                 opt.seed + salt, opt.unbiased_replicates);
    double worst = 0.0;
    for (int i = 0; i < space.dim; ++i) {
        const double target = gamma(law, sched, i + 1) * ge[i];
        worst = std::max(worst, std::abs(st.mean_coords[i] - target) /
                                    std::max(st.se_coords[i], 1e-300));
    }
    return {name, worst, 3.0, worst <= 3.0};
}

inline double rate_slope(const SurrogateSpace& space, const QuadraticRisk& risk,
                         const DimensionLaw& law, double c, const VerifyOptions& opt) {
    const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(c);
    const Eigen::VectorXd hstar = risk.minimizer();
    const double dist_c = std::sqrt(space.cnorm2(hstar, law, sched));
    // Gradient bound over the whole trajectory, not just the start: iterates
    // can overshoot the minimizer, so a factor-two margin over the initial
    // gradient norm is used as the known G.
    const double gbound =
        2.0 * space.norm(risk.gradient(space, Eigen::VectorXd::Zero(space.dim)));
    const std::vector<int> horizons = {100, 400, 1600};
    std::vector<double> logn, loggap;
    for (int n : horizons) {
        const double step = optimal_constant_step(dist_c, gbound, c, n);
        double mean_gap = 0.0;
        for (int rep = 0; rep < opt.rate_replicates; ++rep)
            mean_gap += surrogate_descent_gap(space, risk, law, sched, step, n,
                                              opt.seed + 1000 + 7919ull * rep);
        mean_gap /= opt.rate_replicates;
        logn.push_back(std::log(static_cast<double>(n)));
        loggap.push_back(std::log(mean_gap));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < logn.size(); ++i) {
        mx += logn[i];
        my += loggap[i];
    }
    mx /= logn.size();
    my /= logn.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < logn.size(); ++i) {
        sxy += (logn[i] - mx) * (loggap[i] - my);
        sxx += (logn[i] - mx) * (logn[i] - mx);
    }
    return sxy / sxx;
}

inline CheckRow dual_vs_fd_row(std::uint64_t seed) {
    // Coarse quadratures keep the 100 triples fast; the identity being checked
    // does not depend on the quadrature resolution.
    PreBasis heat_pb(MaternParams{2.5, 20.0}, HeatRisk::make_domain(1.0), 2, 1u << 9);
    HeatRisk heat(&heat_pb, 1.0, 1u << 9, 1u << 7);
    HjbParams hp;
    PreBasis hjb_pb(MaternParams{1.5, 20.0}, HjbRisk::make_domain(hp), 1, 1u << 9);
    HjbRisk hjb(&hjb_pb, hp, 1u << 9, 1u << 7);

    auto rng = substream(seed, 11, 0);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const bool use_heat = trial % 2 == 0;
        PreBasis* pb = use_heat ? &heat_pb : &hjb_pb;
        const RiskFunctional& risk =
            use_heat ? static_cast<const RiskFunctional&>(heat)
                     : static_cast<const RiskFunctional&>(hjb);
        const int k = 3 + trial % 6;
        std::vector<double> hc(k), vc(k);
        for (int i = 0; i < k; ++i) {
            hc[i] = draw_normal(rng);
            vc[i] = draw_normal(rng);
        }
        PreBasisExpansion h(pb, hc), v(pb, vc);
        const double exact = risk.directional(h, v);
        const double delta = 1e-5 * std::max(1.0, h.coeff_norm()) / std::max(1.0, v.coeff_norm());
        const double fd =
            (risk.value(axpy(delta, v, h)) - risk.value(axpy(-delta, v, h))) / (2.0 * delta);
        const double rel = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
        worst = std::max(worst, rel);
    }
    return {"dual_vs_finite_difference", worst, 1e-5, worst <= 1e-5};
}

inline CheckRow cholesky_row() {
    PreBasis pb(MaternParams{2.5, 2.0}, HeatRisk::make_domain(1.0), 2, 1u << 10);
    const int k = 24;
    pb.ensure(k);
    const Eigen::MatrixXd& g = pb.gram();
    const Eigen::MatrixXd& r = pb.chol_r();
    const Eigen::MatrixXd target =
        g + pb.jitter() * Eigen::MatrixXd::Identity(k, k);
    const double resid = (r.transpose() * r - target).cwiseAbs().maxCoeff() /
                         g.diagonal().maxCoeff();
    return {"cholesky_reconstruction", resid, 1e-10, resid <= 1e-10};
}

inline CheckRow staircase_row() {
    const int len = 64;
    std::vector<double> theta(len);
    for (int i = 0; i < len; ++i) theta[i] = std::pow(2.0, -(i + 1));
    const DimensionLaw law = tails_for_target(theta);
    double sum = 0.0, prev_inc = -1.0, worst_ratio = 0.0;
    for (int i = 1; i <= len; ++i) {
        const double inc = theta[i - 1] / law.tail(i);
        if (prev_inc > 0.0) worst_ratio = std::max(worst_ratio, inc / prev_inc);
        prev_inc = inc;
        sum += inc;
    }
    // Proof-side bound: head term plus sum_k k 2^{-k+1}.
    double bound = theta[0];
    for (int k = 1; k <= len; ++k) bound += k * std::pow(2.0, -k + 1);
    const double stat = std::max(worst_ratio - 1.0, sum / bound - 1.0);
    return {"staircase_tail_construction", stat, 0.0, stat <= 0.0};
}

}  // namespace detail

/// Full check suite. All rows pass on default options; unit_lambda is a
/// negative control that must make the variance-bound row fail.
inline std::vector<CheckRow> run_all_checks(const VerifyOptions& opt) {
    std::vector<CheckRow> rows;
    const SurrogateSpace space = SurrogateSpace::random(12, opt.seed);
    const QuadraticRisk risk = QuadraticRisk::random(space, opt.seed);
    const DimensionLaw geo = DimensionLaw::geometric(0.5);
    const DimensionLaw poi10 = DimensionLaw::shifted_poisson(10.0);
    const PreconditionSchedule tail2 = PreconditionSchedule::tail_ceil(2.0);

    rows.push_back(detail::unbiasedness_row("unbiasedness_geometric", space, risk, geo, tail2,
                                            opt, 101));
    rows.push_back(detail::unbiasedness_row("unbiasedness_shifted_poisson10", space, risk, poi10,
                                            tail2, opt, 202));

    // Closed-form second moment against Monte Carlo on {law} x {c} x {g}.
    {
        const Eigen::VectorXd h0 = Eigen::VectorXd::Zero(space.dim);
        double worst = 0.0;
        int cell = 0;
        for (const DimensionLaw* law : {&geo, &poi10}) {
            for (double c : {0.5, 1.0, 2.0}) {
                const PreconditionSchedule sched = PreconditionSchedule::tail_ceil(c);
                for (int gi = 0; gi < 3; ++gi) {
                    auto rng = substream(opt.seed, 13, static_cast<std::uint64_t>(cell));
                    Eigen::VectorXd h(space.dim);
                    for (int i = 0; i < space.dim; ++i) h[i] = draw_normal(rng);
                    const Eigen::VectorXd ge = space.coords(risk.gradient(space, h));
                    const double formula = second_moment_formula(ge, *law, sched, space.dim);
                    const EstimatorStats st =
                        mc_estimator_stats(space, risk, h, *law, sched,
                                           opt.seed + 300 + cell, opt.moment_replicates);
                    worst = std::max(worst, std::abs(st.mean_cnorm2 - formula) /
                                                std::max(st.se_cnorm2, 1e-300));
                    ++cell;
                }
            }
        }
        rows.push_back({"second_moment_formula_vs_mc", worst, 3.0, worst <= 3.0});
    }

    // Deterministic full-dimension reduction to |g|^2 (M + D + 1) / M.
    {
        const DimensionLaw det = DimensionLaw::deterministic(space.dim);
        const int m = 4;
        const PreconditionSchedule sched = PreconditionSchedule::unit_constant(m);
        auto rng = substream(opt.seed, 14, 0);
        Eigen::VectorXd h(space.dim);
        for (int i = 0; i < space.dim; ++i) h[i] = draw_normal(rng);
        const Eigen::VectorXd g = risk.gradient(space, h);
        const Eigen::VectorXd ge = space.coords(g);
        const double formula = second_moment_formula(ge, det, sched, space.dim);
        const double expected =
            space.inner(g, g) * (m + space.dim + 1) / static_cast<double>(m);
        const double stat = std::abs(formula - expected) / expected;
        rows.push_back({"second_moment_full_dim_reduction", stat, 1e-10, stat <= 1e-10});
    }

    // Empirical variance bound E|ghat|_C^2 <= 2 (1 + 2c) |g|^2, allowing 3
    // relative standard errors. unit_lambda switches the schedule and must
    // break this row.
    for (double c : {0.5, 1.0, 2.0}) {
        const PreconditionSchedule sched = opt.unit_lambda
                                               ? PreconditionSchedule::unit_constant(
                                                     PreconditionSchedule::tail_ceil(c)
                                                         .sample_size(space.dim))
                                               : PreconditionSchedule::tail_ceil(c);
        const Eigen::VectorXd h = Eigen::VectorXd::Zero(space.dim);
        const Eigen::VectorXd g = risk.gradient(space, h);
        const EstimatorStats st = mc_estimator_stats(space, risk, h, geo, sched,
                                                     opt.seed + 400 + static_cast<int>(10 * c),
                                                     opt.bound_replicates);
        const double bound = 2.0 * (1.0 + 2.0 * c) * space.inner(g, g);
        const double allowed = bound * (1.0 + 3.0 * st.se_cnorm2 / st.mean_cnorm2);
        const double stat = st.mean_cnorm2 / allowed;
        rows.push_back({"variance_bound_c" + std::to_string(c).substr(0, 3), stat, 1.0,
                        stat <= 1.0});
    }

    // Tail-expectation sandwich t_i/2 <= gamma_i <= t_i on every shipped law.
    {
        double worst = -1.0;
        worst = std::max(worst, lemma_tail_check(geo, 200));
        worst = std::max(worst, lemma_tail_check(poi10, 200));
        worst = std::max(worst, lemma_tail_check(DimensionLaw::shifted_poisson(100.0), 200));
        std::vector<double> eps_tails(8);
        double t = 1.0;
        for (auto& v : eps_tails) {
            v = t;
            t *= 1e-3;
        }
        worst = std::max(worst, lemma_tail_check(DimensionLaw::explicit_tails(eps_tails), 200));
        rows.push_back({"tail_expectation_sandwich", worst, 1e-12, worst <= 1e-12});
    }

    // The step from the fixed-horizon rule is only stable when the C-norm
    // distance is not dominated by the smallest tail in the surrogate, so the
    // rate experiment runs on the law whose tails stay moderate over i <= D.
    {
        const double slope = detail::rate_slope(space, risk, poi10, 1.0, opt);
        const double stat = std::abs(slope + 0.5);
        rows.push_back({"rate_slope_minus_half", stat, 0.15, stat <= 0.15});
    }

    rows.push_back(detail::staircase_row());
    rows.push_back(detail::dual_vs_fd_row(opt.seed));
    rows.push_back(detail::cholesky_row());

    {
        auto rng = substream(opt.seed, 15, 0);
        Eigen::MatrixXd l(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j <= i; ++j) {
                l(i, j) = draw_normal(rng);
                l(j, i) = l(i, j);
            }
        const FourthMomentResult fm = fourth_moment_check(l, opt.seed, opt.fourth_moment_samples);
        rows.push_back({"gaussian_fourth_moment", fm.worst_ratio, 4.0, fm.worst_ratio <= 4.0});
    }

    return rows;
}

}  // namespace gfd

#endif
