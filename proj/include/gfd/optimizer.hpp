#ifndef GFD_OPTIMIZER_HPP
#define GFD_OPTIMIZER_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "gfd/dimension_law.hpp"
#include "gfd/direction.hpp"
#include "gfd/errors.hpp"
#include "gfd/expansion.hpp"
#include "gfd/risks.hpp"
#include "gfd/rng.hpp"

namespace gfd {

/// Constant step size that balances the optimality gap against the estimator
/// variance over a fixed horizon of n iterations:
/// alpha = dist / (sqrt(2 (1 + 2c)) * g_bound * sqrt(n)).
inline double optimal_constant_step(double dist_c, double g_bound, double c, int n) {
    if (!(dist_c > 0.0) || !(g_bound > 0.0) || n < 1)
        throw ConfigError("optimal_constant_step: need positive dist, bound and horizon");
    return dist_c / (std::sqrt(2.0 * (1.0 + 2.0 * c)) * g_bound * std::sqrt(n));
}

struct GfdConfig {
    int iterations = 200;
    double step = 0.6;
    std::uint64_t seed = 1;
    int log_every = 1;          // cadence of extra-metric logging
    double blowup_factor = 1e6; // declare divergence past this multiple of the initial risk
};

struct IterationRow {
    int n = 0;              // 1-based iterate index, row logged before the update
    double risk = 0.0;
    int k = 0;              // sampled dimension at this step
    int sample_size = 0;    // M_K
    double grad_norm = 0.0; // coefficient norm of the estimate
    double extra = std::numeric_limits<double>::quiet_NaN();  // caller metric
};

struct RunRecord {
    std::vector<IterationRow> rows;
    PreBasisExpansion final_iterate;
    PreBasisExpansion averaged_iterate;
    bool diverged = false;
    int abort_iteration = -1;  // iterate index at which the run stopped
};

/// One draw of the estimator
///   g_hat = (lambda_K / M_K) sum_m D R(h; v_m) v_m,  K ~ law.
/// Substreams are keyed by (seed, iteration, draw): draw 0 samples K, draws
/// 1..M sample the directions, so the stream is reproducible regardless of
/// evaluation order.
inline PreBasisExpansion estimate_gradient(const RiskFunctional& risk, PreBasis& pb,
                                           const PreBasisExpansion& h, const DimensionLaw& law,
                                           const PreconditionSchedule& sched, std::uint64_t seed,
                                           std::uint64_t iteration, int* k_out = nullptr,
                                           int* m_out = nullptr) {
    auto krng = substream(seed, iteration, 0);
    const int k = law.sample(krng);
    const double lam = sched.lambda(law, k);
    const int m = sched.sample_size(k);
    if (k_out) *k_out = k;
    if (m_out) *m_out = m;

    PreBasisExpansion acc(&pb);
    for (int draw = 1; draw <= m; ++draw) {
        auto rng = substream(seed, iteration, static_cast<std::uint64_t>(draw));
        PreBasisExpansion v = sample_direction(pb, law, k, rng);
        const double d = risk.directional(h, v);
        acc = axpy(lam / m * d, v, acc);
    }
    return acc;
}

/// Mean of the iterates h_1 .. h_n (the iterate logged at row n is included).
inline PreBasisExpansion averaged_iterate(const std::vector<PreBasisExpansion>& iterates) {
    if (iterates.empty()) throw ContractViolation("averaged_iterate: empty iterate list");
    PreBasisExpansion acc(iterates.front().basis());
    for (const auto& h : iterates) acc = axpy(1.0, h, acc);
    return (1.0 / static_cast<double>(iterates.size())) * acc;
}

/// Runs the descent h_{n+1} = h_n - alpha g_hat_n from h_1 = 0. The optional
/// extra_metric is evaluated every log_every rows (and always on the first and
/// last). Divergence aborts the loop, flags the record and keeps the rows
/// logged so far.
inline RunRecord run_descent(const RiskFunctional& risk, PreBasis& pb, const DimensionLaw& law,
                             const PreconditionSchedule& sched, const GfdConfig& cfg,
                             const std::function<double(const PreBasisExpansion&)>& extra_metric =
                                 nullptr) {
    if (cfg.iterations < 1) throw ConfigError("run_descent: iterations must be >= 1");
    if (!(cfg.step > 0.0)) throw ConfigError("run_descent: step must be positive");

    RunRecord rec;
    PreBasisExpansion h(&pb);
    std::vector<PreBasisExpansion> iterates;
    iterates.reserve(cfg.iterations);
    double initial_risk = 0.0;

    for (int n = 1; n <= cfg.iterations; ++n) {
        iterates.push_back(h);
        const double r = risk.value(h);
        if (n == 1) initial_risk = r;

        if (!std::isfinite(r) || !h.is_finite() || r > cfg.blowup_factor * initial_risk) {
            rec.diverged = true;
            rec.abort_iteration = n;
            IterationRow row;
            row.n = n;
            row.risk = r;
            rec.rows.push_back(row);
            break;
        }

        int k = 0, m = 0;
        PreBasisExpansion g = estimate_gradient(risk, pb, h, law, sched, cfg.seed,
                                                static_cast<std::uint64_t>(n), &k, &m);
        IterationRow row;
        row.n = n;
        row.risk = r;
        row.k = k;
        row.sample_size = m;
        row.grad_norm = g.coeff_norm();
        if (extra_metric && (n == 1 || n == cfg.iterations || (n - 1) % cfg.log_every == 0))
            row.extra = extra_metric(h);
        rec.rows.push_back(row);

        h = axpy(-cfg.step, g, h);
    }

    rec.final_iterate = h;
    rec.averaged_iterate = averaged_iterate(iterates);
    return rec;
}

}  // namespace gfd

#endif
