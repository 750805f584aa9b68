#ifndef GFD_SURROGATE_HPP
#define GFD_SURROGATE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gfd/dimension_law.hpp"
#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

/// Finite-dimensional stand-in for the function space: R^D with a random SPD
/// inner product W, a random well-conditioned pre-basis B, the Gram
/// G = B^T W B, its upper Cholesky factor R and the orthonormalized basis
/// Q = B R^-1. Estimator identities proved in the ambient space can be checked
/// here exactly, component by component.
struct SurrogateSpace {
    int dim = 0;
    Eigen::MatrixXd w;      // inner product
    Eigen::MatrixXd b;      // pre-basis, one vector per column
    Eigen::MatrixXd gram;   // b^T w b
    Eigen::MatrixXd r;      // upper triangular, r^T r = gram
    Eigen::MatrixXd q;      // b r^-1, w-orthonormal columns

    static SurrogateSpace random(int dim, std::uint64_t seed) {
        if (dim < 1) throw ConfigError("SurrogateSpace: dim must be >= 1");
        SurrogateSpace s;
        s.dim = dim;
        auto rng = substream(seed, 0, 0);
        Eigen::MatrixXd a(dim, dim), m(dim, dim);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                a(i, j) = 0.3 * draw_normal(rng);
                m(i, j) = 0.3 * draw_normal(rng);
            }
        s.w = Eigen::MatrixXd::Identity(dim, dim) + a.transpose() * a;
        s.b = Eigen::MatrixXd::Identity(dim, dim) + m;
        s.gram = s.b.transpose() * s.w * s.b;
        Eigen::LLT<Eigen::MatrixXd> llt(s.gram);
        if (llt.info() != Eigen::Success)
            throw NumericalRankError("SurrogateSpace: Gram not positive definite", dim);
        s.r = llt.matrixU();
        s.q = s.r.transpose()
                  .triangularView<Eigen::Lower>()
                  .solve(s.b.transpose())
                  .transpose();  // q = b r^-1
        return s;
    }

    double inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
        return x.dot(w * y);
    }
    double norm(const Eigen::VectorXd& x) const { return std::sqrt(inner(x, x)); }

    /// Coordinates of x in the orthonormal basis: <x, e_i> = q_i^T w x.
    Eigen::VectorXd coords(const Eigen::VectorXd& x) const { return q.transpose() * w * x; }

    /// Squared preconditioner norm: sum_i <x, e_i>^2 / gamma_i.
    double cnorm2(const Eigen::VectorXd& x, const DimensionLaw& law,
                  const PreconditionSchedule& sched) const {
        const Eigen::VectorXd c = coords(x);
        double s = 0.0;
        for (int i = 0; i < dim; ++i) s += c[i] * c[i] / gamma(law, sched, i + 1);
        return s;
    }
};

/// R(h) = 1/2 |A h - y|^2 with Euclidean residual norm. Its gradient in the
/// W inner product solves W g = A^T (A h - y).
struct QuadraticRisk {
    Eigen::MatrixXd a;
    Eigen::VectorXd y;

    static QuadraticRisk random(const SurrogateSpace& space, std::uint64_t seed) {
        auto rng = substream(seed, 0, 1);
        QuadraticRisk risk;
        risk.a.resize(space.dim, space.dim);
        risk.y.resize(space.dim);
        for (int i = 0; i < space.dim; ++i) {
            for (int j = 0; j < space.dim; ++j) risk.a(i, j) = 0.15 * draw_normal(rng);
            risk.a(i, i) += 1.0;
            risk.y[i] = draw_normal(rng);
        }
        return risk;
    }

    double value(const Eigen::VectorXd& h) const { return 0.5 * (a * h - y).squaredNorm(); }

    double directional(const Eigen::VectorXd& h, const Eigen::VectorXd& v) const {
        return (a * h - y).dot(a * v);
    }

    Eigen::VectorXd gradient(const SurrogateSpace& space, const Eigen::VectorXd& h) const {
        return space.w.ldlt().solve(a.transpose() * (a * h - y));
    }

    Eigen::VectorXd minimizer() const { return a.colPivHouseholderQr().solve(y); }
    double min_value() const { return value(minimizer()); }
};

/// Galerkin projection of the gradient onto span(b_1 .. b_k): solve
/// G_k coef = d with d_i = D R(h; b_i) and return B_k coef.
inline Eigen::VectorXd galerkin_gradient(const SurrogateSpace& space, const QuadraticRisk& risk,
                                         const Eigen::VectorXd& h, int k) {
    if (k < 1 || k > space.dim) throw ContractViolation("galerkin_gradient: bad subspace size");
    Eigen::VectorXd d(k);
    for (int i = 0; i < k; ++i) d[i] = risk.directional(h, space.b.col(i));
    const Eigen::VectorXd coef = space.gram.topLeftCorner(k, k).ldlt().solve(d);
    return space.b.leftCols(k) * coef;
}

/// v = B_k R_k^-1 T_k^-1/2 z restricted to the ambient dimension: the sampled
/// K is kept for lambda_K and M_K but the subspace (and z) dimension is capped
/// at D, which is where the surrogate stops resolving new directions.
inline Eigen::VectorXd surrogate_direction(const SurrogateSpace& space, const DimensionLaw& law,
                                           int k_eff, std::mt19937_64& rng) {
    Eigen::VectorXd rhs(k_eff);
    for (int i = 0; i < k_eff; ++i) rhs[i] = draw_normal(rng) / std::sqrt(law.tail(i + 1));
    const Eigen::VectorXd wcoef =
        space.r.topLeftCorner(k_eff, k_eff).triangularView<Eigen::Upper>().solve(rhs);
    return space.b.leftCols(k_eff) * wcoef;
}

struct SurrogateDraw {
    Eigen::VectorXd ghat;
    int k = 0;       // sampled dimension, uncapped
    int k_eff = 0;   // subspace dimension actually used
    int m = 0;
};

/// One draw of ghat = (lambda_K / M_K) sum_m D R(h; v_m) v_m at a fixed
/// iterate, with the same substream keying as the function-space loop.
inline SurrogateDraw surrogate_gradient_draw(const SurrogateSpace& space,
                                             const QuadraticRisk& risk, const Eigen::VectorXd& h,
                                             const DimensionLaw& law,
                                             const PreconditionSchedule& sched, std::uint64_t seed,
                                             std::uint64_t iteration) {
    auto krng = substream(seed, iteration, 0);
    SurrogateDraw out;
    out.k = law.sample(krng);
    out.k_eff = std::min(out.k, space.dim);
    out.m = sched.sample_size(out.k);
    const double lam = sched.lambda(law, out.k);
    out.ghat = Eigen::VectorXd::Zero(space.dim);
    for (int draw = 1; draw <= out.m; ++draw) {
        auto rng = substream(seed, iteration, static_cast<std::uint64_t>(draw));
        const Eigen::VectorXd v = surrogate_direction(space, law, out.k_eff, rng);
        out.ghat += (lam / out.m) * risk.directional(h, v) * v;
    }
    return out;
}

/// Closed-form conditional second moment E[|ghat|_C^2] for a fixed gradient
/// with coordinates ge_i = <g, e_i>:
///   E[ lambda_K^2 / M_K (sum_{i<=k} 1/(t_i gamma_i)) (sum_{i<=k} ge_i^2/t_i) ]
/// + E[ lambda_K^2 (1 + 1/M_K) sum_{i<=k} ge_i^2/(t_i^2 gamma_i) ],
/// where the inner sums run to k = min(K, D) while lambda_K and M_K keep the
/// uncapped K. The expectation over K is an exact pmf sum truncated when the
/// remaining mass cannot matter.
inline double second_moment_formula(const Eigen::VectorXd& ge, const DimensionLaw& law,
                                    const PreconditionSchedule& sched, int k_support = 0) {
    const int d = k_support > 0 ? std::min<int>(k_support, static_cast<int>(ge.size()))
                                : static_cast<int>(ge.size());
    std::vector<double> s1(d + 1, 0.0), s2(d + 1, 0.0), s3(d + 1, 0.0);
    for (int i = 1; i <= d; ++i) {
        const double ti = law.tail(i);
        const double gi = gamma(law, sched, i);
        s1[i] = s1[i - 1] + 1.0 / (ti * gi);
        s2[i] = s2[i - 1] + ge[i - 1] * ge[i - 1] / ti;
        s3[i] = s3[i - 1] + ge[i - 1] * ge[i - 1] / (ti * ti * gi);
    }
    const int kmax = std::max(law.quantile_index(1.0 - 1e-12), d);
    double acc = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        const double pk = law.pmf(k);
        if (pk <= 0.0) continue;
        const double lam = sched.lambda(law, k);
        const double m = sched.sample_size(k);
        const int keff = std::min(k, d);
        acc += pk * (lam * lam / m * s1[keff] * s2[keff] +
                     lam * lam * (1.0 + 1.0 / m) * s3[keff]);
    }
    return acc;
}

struct EstimatorStats {
    Eigen::VectorXd mean_coords;     // sample mean of <ghat, e_i>
    Eigen::VectorXd se_coords;       // standard error of the mean, per coordinate
    double mean_cnorm2 = 0.0;        // sample mean of |ghat|_C^2
    double se_cnorm2 = 0.0;
    bool heavy_tailed = false;       // one replicate dominates the C-norm mean
};

/// Monte Carlo pass over independent replicates of the estimator at a fixed
/// iterate. The heavy-tail flag trips when a single replicate carries more
/// than half the total |ghat|_C^2 mass, the signature of an infinite second
/// moment in a finite sample.
inline EstimatorStats mc_estimator_stats(const SurrogateSpace& space, const QuadraticRisk& risk,
                                         const Eigen::VectorXd& h, const DimensionLaw& law,
                                         const PreconditionSchedule& sched, std::uint64_t seed,
                                         int replicates) {
    if (replicates < 2) throw ContractViolation("mc_estimator_stats: need >= 2 replicates");
    EstimatorStats st;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(space.dim);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(space.dim);
    double csum = 0.0, csumsq = 0.0, cmax = 0.0;
    for (int rep = 1; rep <= replicates; ++rep) {
        const SurrogateDraw d = surrogate_gradient_draw(space, risk, h, law, sched, seed,
                                                        static_cast<std::uint64_t>(rep));
        const Eigen::VectorXd c = space.coords(d.ghat);
        sum += c;
        sumsq += c.cwiseProduct(c);
        const double cn = space.cnorm2(d.ghat, law, sched);
        csum += cn;
        csumsq += cn * cn;
        cmax = std::max(cmax, cn);
    }
    const double n = replicates;
    st.mean_coords = sum / n;
    st.se_coords = ((sumsq / n - st.mean_coords.cwiseProduct(st.mean_coords)).cwiseMax(0.0) /
                    (n - 1.0)).cwiseSqrt();
    st.mean_cnorm2 = csum / n;
    st.se_cnorm2 = std::sqrt(std::max(0.0, (csumsq / n - st.mean_cnorm2 * st.mean_cnorm2) /
                                               (n - 1.0)));
    st.heavy_tailed = cmax > 0.5 * csum && replicates >= 100;
    return st;
}

/// Descent h_{n+1} = h_n - alpha ghat_n in the surrogate space from h_1 = 0.
/// Returns the risk optimality gap of the averaged iterate.
inline double surrogate_descent_gap(const SurrogateSpace& space, const QuadraticRisk& risk,
                                    const DimensionLaw& law, const PreconditionSchedule& sched,
                                    double step, int iterations, std::uint64_t seed) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(space.dim);
    Eigen::VectorXd avg = Eigen::VectorXd::Zero(space.dim);
    for (int n = 1; n <= iterations; ++n) {
        avg += h;
        const SurrogateDraw d = surrogate_gradient_draw(space, risk, h, law, sched, seed,
                                                        static_cast<std::uint64_t>(n));
        h -= step * d.ghat;
    }
    avg /= static_cast<double>(iterations);
    return risk.value(avg) - risk.min_value();
}

struct FourthMomentResult {
    double max_abs_dev = 0.0;  // worst entry deviation from tr(L) I + 2 L
    double max_se = 0.0;       // matching standard error at that entry
    double worst_ratio = 0.0;  // max over entries of |dev| / se
};

/// Monte Carlo check of E[(z z^T) L (z z^T)] = tr(L) I + 2 L for standard
/// normal z, entrywise with standard errors.
inline FourthMomentResult fourth_moment_check(const Eigen::MatrixXd& l, std::uint64_t seed,
                                              int samples) {
    const int d = static_cast<int>(l.rows());
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd sumsq = Eigen::MatrixXd::Zero(d, d);
    auto rng = substream(seed, 7, 0);
    Eigen::VectorXd z(d);
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < d; ++i) z[i] = draw_normal(rng);
        const Eigen::VectorXd lz = l * z;
        const double q = z.dot(lz);  // z^T L z
        const Eigen::MatrixXd term = q * (z * z.transpose());
        sum += term;
        sumsq += term.cwiseProduct(term);
    }
    const double n = samples;
    const Eigen::MatrixXd mean = sum / n;
    const Eigen::MatrixXd se =
        ((sumsq / n - mean.cwiseProduct(mean)).cwiseMax(0.0) / (n - 1.0)).cwiseSqrt();
    const Eigen::MatrixXd exact =
        l.trace() * Eigen::MatrixXd::Identity(d, d) + l + l.transpose();
    FourthMomentResult out;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            const double dev = std::abs(mean(i, j) - exact(i, j));
            const double ratio = dev / std::max(se(i, j), 1e-300);
            if (ratio > out.worst_ratio) {
                out.worst_ratio = ratio;
                out.max_abs_dev = dev;
                out.max_se = se(i, j);
            }
        }
    return out;
}

}  // namespace gfd

#endif
