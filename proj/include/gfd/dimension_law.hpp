#ifndef GFD_DIMENSION_LAW_HPP
#define GFD_DIMENSION_LAW_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/rng.hpp"

namespace gfd {

enum class LawKind { ShiftedPoisson, Geometric, Deterministic, ExplicitTails };

/// Distribution of the random dimension K over the positive integers, exposed
/// through its tail probabilities t_i = P[K >= i]. All kinds except
/// Deterministic have infinite support; Deterministic exists for tests only.
class DimensionLaw {
   public:
    static DimensionLaw shifted_poisson(double rate) {
        if (!(rate > 0.0)) throw ConfigError("shifted_poisson: rate must be positive");
        DimensionLaw law;
        law.kind_ = LawKind::ShiftedPoisson;
        law.param_ = rate;
        return law;
    }

    static DimensionLaw geometric(double q) {
        if (!(q > 0.0 && q < 1.0)) throw ConfigError("geometric: q must be in (0,1)");
        DimensionLaw law;
        law.kind_ = LawKind::Geometric;
        law.param_ = q;
        return law;
    }

    static DimensionLaw deterministic(int k0) {
        if (k0 < 1) throw ConfigError("deterministic: k0 must be >= 1");
        DimensionLaw law;
        law.kind_ = LawKind::Deterministic;
        law.param_ = k0;
        return law;
    }

    /// Explicit non-increasing tail prefix starting at t_1 = 1. Beyond the
    /// stored prefix the tails continue harmonically: the reciprocal grows by
    /// one per index, which matches the 1/k staircase construction once the
    /// target coefficients are exhausted.
    static DimensionLaw explicit_tails(std::vector<double> tails) {
        if (tails.empty() || std::abs(tails.front() - 1.0) > 1e-12)
            throw ConfigError("explicit_tails: t_1 must be 1");
        for (std::size_t i = 1; i < tails.size(); ++i)
            if (!(tails[i] > 0.0) || tails[i] > tails[i - 1] + 1e-15)
                throw ConfigError("explicit_tails: tails must be positive and non-increasing");
        DimensionLaw law;
        law.kind_ = LawKind::ExplicitTails;
        law.tails_ = std::move(tails);
        return law;
    }

    LawKind kind() const { return kind_; }
    double param() const { return param_; }
    int prefix_length() const { return static_cast<int>(tails_.size()); }
    bool infinite_support() const { return kind_ != LawKind::Deterministic; }

    /// Tail probability t_i = P[K >= i], i >= 1.
    double tail(int i) const {
        if (i < 1) throw ContractViolation("tail: i must be >= 1");
        switch (kind_) {
            case LawKind::Geometric:
                return std::pow(1.0 - param_, i - 1);
            case LawKind::Deterministic:
                return i <= static_cast<int>(param_) ? 1.0 : 0.0;
            case LawKind::ShiftedPoisson:
                return poisson_tail(i - 1);
            case LawKind::ExplicitTails: {
                const int n = static_cast<int>(tails_.size());
                if (i <= n) return tails_[i - 1];
                const double last = tails_.back();
                return 1.0 / (std::round(1.0 / last) + (i - n));
            }
        }
        return 0.0;
    }

    /// pmf p_i = t_i - t_{i+1}.
    double pmf(int i) const { return tail(i) - tail(i + 1); }

    /// Smallest i with sum_{j<=i} p_j >= mass (used to truncate exact sums).
    int quantile_index(double mass) const {
        int i = 1;
        while (tail(i + 1) > 1.0 - mass) {
            ++i;
            if (i > 100000000) throw StateError("quantile_index: runaway tail");
        }
        return i;
    }

    int sample(std::mt19937_64& rng) const {
        switch (kind_) {
            case LawKind::ShiftedPoisson: {
                std::poisson_distribution<int> dist(param_);
                return 1 + dist(rng);
            }
            case LawKind::Geometric: {
                std::geometric_distribution<int> dist(param_);
                return 1 + dist(rng);
            }
            case LawKind::Deterministic:
                return static_cast<int>(param_);
            case LawKind::ExplicitTails: {
                // K >= i exactly when u < t_i; t_1 = 1 makes K >= 1 certain.
                const double u = draw_uniform(rng);
                int i = 1;
                while (u < tail(i + 1)) ++i;
                return i;
            }
        }
        return 1;
    }

    std::string name() const {
        switch (kind_) {
            case LawKind::ShiftedPoisson:
                return "shifted_poisson(" + std::to_string(param_) + ")";
            case LawKind::Geometric:
                return "geometric(" + std::to_string(param_) + ")";
            case LawKind::Deterministic:
                return "deterministic(" + std::to_string(static_cast<int>(param_)) + ")";
            case LawKind::ExplicitTails:
                return "explicit_tails(" + std::to_string(tails_.size()) + ")";
        }
        return "?";
    }

   private:
    DimensionLaw() = default;

    // P[Poisson(rate) >= j] by summation of the pmf, smallest terms first on
    // each side of the mode so truncation error stays below 1e-14 relative.
    double poisson_tail(int j) const {
        if (j <= 0) return 1.0;
        if (static_cast<int>(poisson_tail_cache_.size()) > j) return poisson_tail_cache_[j];
        const double rate = param_;
        // pmf by upward recursion from p(0) = exp(-rate).
        const int jmax = j + static_cast<int>(rate + 60.0 * std::sqrt(rate) + 60.0);
        std::vector<double> p(jmax + 1);
        p[0] = std::exp(-rate);
        for (int m = 1; m <= jmax; ++m) p[m] = p[m - 1] * rate / m;
        poisson_tail_cache_.assign(j + 1, 0.0);
        poisson_tail_cache_[0] = 1.0;
        for (int jj = 1; jj <= j; ++jj) {
            double s = 0.0;
            for (int m = jmax; m >= jj; --m) s += p[m];  // ascending magnitudes
            poisson_tail_cache_[jj] = s;
        }
        return poisson_tail_cache_[j];
    }

    LawKind kind_ = LawKind::Geometric;
    double param_ = 0.5;
    std::vector<double> tails_;
    mutable std::vector<double> poisson_tail_cache_;
};

/// Preconditioner lambda_k and sample-size M_k schedules.
struct PreconditionSchedule {
    enum class Lambda { Tail, Unit };
    enum class SampleSize { CeilKOverC, Constant };

    Lambda lambda_kind = Lambda::Tail;
    SampleSize sample_size_kind = SampleSize::CeilKOverC;
    double c = 2.0;     // divisor for M_k = ceil(k/c)
    int constant_m = 1;

    static PreconditionSchedule tail_ceil(double c) {
        if (!(c > 0.0)) throw ConfigError("PreconditionSchedule: c must be positive");
        PreconditionSchedule s;
        s.c = c;
        return s;
    }

    static PreconditionSchedule unit_constant(int m) {
        if (m < 1) throw ConfigError("PreconditionSchedule: M must be >= 1");
        PreconditionSchedule s;
        s.lambda_kind = Lambda::Unit;
        s.sample_size_kind = SampleSize::Constant;
        s.constant_m = m;
        return s;
    }

    double lambda(const DimensionLaw& law, int k) const {
        return lambda_kind == Lambda::Tail ? law.tail(k) : 1.0;
    }

    int sample_size(int k) const {
        if (k < 1) throw ContractViolation("sample_size: k must be >= 1");
        if (sample_size_kind == SampleSize::Constant) return constant_m;
        return std::max(1, static_cast<int>(std::ceil(static_cast<double>(k) / c)));
    }
};

// psi'(x) - 1/x = sum_{m>=0} 1/((x+m)^2 (x+m+1)), evaluated without the
// cancellation of forming psi'(x) and subtracting: recurrence
// f(x) = f(x+1) + 1/(x^2 (x+1)) into the Bernoulli expansion of the
// remainder. First dropped term is 5/(66 x^11), so pushing the recurrence to
// x >= 20 keeps the relative error below 1e-13.
inline double trigamma_minus_inv(double x) {
    double acc = 0.0;
    while (x < 20.0) {
        acc += 1.0 / (x * x * (x + 1.0));
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    return acc + 0.5 * inv2 +
           inv2 * inv *
               (1.0 / 6.0 - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 / 30.0)));
}

/// gamma_i = E[lambda_K | K >= i] = sum_{j>=i} lambda_j p_j / t_i.
/// Exact series with relative truncation below 1e-14; requires infinite
/// support unless lambda is identically one (where the value is exactly 1).
/// Explicit-tail laws sum their stored prefix directly and close the
/// harmonic continuation t_j = 1/m in closed form:
/// sum_{m>=M} t^2 (1/m - 1/(m+1)) / t = sum 1/(m^2 (m+1)) = psi'(M) - 1/M.
inline double gamma(const DimensionLaw& law, const PreconditionSchedule& sched, int i) {
    if (i < 1) throw ContractViolation("gamma: i must be >= 1");
    if (sched.lambda_kind == PreconditionSchedule::Lambda::Unit) return 1.0;
    if (!law.infinite_support())
        throw std::domain_error("gamma: law must have infinite support");
    const double ti = law.tail(i);
    if (law.kind() == LawKind::ExplicitTails) {
        const int n = law.prefix_length();
        double acc = 0.0;
        for (int j = i; j <= n; ++j) acc += law.tail(j) * (law.tail(j) - law.tail(j + 1));
        const int j0 = std::max(i, n + 1);
        const double m0 = std::round(1.0 / law.tail(n)) + (j0 - n);
        acc += trigamma_minus_inv(m0);
        return acc / ti;
    }
    // Summed in units of t_i^2 so the products t_j p_j cannot underflow as
    // long as t_i itself is representable.
    double acc = 0.0;
    int j = i;
    while (true) {
        const double rj = law.tail(j) / ti;
        const double rnext = law.tail(j + 1) / ti;
        acc += rj * (rj - rnext);  // lambda_j = t_j
        if (rnext * rnext < 1e-14 * acc || rnext < 1e-300) break;
        ++j;
        if (j > i + 100000000) throw StateError("gamma: series failed to truncate");
    }
    return acc * ti;
}

/// Tail construction for a square-summable coefficient surrogate theta_i:
/// staircase tails t_i = 1/k between breakpoints n_k chosen so the remaining
/// theta mass beyond n_k is at most 2^-k. The returned law keeps
/// sum_i theta_i / t_i finite.
inline DimensionLaw tails_for_target(const std::vector<double>& theta) {
    const int len = static_cast<int>(theta.size());
    // A_i = sum_{j >= i} theta_j, 1-based.
    std::vector<double> tail_sums(len + 2, 0.0);
    for (int i = len; i >= 1; --i) tail_sums[i] = tail_sums[i + 1] + theta[i - 1];

    auto tail_sum = [&](int i) { return i <= len ? tail_sums[i] : 0.0; };

    std::vector<double> tails;
    int prev_break = 1;  // n_0
    int k = 1;
    double bound = 0.5;  // 2^-k
    while (prev_break <= len + 1) {
        int nk = std::max(prev_break + 1, 2);
        while (tail_sum(nk) > bound) ++nk;
        for (int i = prev_break; i < nk; ++i) tails.push_back(1.0 / k);
        prev_break = nk;
        ++k;
        bound *= 0.5;
    }
    return DimensionLaw::explicit_tails(std::move(tails));
}

}  // namespace gfd

#endif
