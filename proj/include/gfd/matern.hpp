#ifndef GFD_MATERN_HPP
#define GFD_MATERN_HPP

#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "gfd/errors.hpp"

namespace gfd {

/// Mixed-partial request: one nonnegative order per spatial dimension.
struct MultiIndex {
    std::vector<int> orders;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> o) : orders(std::move(o)) {}

    int total_order() const { return std::accumulate(orders.begin(), orders.end(), 0); }
    int dim() const { return static_cast<int>(orders.size()); }

    bool operator==(const MultiIndex& other) const { return orders == other.orders; }
};

/// Half-integer Matérn parameters. Supported smoothness: 1/2, 3/2, 5/2, 7/2.
struct MaternParams {
    double nu = 2.5;
    double eta = 1.0;

    MaternParams() = default;
    MaternParams(double nu_, double eta_) : nu(nu_), eta(eta_) {
        if (!(eta > 0.0)) throw ConfigError("MaternParams: eta must be positive");
        if (half_index() < 0) throw ConfigError("MaternParams: nu must be in {1/2, 3/2, 5/2, 7/2}");
    }

    // 0 for nu=1/2, 1 for 3/2, 2 for 5/2, 3 for 7/2; -1 if unsupported.
    int half_index() const {
        for (int i = 0; i < 4; ++i)
            if (std::abs(nu - (i + 0.5)) < 1e-12) return i;
        return -1;
    }

    // Highest classically-supported derivative order, 2*floor(nu), capped at
    // the order-4 chain-rule expansion implemented below.
    int max_order() const { return std::min(4, 2 * half_index()); }

    // Scale factor of the standardized distance s = sqrt(2 nu) r / eta.
    double scale() const { return std::sqrt(2.0 * nu) / eta; }
};

namespace detail {

// Derivatives psi_m = d^m/du^m of u -> kernel(sqrt(u)) at u = s^2, where s is
// the standardized distance. Half-integer kernels are P(s) exp(-s) with P a
// polynomial; repeated division of d/ds by 2s gives the closed forms below.
// Near s = 0 the exact psi_2..psi_4 have removable-singularity form, so the
// even (polynomial-in-u) part of the Taylor series is used instead; odd powers
// of s contribute O(s^(3-order)) there and vanish in the limit.
struct PsiDerivs {
    std::array<double, 5> psi{};  // psi[m], m = 0..4
};

inline PsiDerivs psi_derivs(int half_index, double s, int max_needed) {
    constexpr double kSeriesCutoff = 1e-5;
    PsiDerivs out;
    const double e = std::exp(-s);
    if (s < kSeriesCutoff && max_needed > 0) {
        // Even Taylor coefficients q0 + q1 u + q2 u^2 of the kernel in u = s^2.
        static constexpr double q[4][3] = {
            {1.0, 0.0, 0.0},            // nu = 1/2 (order 0 only)
            {1.0, -0.5, -0.125},        // nu = 3/2
            {1.0, -1.0 / 6.0, 1.0 / 24.0},   // nu = 5/2
            {1.0, -0.1, 1.0 / 120.0},   // nu = 7/2
        };
        const double u = s * s;
        const auto& c = q[half_index];
        out.psi[0] = c[0] + c[1] * u + c[2] * u * u;
        out.psi[1] = c[1] + 2.0 * c[2] * u;
        out.psi[2] = 2.0 * c[2];
        out.psi[3] = 0.0;
        out.psi[4] = 0.0;
        return out;
    }
    switch (half_index) {
        case 0:
            out.psi[0] = e;
            break;
        case 1:
            out.psi[0] = (1.0 + s) * e;
            out.psi[1] = -0.5 * e;
            out.psi[2] = e / (4.0 * s);
            break;
        case 2:
            out.psi[0] = (1.0 + s + s * s / 3.0) * e;
            out.psi[1] = -(1.0 + s) * e / 6.0;
            out.psi[2] = e / 12.0;
            out.psi[3] = -e / (24.0 * s);
            out.psi[4] = (1.0 + s) * e / (48.0 * s * s * s);
            break;
        case 3:
            out.psi[0] = (1.0 + s + 0.4 * s * s + s * s * s / 15.0) * e;
            out.psi[1] = -(3.0 + 3.0 * s + s * s) * e / 30.0;
            out.psi[2] = (1.0 + s) * e / 60.0;
            out.psi[3] = -e / 120.0;
            out.psi[4] = e / (240.0 * s);
            break;
        default:
            throw ConfigError("matern: unsupported smoothness");
    }
    return out;
}

}  // namespace detail

/// Stationary kernel value at distance r; equals 1 at r = 0.
inline double matern_eval(const MaternParams& params, double r) {
    const int hi = params.half_index();
    if (hi < 0) throw ConfigError("matern_eval: unsupported smoothness");
    const double s = params.scale() * r;
    return detail::psi_derivs(hi, s, 0).psi[0];
}

/// Mixed partial of x -> Matern(center, x) at `point`, orders per `idx`.
/// Chain rule through u(x) = scale^2 * |x - center|^2, whose derivatives
/// vanish above order two, so each partial is a sum over pairings of the
/// requested axes.
inline double matern_partial(const MaternParams& params, const std::vector<double>& center,
                             const std::vector<double>& point, const MultiIndex& idx) {
    const int hi = params.half_index();
    if (hi < 0) throw ConfigError("matern_partial: unsupported smoothness");
    if (center.size() != point.size() || idx.dim() != static_cast<int>(point.size()))
        throw ContractViolation("matern_partial: dimension mismatch");
    const int n = idx.total_order();
    if (n > params.max_order())
        throw UnsupportedOrder("matern_partial: order " + std::to_string(n) +
                               " exceeds kernel smoothness (max " +
                               std::to_string(params.max_order()) + ")");

    const double a2 = params.scale() * params.scale();
    double u = 0.0;
    std::vector<double> diff(point.size());
    for (std::size_t i = 0; i < point.size(); ++i) {
        diff[i] = point[i] - center[i];
        u += diff[i] * diff[i];
    }
    u *= a2;
    const double s = std::sqrt(u);
    const auto psi = detail::psi_derivs(hi, s, n).psi;
    if (n == 0) return psi[0];

    // Flatten the multi-index into a list of differentiation axes.
    std::array<int, 4> ax{};
    int na = 0;
    for (int d = 0; d < idx.dim(); ++d)
        for (int rep = 0; rep < idx.orders[d]; ++rep) ax[na++] = d;

    auto u1 = [&](int i) { return 2.0 * a2 * diff[ax[i]]; };          // du/dx_axis
    auto u2 = [&](int i, int j) {                                      // d2u/dx dx
        return ax[i] == ax[j] ? 2.0 * a2 : 0.0;
    };

    switch (n) {
        case 1:
            return psi[1] * u1(0);
        case 2:
            return psi[2] * u1(0) * u1(1) + psi[1] * u2(0, 1);
        case 3:
            return psi[3] * u1(0) * u1(1) * u1(2) +
                   psi[2] * (u2(0, 1) * u1(2) + u2(0, 2) * u1(1) + u2(1, 2) * u1(0));
        case 4:
            return psi[4] * u1(0) * u1(1) * u1(2) * u1(3) +
                   psi[3] * (u2(0, 1) * u1(2) * u1(3) + u2(0, 2) * u1(1) * u1(3) +
                             u2(0, 3) * u1(1) * u1(2) + u2(1, 2) * u1(0) * u1(3) +
                             u2(1, 3) * u1(0) * u1(2) + u2(2, 3) * u1(0) * u1(1)) +
                   psi[2] * (u2(0, 1) * u2(2, 3) + u2(0, 2) * u2(1, 3) + u2(0, 3) * u2(1, 2));
        default:
            throw UnsupportedOrder("matern_partial: order > 4 not implemented");
    }
}

}  // namespace gfd

#endif
