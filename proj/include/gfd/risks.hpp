#ifndef GFD_RISKS_HPP
#define GFD_RISKS_HPP

#include <Eigen/Core>
#include <cmath>
#include <functional>
#include <vector>

#include "gfd/dual.hpp"
#include "gfd/errors.hpp"
#include "gfd/expansion.hpp"
#include "gfd/prebasis.hpp"
#include "gfd/quadrature.hpp"

namespace gfd {

inline double scalar_value(double x) { return x; }
inline double scalar_value(DualScalar x) { return x.value; }

/// Risk functional contract: value R(h) and directional derivative D R(h; v).
class RiskFunctional {
   public:
    virtual ~RiskFunctional() = default;
    virtual double value(const PreBasisExpansion& h) const = 0;
    virtual double directional(const PreBasisExpansion& h, const PreBasisExpansion& v) const = 0;
};

namespace detail {

// Per-node expansion values on a fixed quadrature, one column per cached
// multi-index. Dual evaluation pairs the iterate's values with the
// direction's values at the same nodes.
inline Eigen::VectorXd gather(const NodeTable& table, std::size_t t,
                              const PreBasisExpansion& h) {
    const auto n = static_cast<Eigen::Index>(table.quad().size());
    if (h.length() == 0) return Eigen::VectorXd::Zero(n);
    Eigen::Map<const Eigen::VectorXd> c(h.coeffs().data(), h.length());
    return table.table(t).leftCols(h.length()) * c;
}

}  // namespace detail

/// Dirichlet residual risk for the heat equation on (0,T) x (0,2pi):
/// 1/2 |d_t h - d_xx h|^2 over the interior plus 1/2 the squared mismatch with
/// sin x at t=0 and with zero on the two lateral faces.
class HeatRisk : public RiskFunctional {
   public:
    static BoxDomain make_domain(double time_horizon) {
        return BoxDomain({0.0, 0.0}, {time_horizon, 2.0 * M_PI});
    }

    HeatRisk(PreBasis* pb, double time_horizon = 1.0, std::size_t interior_nodes = 1u << 14,
             std::size_t boundary_nodes = 1u << 11)
        : pb_(pb), time_horizon_(time_horizon) {
        const BoxDomain expect = make_domain(time_horizon);
        const BoxDomain& dom = pb->domain();
        if (dom.dim != 2 || std::abs(dom.upper[0] - expect.upper[0]) > 1e-12 ||
            std::abs(dom.upper[1] - expect.upper[1]) > 1e-12 || std::abs(dom.lower[0]) > 1e-12 ||
            std::abs(dom.lower[1]) > 1e-12)
            throw ConfigError("HeatRisk: pre-basis domain must be (0,T) x (0,2pi)");
        if (pb->params().max_order() < 2)
            throw ConfigError("HeatRisk: kernel smoothness too low for second derivatives");

        interior_ = interior_quadrature(dom, interior_nodes);
        interior_table_ = NodeTable(&interior_, {MultiIndex({1, 0}), MultiIndex({0, 2})});

        const BoxDomain xline({0.0}, {2.0 * M_PI});
        const BoxDomain tline({0.0}, {time_horizon});
        initial_ = boundary_quadrature({{0, 0.0, xline}}, boundary_nodes);
        lateral_ = boundary_quadrature(
            {{1, 0.0, tline}, {1, 2.0 * M_PI, tline}}, boundary_nodes);
        initial_table_ = NodeTable(&initial_, {MultiIndex({0, 0})});
        lateral_table_ = NodeTable(&lateral_, {MultiIndex({0, 0})});
    }

    double value(const PreBasisExpansion& h) const override {
        check(h);
        ensure_tables(h.length());
        const Eigen::VectorXd ht = detail::gather(interior_table_, 0, h);
        const Eigen::VectorXd hxx = detail::gather(interior_table_, 1, h);
        const Eigen::VectorXd h0 = detail::gather(initial_table_, 0, h);
        const Eigen::VectorXd hl = detail::gather(lateral_table_, 0, h);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < ht.size(); ++i)
            acc += interior_.weights[i] * 0.5 * square(ht[i] - hxx[i]);
        for (Eigen::Index i = 0; i < h0.size(); ++i)
            acc += initial_.weights[i] * 0.5 * square(h0[i] - std::sin(initial_.nodes[i][1]));
        for (Eigen::Index i = 0; i < hl.size(); ++i)
            acc += lateral_.weights[i] * 0.5 * square(hl[i]);
        return acc;
    }

    double directional(const PreBasisExpansion& h, const PreBasisExpansion& v) const override {
        check(h);
        check(v);
        const int len = std::max(h.length(), v.length());
        ensure_tables(len);
        const Eigen::VectorXd ht = detail::gather(interior_table_, 0, h);
        const Eigen::VectorXd hxx = detail::gather(interior_table_, 1, h);
        const Eigen::VectorXd vt = detail::gather(interior_table_, 0, v);
        const Eigen::VectorXd vxx = detail::gather(interior_table_, 1, v);
        const Eigen::VectorXd h0 = detail::gather(initial_table_, 0, h);
        const Eigen::VectorXd v0 = detail::gather(initial_table_, 0, v);
        const Eigen::VectorXd hl = detail::gather(lateral_table_, 0, h);
        const Eigen::VectorXd vl = detail::gather(lateral_table_, 0, v);
        DualScalar acc;
        for (Eigen::Index i = 0; i < ht.size(); ++i) {
            const DualScalar res(ht[i] - hxx[i], vt[i] - vxx[i]);
            acc = acc + DualScalar(interior_.weights[i]) * DualScalar(0.5) * square(res);
        }
        for (Eigen::Index i = 0; i < h0.size(); ++i) {
            const DualScalar res(h0[i] - std::sin(initial_.nodes[i][1]), v0[i]);
            acc = acc + DualScalar(initial_.weights[i]) * DualScalar(0.5) * square(res);
        }
        for (Eigen::Index i = 0; i < hl.size(); ++i) {
            const DualScalar res(hl[i], vl[i]);
            acc = acc + DualScalar(lateral_.weights[i]) * DualScalar(0.5) * square(res);
        }
        return acc.deriv;
    }

    /// Risk of an arbitrary smooth evaluator (value, d_t, d_xx supplied
    /// pointwise); used to check the risk at the known exact solution.
    double value_pointwise(const std::function<double(double, double)>& u,
                           const std::function<double(double, double)>& u_t,
                           const std::function<double(double, double)>& u_xx) const {
        double acc = 0.0;
        for (std::size_t i = 0; i < interior_.size(); ++i) {
            const double t = interior_.nodes[i][0], x = interior_.nodes[i][1];
            acc += interior_.weights[i] * 0.5 * square(u_t(t, x) - u_xx(t, x));
        }
        for (std::size_t i = 0; i < initial_.size(); ++i) {
            const double x = initial_.nodes[i][1];
            acc += initial_.weights[i] * 0.5 * square(u(0.0, x) - std::sin(x));
        }
        for (std::size_t i = 0; i < lateral_.size(); ++i) {
            const double t = lateral_.nodes[i][0], x = lateral_.nodes[i][1];
            acc += lateral_.weights[i] * 0.5 * square(u(t, x));
        }
        return acc;
    }

    const Quadrature& interior_quad() const { return interior_; }
    double time_horizon() const { return time_horizon_; }

    static double exact_solution(const std::vector<double>& tx) {
        return std::exp(-tx[0]) * std::sin(tx[1]);
    }

   private:
    void check(const PreBasisExpansion& h) const {
        if (h.length() > 0 && h.basis() != pb_)
            throw ContractViolation("HeatRisk: expansion references a different pre-basis");
    }

    void ensure_tables(int k) const {
        interior_table_.extend(pb_->params(), pb_->centers(k), k);
        initial_table_.extend(pb_->params(), pb_->centers(k), k);
        lateral_table_.extend(pb_->params(), pb_->centers(k), k);
    }

    PreBasis* pb_;
    double time_horizon_;
    Quadrature interior_, initial_, lateral_;
    mutable NodeTable interior_table_, initial_table_, lateral_table_;
};

/// Constants of the linear-quadratic control problem behind the HJB risk.
struct HjbParams {
    double a = 1.0;      // state cost
    double b = 1.0;      // control cost
    double cbar = 0.5;   // control bound
    double xbar = 3.0;   // spatial half-width
    double time_horizon = 5.0;

    double g() const { return std::sqrt(a * b); }  // terminal cost weight
};

inline double abs(double x) { return std::abs(x); }

/// Infimum of the Hamiltonian over admissible controls. Continuous across the
/// branch point |p| = 2 b cbar; ties go to the interior formula.
template <class Scalar>
Scalar htilde(double x, Scalar p, const HjbParams& prm) {
    if (std::abs(scalar_value(p)) <= 2.0 * prm.b * prm.cbar)
        return Scalar(prm.a * x * x) - p * p / Scalar(4.0 * prm.b);
    return Scalar(prm.a * x * x + prm.b * prm.cbar * prm.cbar) - Scalar(prm.cbar) * abs(p);
}

/// Minimizer of b c^2 + p c over |c| <= cbar.
inline double optimal_control_from_slope(double p, const HjbParams& prm) {
    const double c = -p / (2.0 * prm.b);
    return std::min(prm.cbar, std::max(-prm.cbar, c));
}

/// Residual risk for the HJB equation on (0,T) x (-xbar, xbar):
/// 1/2 |d_t h + Htilde(x, d_x h)|^2 over the interior plus 1/2 the squared
/// mismatch with g x^2 on the terminal face t = T.
class HjbRisk : public RiskFunctional {
   public:
    static BoxDomain make_domain(const HjbParams& prm) {
        return BoxDomain({0.0, -prm.xbar}, {prm.time_horizon, prm.xbar});
    }

    HjbRisk(PreBasis* pb, HjbParams prm = {}, std::size_t interior_nodes = 1u << 14,
            std::size_t boundary_nodes = 1u << 11)
        : pb_(pb), prm_(prm) {
        const BoxDomain expect = make_domain(prm_);
        const BoxDomain& dom = pb->domain();
        for (int i = 0; i < 2; ++i)
            if (std::abs(dom.lower[i] - expect.lower[i]) > 1e-12 ||
                std::abs(dom.upper[i] - expect.upper[i]) > 1e-12)
                throw ConfigError("HjbRisk: pre-basis domain must be (0,T) x (-xbar, xbar)");
        interior_ = interior_quadrature(dom, interior_nodes);
        interior_table_ = NodeTable(&interior_, {MultiIndex({1, 0}), MultiIndex({0, 1})});
        const BoxDomain xline({-prm_.xbar}, {prm_.xbar});
        terminal_ = boundary_quadrature({{0, prm_.time_horizon, xline}}, boundary_nodes);
        terminal_table_ = NodeTable(&terminal_, {MultiIndex({0, 0})});
    }

    double value(const PreBasisExpansion& h) const override {
        check(h);
        ensure_tables(h.length());
        const Eigen::VectorXd ht = detail::gather(interior_table_, 0, h);
        const Eigen::VectorXd hx = detail::gather(interior_table_, 1, h);
        const Eigen::VectorXd hT = detail::gather(terminal_table_, 0, h);
        double acc = 0.0;
        for (Eigen::Index i = 0; i < ht.size(); ++i) {
            const double x = interior_.nodes[i][1];
            acc += interior_.weights[i] * 0.5 * square(ht[i] + htilde(x, hx[i], prm_));
        }
        const double g = prm_.g();
        for (Eigen::Index i = 0; i < hT.size(); ++i) {
            const double x = terminal_.nodes[i][1];
            acc += terminal_.weights[i] * 0.5 * square(hT[i] - g * x * x);
        }
        return acc;
    }

    double directional(const PreBasisExpansion& h, const PreBasisExpansion& v) const override {
        check(h);
        check(v);
        ensure_tables(std::max(h.length(), v.length()));
        const Eigen::VectorXd ht = detail::gather(interior_table_, 0, h);
        const Eigen::VectorXd hx = detail::gather(interior_table_, 1, h);
        const Eigen::VectorXd vt = detail::gather(interior_table_, 0, v);
        const Eigen::VectorXd vx = detail::gather(interior_table_, 1, v);
        const Eigen::VectorXd hT = detail::gather(terminal_table_, 0, h);
        const Eigen::VectorXd vT = detail::gather(terminal_table_, 0, v);
        DualScalar acc;
        for (Eigen::Index i = 0; i < ht.size(); ++i) {
            const double x = interior_.nodes[i][1];
            const DualScalar p(hx[i], vx[i]);
            const DualScalar res = DualScalar(ht[i], vt[i]) + htilde(x, p, prm_);
            acc = acc + DualScalar(interior_.weights[i]) * DualScalar(0.5) * square(res);
        }
        const double g = prm_.g();
        for (Eigen::Index i = 0; i < hT.size(); ++i) {
            const double x = terminal_.nodes[i][1];
            const DualScalar res(hT[i] - g * x * x, vT[i]);
            acc = acc + DualScalar(terminal_.weights[i]) * DualScalar(0.5) * square(res);
        }
        return acc.deriv;
    }

    /// L2 error against the terminal condition g x^2 on the t = T face.
    double terminal_error(const PreBasisExpansion& h) const {
        check(h);
        ensure_tables(h.length());
        const Eigen::VectorXd hT = detail::gather(terminal_table_, 0, h);
        const double g = prm_.g();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < hT.size(); ++i) {
            const double x = terminal_.nodes[i][1];
            acc += terminal_.weights[i] * square(hT[i] - g * x * x);
        }
        return std::sqrt(std::max(0.0, acc));
    }

    /// Control fed back from the value function: clamp(-d_x u / (2b)).
    double optimal_control(const PreBasisExpansion& u, double t, double x) const {
        const double p = evaluate_partial(u, {t, x}, MultiIndex({0, 1}));
        return optimal_control_from_slope(p, prm_);
    }

    const HjbParams& params() const { return prm_; }
    const Quadrature& interior_quad() const { return interior_; }

   private:
    void check(const PreBasisExpansion& h) const {
        if (h.length() > 0 && h.basis() != pb_)
            throw ContractViolation("HjbRisk: expansion references a different pre-basis");
    }

    void ensure_tables(int k) const {
        interior_table_.extend(pb_->params(), pb_->centers(k), k);
        terminal_table_.extend(pb_->params(), pb_->centers(k), k);
    }

    PreBasis* pb_;
    HjbParams prm_;
    Quadrature interior_, terminal_;
    mutable NodeTable interior_table_, terminal_table_;
};

}  // namespace gfd

#endif
