#ifndef GFD_EXPANSION_HPP
#define GFD_EXPANSION_HPP

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/prebasis.hpp"

namespace gfd {

/// A Hilbert-space element as a finite coefficient prefix over the pre-basis:
/// h = sum_i coeffs[i-1] * b_i. The zero element is the empty prefix and is
/// indistinguishable from an all-zero coefficient vector of any length.
class PreBasisExpansion {
   public:
    PreBasisExpansion() = default;
    explicit PreBasisExpansion(PreBasis* basis) : basis_(basis) {}
    PreBasisExpansion(PreBasis* basis, std::vector<double> coeffs)
        : basis_(basis), coeffs_(std::move(coeffs)) {}

    PreBasis* basis() const { return basis_; }
    const std::vector<double>& coeffs() const { return coeffs_; }
    std::vector<double>& coeffs() { return coeffs_; }
    int length() const { return static_cast<int>(coeffs_.size()); }

    bool is_finite() const {
        for (double c : coeffs_)
            if (!std::isfinite(c)) return false;
        return true;
    }

    double coeff_norm() const {
        double s = 0.0;
        for (double c : coeffs_) s += c * c;
        return std::sqrt(s);
    }

   private:
    PreBasis* basis_ = nullptr;
    std::vector<double> coeffs_;
};

/// Pointwise value of the expansion.
inline double evaluate(const PreBasisExpansion& h, const std::vector<double>& point) {
    if (h.length() == 0) return 0.0;
    PreBasis* pb = h.basis();
    if (static_cast<int>(point.size()) != pb->domain().dim)
        throw ContractViolation("evaluate: point dimension mismatch");
    const auto& centers = pb->centers(h.length());
    double s = 0.0;
    for (int i = 0; i < h.length(); ++i) {
        double r2 = 0.0;
        for (std::size_t d = 0; d < point.size(); ++d) {
            const double diff = point[d] - centers[i][d];
            r2 += diff * diff;
        }
        s += h.coeffs()[i] * matern_eval(pb->params(), std::sqrt(r2));
    }
    return s;
}

/// Mixed partial derivative of the expansion at a point.
inline double evaluate_partial(const PreBasisExpansion& h, const std::vector<double>& point,
                               const MultiIndex& idx) {
    if (h.length() == 0) return 0.0;
    PreBasis* pb = h.basis();
    if (static_cast<int>(point.size()) != pb->domain().dim || idx.dim() != pb->domain().dim)
        throw ContractViolation("evaluate_partial: dimension mismatch");
    const auto& centers = pb->centers(h.length());
    double s = 0.0;
    for (int i = 0; i < h.length(); ++i)
        s += h.coeffs()[i] * matern_partial(pb->params(), centers[i], point, idx);
    return s;
}

/// y + alpha * x, coefficient vectors padded to the longer length.
inline PreBasisExpansion axpy(double alpha, const PreBasisExpansion& x,
                              const PreBasisExpansion& y) {
    if (x.basis() && y.basis() && x.basis() != y.basis())
        throw ContractViolation("axpy: expansions reference different pre-bases");
    PreBasisExpansion out(x.basis() ? x.basis() : y.basis());
    out.coeffs().assign(static_cast<std::size_t>(std::max(x.length(), y.length())), 0.0);
    for (int i = 0; i < y.length(); ++i) out.coeffs()[i] = y.coeffs()[i];
    for (int i = 0; i < x.length(); ++i) out.coeffs()[i] += alpha * x.coeffs()[i];
    return out;
}

inline PreBasisExpansion operator*(double alpha, const PreBasisExpansion& x) {
    return axpy(alpha, x, PreBasisExpansion(x.basis()));
}

inline PreBasisExpansion operator+(const PreBasisExpansion& a, const PreBasisExpansion& b) {
    return axpy(1.0, a, b);
}

inline PreBasisExpansion operator-(const PreBasisExpansion& a, const PreBasisExpansion& b) {
    return axpy(-1.0, b, a);
}

/// H^l inner product through the cached Gram matrix: coeffs_x^T G coeffs_y.
inline double sobolev_inner(const PreBasisExpansion& x, const PreBasisExpansion& y, int order) {
    if (x.length() == 0 || y.length() == 0) return 0.0;
    if (x.basis() != y.basis())
        throw ContractViolation("sobolev_inner: expansions reference different pre-bases");
    PreBasis* pb = x.basis();
    if (order != pb->sobolev_order())
        throw ContractViolation("sobolev_inner: order does not match the pre-basis");
    const int k = std::max(x.length(), y.length());
    if (pb->gram_size() < k)
        throw StateError("sobolev_inner: Gram not assembled to required size; call assemble_gram");
    double s = 0.0;
    for (int i = 0; i < x.length(); ++i)
        for (int j = 0; j < y.length(); ++j)
            s += x.coeffs()[i] * pb->gram()(i, j) * y.coeffs()[j];
    return s;
}

/// QMC estimate of the L2 distance between the expansion and a pointwise
/// reference function.
template <class F>
double l2_distance(const PreBasisExpansion& h, F&& reference, const Quadrature& quad) {
    double s = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) {
        const double d = evaluate(h, quad.nodes[i]) - reference(quad.nodes[i]);
        s += quad.weights[i] * d * d;
    }
    return std::sqrt(std::max(0.0, s));
}

}  // namespace gfd

#endif
