#ifndef GFD_DUAL_HPP
#define GFD_DUAL_HPP

#include <cmath>

namespace gfd {

/// Forward-mode scalar dual number a + eps*b: carries the value of the risk
/// integrand together with its derivative in the perturbation direction.
struct DualScalar {
    double value = 0.0;
    double deriv = 0.0;

    DualScalar() = default;
    DualScalar(double v) : value(v) {}
    DualScalar(double v, double d) : value(v), deriv(d) {}
};

inline DualScalar operator+(DualScalar a, DualScalar b) {
    return {a.value + b.value, a.deriv + b.deriv};
}
inline DualScalar operator-(DualScalar a, DualScalar b) {
    return {a.value - b.value, a.deriv - b.deriv};
}
inline DualScalar operator-(DualScalar a) { return {-a.value, -a.deriv}; }
inline DualScalar operator*(DualScalar a, DualScalar b) {
    return {a.value * b.value, a.value * b.deriv + a.deriv * b.value};
}
inline DualScalar operator/(DualScalar a, DualScalar b) {
    const double inv = 1.0 / b.value;
    return {a.value * inv, (a.deriv - a.value * b.deriv * inv) * inv};
}

inline DualScalar sin(DualScalar a) { return {std::sin(a.value), std::cos(a.value) * a.deriv}; }
inline DualScalar cos(DualScalar a) { return {std::cos(a.value), -std::sin(a.value) * a.deriv}; }
inline DualScalar exp(DualScalar a) {
    const double e = std::exp(a.value);
    return {e, e * a.deriv};
}
inline DualScalar sqrt(DualScalar a) {
    const double s = std::sqrt(a.value);
    return {s, 0.5 / s * a.deriv};
}
inline DualScalar square(DualScalar a) { return {a.value * a.value, 2.0 * a.value * a.deriv}; }

// sgn(0) = 0, so abs is differentiated as sign(value) * deriv away from 0 and
// contributes nothing at the kink.
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
inline DualScalar abs(DualScalar a) { return {std::abs(a.value), sgn(a.value) * a.deriv}; }

// Branch selected by value part.
inline DualScalar min(DualScalar a, DualScalar b) { return a.value <= b.value ? a : b; }
inline DualScalar max(DualScalar a, DualScalar b) { return a.value >= b.value ? a : b; }

// Plain-double helpers so risk integrands can be written once, generic in the
// scalar type.
inline double square(double a) { return a * a; }

}  // namespace gfd

#endif
