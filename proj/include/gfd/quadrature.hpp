#ifndef GFD_QUADRATURE_HPP
#define GFD_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "gfd/errors.hpp"

namespace gfd {

/// Axis-aligned box (a, b)^d with per-axis bounds.
struct BoxDomain {
    int dim = 0;
    std::vector<double> lower;
    std::vector<double> upper;

    BoxDomain() = default;
    BoxDomain(std::vector<double> lo, std::vector<double> hi)
        : dim(static_cast<int>(lo.size())), lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw ConfigError("BoxDomain: lower/upper dimension mismatch");
        for (int i = 0; i < dim; ++i)
            if (!(lower[i] < upper[i]))
                throw ConfigError("BoxDomain: lower must be strictly below upper");
    }

    double measure() const {
        double m = 1.0;
        for (int i = 0; i < dim; ++i) m *= upper[i] - lower[i];
        return m;
    }
};

/// One face of a box, possibly restricted: coordinate `fixed_axis` pinned to
/// `fixed_value`, remaining coordinates ranging over `free_box`.
struct BoundaryComponent {
    int fixed_axis = 0;
    double fixed_value = 0.0;
    BoxDomain free_box;  // (d-1)-dimensional

    double measure() const {
        return free_box.dim == 0 ? 1.0 : free_box.measure();
    }
};

/// Node/weight list. Weights sum to the measure of the underlying domain
/// (or the total measure of the faces, for boundary quadratures).
struct Quadrature {
    std::vector<std::vector<double>> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

// Generalized golden ratio: the real root > 1 of x^(d+1) = x + 1, by
// fixed-point iteration x <- (1+x)^(1/(d+1)).
inline double roberts_phi(int d) {
    double x = 2.0;
    for (int it = 0; it < 30; ++it) x = std::pow(1.0 + x, 1.0 / (d + 1));
    return x;
}

/// First n points of the d-dimensional Roberts sequence in [0,1)^d.
/// Point m (1-based) has j-th coordinate frac(0.5 + m * phi_d^-j).
/// Deterministic and prefix-stable: extending n preserves earlier points.
inline std::vector<std::vector<double>> roberts_sequence(int d, std::size_t n) {
    if (d < 1) throw ConfigError("roberts_sequence: d must be >= 1");
    const double phi = roberts_phi(d);
    std::vector<double> alpha(d);
    double a = 1.0;
    for (int j = 0; j < d; ++j) {
        a /= phi;
        alpha[j] = a;
    }
    std::vector<std::vector<double>> pts(n, std::vector<double>(d));
    for (std::size_t m = 1; m <= n; ++m) {
        for (int j = 0; j < d; ++j) {
            double v = 0.5 + static_cast<double>(m) * alpha[j];
            pts[m - 1][j] = v - std::floor(v);
        }
    }
    return pts;
}

/// Roberts QMC rule over the interior of a box: n nodes, uniform weights.
inline Quadrature interior_quadrature(const BoxDomain& box, std::size_t n) {
    if (n < 1) throw ConfigError("interior_quadrature: n must be >= 1");
    Quadrature q;
    q.nodes = roberts_sequence(box.dim, n);
    for (auto& p : q.nodes)
        for (int i = 0; i < box.dim; ++i)
            p[i] = box.lower[i] + p[i] * (box.upper[i] - box.lower[i]);
    q.weights.assign(n, box.measure() / static_cast<double>(n));
    return q;
}

/// Concatenated per-face Roberts rules, each embedded at its fixed value.
/// Total weight equals the sum of face measures.
inline Quadrature boundary_quadrature(const std::vector<BoundaryComponent>& components,
                                      std::size_t n_per) {
    if (n_per < 1) throw ConfigError("boundary_quadrature: n_per must be >= 1");
    Quadrature q;
    for (const auto& comp : components) {
        const int dfree = comp.free_box.dim;
        std::vector<std::vector<double>> pts;
        if (dfree == 0) {
            pts.assign(1, {});
        } else {
            pts = roberts_sequence(dfree, n_per);
            for (auto& p : pts)
                for (int i = 0; i < dfree; ++i)
                    p[i] = comp.free_box.lower[i] +
                           p[i] * (comp.free_box.upper[i] - comp.free_box.lower[i]);
        }
        const double w = comp.measure() / static_cast<double>(pts.size());
        for (const auto& p : pts) {
            std::vector<double> node(dfree + 1);
            int j = 0;
            for (int i = 0; i <= dfree; ++i) {
                if (i == comp.fixed_axis)
                    node[i] = comp.fixed_value;
                else
                    node[i] = p[j++];
            }
            q.nodes.push_back(std::move(node));
            q.weights.push_back(w);
        }
    }
    return q;
}

/// QMC estimate of the integral of f over the quadrature's domain.
template <class F>
double integrate(F&& f, const Quadrature& quad) {
    double s = 0.0;
    for (std::size_t i = 0; i < quad.size(); ++i) s += quad.weights[i] * f(quad.nodes[i]);
    return s;
}

}  // namespace gfd

#endif
