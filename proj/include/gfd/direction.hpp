#ifndef GFD_DIRECTION_HPP
#define GFD_DIRECTION_HPP

#include <Eigen/Core>
#include <cmath>
#include <random>

#include "gfd/dimension_law.hpp"
#include "gfd/expansion.hpp"
#include "gfd/prebasis.hpp"
#include "gfd/rng.hpp"

namespace gfd {

/// Random direction v = B_k R_k^-1 T_k^-1/2 z with z ~ N(0, I_k), returned as
/// the coefficient vector w solving R_k w = T_k^-1/2 z by back-substitution.
/// No inverse is formed.
inline PreBasisExpansion sample_direction(PreBasis& pb, const DimensionLaw& law, int k,
                                          std::mt19937_64& rng) {
    pb.ensure(k);
    Eigen::VectorXd rhs(k);
    for (int i = 0; i < k; ++i) rhs[i] = draw_normal(rng) / std::sqrt(law.tail(i + 1));
    const auto& r = pb.chol_r();
    Eigen::VectorXd w(k);
    for (int i = k - 1; i >= 0; --i) {
        double s = rhs[i];
        for (int j = i + 1; j < k; ++j) s -= r(i, j) * w[j];
        w[i] = s / r(i, i);
    }
    return PreBasisExpansion(&pb, std::vector<double>(w.data(), w.data() + k));
}

}  // namespace gfd

#endif
