#ifndef GFD_PREBASIS_HPP
#define GFD_PREBASIS_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gfd/errors.hpp"
#include "gfd/matern.hpp"
#include "gfd/quadrature.hpp"

namespace gfd {

/// All mixed-partial multi-indices entering the H^l inner product, with the
/// multiplicity each one carries in the full derivative tensor (mixed partials
/// are counted once per position in the d^j array, e.g. d=2, l=2 gives the
/// cross term twice).
struct WeightedIndex {
    MultiIndex idx;
    double multiplicity;
};

inline void sobolev_indices_rec(int dim, int axis, int remaining, std::vector<int>& cur,
                                std::vector<WeightedIndex>& out) {
    if (axis == dim - 1) {
        cur[axis] = remaining;
        int total = 0;
        double mult = 1.0;  // multinomial(total; orders)
        for (int o : cur) total += o;
        double fact = 1.0;
        for (int i = 2; i <= total; ++i) fact *= i;
        mult = fact;
        for (int o : cur) {
            double f = 1.0;
            for (int i = 2; i <= o; ++i) f *= i;
            mult /= f;
        }
        out.push_back({MultiIndex(cur), mult});
        return;
    }
    for (int o = 0; o <= remaining; ++o) {
        cur[axis] = o;
        sobolev_indices_rec(dim, axis + 1, remaining - o, cur, out);
    }
}

inline std::vector<WeightedIndex> sobolev_indices(int dim, int order) {
    std::vector<WeightedIndex> out;
    std::vector<int> cur(dim, 0);
    for (int j = 0; j <= order; ++j) sobolev_indices_rec(dim, 0, j, cur, out);
    return out;
}

/// Cached kernel partials on a fixed quadrature: one (nodes x centers) matrix
/// per multi-index, extended by columns as more centers come into play.
class NodeTable {
   public:
    NodeTable() = default;
    NodeTable(const Quadrature* quad, std::vector<MultiIndex> indices)
        : quad_(quad), indices_(std::move(indices)) {}

    void extend(const MaternParams& params, const std::vector<std::vector<double>>& centers,
                int k) {
        if (k <= cols_) return;
        const auto n = static_cast<Eigen::Index>(quad_->size());
        for (std::size_t t = 0; t < indices_.size(); ++t) {
            if (tables_.size() <= t) tables_.emplace_back(n, 0);
            auto& m = tables_[t];
            if (m.cols() < k) {
                Eigen::MatrixXd grown(n, k);
                grown.leftCols(m.cols()) = m;
                m.swap(grown);
            }
            for (int c = cols_; c < k; ++c)
                for (Eigen::Index i = 0; i < n; ++i)
                    m(i, c) = matern_partial(params, centers[c], quad_->nodes[i], indices_[t]);
        }
        cols_ = k;
    }

    const Eigen::MatrixXd& table(std::size_t t) const { return tables_[t]; }
    const std::vector<MultiIndex>& indices() const { return indices_; }
    int cols() const { return cols_; }
    const Quadrature& quad() const { return *quad_; }

   private:
    const Quadrature* quad_ = nullptr;
    std::vector<MultiIndex> indices_;
    std::vector<Eigen::MatrixXd> tables_;
    int cols_ = 0;
};

/// Matérn pre-basis over a box domain: quasi-random centers, lazily assembled
/// H^l Gram matrix and its incremental upper-triangular Cholesky factor.
class PreBasis {
   public:
    PreBasis(MaternParams params, BoxDomain domain, int sobolev_order,
             std::size_t gram_nodes = 1u << 14)
        : params_(params),
          domain_(std::move(domain)),
          sobolev_order_(sobolev_order),
          gram_quad_(interior_quadrature(domain_, gram_nodes)) {
        if (params_.nu + domain_.dim / 2.0 < sobolev_order_ - 1e-12)
            throw ConfigError("PreBasis: need nu + d/2 >= sobolev order");
        if (params_.max_order() < sobolev_order_)
            throw ConfigError("PreBasis: kernel smoothness too low for the Sobolev order");
        std::vector<MultiIndex> idx;
        for (const auto& wi : sobolev_indices(domain_.dim, sobolev_order_)) idx.push_back(wi.idx);
        table_ = NodeTable(&gram_quad_, idx);
    }

    // Non-copyable: NodeTable and expansions hold stable pointers into it.
    PreBasis(const PreBasis&) = delete;
    PreBasis& operator=(const PreBasis&) = delete;

    const MaternParams& params() const { return params_; }
    const BoxDomain& domain() const { return domain_; }
    int sobolev_order() const { return sobolev_order_; }
    double jitter() const { return jitter_; }
    const Quadrature& gram_quad() const { return gram_quad_; }

    /// Roberts centers, generated on demand; the prefix never changes.
    const std::vector<std::vector<double>>& centers(int count) {
        if (static_cast<int>(centers_.size()) < count) {
            auto pts = roberts_sequence(domain_.dim, count);
            for (int c = static_cast<int>(centers_.size()); c < count; ++c) {
                for (int i = 0; i < domain_.dim; ++i)
                    pts[c][i] = domain_.lower[i] + pts[c][i] * (domain_.upper[i] - domain_.lower[i]);
                centers_.push_back(pts[c]);
            }
        }
        return centers_;
    }

    const std::vector<std::vector<double>>& centers() const { return centers_; }
    int center_count() const { return static_cast<int>(centers_.size()); }

    int gram_size() const { return static_cast<int>(gram_.rows()); }
    int chol_size() const { return chol_size_; }

    const Eigen::MatrixXd& gram() const { return gram_; }
    const Eigen::MatrixXd& chol_r() const { return chol_; }

    /// Extends the Gram matrix to k x k by QMC estimation of the H^l inner
    /// products of kernel translates. Existing entries are never recomputed.
    void assemble_gram(int k) {
        const int k0 = gram_size();
        if (k <= k0) return;
        centers(k);
        table_.extend(params_, centers_, k);
        const auto weighted = sobolev_indices(domain_.dim, sobolev_order_);
        const double w = gram_quad_.weights[0];  // uniform interior weights

        Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(k, k);
        grown.topLeftCorner(k0, k0) = gram_;
        for (int j = k0; j < k; ++j) {
            for (int i = 0; i <= j; ++i) {
                double entry = 0.0;
                for (std::size_t t = 0; t < weighted.size(); ++t) {
                    const auto& m = table_.table(t);
                    entry += weighted[t].multiplicity * w * m.col(i).dot(m.col(j));
                }
                grown(i, j) = entry;
                grown(j, i) = entry;
            }
        }
        gram_.swap(grown);
    }

    /// Extends the upper-triangular factor so chol_r^T chol_r = gram + jitter I
    /// up to size k. A nonpositive pivot doubles the jitter (starting from
    /// 1e-10 * max diagonal) and restarts, at most 20 times.
    void cholesky_extend(int k) {
        if (k > gram_size()) throw StateError("cholesky_extend: assemble_gram(k) first");
        if (k <= chol_size_) return;
        if (chol_.rows() < k) {
            Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(k, k);
            grown.topLeftCorner(chol_.rows(), chol_.cols()) = chol_;
            chol_.swap(grown);
        }
        int start = chol_size_;
        int doublings_left = 20;
        for (int j = start; j < k; ++j) {
            for (int i = 0; i < j; ++i) {
                double s = gram_(i, j) - chol_.col(j).head(i).dot(chol_.col(i).head(i));
                chol_(i, j) = s / chol_(i, i);
            }
            double pivot = gram_(j, j) + jitter_ - chol_.col(j).head(j).squaredNorm();
            if (pivot <= 0.0) {
                if (doublings_left == 0)
                    throw NumericalRankError(
                        "cholesky_extend: jitter cap exceeded at index " + std::to_string(j), j);
                --doublings_left;
                jitter_ = jitter_ == 0.0 ? 1e-10 * gram_.diagonal().head(k).maxCoeff()
                                         : 2.0 * jitter_;
                j = -1;      // restart the whole factorization with new jitter
                start = 0;
                chol_size_ = 0;
                continue;
            }
            chol_(j, j) = std::sqrt(pivot);
        }
        chol_size_ = k;
    }

    /// assemble_gram + cholesky_extend in one call.
    void ensure(int k) {
        assemble_gram(k);
        cholesky_extend(k);
    }

    /// Text dump of the assembled Gram with a configuration header.
    void save_gram_cache(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw StateError("save_gram_cache: cannot open " + path);
        out.precision(17);
        out << "gfd-gram-cache 1\n";
        out << "nu " << params_.nu << "\n";
        out << "eta " << params_.eta << "\n";
        out << "sobolev_order " << sobolev_order_ << "\n";
        out << "centers " << gram_size() << "\n";
        out << "quad_nodes " << gram_quad_.size() << "\n";
        out << "jitter " << jitter_ << "\n";
        const int k = gram_size();
        for (int i = 0; i < k; ++i) {
            for (int j = 0; j < k; ++j) out << gram_(i, j) << (j + 1 == k ? '\n' : ' ');
        }
    }

    /// Loads a Gram dump, rejecting any header mismatch with the live
    /// configuration. Refactors the Cholesky from scratch.
    void load_gram_cache(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw StateError("load_gram_cache: cannot open " + path);
        std::string magic;
        int version = 0;
        in >> magic >> version;
        if (magic != "gfd-gram-cache" || version != 1)
            throw StateError("load_gram_cache: not a gram cache file");
        double nu = 0, eta = 0, jit = 0;
        int order = -1, k = 0;
        std::size_t nodes = 0;
        std::string key;
        while (in >> key) {
            if (key == "nu") in >> nu;
            else if (key == "eta") in >> eta;
            else if (key == "sobolev_order") in >> order;
            else if (key == "centers") in >> k;
            else if (key == "quad_nodes") in >> nodes;
            else if (key == "jitter") { in >> jit; break; }
            else throw StateError("load_gram_cache: unexpected header key " + key);
        }
        auto mismatch = [&](const std::string& what) {
            throw StateError("load_gram_cache: header mismatch on " + what);
        };
        if (std::abs(nu - params_.nu) > 1e-12) mismatch("nu");
        if (std::abs(eta - params_.eta) > 1e-12) mismatch("eta");
        if (order != sobolev_order_) mismatch("sobolev_order");
        if (nodes != gram_quad_.size()) mismatch("quad_nodes");
        Eigen::MatrixXd g(k, k);
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (!(in >> g(i, j))) throw StateError("load_gram_cache: truncated matrix");
        centers(k);
        gram_.swap(g);
        jitter_ = jit;
        chol_.resize(0, 0);
        chol_size_ = 0;
    }

   private:
    MaternParams params_;
    BoxDomain domain_;
    int sobolev_order_;
    Quadrature gram_quad_;
    NodeTable table_;
    std::vector<std::vector<double>> centers_;
    Eigen::MatrixXd gram_;
    Eigen::MatrixXd chol_;
    int chol_size_ = 0;
    double jitter_ = 0.0;
};

}  // namespace gfd

#endif
