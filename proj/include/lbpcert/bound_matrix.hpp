#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lbpcert {

/// Sparse nonnegative square matrix in compressed-row form.
class BoundMatrix {
public:
    struct Entry {
        std::size_t row;
        std::size_t col;
        double value;
    };

    BoundMatrix() = default;

    /// Duplicate (row, col) pairs are summed; explicit zeros are dropped.
    BoundMatrix(std::size_t dim, std::vector<Entry> entries) : dim_(dim) {
        for (const auto& e : entries) {
            if (e.row >= dim || e.col >= dim) throw std::out_of_range("BoundMatrix: index out of range");
            if (!(e.value >= 0.0) || !std::isfinite(e.value))
                throw std::invalid_argument("BoundMatrix: entries must be finite and nonnegative");
        }
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return std::pair(a.row, a.col) < std::pair(b.row, b.col); });
        row_ptr_.assign(dim + 1, 0);
        for (const auto& e : entries) {
            if (e.value == 0.0) continue;
            if (!col_.empty() && last_row_ == e.row && col_.back() == e.col) {
                val_.back() += e.value;
                continue;
            }
            col_.push_back(e.col);
            val_.push_back(e.value);
            last_row_ = e.row;
            ++row_ptr_[e.row + 1];
        }
        for (std::size_t r = 0; r < dim; ++r) row_ptr_[r + 1] += row_ptr_[r];
    }

    std::size_t dim() const { return dim_; }
    std::size_t nnz() const { return val_.size(); }

    template <class F>
    void for_each_in_row(std::size_t r, F&& f) const {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) f(col_[k], val_[k]);
    }

    double at(std::size_t r, std::size_t c) const {
        for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k)
            if (col_[k] == c) return val_[k];
        return 0.0;
    }

    std::vector<Entry> entries() const {
        std::vector<Entry> out;
        for (std::size_t r = 0; r < dim_; ++r) for_each_in_row(r, [&](std::size_t c, double v) { out.push_back({r, c, v}); });
        return out;
    }

    /// y = A x
    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        y.assign(dim_, 0.0);
        for (std::size_t r = 0; r < dim_; ++r) {
            double s = 0.0;
            for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += val_[k] * x[col_[k]];
            y[r] = s;
        }
    }

    /// Maximum column sum.
    double norm1() const {
        std::vector<double> col(dim_, 0.0);
        for (std::size_t k = 0; k < val_.size(); ++k) col[col_[k]] += val_[k];
        return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
    }

    /// Maximum row sum.
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t r = 0; r < dim_; ++r) {
            double s = 0.0;
            for_each_in_row(r, [&](std::size_t, double v) { s += v; });
            best = std::max(best, s);
        }
        return best;
    }

    /// Strongly connected components of the sparsity pattern (iterative Tarjan).
    std::vector<std::vector<std::size_t>> components() const {
        const std::size_t none = static_cast<std::size_t>(-1);
        std::vector<std::size_t> index(dim_, none), low(dim_, 0);
        std::vector<bool> on_stack(dim_, false);
        std::vector<std::size_t> stack;
        std::vector<std::vector<std::size_t>> comps;
        std::size_t counter = 0;
        std::vector<std::pair<std::size_t, std::size_t>> work;  // (node, next edge slot)
        for (std::size_t root = 0; root < dim_; ++root) {
            if (index[root] != none) continue;
            work.push_back({root, row_ptr_[root]});
            index[root] = low[root] = counter++;
            stack.push_back(root);
            on_stack[root] = true;
            while (!work.empty()) {
                auto& [v, k] = work.back();
                if (k < row_ptr_[v + 1]) {
                    const std::size_t w = col_[k++];
                    if (index[w] == none) {
                        index[w] = low[w] = counter++;
                        stack.push_back(w);
                        on_stack[w] = true;
                        work.push_back({w, row_ptr_[w]});
                    } else if (on_stack[w]) {
                        low[v] = std::min(low[v], index[w]);
                    }
                    continue;
                }
                const std::size_t done = v;
                work.pop_back();
                if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
                if (low[done] == index[done]) {
                    comps.emplace_back();
                    std::size_t w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        on_stack[w] = false;
                        comps.back().push_back(w);
                    } while (w != done);
                }
            }
        }
        return comps;
    }

    /// Principal submatrix on `nodes` (reindexed in the given order).
    BoundMatrix restrict_to(const std::vector<std::size_t>& nodes) const {
        const std::size_t none = static_cast<std::size_t>(-1);
        std::vector<std::size_t> local(dim_, none);
        for (std::size_t k = 0; k < nodes.size(); ++k) local[nodes[k]] = k;
        std::vector<Entry> sub;
        for (std::size_t k = 0; k < nodes.size(); ++k)
            for_each_in_row(nodes[k], [&](std::size_t c, double v) {
                if (local[c] != none) sub.push_back({k, local[c], v});
            });
        return BoundMatrix(nodes.size(), std::move(sub));
    }

private:
    std::size_t dim_ = 0;
    std::size_t last_row_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_;
    std::vector<double> val_;
};

struct SpectralOptions {
    double tol = 1e-9;
    std::size_t max_iters = 100000;
};

struct SpectralEstimate {
    double value = 0.0;
    /// Certified bracket: lower <= rho(A) <= upper.
    double lower = 0.0;
    double upper = 0.0;
    std::size_t iterations = 0;
    /// False when the iteration cap was hit; value is then the conservative upper end of the bracket.
    bool converged = true;
};

/// Perron root of a nonnegative matrix.
///
/// The matrix is split into strongly connected components; rho(A) is the largest
/// component radius, and components without a cycle contribute zero (so nilpotent
/// matrices give exactly 0). Each irreducible block B is iterated as B + sI with a
/// positive start vector. Since B >= 0, rho(B + sI) = rho(B) + s, the shift makes
/// the iteration aperiodic, and the Collatz-Wielandt ratios
/// min_i (Mx)_i / x_i <= rho(M) <= max_i (Mx)_i / x_i bracket the root at every
/// step. Iteration stops when the bracket is narrower than tol.
inline SpectralEstimate spectral_radius_estimate(const BoundMatrix& A, const SpectralOptions& opts = {}) {
    SpectralEstimate out;
    for (const auto& comp : A.components()) {
        if (comp.size() == 1 && A.at(comp[0], comp[0]) == 0.0) continue;
        const BoundMatrix B = A.restrict_to(comp);
        const double bound = std::min(B.norm1(), B.norm_inf());
        if (bound <= out.lower) {
            // cannot raise the maximum
            out.upper = std::max(out.upper, bound);
            continue;
        }
        const double shift = bound;
        std::vector<double> x(B.dim(), 1.0), y;
        double lo = 0.0, hi = bound;
        bool done = false;
        std::size_t it = 0;
        for (; it < opts.max_iters; ++it) {
            B.multiply(x, y);
            double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0, norm = 0.0;
            for (std::size_t k = 0; k < y.size(); ++k) {
                y[k] += shift * x[k];
                const double ratio = y[k] / x[k];
                rmin = std::min(rmin, ratio);
                rmax = std::max(rmax, ratio);
                norm = std::max(norm, y[k]);
            }
            lo = std::max(lo, rmin - shift);
            hi = std::min(hi, rmax - shift);
            for (std::size_t k = 0; k < y.size(); ++k) x[k] = y[k] / norm;
            if (hi - lo < opts.tol) {
                done = true;
                ++it;
                break;
            }
        }
        out.iterations += it;
        if (!done) out.converged = false;
        out.lower = std::max(out.lower, lo);
        out.upper = std::max(out.upper, hi);
    }
    out.upper = std::max(out.upper, out.lower);
    if (out.converged) {
        out.value = 0.5 * (out.lower + out.upper);
    } else {
        // the Collatz-Wielandt upper end is still a valid bound, usually far below the norms
        out.upper = std::min({out.upper, A.norm1(), A.norm_inf()});
        out.value = out.upper;
    }
    return out;
}

inline double spectral_radius(const BoundMatrix& A, double tol = 1e-9) {
    return spectral_radius_estimate(A, {tol, 100000}).value;
}

}  // namespace lbpcert
