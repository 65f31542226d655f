#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lbpcert {

class SimplexError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Sense { le, ge, eq };

struct LinearConstraint {
    std::vector<double> coeffs;  // dense, one per variable
    Sense sense = Sense::le;
    double rhs = 0.0;
};

/// minimize c^T x  subject to constraints and x >= 0.
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<LinearConstraint> constraints;
    std::vector<double> objective;  // empty means pure feasibility
};

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
    LpStatus status = LpStatus::infeasible;
    std::vector<double> x;
    double objective = 0.0;
    /// Optimal phase-one value: total artificial mass left; 0 when feasible.
    double infeasibility = 0.0;
    std::size_t pivots = 0;
};

namespace detail {

class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), a_((rows + 1) * (cols + 1), 0.0) {}

    double& at(std::size_t r, std::size_t c) { return a_[r * (cols_ + 1) + c]; }
    double at(std::size_t r, std::size_t c) const { return a_[r * (cols_ + 1) + c]; }
    double& rhs(std::size_t r) { return at(r, cols_); }
    // The objective row is stored last: reduced costs and minus the objective value.
    double& cost(std::size_t c) { return at(rows_, c); }

    void pivot(std::size_t pr, std::size_t pc) {
        const double p = at(pr, pc);
        for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= p;
        for (std::size_t r = 0; r <= rows_; ++r) {
            if (r == pr) continue;
            const double f = at(r, pc);
            if (f == 0.0) continue;
            for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
            at(r, pc) = 0.0;
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> a_;
};

/// Bland's rule: lowest-index improving column, ties in the ratio test broken by
/// lowest basic variable index. Returns false when unbounded.
inline bool run_simplex(Tableau& t, std::vector<std::size_t>& basis, const std::vector<bool>& allowed, double eps,
                        std::size_t& pivots, std::size_t max_pivots) {
    for (;;) {
        std::size_t enter = t.cols();
        for (std::size_t c = 0; c < t.cols(); ++c)
            if (allowed[c] && t.cost(c) < -eps) {
                enter = c;
                break;
            }
        if (enter == t.cols()) return true;
        std::size_t leave = t.rows();
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t r = 0; r < t.rows(); ++r) {
            const double a = t.at(r, enter);
            if (a <= eps) continue;
            const double ratio = t.rhs(r) / a;
            if (ratio < best - eps || (ratio <= best + eps && leave < t.rows() && basis[r] < basis[leave])) {
                if (ratio < best) best = ratio;
                leave = r;
            }
        }
        if (leave == t.rows()) return false;
        t.pivot(leave, enter);
        basis[leave] = enter;
        if (++pivots > max_pivots) throw SimplexError("simplex: pivot limit exceeded (cycling guard)");
    }
}

}  // namespace detail

/// Dense two-phase primal simplex.
inline LpResult solve_lp(const LinearProgram& lp, double eps = 1e-9) {
    const std::size_t n = lp.num_vars, m = lp.constraints.size();
    std::size_t slack_count = 0, art_count = 0;
    for (const auto& row : lp.constraints) {
        if (row.coeffs.size() != n) throw std::invalid_argument("solve_lp: constraint width mismatch");
        if (row.sense != Sense::eq) ++slack_count;
        const bool flip = row.rhs < 0.0;
        const Sense s = flip ? (row.sense == Sense::le ? Sense::ge : row.sense == Sense::ge ? Sense::le : Sense::eq)
                             : row.sense;
        if (s != Sense::le) ++art_count;
    }
    const std::size_t cols = n + slack_count + art_count;
    const std::size_t art_begin = n + slack_count;
    detail::Tableau t(m, cols);
    std::vector<std::size_t> basis(m);
    std::size_t next_slack = n, next_art = art_begin;
    for (std::size_t r = 0; r < m; ++r) {
        const auto& row = lp.constraints[r];
        const double sign = row.rhs < 0.0 ? -1.0 : 1.0;
        Sense s = row.sense;
        if (sign < 0.0 && s != Sense::eq) s = s == Sense::le ? Sense::ge : Sense::le;
        for (std::size_t c = 0; c < n; ++c) t.at(r, c) = sign * row.coeffs[c];
        t.rhs(r) = sign * row.rhs;
        if (row.sense != Sense::eq) {
            t.at(r, next_slack) = s == Sense::le ? 1.0 : -1.0;
            if (s == Sense::le) basis[r] = next_slack;
            ++next_slack;
        }
        if (s != Sense::le) {
            t.at(r, next_art) = 1.0;
            basis[r] = next_art++;
        }
    }

    LpResult res;
    const std::size_t max_pivots = 1000 + 200 * (m + cols);
    std::vector<bool> allowed(cols, true);

    // Phase one: minimize the sum of artificials.
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] >= art_begin)
            for (std::size_t c = 0; c <= cols; ++c)
                if (c < art_begin || c == cols) t.cost(c) -= t.at(r, c);
    detail::run_simplex(t, basis, allowed, eps, res.pivots, max_pivots);
    res.infeasibility = std::max(0.0, -t.cost(cols));
    if (res.infeasibility > eps) {
        res.status = LpStatus::infeasible;
        return res;
    }
    // Drive remaining (zero-valued) artificials out of the basis where possible.
    for (std::size_t r = 0; r < m; ++r) {
        if (basis[r] < art_begin) continue;
        for (std::size_t c = 0; c < art_begin; ++c)
            if (std::abs(t.at(r, c)) > eps) {
                t.pivot(r, c);
                basis[r] = c;
                break;
            }
    }
    for (std::size_t c = art_begin; c < cols; ++c) allowed[c] = false;

    // Phase two on the original objective.
    for (std::size_t c = 0; c <= cols; ++c) t.cost(c) = 0.0;
    if (!lp.objective.empty()) {
        for (std::size_t c = 0; c < n; ++c) t.cost(c) = lp.objective[c];
        for (std::size_t r = 0; r < m; ++r) {
            const double cb = basis[r] < n ? lp.objective[basis[r]] : 0.0;
            if (cb == 0.0) continue;
            for (std::size_t c = 0; c <= cols; ++c) t.cost(c) -= cb * t.at(r, c);
        }
        if (!detail::run_simplex(t, basis, allowed, eps, res.pivots, max_pivots)) {
            res.status = LpStatus::unbounded;
            return res;
        }
    }
    res.status = LpStatus::optimal;
    res.x.assign(n, 0.0);
    for (std::size_t r = 0; r < m; ++r)
        if (basis[r] < n) res.x[basis[r]] = std::max(0.0, t.rhs(r));
    for (std::size_t c = 0; c < n && !lp.objective.empty(); ++c) res.objective += lp.objective[c] * res.x[c];
    return res;
}

}  // namespace lbpcert
