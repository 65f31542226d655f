#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lbpcert/factor_graph.hpp"

namespace lbpcert {

struct StrengthOptions {
    /// Factors with more joint states than this are refused.
    std::size_t max_joint_states = std::size_t{1} << 20;
    /// Cap on the number of (x, x') state pairs enumerated for Heskes' omega.
    std::size_t max_state_pairs = std::size_t{1} << 24;
};

class EnumerationCapError : public std::runtime_error {
public:
    EnumerationCapError(const std::string& what, std::size_t required)
        : std::runtime_error(what + " (requires " + std::to_string(required) + ")"), required_(required) {}
    std::size_t required() const { return required_; }

private:
    std::size_t required_;
};

namespace detail {

/// Bases of all joint states whose digits at positions pi and pj are zero.
inline std::vector<std::size_t> rest_bases(const StateIndexer& ix, std::size_t pi, std::size_t pj) {
    std::vector<std::size_t> bases;
    for (std::size_t s = 0; s < ix.total(); ++s)
        if (ix.digit(s, pi) == 0 && ix.digit(s, pj) == 0) bases.push_back(s);
    return bases;
}

inline double strength_at(std::span<const double> table, const StateIndexer& ix, std::size_t pi, std::size_t pj) {
    const std::size_t si = ix.stride(pi), sj = ix.stride(pj);
    const std::size_t ni = ix.radix(pi), nj = ix.radix(pj);
    const auto gammas = rest_bases(ix, pi, pj);
    double best = 0.0;
    for (std::size_t a = 0; a < ni; ++a)
        for (std::size_t a2 = a + 1; a2 < ni; ++a2)
            for (std::size_t b = 0; b < nj; ++b)
                for (std::size_t b2 = b + 1; b2 < nj; ++b2)
                    for (std::size_t g : gammas)
                        for (std::size_t g2 : gammas) {
                            // sqrt(psi[a b g] psi[a' b' g']) vs sqrt(psi[a' b g] psi[a b' g'])
                            const double p = std::sqrt(table[g + a * si + b * sj] * table[g2 + a2 * si + b2 * sj]);
                            const double q = std::sqrt(table[g + a2 * si + b * sj] * table[g2 + a * si + b2 * sj]);
                            const double den = p + q;
                            if (den > 0.0) best = std::max(best, std::abs(p - q) / den);
                        }
    return best;
}

}  // namespace detail

/// Potential strength N(psi, i, j) in its square-root form, which is also
/// defined for tables with zeros. Lies in [0,1]; symmetric in (i,j) for pair
/// factors only, since the rest variables are paired with j's states.
inline double potential_strength(const FactorGraph& fg, FactorId f, VarId i, VarId j,
                                 const StrengthOptions& opts = {}) {
    const Factor& fac = fg.factor(f);
    if (i == j) throw std::invalid_argument("potential_strength: i and j must differ");
    const std::size_t pi = fac.position(i), pj = fac.position(j);
    if (pi >= fac.arity() || pj >= fac.arity())
        throw std::invalid_argument("potential_strength: variable not in factor scope");
    if (fac.size() > opts.max_joint_states)
        throw EnumerationCapError("potential_strength: factor " + std::to_string(f) + " is too large", fac.size());
    return detail::strength_at(fac.table, fg.indexer(f), pi, pj);
}

/// N for a pair table laid out as a rows x cols matrix (row variable first).
inline double pair_potential_strength(std::span<const double> table, std::size_t rows, std::size_t cols) {
    if (table.size() != rows * cols) throw std::invalid_argument("pair table size mismatch");
    return detail::strength_at(table, StateIndexer({rows, cols}), 0, 1);
}

namespace detail {
inline std::pair<double, double> table_range(std::span<const double> table) {
    auto [lo, hi] = std::minmax_element(table.begin(), table.end());
    return {*lo, *hi};
}
}  // namespace detail

/// Simon's strength: half the log of the largest entry ratio. +inf for tables with zeros.
inline double simon_strength(std::span<const double> table) {
    auto [lo, hi] = detail::table_range(table);
    if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
    return 0.5 * std::log(hi / lo);
}

/// Ihler's measure D = tanh(simon_strength); requires strictly positive entries.
inline double ihler_strength(std::span<const double> table) {
    auto [lo, hi] = detail::table_range(table);
    if (!(lo > 0.0)) throw ModelError("ihler_strength: table has a zero entry");
    return std::tanh(0.5 * std::log(hi / lo));
}

struct HeskesStrength {
    double omega = 0.0;
    double sigma = 0.0;
    /// True when zeros made omega infinite; sigma is then 1.
    bool infinite = false;
};

/// omega_I = sup_{x,x'} [log psi(x) + (|I|-1) log psi(x') - sum_i log psi(x'_{I\i}, x_i)],
/// sigma_I = 1 - exp(-omega_I), by exhaustive enumeration of state pairs.
inline HeskesStrength heskes_sigma(const Factor& fac, const StateIndexer& ix, const StrengthOptions& opts = {}) {
    const std::size_t n = fac.size();
    if (n > 0 && n > opts.max_state_pairs / n)
        throw EnumerationCapError("heskes_sigma: too many state pairs", n * n);
    const std::size_t k = fac.arity();
    HeskesStrength out;
    if (k == 1) return out;
    std::vector<double> lg(n);
    for (std::size_t s = 0; s < n; ++s)
        lg[s] = fac.table[s] > 0.0 ? std::log(fac.table[s]) : -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < n; ++x) {
        if (std::isinf(lg[x])) continue;
        for (std::size_t y = 0; y < n; ++y) {
            if (std::isinf(lg[y])) continue;
            double v = lg[x] + static_cast<double>(k - 1) * lg[y];
            for (std::size_t p = 0; p < k; ++p) {
                const std::size_t mixed = y - ix.digit(y, p) * ix.stride(p) + ix.digit(x, p) * ix.stride(p);
                v -= lg[mixed];
            }
            best = std::max(best, v);
        }
    }
    if (std::isinf(best) && best > 0) {
        out.omega = best;
        out.sigma = 1.0;
        out.infinite = true;
    } else {
        out.omega = std::max(best, 0.0);
        out.sigma = 1.0 - std::exp(-out.omega);
    }
    return out;
}

inline HeskesStrength heskes_sigma(const FactorGraph& fg, FactorId f, const StrengthOptions& opts = {}) {
    return heskes_sigma(fg.factor(f), fg.indexer(f), opts);
}

// ---------------------------------------------------------------------------
// Closed-form supremum of the cavity objective g(h) over the probability simplex.
// ---------------------------------------------------------------------------

struct SupremumCheck {
    double bruteforce = 0.0;
    double closedform = 0.0;
};

/// g(h) = sum_b | sum_c h_bc (psi_bc / <psi,h> - 1) |  for a rows x cols matrix psi.
inline double cavity_objective(std::span<const double> psi, std::span<const double> h, std::size_t rows,
                               std::size_t cols) {
    double mean = 0.0;
    for (std::size_t k = 0; k < psi.size(); ++k) mean += psi[k] * h[k];
    double g = 0.0;
    for (std::size_t b = 0; b < rows; ++b) {
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) s += h[b * cols + c] * (psi[b * cols + c] / mean - 1.0);
        g += std::abs(s);
    }
    return g;
}

inline double cavity_supremum_closed_form(std::span<const double> psi, std::size_t rows, std::size_t cols) {
    double best = 0.0;
    for (std::size_t b = 0; b < rows; ++b)
        for (std::size_t b2 = 0; b2 < rows; ++b2) {
            if (b == b2) continue;
            for (std::size_t c = 0; c < cols; ++c)
                for (std::size_t c2 = 0; c2 < cols; ++c2)
                    best = std::max(best, std::tanh(0.25 * std::log(psi[b * cols + c] / psi[b2 * cols + c2])));
        }
    return 2.0 * best;
}

/// Maximizes g over all h with exactly two non-zero components (each pair by a
/// grid scan refined with golden-section search to 1e-8 in the mixing weight)
/// and reports it next to the closed form.
inline SupremumCheck cavity_supremum_oracle(std::span<const double> psi, std::size_t rows, std::size_t cols) {
    if (psi.size() != rows * cols || psi.empty()) throw std::invalid_argument("cavity_supremum_oracle: bad shape");
    for (double x : psi)
        if (!(x > 0.0) || !std::isfinite(x)) throw ModelError("cavity_supremum_oracle: entries must be positive");
    SupremumCheck out;
    out.closedform = cavity_supremum_closed_form(psi, rows, cols);
    std::vector<double> h(psi.size(), 0.0);
    for (std::size_t p = 0; p < psi.size(); ++p)
        for (std::size_t q = p + 1; q < psi.size(); ++q) {
            auto eval = [&](double w) {
                h[p] = w;
                h[q] = 1.0 - w;
                const double g = cavity_objective(psi, h, rows, cols);
                h[p] = h[q] = 0.0;
                return g;
            };
            constexpr int grid = 64;
            int arg = 1;
            double gbest = -1.0;
            for (int k = 1; k < grid; ++k) {
                const double g = eval(static_cast<double>(k) / grid);
                if (g > gbest) {
                    gbest = g;
                    arg = k;
                }
            }
            double lo = static_cast<double>(arg - 1) / grid, hi = static_cast<double>(arg + 1) / grid;
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
            double f1 = eval(x1), f2 = eval(x2);
            while (hi - lo > 1e-8) {
                if (f1 < f2) {
                    lo = x1;
                    x1 = x2;
                    f1 = f2;
                    x2 = lo + phi * (hi - lo);
                    f2 = eval(x2);
                } else {
                    hi = x2;
                    x2 = x1;
                    f2 = f1;
                    x1 = hi - phi * (hi - lo);
                    f1 = eval(x1);
                }
            }
            out.bruteforce = std::max({out.bruteforce, gbest, f1, f2});
        }
    return out;
}

}  // namespace lbpcert
