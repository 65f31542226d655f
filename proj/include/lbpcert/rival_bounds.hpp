#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lbpcert/bp.hpp"
#include "lbpcert/certificate.hpp"
#include "lbpcert/factor_graph.hpp"
#include "lbpcert/simplex.hpp"
#include "lbpcert/strength.hpp"

namespace lbpcert {

struct DobrushinOptions {
    /// Largest number of joint states of ∂i \ j enumerated per entry.
    std::size_t max_states = std::size_t{1} << 16;
    /// Use column sums max_j Σ_i C_ij instead of row sums.
    bool transposed = false;
};

namespace detail {

inline void require_pairwise(const FactorGraph& fg, const char* who) {
    for (const Factor& f : fg.factors())
        if (f.arity() > 2) throw ModelError(std::string(who) + ": factor scopes must have at most two variables");
}

inline void require_positive(const FactorGraph& fg, const char* who) {
    for (FactorId f = 0; f < fg.num_factors(); ++f)
        for (double x : fg.factor(f).table)
            if (!(x > 0.0)) throw ModelError(std::string(who) + ": factor " + std::to_string(f) + " has a zero entry");
}

}  // namespace detail

/// Dense num_vars x num_vars interdependence matrix of a pairwise model, by
/// enumerating the conditionals P(x_i | x_∂i).
inline DenseMatrix dobrushin_matrix(const FactorGraph& fg, const DobrushinOptions& opts = {}) {
    detail::require_pairwise(fg, "dobrushin_matrix");
    detail::require_positive(fg, "dobrushin_matrix");
    const std::size_t n = fg.num_vars();
    DenseMatrix C(n, n);
    for (VarId i = 0; i < n; ++i) {
        const auto nb = fg.neighbors(i);
        const std::size_t ci = fg.cardinality(i);
        // log of the single-variable part
        std::vector<double> base(ci, 0.0);
        for (FactorId f : fg.factors_of(i))
            if (fg.factor(f).arity() == 1)
                for (std::size_t a = 0; a < ci; ++a) base[a] += std::log(fg.factor(f).table[a]);
        for (VarId j : nb) {
            std::vector<VarId> rest;
            std::vector<std::size_t> radix;
            for (VarId k : nb)
                if (k != j) {
                    rest.push_back(k);
                    radix.push_back(fg.cardinality(k));
                }
            StateIndexer rix(radix);
            if (rix.total() > opts.max_states)
                throw EnumerationCapError("dobrushin_matrix: neighborhood of variable " + std::to_string(i) + " too large",
                                          rix.total());
            const std::size_t cj = fg.cardinality(j);
            std::vector<VarId> vars = rest;
            vars.push_back(j);
            std::vector<std::vector<double>> cond(cj, std::vector<double>(ci));
            std::vector<std::size_t> state(vars.size());
            double best = 0.0;
            for (std::size_t r = 0; r < rix.total(); ++r) {
                for (std::size_t p = 0; p < rest.size(); ++p) state[p] = rix.digit(r, p);
                for (std::size_t b = 0; b < cj; ++b) {
                    state.back() = b;
                    auto& lg = cond[b];
                    lg = base;
                    for (FactorId f : fg.factors_of(i)) {
                        const Factor& fac = fg.factor(f);
                        if (fac.arity() != 2) continue;
                        const std::size_t pi = fac.position(i), po = 1 - pi;
                        const VarId other = fac.scope[po];
                        const std::size_t so = state[std::find(vars.begin(), vars.end(), other) - vars.begin()];
                        const StateIndexer& ix = fg.indexer(f);
                        for (std::size_t a = 0; a < ci; ++a)
                            lg[a] += std::log(fac.table[a * ix.stride(pi) + so * ix.stride(po)]);
                    }
                    detail::normalize_log(lg);
                }
                for (std::size_t b = 0; b < cj; ++b)
                    for (std::size_t b2 = b + 1; b2 < cj; ++b2) {
                        double tv = 0.0;
                        for (std::size_t a = 0; a < ci; ++a) tv += std::abs(cond[b][a] - cond[b2][a]);
                        best = std::max(best, 0.5 * tv);
                    }
            }
            C(i, j) = best;
        }
    }
    return C;
}

/// Binary closed form C_ij = ½[tanh(|J_ij| - H_ij) + tanh(|J_ij| + H_ij)],
/// H_ij = min over x_{∂i\j} of |θ_i + Σ_k x_k J_ik|.
inline DenseMatrix dobrushin_matrix(const BinaryPairwiseModel& model, const DobrushinOptions& opts = {}) {
    const std::size_t n = model.num_vars();
    DenseMatrix C(n, n);
    for (VarId i = 0; i < n; ++i) {
        const auto in = model.in_edges(i);
        for (std::size_t e : in) {
            const VarId j = model.source(e);
            std::vector<double> others;
            for (std::size_t e2 : in)
                if (e2 != e) others.push_back(model.edge_coupling(e2));
            if (others.size() >= 63 || (std::size_t{1} << others.size()) > opts.max_states)
                throw EnumerationCapError("dobrushin_matrix: neighborhood of variable " + std::to_string(i) + " too large",
                                          others.size() >= 63 ? std::numeric_limits<std::size_t>::max()
                                                              : std::size_t{1} << others.size());
            double H = std::numeric_limits<double>::infinity();
            for (std::size_t s = 0; s < (std::size_t{1} << others.size()); ++s) {
                double h = model.field(i);
                for (std::size_t k = 0; k < others.size(); ++k) h += ((s >> k) & 1 ? -1.0 : 1.0) * others[k];
                H = std::min(H, std::abs(h));
            }
            const double a = std::abs(model.edge_coupling(e));
            C(i, j) = 0.5 * (std::tanh(a - H) + std::tanh(a + H));
        }
    }
    return C;
}

inline Certificate dobrushin_from_matrix(const DenseMatrix& C, bool transposed = false) {
    Certificate c;
    c.name = "dobrushin";
    for (std::size_t i = 0; i < C.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < C.cols; ++j) s += transposed ? C(j, i) : C(i, j);
        c.value = std::max(c.value, s);
    }
    if (transposed) c.detail.push_back("column sums");
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

inline Certificate dobrushin_condition(const FactorGraph& fg, const DobrushinOptions& opts = {}) {
    return dobrushin_from_matrix(dobrushin_matrix(fg, opts), opts.transposed);
}

inline Certificate dobrushin_condition(const BinaryPairwiseModel& model, const DobrushinOptions& opts = {}) {
    return dobrushin_from_matrix(dobrushin_matrix(model, opts), opts.transposed);
}

/// max_i Σ_{j∈∂i} simon_strength(ψ_ij); a zero entry makes the value +inf.
inline Certificate simon_condition(const FactorGraph& fg) {
    detail::require_pairwise(fg, "simon_condition");
    std::vector<double> site(fg.num_vars(), 0.0);
    for (const Factor& f : fg.factors()) {
        if (f.arity() != 2) continue;
        const double s = simon_strength(f.table);
        site[f.scope[0]] += s;
        site[f.scope[1]] += s;
    }
    Certificate c;
    c.name = "simon";
    for (double s : site) c.value = std::max(c.value, s);
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

inline Certificate simon_condition(const BinaryPairwiseModel& model) {
    std::vector<double> site(model.num_vars(), 0.0);
    for (const auto& cp : model.couplings()) {
        site[cp.i] += std::abs(cp.J);
        site[cp.j] += std::abs(cp.J);
    }
    Certificate c;
    c.name = "simon";
    for (double s : site) c.value = std::max(c.value, s);
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

/// Allocation LP over X_{Ii} (one per factor/member pair, factor-major) and t_I.
struct AllocationLP {
    LinearProgram lp;
    /// Column of X_{Ii}: x_col[f][pos].
    std::vector<std::vector<std::size_t>> x_col;
    std::vector<double> sigma;
};

inline AllocationLP build_allocation_lp(const FactorGraph& fg, const std::vector<double>& sigma) {
    AllocationLP a;
    a.sigma = sigma;
    std::size_t cols = 0;
    a.x_col.resize(fg.num_factors());
    for (FactorId f = 0; f < fg.num_factors(); ++f)
        for (std::size_t p = 0; p < fg.factor(f).arity(); ++p) a.x_col[f].push_back(cols++);
    const std::size_t t_begin = cols;
    cols += fg.num_factors();
    a.lp.num_vars = cols;
    auto row = [&] { return LinearConstraint{std::vector<double>(cols, 0.0), Sense::le, 0.0}; };
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        for (std::size_t col : a.x_col[f]) {
            // t_I >= X_{Ii}
            auto r = row();
            r.coeffs[col] = 1.0;
            r.coeffs[t_begin + f] = -1.0;
            a.lp.constraints.push_back(std::move(r));
        }
        auto r = row();
        r.coeffs[t_begin + f] = 1.0 - sigma[f];
        for (std::size_t col : a.x_col[f]) r.coeffs[col] = sigma[f];
        r.rhs = 1.0;
        a.lp.constraints.push_back(std::move(r));
    }
    for (VarId v = 0; v < fg.num_vars(); ++v) {
        auto r = row();
        r.sense = Sense::ge;
        const auto fs = fg.factors_of(v);
        for (FactorId f : fs) r.coeffs[a.x_col[f][fg.factor(f).position(v)]] = 1.0;
        r.rhs = static_cast<double>(fs.size()) - 1.0;
        a.lp.constraints.push_back(std::move(r));
    }
    return a;
}

struct HeskesResult {
    Certificate certificate;
    /// Feasible allocation X[f][pos] when the condition holds.
    std::vector<std::vector<double>> allocation;
};

/// Feasibility of the allocation-matrix conditions; value is the phase-one residual.
inline HeskesResult heskes_condition_detailed(const FactorGraph& fg, const StrengthOptions& opts = {}) {
    HeskesResult out;
    Certificate& c = out.certificate;
    c.name = "heskes";
    std::vector<double> sigma(fg.num_factors());
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const auto hs = heskes_sigma(fg, f, opts);
        sigma[f] = hs.sigma;
        if (hs.infinite)
            c.detail.push_back("factor " + std::to_string(f) + " has zeros; sigma set to 1 outside the positive setting");
    }
    const AllocationLP a = build_allocation_lp(fg, sigma);
    const LpResult res = solve_lp(a.lp, 1e-9);
    c.value = res.infeasibility;
    c.holds = res.status == LpStatus::optimal;
    c.rate = std::numeric_limits<double>::quiet_NaN();
    if (c.holds) {
        out.allocation.resize(fg.num_factors());
        for (FactorId f = 0; f < fg.num_factors(); ++f)
            for (std::size_t col : a.x_col[f]) out.allocation[f].push_back(res.x[col]);
    }
    return out;
}

inline Certificate heskes_condition(const FactorGraph& fg, const StrengthOptions& opts = {}) {
    return heskes_condition_detailed(fg, opts).certificate;
}

inline Certificate heskes_condition(const BinaryPairwiseModel& model, const StrengthOptions& opts = {}) {
    return heskes_condition(from_ising(model), opts);
}

}  // namespace lbpcert
