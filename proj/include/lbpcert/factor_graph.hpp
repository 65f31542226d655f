#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lbpcert {

using VarId = std::size_t;
using FactorId = std::size_t;

/// Raised when a model violates a structural or numerical invariant.
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A nonnegative table over the joint states of an ordered scope.
/// Row-major with the last scope variable varying fastest.
struct Factor {
    std::vector<VarId> scope;
    std::vector<double> table;

    std::size_t size() const { return table.size(); }
    std::size_t arity() const { return scope.size(); }

    /// Position of `v` in the scope, or scope.size() when absent.
    std::size_t position(VarId v) const {
        return static_cast<std::size_t>(std::find(scope.begin(), scope.end(), v) - scope.begin());
    }
    bool contains(VarId v) const { return position(v) < scope.size(); }
};

/// Mixed-radix decoding of joint factor states.
class StateIndexer {
public:
    StateIndexer() = default;
    explicit StateIndexer(std::vector<std::size_t> radices) : radix_(std::move(radices)) {
        stride_.assign(radix_.size(), 1);
        total_ = 1;
        for (std::size_t p = radix_.size(); p-- > 0;) {
            stride_[p] = total_;
            total_ *= radix_[p];
        }
    }

    std::size_t total() const { return total_; }
    std::size_t stride(std::size_t pos) const { return stride_[pos]; }
    std::size_t radix(std::size_t pos) const { return radix_[pos]; }
    std::size_t digit(std::size_t index, std::size_t pos) const { return (index / stride_[pos]) % radix_[pos]; }

private:
    std::vector<std::size_t> radix_;
    std::vector<std::size_t> stride_;
    std::size_t total_ = 1;
};

/// Factor→variable edge (I,i) for a factor with at least two variables.
struct DirectedEdge {
    FactorId factor;
    std::size_t pos;  // position of the target variable inside the factor scope
    VarId var;
};

/// Discrete factor graph. Immutable once constructed; the constructor validates
/// every invariant and precomputes adjacency and the directed-edge enumeration.
class FactorGraph {
public:
    FactorGraph() = default;

    FactorGraph(std::vector<std::size_t> cardinalities, std::vector<Factor> factors)
        : card_(std::move(cardinalities)), factors_(std::move(factors)) {
        validate();
        index();
    }

    std::size_t num_vars() const { return card_.size(); }
    std::size_t num_factors() const { return factors_.size(); }
    std::size_t cardinality(VarId v) const { return card_[v]; }
    const std::vector<std::size_t>& cardinalities() const { return card_; }
    const Factor& factor(FactorId f) const { return factors_[f]; }
    const std::vector<Factor>& factors() const { return factors_; }
    const StateIndexer& indexer(FactorId f) const { return indexers_[f]; }

    /// Factors containing variable v, in factor order.
    std::span<const FactorId> factors_of(VarId v) const { return var_factors_[v]; }

    /// Directed edges (I,i) with |I| >= 2, ordered by factor then scope position.
    const std::vector<DirectedEdge>& edges() const { return edges_; }
    std::size_t num_edges() const { return edges_.size(); }

    /// Ordinal of (I, scope position), or npos for single-variable factors.
    std::size_t edge_index(FactorId f, std::size_t pos) const { return edge_of_[f][pos]; }

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    /// Variables sharing at least one factor with v (excluding v), sorted.
    std::vector<VarId> neighbors(VarId v) const {
        std::vector<VarId> out;
        for (FactorId f : var_factors_[v])
            for (VarId u : factors_[f].scope)
                if (u != v) out.push_back(u);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    bool operator==(const FactorGraph& other) const {
        if (card_ != other.card_ || factors_.size() != other.factors_.size()) return false;
        for (std::size_t f = 0; f < factors_.size(); ++f)
            if (factors_[f].scope != other.factors_[f].scope || factors_[f].table != other.factors_[f].table)
                return false;
        return true;
    }

private:
    void validate() const {
        for (std::size_t v = 0; v < card_.size(); ++v)
            if (card_[v] == 0) throw ModelError("variable " + std::to_string(v) + " has zero cardinality");
        for (std::size_t f = 0; f < factors_.size(); ++f) {
            const Factor& fac = factors_[f];
            const std::string tag = "factor " + std::to_string(f) + ": ";
            if (fac.scope.empty()) throw ModelError(tag + "empty scope");
            std::size_t expected = 1;
            for (std::size_t p = 0; p < fac.scope.size(); ++p) {
                VarId v = fac.scope[p];
                if (v >= card_.size()) throw ModelError(tag + "variable id " + std::to_string(v) + " out of range");
                for (std::size_t q = 0; q < p; ++q)
                    if (fac.scope[q] == v) throw ModelError(tag + "repeated variable " + std::to_string(v) + " in scope");
                expected *= card_[v];
            }
            if (fac.table.size() != expected)
                throw ModelError(tag + "table has " + std::to_string(fac.table.size()) + " entries, scope requires " +
                                 std::to_string(expected));
            bool positive = false;
            for (double x : fac.table) {
                if (!std::isfinite(x)) throw ModelError(tag + "non-finite table entry");
                if (x < 0.0) throw ModelError(tag + "negative table entry");
                positive = positive || x > 0.0;
            }
            if (!positive) throw ModelError(tag + "table has no strictly positive entry");
        }
    }

    void index() {
        var_factors_.assign(card_.size(), {});
        indexers_.clear();
        edge_of_.clear();
        edges_.clear();
        for (FactorId f = 0; f < factors_.size(); ++f) {
            const Factor& fac = factors_[f];
            std::vector<std::size_t> radices;
            for (VarId v : fac.scope) {
                radices.push_back(card_[v]);
                var_factors_[v].push_back(f);
            }
            indexers_.emplace_back(std::move(radices));
            edge_of_.emplace_back(fac.scope.size(), npos);
            if (fac.scope.size() < 2) continue;
            for (std::size_t p = 0; p < fac.scope.size(); ++p) {
                edge_of_[f][p] = edges_.size();
                edges_.push_back({f, p, fac.scope[p]});
            }
        }
    }

    std::vector<std::size_t> card_;
    std::vector<Factor> factors_;
    std::vector<StateIndexer> indexers_;
    std::vector<std::vector<FactorId>> var_factors_;
    std::vector<std::vector<std::size_t>> edge_of_;
    std::vector<DirectedEdge> edges_;
};

/// Per-factor outcome of the zero-support check.
struct ZeroSupportReport {
    struct Entry {
        FactorId factor;
        bool ok;
        std::string reason;  // empty when ok
    };
    std::vector<Entry> factors;

    bool ok() const {
        return std::all_of(factors.begin(), factors.end(), [](const Entry& e) { return e.ok; });
    }
    std::string first_failure() const {
        for (const auto& e : factors)
            if (!e.ok) return "factor " + std::to_string(e.factor) + ": " + e.reason;
        return {};
    }
};

/// Multi-variable factors must give every state of every member variable a
/// positive completion; single-variable factors must be strictly positive.
/// Under these conditions positive messages stay positive under the update.
inline ZeroSupportReport check_zero_support(const FactorGraph& fg) {
    ZeroSupportReport report;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        const StateIndexer& ix = fg.indexer(f);
        ZeroSupportReport::Entry entry{f, true, {}};
        if (fac.arity() == 1) {
            for (std::size_t s = 0; s < fac.size(); ++s)
                if (!(fac.table[s] > 0.0)) {
                    entry.ok = false;
                    entry.reason = "single-variable factor has a zero entry at state " + std::to_string(s);
                    break;
                }
        } else {
            for (std::size_t p = 0; p < fac.arity() && entry.ok; ++p) {
                std::vector<bool> supported(ix.radix(p), false);
                for (std::size_t s = 0; s < fac.size(); ++s)
                    if (fac.table[s] > 0.0) supported[ix.digit(s, p)] = true;
                for (std::size_t a = 0; a < supported.size(); ++a)
                    if (!supported[a]) {
                        entry.ok = false;
                        entry.reason = "variable " + std::to_string(fac.scope[p]) + " state " + std::to_string(a) +
                                       " has no positive completion";
                        break;
                    }
            }
        }
        report.factors.push_back(std::move(entry));
    }
    return report;
}

/// States of each variable that every single-variable factor over it allows.
inline std::vector<std::vector<std::size_t>> surviving_states(const FactorGraph& fg) {
    std::vector<std::vector<std::size_t>> keep(fg.num_vars());
    for (VarId v = 0; v < fg.num_vars(); ++v)
        for (std::size_t a = 0; a < fg.cardinality(v); ++a) {
            bool ok = true;
            for (FactorId f : fg.factors_of(v))
                if (fg.factor(f).arity() == 1 && !(fg.factor(f).table[a] > 0.0)) ok = false;
            if (ok) keep[v].push_back(a);
        }
    return keep;
}

/// Removes the states that single-variable factors rule out (zero entries) and
/// restricts every table to the remaining states. The distribution on its
/// support is unchanged, single-variable factors become strictly positive, and
/// multi-variable factors lose the rows that only the removed states could
/// complete. Throws ModelError if a variable has no state left.
inline FactorGraph absorb_zero_singletons(const FactorGraph& fg) {
    const auto keep = surviving_states(fg);
    std::vector<std::size_t> cards(fg.num_vars());
    for (VarId v = 0; v < fg.num_vars(); ++v) {
        if (keep[v].empty()) throw ModelError("variable " + std::to_string(v) + " has no state with positive weight");
        cards[v] = keep[v].size();
    }
    std::vector<Factor> out;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        const StateIndexer& old_ix = fg.indexer(f);
        std::vector<std::size_t> radix;
        for (VarId v : fac.scope) radix.push_back(cards[v]);
        const StateIndexer ix(radix);
        Factor g{fac.scope, std::vector<double>(ix.total())};
        for (std::size_t s = 0; s < ix.total(); ++s) {
            std::size_t old = 0;
            for (std::size_t p = 0; p < fac.arity(); ++p) old += keep[fac.scope[p]][ix.digit(s, p)] * old_ix.stride(p);
            g.table[s] = fac.table[old];
        }
        out.push_back(std::move(g));
    }
    return FactorGraph(std::move(cards), std::move(out));
}

/// True when the bipartite variable/factor graph contains no cycle.
inline bool is_acyclic(const FactorGraph& fg) {
    const std::size_t n = fg.num_vars() + fg.num_factors();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        for (VarId v : fg.factor(f).scope) {
            std::size_t a = find(v), b = find(fg.num_vars() + f);
            if (a == b) return false;
            parent[a] = b;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// Binary pairwise (Ising) models
// ---------------------------------------------------------------------------

struct Coupling {
    VarId i;
    VarId j;  // i < j
    double J;
};

/// Binary spins with pairwise couplings J_ij and local fields theta_i:
///   p(x) ∝ exp(sum_{ij} J_ij x_i x_j + sum_i theta_i x_i),  x ∈ {+1,-1}.
/// Table index 0 is spin +1 and index 1 is spin -1.
///
/// Coupling c = (i,j) generates directed edges 2c = (i→j) and 2c+1 = (j→i).
class BinaryPairwiseModel {
public:
    BinaryPairwiseModel() = default;

    BinaryPairwiseModel(std::size_t num_vars, std::vector<Coupling> couplings, std::vector<double> fields)
        : n_(num_vars), couplings_(std::move(couplings)), fields_(std::move(fields)) {
        if (fields_.empty()) fields_.assign(n_, 0.0);
        if (fields_.size() != n_) throw ModelError("field vector length does not match num_vars");
        for (double t : fields_)
            if (!std::isfinite(t)) throw ModelError("non-finite local field");
        for (auto& c : couplings_) {
            if (c.i == c.j) throw ModelError("self-coupling on variable " + std::to_string(c.i));
            if (c.i >= n_ || c.j >= n_) throw ModelError("coupling variable out of range");
            if (!std::isfinite(c.J)) throw ModelError("non-finite coupling");
            if (c.i > c.j) std::swap(c.i, c.j);
        }
        std::sort(couplings_.begin(), couplings_.end(),
                  [](const Coupling& a, const Coupling& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
        for (std::size_t c = 1; c < couplings_.size(); ++c)
            if (couplings_[c].i == couplings_[c - 1].i && couplings_[c].j == couplings_[c - 1].j)
                throw ModelError("duplicate coupling {" + std::to_string(couplings_[c].i) + "," +
                                 std::to_string(couplings_[c].j) + "}");
        in_edges_.assign(n_, {});
        for (std::size_t c = 0; c < couplings_.size(); ++c) {
            in_edges_[couplings_[c].j].push_back(2 * c);      // i→j
            in_edges_[couplings_[c].i].push_back(2 * c + 1);  // j→i
        }
    }

    std::size_t num_vars() const { return n_; }
    const std::vector<Coupling>& couplings() const { return couplings_; }
    const std::vector<double>& fields() const { return fields_; }
    double field(VarId i) const { return fields_[i]; }

    std::size_t num_edges() const { return 2 * couplings_.size(); }
    VarId source(std::size_t e) const { return e % 2 == 0 ? couplings_[e / 2].i : couplings_[e / 2].j; }
    VarId target(std::size_t e) const { return e % 2 == 0 ? couplings_[e / 2].j : couplings_[e / 2].i; }
    double edge_coupling(std::size_t e) const { return couplings_[e / 2].J; }
    static std::size_t reverse(std::size_t e) { return e ^ std::size_t{1}; }

    /// Directed edges pointing into v.
    std::span<const std::size_t> in_edges(VarId v) const { return in_edges_[v]; }
    std::size_t degree(VarId v) const { return in_edges_[v].size(); }

    /// Coupling between i and j, zero when absent.
    double coupling(VarId i, VarId j) const {
        if (i > j) std::swap(i, j);
        auto it = std::lower_bound(couplings_.begin(), couplings_.end(), std::pair(i, j),
                                   [](const Coupling& c, const std::pair<VarId, VarId>& key) {
                                       return std::pair(c.i, c.j) < key;
                                   });
        return (it != couplings_.end() && it->i == i && it->j == j) ? it->J : 0.0;
    }

private:
    std::size_t n_ = 0;
    std::vector<Coupling> couplings_;
    std::vector<double> fields_;
    std::vector<std::vector<std::size_t>> in_edges_;
};

/// Emits exp(theta_i x_i) for every nonzero field and exp(J x_i x_j) for every coupling.
inline FactorGraph from_ising(const BinaryPairwiseModel& model) {
    std::vector<Factor> factors;
    for (VarId i = 0; i < model.num_vars(); ++i) {
        const double t = model.field(i);
        if (t != 0.0) factors.push_back({{i}, {std::exp(t), std::exp(-t)}});
    }
    for (const auto& c : model.couplings()) {
        const double a = std::exp(c.J), b = std::exp(-c.J);
        factors.push_back({{c.i, c.j}, {a, b, b, a}});
    }
    return FactorGraph(std::vector<std::size_t>(model.num_vars(), 2), std::move(factors));
}

/// Map-based constructor form: couplings keyed by unordered pairs, fields by variable.
inline FactorGraph from_ising(std::size_t num_vars, const std::vector<Coupling>& couplings,
                              const std::map<VarId, double>& fields) {
    std::vector<double> theta(num_vars, 0.0);
    for (const auto& [v, t] : fields) {
        if (v >= num_vars) throw ModelError("field variable out of range");
        theta[v] = t;
    }
    return from_ising(BinaryPairwiseModel(num_vars, couplings, std::move(theta)));
}

/// Recovers (J, theta) from a strictly positive binary factor graph with
/// scopes of size at most two. Factors over the same pair add their couplings.
inline BinaryPairwiseModel to_binary_pairwise(const FactorGraph& fg) {
    for (VarId v = 0; v < fg.num_vars(); ++v)
        if (fg.cardinality(v) != 2) throw ModelError("variable " + std::to_string(v) + " is not binary");
    std::vector<double> theta(fg.num_vars(), 0.0);
    std::map<std::pair<VarId, VarId>, double> J;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        if (fac.arity() > 2) throw ModelError("factor " + std::to_string(f) + " has more than two variables");
        for (double x : fac.table)
            if (!(x > 0.0)) throw ModelError("factor " + std::to_string(f) + " has a zero entry");
        if (fac.arity() == 1) {
            theta[fac.scope[0]] += 0.5 * std::log(fac.table[0] / fac.table[1]);
            continue;
        }
        const auto& t = fac.table;  // (++, +-, -+, --)
        const double lpp = std::log(t[0]), lpm = std::log(t[1]), lmp = std::log(t[2]), lmm = std::log(t[3]);
        VarId a = fac.scope[0], b = fac.scope[1];
        theta[a] += 0.25 * (lpp + lpm - lmp - lmm);
        theta[b] += 0.25 * (lpp + lmp - lpm - lmm);
        J[{std::min(a, b), std::max(a, b)}] += 0.25 * (lpp + lmm - lpm - lmp);
    }
    std::vector<Coupling> couplings;
    for (const auto& [key, value] : J) couplings.push_back({key.first, key.second, value});
    return BinaryPairwiseModel(fg.num_vars(), std::move(couplings), std::move(theta));
}

}  // namespace lbpcert
