#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "lbpcert/factor_graph.hpp"

namespace lbpcert {

/// Local quotient seminorm: distance of v to the constant vectors in sup norm.
inline double quotient_seminorm(std::span<const double> v) {
    if (v.empty()) return 0.0;
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return 0.5 * (*hi - *lo);
}

inline double log_sum_exp(std::span<const double> v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

/// Log-domain factor→variable messages, one vector per directed edge of a graph.
class MessageSet {
public:
    MessageSet() = default;
    explicit MessageSet(const FactorGraph& fg) {
        offset_.reserve(fg.num_edges() + 1);
        offset_.push_back(0);
        for (const auto& e : fg.edges()) offset_.push_back(offset_.back() + fg.cardinality(e.var));
        data_.assign(offset_.back(), 0.0);
    }

    std::size_t num_edges() const { return offset_.empty() ? 0 : offset_.size() - 1; }
    std::span<double> operator[](std::size_t e) { return {data_.data() + offset_[e], offset_[e + 1] - offset_[e]}; }
    std::span<const double> operator[](std::size_t e) const {
        return {data_.data() + offset_[e], offset_[e + 1] - offset_[e]};
    }
    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

private:
    std::vector<std::size_t> offset_;
    std::vector<double> data_;
};

struct Init {
    enum class Kind { uniform, random };
    Kind kind = Kind::uniform;
    std::uint64_t seed = 0;

    static Init uniform() { return {}; }
    static Init random(std::uint64_t seed) { return {Kind::random, seed}; }
};

/// Uniform init gives zero log-messages; random init draws i.i.d. U[-1,1] entries.
inline MessageSet init_messages(const FactorGraph& fg, Init init) {
    MessageSet msgs(fg);
    if (init.kind == Init::Kind::random) {
        std::mt19937_64 rng(init.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& x : msgs.flat()) x = u(rng);
    }
    return msgs;
}

/// Largest per-edge quotient seminorm of a - b.
inline double message_residual(const MessageSet& a, const MessageSet& b) {
    double r = 0.0;
    std::vector<double> diff;
    for (std::size_t e = 0; e < a.num_edges(); ++e) {
        auto x = a[e], y = b[e];
        diff.resize(x.size());
        for (std::size_t k = 0; k < x.size(); ++k) diff[k] = x[k] - y[k];
        r = std::max(r, quotient_seminorm(diff));
    }
    return r;
}

namespace detail {

/// Incoming log-message of factor f at variable v: the stored message for
/// multi-variable factors, the normalized log table for single-variable ones.
class IncomingMessages {
public:
    IncomingMessages(const FactorGraph& fg, const MessageSet& msgs) : fg_(fg), msgs_(msgs) {
        single_.resize(fg.num_factors());
        for (FactorId f = 0; f < fg.num_factors(); ++f) {
            const Factor& fac = fg.factor(f);
            if (fac.arity() != 1) continue;
            auto& v = single_[f];
            for (double x : fac.table) v.push_back(std::log(x));
            const double z = log_sum_exp(v);
            for (double& x : v) x -= z;
        }
    }

    double at(FactorId f, VarId v, std::size_t state) const {
        const Factor& fac = fg_.factor(f);
        if (fac.arity() == 1) return single_[f][state];
        return msgs_[fg_.edge_index(f, fac.position(v))][state];
    }

    /// Sum of messages into v from every factor except `skip` (npos: none).
    void cavity(VarId v, FactorId skip, std::vector<double>& out) const {
        out.assign(fg_.cardinality(v), 0.0);
        for (FactorId g : fg_.factors_of(v)) {
            if (g == skip) continue;
            for (std::size_t a = 0; a < out.size(); ++a) out[a] += at(g, v, a);
        }
    }

private:
    const FactorGraph& fg_;
    const MessageSet& msgs_;
    std::vector<std::vector<double>> single_;
};

}  // namespace detail

/// One parallel Sum-Product sweep: every outgoing message is recomputed from the
/// same input snapshot and shifted so that exp(message) sums to one.
inline MessageSet update_parallel(const FactorGraph& fg, const MessageSet& msgs) {
    detail::IncomingMessages in(fg, msgs);
    MessageSet out(fg);
    std::vector<std::vector<double>> cav;
    std::vector<double> logpsi, acc;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        if (fac.arity() < 2) continue;
        const StateIndexer& ix = fg.indexer(f);
        const std::size_t k = fac.arity();
        cav.resize(k);
        for (std::size_t p = 0; p < k; ++p) in.cavity(fac.scope[p], f, cav[p]);
        logpsi.resize(fac.size());
        for (std::size_t s = 0; s < fac.size(); ++s)
            logpsi[s] = fac.table[s] > 0.0 ? std::log(fac.table[s]) : -std::numeric_limits<double>::infinity();

        for (std::size_t p = 0; p < k; ++p) {
            auto target = out[fg.edge_index(f, p)];
            const std::size_t card = target.size();
            // term(s) = log psi(s) + sum over the other members of their cavity at s
            auto term = [&](std::size_t s) {
                double t = logpsi[s];
                for (std::size_t q = 0; q < k; ++q)
                    if (q != p) t += cav[q][ix.digit(s, q)];
                return t;
            };
            std::vector<double> mx(card, -std::numeric_limits<double>::infinity());
            acc.assign(card, 0.0);
            for (std::size_t s = 0; s < fac.size(); ++s) {
                if (fac.table[s] <= 0.0) continue;
                const std::size_t a = ix.digit(s, p);
                mx[a] = std::max(mx[a], term(s));
            }
            for (std::size_t s = 0; s < fac.size(); ++s) {
                if (fac.table[s] <= 0.0) continue;
                const std::size_t a = ix.digit(s, p);
                acc[a] += std::exp(term(s) - mx[a]);
            }
            for (std::size_t a = 0; a < card; ++a) {
                target[a] = mx[a] + std::log(acc[a]);
                if (!std::isfinite(target[a]))
                    throw std::domain_error("message from factor " + std::to_string(f) + " to variable " +
                                            std::to_string(fac.scope[p]) + " vanishes at state " + std::to_string(a));
            }
            const double z = log_sum_exp(target);
            for (double& x : target) x -= z;
        }
    }
    return out;
}

struct Beliefs {
    std::vector<std::vector<double>> single;
    std::vector<std::vector<double>> factor;
};

namespace detail {
inline void normalize_log(std::vector<double>& v) {
    const double z = log_sum_exp(v);
    double sum = 0.0;
    for (double& x : v) {
        x = std::exp(x - z);
        sum += x;
    }
    for (double& x : v) x /= sum;
}
}  // namespace detail

inline Beliefs compute_beliefs(const FactorGraph& fg, const MessageSet& msgs) {
    detail::IncomingMessages in(fg, msgs);
    Beliefs b;
    b.single.resize(fg.num_vars());
    for (VarId v = 0; v < fg.num_vars(); ++v) {
        in.cavity(v, FactorGraph::npos, b.single[v]);
        detail::normalize_log(b.single[v]);
    }
    b.factor.resize(fg.num_factors());
    std::vector<std::vector<double>> cav;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        const StateIndexer& ix = fg.indexer(f);
        cav.resize(fac.arity());
        for (std::size_t p = 0; p < fac.arity(); ++p) in.cavity(fac.scope[p], f, cav[p]);
        auto& out = b.factor[f];
        out.resize(fac.size());
        for (std::size_t s = 0; s < fac.size(); ++s) {
            double t = fac.table[s] > 0.0 ? std::log(fac.table[s]) : -std::numeric_limits<double>::infinity();
            for (std::size_t p = 0; p < fac.arity(); ++p) t += cav[p][ix.digit(s, p)];
            out[s] = t;
        }
        detail::normalize_log(out);
    }
    return b;
}

struct RunOptions {
    std::size_t max_iters = 10000;
    double tol = 1e-9;
    Init init = Init::uniform();
};

struct BPResult {
    bool converged = false;
    std::size_t iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    MessageSet messages;
    std::vector<std::vector<double>> single_beliefs;
    std::vector<std::vector<double>> factor_beliefs;
};

/// Iterates the parallel update until the quotient-seminorm step drops below tol.
inline BPResult run(const FactorGraph& fg, const MessageSet& start, const RunOptions& opts) {
    const auto support = check_zero_support(fg);
    if (!support.ok()) throw ModelError("zero-support condition violated: " + support.first_failure());
    BPResult res;
    res.messages = start;
    res.residual = fg.num_edges() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    res.converged = fg.num_edges() == 0;
    while (!res.converged && res.iterations < opts.max_iters) {
        MessageSet next = update_parallel(fg, res.messages);
        res.residual = message_residual(next, res.messages);
        res.messages = std::move(next);
        ++res.iterations;
        res.converged = res.residual < opts.tol;
    }
    Beliefs b = compute_beliefs(fg, res.messages);
    res.single_beliefs = std::move(b.single);
    res.factor_beliefs = std::move(b.factor);
    return res;
}

inline BPResult run(const FactorGraph& fg, const RunOptions& opts = {}) {
    return run(fg, init_messages(fg, opts.init), opts);
}

inline nlohmann::ordered_json to_json(const BPResult& r) {
    nlohmann::ordered_json j;
    j["converged"] = r.converged;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    auto& single = j["single_beliefs"] = nlohmann::ordered_json::object();
    for (std::size_t v = 0; v < r.single_beliefs.size(); ++v) single[std::to_string(v)] = r.single_beliefs[v];
    auto& factor = j["factor_beliefs"] = nlohmann::ordered_json::object();
    for (std::size_t f = 0; f < r.factor_beliefs.size(); ++f) factor[std::to_string(f)] = r.factor_beliefs[f];
    return j;
}

// ---------------------------------------------------------------------------
// Binary pairwise engine: nu_{i→j} with tanh(nu) = mu(+1) - mu(-1).
// ---------------------------------------------------------------------------

/// One real message per directed edge of a BinaryPairwiseModel.
struct BinaryMessageSet {
    std::vector<double> nu;
};

inline double log_cosh(double x) {
    const double a = std::abs(x);
    return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

/// atanh(tanh(J) tanh(h)), evaluated without forming tanh(J) tanh(h) near ±1.
/// Infinite h maps to its limit ±J.
inline double message_map(double J, double h) {
    if (std::isinf(h)) return h > 0 ? J : -J;
    return 0.5 * (log_cosh(J + h) - log_cosh(J - h));
}

/// theta_i + sum of nu_{t→i} over t in ∂i \ j, for edge e = (i→j).
inline double cavity_field(const BinaryPairwiseModel& model, const BinaryMessageSet& msgs, std::size_t e) {
    const VarId i = model.source(e);
    const std::size_t back = BinaryPairwiseModel::reverse(e);
    double h = model.field(i);
    for (std::size_t in : model.in_edges(i))
        if (in != back) h += msgs.nu[in];
    return h;
}

inline BinaryMessageSet init_binary_messages(const BinaryPairwiseModel& model, Init init) {
    BinaryMessageSet m{std::vector<double>(model.num_edges(), 0.0)};
    if (init.kind == Init::Kind::random) {
        std::mt19937_64 rng(init.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (double& x : m.nu) x = u(rng);
    }
    return m;
}

inline BinaryMessageSet update_parallel_binary(const BinaryPairwiseModel& model, const BinaryMessageSet& msgs) {
    BinaryMessageSet out{std::vector<double>(model.num_edges())};
    for (std::size_t e = 0; e < model.num_edges(); ++e)
        out.nu[e] = message_map(model.edge_coupling(e), cavity_field(model, msgs, e));
    return out;
}

/// Probability of spin +1 at each variable.
inline std::vector<double> binary_beliefs(const BinaryPairwiseModel& model, const BinaryMessageSet& msgs) {
    std::vector<double> b(model.num_vars());
    for (VarId i = 0; i < model.num_vars(); ++i) {
        double h = model.field(i);
        for (std::size_t in : model.in_edges(i)) h += msgs.nu[in];
        b[i] = 0.5 * (1.0 + std::tanh(h));
    }
    return b;
}

struct BinaryBPResult {
    bool converged = false;
    std::size_t iterations = 0;
    double residual = std::numeric_limits<double>::infinity();
    BinaryMessageSet messages;
    std::vector<double> beliefs;  // P(x_i = +1)
};

namespace detail {

/// Same map as update_parallel_binary, written for the inner loop of run_binary:
/// field totals per variable, cached tanh J, and atanh(tanh J tanh h) directly
/// whenever the product stays well away from ±1.
class BinaryStepper {
public:
    explicit BinaryStepper(const BinaryPairwiseModel& model) : model_(model), total_(model.num_vars()) {
        for (std::size_t e = 0; e < model.num_edges(); ++e) tanh_j_.push_back(std::tanh(model.edge_coupling(e)));
    }

    /// Writes the update of `in` into `out` and returns max |out - in|.
    double step(const std::vector<double>& in, std::vector<double>& out) {
        for (VarId i = 0; i < model_.num_vars(); ++i) {
            double h = model_.field(i);
            for (std::size_t e : model_.in_edges(i)) h += in[e];
            total_[i] = h;
        }
        double r = 0.0;
        for (std::size_t e = 0; e < in.size(); ++e) {
            const double h = total_[model_.source(e)] - in[BinaryPairwiseModel::reverse(e)];
            const double J = model_.edge_coupling(e);
            const double v = std::abs(J) < 8.0 && std::abs(h) < 8.0 ? std::atanh(tanh_j_[e] * std::tanh(h))
                                                                  : message_map(J, h);
            out[e] = v;
            r = std::max(r, std::abs(v - in[e]));
        }
        return r;
    }

private:
    const BinaryPairwiseModel& model_;
    std::vector<double> tanh_j_;
    std::vector<double> total_;
};

}  // namespace detail

/// The binary analogue of run(); the local quotient seminorm of (nu,-nu) is |nu|.
inline BinaryBPResult run_binary(const BinaryPairwiseModel& model, const BinaryMessageSet& start,
                                 const RunOptions& opts) {
    BinaryBPResult res;
    res.messages = start;
    res.converged = model.num_edges() == 0;
    if (res.converged) res.residual = 0.0;
    detail::BinaryStepper stepper(model);
    std::vector<double> next(start.nu.size());
    while (!res.converged && res.iterations < opts.max_iters) {
        res.residual = stepper.step(res.messages.nu, next);
        std::swap(res.messages.nu, next);
        ++res.iterations;
        res.converged = res.residual < opts.tol;
    }
    res.beliefs = binary_beliefs(model, res.messages);
    return res;
}

inline BinaryBPResult run_binary(const BinaryPairwiseModel& model, const RunOptions& opts = {}) {
    return run_binary(model, init_binary_messages(model, opts.init), opts);
}

struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Exact derivative of update_parallel_binary at nu:
///   d nu'_{i→j} / d nu_{k→i} = tanh(J_ij) (1 - tanh^2 h) / (1 - tanh^2 J_ij tanh^2 h),
/// h the cavity field of (i→j); all other entries vanish.
inline DenseMatrix jacobian_binary(const BinaryPairwiseModel& model, const BinaryMessageSet& msgs) {
    const std::size_t d = model.num_edges();
    DenseMatrix jac(d, d);
    for (std::size_t e = 0; e < d; ++e) {
        const double tj = std::tanh(model.edge_coupling(e));
        const double th = std::tanh(cavity_field(model, msgs, e));
        const double value = tj * (1.0 - th * th) / (1.0 - tj * tj * th * th);
        const std::size_t back = BinaryPairwiseModel::reverse(e);
        for (std::size_t in : model.in_edges(model.source(e)))
            if (in != back) jac(e, in) = value;
    }
    return jac;
}

}  // namespace lbpcert
