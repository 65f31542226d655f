#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "lbpcert/bound_matrix.hpp"
#include "lbpcert/bp.hpp"
#include "lbpcert/certificate.hpp"
#include "lbpcert/certify_general.hpp"
#include "lbpcert/factor_graph.hpp"

namespace lbpcert {

/// A_{(i→j),(k→i)} = tanh|J_ij| for k in ∂i \ j.
inline BoundMatrix build_matrix_binary(const BinaryPairwiseModel& model) {
    std::vector<BoundMatrix::Entry> entries;
    for (std::size_t e = 0; e < model.num_edges(); ++e) {
        const double t = std::tanh(std::abs(model.edge_coupling(e)));
        const std::size_t back = BinaryPairwiseModel::reverse(e);
        for (std::size_t in : model.in_edges(model.source(e)))
            if (in != back) entries.push_back({e, in, t});
    }
    return BoundMatrix(model.num_edges(), std::move(entries));
}

inline Certificate linfty_condition(const BinaryPairwiseModel& model) {
    Certificate c;
    c.name = "linfty";
    for (VarId i = 0; i < model.num_vars(); ++i) {
        const std::size_t deg = model.degree(i);
        if (deg < 2) continue;
        double strongest = 0.0;
        for (std::size_t in : model.in_edges(i)) strongest = std::max(strongest, std::tanh(std::abs(model.edge_coupling(in))));
        c.value = std::max(c.value, static_cast<double>(deg - 1) * strongest);
    }
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

inline Certificate l1_condition_binary(const BinaryPairwiseModel& model) {
    Certificate c;
    c.name = "l1";
    for (VarId i = 0; i < model.num_vars(); ++i) {
        double total = 0.0, weakest = std::numeric_limits<double>::infinity();
        for (std::size_t in : model.in_edges(i)) {
            const double t = std::tanh(std::abs(model.edge_coupling(in)));
            total += t;
            weakest = std::min(weakest, t);
        }
        if (model.degree(i) >= 2) c.value = std::max(c.value, total - weakest);
    }
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

inline Certificate certify_spectral_binary(const BinaryPairwiseModel& model, double tol = 1e-9) {
    return spectral_certificate(build_matrix_binary(model), tol);
}

/// Closed interval with possibly infinite endpoints.
struct CavityInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
    /// Distance of the interval from 0.
    double eta_star() const { return contains_zero() ? 0.0 : std::min(std::abs(lo), std::abs(hi)); }
};

/// Depth-m intervals containing the cavity field of each directed edge (i→j),
/// starting from the whole real line at depth 0.
inline std::vector<CavityInterval> cavity_intervals(const BinaryPairwiseModel& model, int m) {
    if (m < 0) throw std::invalid_argument("cavity_intervals: depth must be nonnegative");
    std::vector<CavityInterval> cur(model.num_edges()), next(model.num_edges());
    for (int t = 0; t < m; ++t) {
        for (std::size_t e = 0; e < model.num_edges(); ++e) {
            const VarId i = model.source(e);
            const std::size_t back = BinaryPairwiseModel::reverse(e);
            double lo = model.field(i), hi = model.field(i);
            for (std::size_t in : model.in_edges(i)) {
                if (in == back) continue;
                const double J = model.edge_coupling(in);
                double a = message_map(J, cur[in].lo), b = message_map(J, cur[in].hi);
                if (a > b) std::swap(a, b);
                lo += a;
                hi += b;
            }
            next[e] = {lo, hi};
        }
        std::swap(cur, next);
    }
    return cur;
}

inline double improved_entry(double J, double eta) {
    const double a = std::abs(J);
    return 0.5 * (std::tanh(a - eta) + std::tanh(a + eta));
}

inline BoundMatrix improved_matrix(const BinaryPairwiseModel& model, int m) {
    const auto H = cavity_intervals(model, m);
    std::vector<BoundMatrix::Entry> entries;
    for (std::size_t e = 0; e < model.num_edges(); ++e) {
        const double v = improved_entry(model.edge_coupling(e), H[e].eta_star());
        const std::size_t back = BinaryPairwiseModel::reverse(e);
        for (std::size_t in : model.in_edges(model.source(e)))
            if (in != back) entries.push_back({e, in, v});
    }
    return BoundMatrix(model.num_edges(), std::move(entries));
}

inline Certificate certify_improved(const BinaryPairwiseModel& model, int m = 1, double tol = 1e-9) {
    Certificate c = spectral_certificate(improved_matrix(model, m), tol);
    c.name = "improved";
    c.m = m;
    return c;
}

}  // namespace lbpcert
