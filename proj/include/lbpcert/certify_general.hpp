#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lbpcert/bound_matrix.hpp"
#include "lbpcert/certificate.hpp"
#include "lbpcert/factor_graph.hpp"
#include "lbpcert/strength.hpp"

namespace lbpcert {

/// Raised when a certificate's hypothesis does not hold for the model.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A_{(I→i),(J→j)} = N(psi_I, i, j) for j in I\i and J in N_j\I, over the directed
/// edges of multi-variable factors.
inline BoundMatrix build_matrix_general(const FactorGraph& fg, const StrengthOptions& opts = {}) {
    std::vector<BoundMatrix::Entry> entries;
    for (FactorId f = 0; f < fg.num_factors(); ++f) {
        const Factor& fac = fg.factor(f);
        if (fac.arity() < 2) continue;
        for (std::size_t pi = 0; pi < fac.arity(); ++pi) {
            const std::size_t row = fg.edge_index(f, pi);
            for (std::size_t pj = 0; pj < fac.arity(); ++pj) {
                if (pj == pi) continue;
                const VarId j = fac.scope[pj];
                double n = -1.0;
                for (FactorId g : fg.factors_of(j)) {
                    if (g == f || fg.factor(g).arity() < 2) continue;
                    if (n < 0.0) n = potential_strength(fg, f, fac.scope[pi], j, opts);
                    entries.push_back({row, fg.edge_index(g, fg.factor(g).position(j)), n});
                }
            }
        }
    }
    return BoundMatrix(fg.num_edges(), std::move(entries));
}

inline void require_zero_support(const FactorGraph& fg) {
    const auto report = check_zero_support(fg);
    if (!report.ok())
        throw HypothesisError("zero-support condition violated (" + report.first_failure() +
                              "); absorb zero single-variable factors first");
}

/// Maximum column sum of the general bound matrix.
inline Certificate l1_condition_general(const FactorGraph& fg, const StrengthOptions& opts = {}) {
    require_zero_support(fg);
    Certificate c;
    c.name = "l1";
    c.value = build_matrix_general(fg, opts).norm1();
    c.rate = c.value;
    c.holds = c.value < 1.0;
    return c;
}

inline Certificate spectral_certificate(const BoundMatrix& A, double tol) {
    Certificate c;
    c.name = "spectral";
    const auto est = spectral_radius_estimate(A, {tol, 100000});
    c.value = est.value;
    c.rate = est.value;
    c.holds = est.value < 1.0;
    if (!est.converged) c.detail.push_back("upper-bound-only");
    return c;
}

inline Certificate certify_spectral_general(const FactorGraph& fg, double tol = 1e-9,
                                            const StrengthOptions& opts = {}) {
    require_zero_support(fg);
    if (is_acyclic(fg)) {
        Certificate c;
        c.name = "spectral";
        c.holds = true;
        c.detail.push_back("acyclic factor graph");
        return c;
    }
    return spectral_certificate(build_matrix_general(fg, opts), tol);
}

/// For a factor graph produced by from_ising(model): general edge index of each
/// binary directed pair (i→j), which corresponds to the message from factor {i,j} to j.
inline std::vector<std::size_t> binary_edge_correspondence(const BinaryPairwiseModel& model, const FactorGraph& fg) {
    std::vector<std::size_t> out(model.num_edges(), FactorGraph::npos);
    std::size_t c = 0;
    for (FactorId f = 0; f < fg.num_factors() && c < model.couplings().size(); ++f) {
        const Factor& fac = fg.factor(f);
        if (fac.arity() != 2) continue;
        const auto& cp = model.couplings()[c];
        if (fac.scope[0] != cp.i || fac.scope[1] != cp.j)
            throw std::invalid_argument("binary_edge_correspondence: factor order does not follow the couplings");
        out[2 * c] = fg.edge_index(f, 1);
        out[2 * c + 1] = fg.edge_index(f, 0);
        ++c;
    }
    if (c != model.couplings().size())
        throw std::invalid_argument("binary_edge_correspondence: missing pair factors");
    return out;
}

}  // namespace lbpcert
