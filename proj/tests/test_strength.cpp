#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace lbpcert;

namespace {

std::vector<double> exp_coupling(double J) { return {std::exp(J), std::exp(-J), std::exp(-J), std::exp(J)}; }

/// Strength of a strictly positive table through the tanh of a quarter log cross-ratio.
double tanh_log_strength(const FactorGraph& fg, FactorId f, VarId i, VarId j) {
    const Factor& fac = fg.factor(f);
    const StateIndexer& ix = fg.indexer(f);
    const std::size_t pi = fac.position(i), pj = fac.position(j);
    double best = 0.0;
    for (std::size_t s = 0; s < fac.size(); ++s)
        for (std::size_t t = 0; t < fac.size(); ++t) {
            const std::size_t a = ix.digit(s, pi), b = ix.digit(s, pj);
            const std::size_t a2 = ix.digit(t, pi), b2 = ix.digit(t, pj);
            if (a == a2 || b == b2) continue;
            // swap the i-digits of s and t
            const std::size_t s2 = s - a * ix.stride(pi) + a2 * ix.stride(pi);
            const std::size_t t2 = t - a2 * ix.stride(pi) + a * ix.stride(pi);
            const double r = std::log(fac.table[s] * fac.table[t] / (fac.table[s2] * fac.table[t2]));
            best = std::max(best, std::tanh(0.25 * r));
        }
    return best;
}

FactorGraph pair_graph(std::vector<double> t, std::size_t r = 2, std::size_t c = 2) {
    return FactorGraph({r, c}, {{{0, 1}, std::move(t)}});
}

}  // namespace

TEST(PotentialStrength, ExpCoupling) {
    EXPECT_NEAR(potential_strength(pair_graph(exp_coupling(0.8)), 0, 0, 1), std::tanh(0.8), 1e-12);
    EXPECT_NEAR(potential_strength(pair_graph(exp_coupling(0.8)), 0, 0, 1), 0.664037, 1e-6);
}

TEST(PotentialStrength, UniformAndPsiEps) {
    EXPECT_EQ(potential_strength(pair_graph({1, 1, 1, 1}), 0, 0, 1), 0.0);
    EXPECT_NEAR(potential_strength(pair_graph(testutil::psi_eps(0.25)), 0, 0, 1), 0.6, 1e-12);
    EXPECT_NEAR(potential_strength(pair_graph(testutil::psi_eps(0.0)), 0, 0, 1), 1.0, 1e-15);
}

TEST(PotentialStrength, TwoOneOneOne) {
    const std::vector<double> t{2, 1, 1, 1};
    const double n = potential_strength(pair_graph(t), 0, 0, 1);
    EXPECT_NEAR(n, std::tanh(0.25 * std::log(2.0)), 1e-12);
    EXPECT_NEAR(n, 0.17157, 1e-5);
    EXPECT_NEAR(ihler_strength(t), 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(simon_strength(t), 0.5 * std::log(2.0), 1e-15);
}

TEST(PotentialStrength, Errors) {
    const auto fg = FactorGraph({2, 2, 2}, {{{0, 1}, {1, 2, 3, 4}}});
    EXPECT_THROW(potential_strength(fg, 0, 0, 0), std::invalid_argument);
    EXPECT_THROW(potential_strength(fg, 0, 0, 2), std::invalid_argument);
    EXPECT_THROW(potential_strength(fg, 0, 0, 1, {.max_joint_states = 2}), EnumerationCapError);
}

TEST(PotentialStrength, AgreesWithTanhLogFormOnPositiveTables) {
    std::mt19937_64 rng(31);
    std::uniform_int_distribution<std::size_t> card(2, 3);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t arity = 2 + trial % 2;
        std::vector<std::size_t> cards(arity);
        std::size_t size = 1;
        for (auto& c : cards) size *= (c = card(rng));
        std::vector<VarId> scope(arity);
        for (VarId k = 0; k < arity; ++k) scope[k] = k;
        FactorGraph fg(cards, {{scope, testutil::random_table(size, rng, 0.05, 3.0)}});
        for (VarId i = 0; i < arity; ++i)
            for (VarId j = 0; j < arity; ++j) {
                if (i == j) continue;
                const double n = potential_strength(fg, 0, i, j);
                EXPECT_NEAR(n, tanh_log_strength(fg, 0, i, j), 1e-12);
                if (arity == 2) {
                    EXPECT_NEAR(n, potential_strength(fg, 0, j, i), 1e-15);
                }
                EXPECT_GE(n, 0.0);
                EXPECT_LT(n, 1.0);
            }
    }
}

TEST(PotentialStrength, NotSymmetricBeyondPairs) {
    // psi depends on (x_i, x_k) only: the i-swap cross-ratio varies with k, the j-swap one is constant
    const double a[2][2] = {{1.0, 3.0}, {2.0, 0.5}};
    std::vector<double> t(8);
    for (std::size_t x = 0; x < 2; ++x)
        for (std::size_t y = 0; y < 2; ++y)
            for (std::size_t z = 0; z < 2; ++z) t[x * 4 + y * 2 + z] = a[x][z];
    const FactorGraph fg({2, 2, 2}, {{{0, 1, 2}, t}});
    EXPECT_NEAR(potential_strength(fg, 0, 0, 1), std::tanh(0.25 * std::log(12.0)), 1e-12);
    EXPECT_EQ(potential_strength(fg, 0, 1, 0), 0.0);
}

TEST(PotentialStrength, BoundedByIhlerStrength) {
    std::mt19937_64 rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t r = 2 + trial % 3, c = 2 + (trial / 3) % 3;
        const auto t = testutil::random_table(r * c, rng, 0.01, 5.0);
        EXPECT_LE(pair_potential_strength(t, r, c), ihler_strength(t) + 1e-15);
    }
}

TEST(PotentialStrength, InvariantUnderReallocationPermutationAndScale) {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.2, 4.0);
    for (int trial = 0; trial < 50; ++trial) {
        // (i, j, rest) = (3 states, 2 states, 2 states)
        const std::vector<std::size_t> cards{3, 2, 2};
        const auto t = testutil::random_table(12, rng);
        const FactorGraph base(cards, {{{0, 1, 2}, t}});
        const double n = potential_strength(base, 0, 0, 1);

        std::vector<double> fi(3), fj(2), fk(2);
        for (double& x : fi) x = u(rng);
        for (double& x : fj) x = u(rng);
        for (double& x : fk) x = u(rng);
        const double scale = u(rng);
        std::vector<double> moved(12), permuted(12);
        const std::size_t perm_i[3] = {2, 0, 1};
        for (std::size_t a = 0; a < 3; ++a)
            for (std::size_t b = 0; b < 2; ++b)
                for (std::size_t g = 0; g < 2; ++g) {
                    const std::size_t s = a * 4 + b * 2 + g;
                    moved[s] = t[s] * fi[a] * fj[b] * fk[g] * scale;
                    permuted[perm_i[a] * 4 + (1 - b) * 2 + g] = t[s];
                }
        EXPECT_NEAR(potential_strength(FactorGraph(cards, {{{0, 1, 2}, moved}}), 0, 0, 1), n, 1e-12);
        EXPECT_NEAR(potential_strength(FactorGraph(cards, {{{0, 1, 2}, permuted}}), 0, 0, 1), n, 1e-15);
    }
}

TEST(PotentialStrength, ProductFactorHasZeroStrength) {
    std::vector<double> t(6);
    const double a[3] = {0.5, 2.0, 1.3}, b[2] = {0.7, 3.0};
    for (std::size_t x = 0; x < 3; ++x)
        for (std::size_t y = 0; y < 2; ++y) t[x * 2 + y] = a[x] * b[y];
    EXPECT_NEAR(pair_potential_strength(t, 3, 2), 0.0, 1e-15);
}

TEST(SimonAndIhler, ClosedForms) {
    EXPECT_NEAR(simon_strength(exp_coupling(0.8)), 0.8, 1e-15);
    EXPECT_NEAR(ihler_strength(exp_coupling(0.8)), std::tanh(0.8), 1e-15);
    EXPECT_EQ(simon_strength(std::vector<double>{1, 1, 1, 1}), 0.0);
    EXPECT_EQ(ihler_strength(std::vector<double>{1, 1, 1, 1}), 0.0);
    EXPECT_TRUE(std::isinf(simon_strength(testutil::psi_eps(0.0))));
    EXPECT_THROW(ihler_strength(testutil::psi_eps(0.0)), ModelError);
}

TEST(HeskesSigma, TrivialCases) {
    const FactorGraph single({3}, {{{0}, {1, 5, 2}}});
    EXPECT_EQ(heskes_sigma(single, 0).sigma, 0.0);
    EXPECT_EQ(heskes_sigma(single, 0).omega, 0.0);
    const FactorGraph uniform({2, 3}, {{{0, 1}, std::vector<double>(6, 1.0)}});
    EXPECT_NEAR(heskes_sigma(uniform, 0).sigma, 0.0, 1e-15);
}

TEST(HeskesSigma, ExpCouplingByEnumeration) {
    const double J = 0.8;
    const auto h = heskes_sigma(pair_graph(exp_coupling(J)), 0);
    // 16 state pairs, spins index 0 -> +1
    double best = 0.0;
    auto lg = [&](int x, int y) { return J * x * y; };
    for (int x1 : {1, -1})
        for (int x2 : {1, -1})
            for (int y1 : {1, -1})
                for (int y2 : {1, -1})
                    best = std::max(best, lg(x1, x2) + lg(y1, y2) - lg(x1, y2) - lg(y1, x2));
    EXPECT_NEAR(h.omega, best, 1e-12);
    EXPECT_NEAR(h.omega, 4 * J, 1e-12);
    EXPECT_GE(h.sigma, 0.0);
    EXPECT_LT(h.sigma, 1.0);
    EXPECT_FALSE(h.infinite);
}

TEST(HeskesSigma, ZerosGiveInfiniteOmegaAndCapIsEnforced) {
    const auto h = heskes_sigma(pair_graph(testutil::psi_eps(0.0)), 0);
    EXPECT_TRUE(h.infinite);
    EXPECT_EQ(h.sigma, 1.0);
    EXPECT_THROW(heskes_sigma(pair_graph({1, 2, 3, 4}), 0, {.max_joint_states = 1 << 20, .max_state_pairs = 8}),
                 EnumerationCapError);
}

TEST(CavitySupremum, ConstantMatrixIsZero) {
    const std::vector<double> psi(9, 2.5);
    const auto r = cavity_supremum_oracle(psi, 3, 3);
    EXPECT_NEAR(r.bruteforce, 0.0, 1e-12);
    EXPECT_NEAR(r.closedform, 0.0, 1e-12);
}

TEST(CavitySupremum, TwoEntryMatrix) {
    const std::vector<double> psi{1.0, 4.0};
    // entries indexed by the row variable: two rows, one column
    const auto col = cavity_supremum_oracle(psi, 2, 1);
    EXPECT_NEAR(col.closedform, 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(col.bruteforce, 2.0 / 3.0, 1e-6);
    // one row: no pair of distinct rows, so the supremum vanishes
    const auto row = cavity_supremum_oracle(psi, 1, 2);
    EXPECT_NEAR(row.closedform, 0.0, 1e-15);
    EXPECT_NEAR(row.bruteforce, 0.0, 1e-12);
}

TEST(CavitySupremum, BruteForceAgreesWithClosedForm) {
    std::mt19937_64 rng(34);
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t r = trial < 20 ? 3 : dim(rng), c = trial < 20 ? 3 : dim(rng);
        if (r * c < 2) continue;
        const auto psi = testutil::random_table(r * c, rng, 0.1, 5.0);
        const auto s = cavity_supremum_oracle(psi, r, c);
        EXPECT_NEAR(s.bruteforce, s.closedform, 1e-6) << r << "x" << c;
    }
}

TEST(CavitySupremum, RejectsNonPositive) {
    EXPECT_THROW(cavity_supremum_oracle(std::vector<double>{1, 0}, 2, 1), ModelError);
    EXPECT_THROW(cavity_supremum_oracle(std::vector<double>{1, 2, 3}, 2, 2), std::invalid_argument);
}
