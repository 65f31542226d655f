#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "test_util.hpp"

using namespace lbpcert;

namespace {

BinaryPairwiseModel complete4(double J, double theta = 0.0) {
    std::vector<Coupling> cs;
    for (VarId i = 0; i < 4; ++i)
        for (VarId j = i + 1; j < 4; ++j) cs.push_back({i, j, J});
    return BinaryPairwiseModel(4, cs, std::vector<double>(4, theta));
}

}  // namespace

TEST(Dobrushin, IsolatedPair) {
    BinaryPairwiseModel m(2, {{0, 1, 0.5}}, {});
    const auto C = dobrushin_matrix(m);
    EXPECT_NEAR(C(0, 1), std::tanh(0.5), 1e-15);
    EXPECT_NEAR(C(1, 0), std::tanh(0.5), 1e-15);
    const auto c = dobrushin_condition(m);
    EXPECT_NEAR(c.value, 0.462117, 1e-6);
    EXPECT_TRUE(c.holds);
    EXPECT_NEAR(dobrushin_condition(from_ising(m)).value, c.value, 1e-12);
}

TEST(Dobrushin, ZeroCouplings) {
    BinaryPairwiseModel m(3, {{0, 1, 0.0}, {1, 2, 0.0}}, {0.3, -1.0, 0.0});
    EXPECT_EQ(dobrushin_condition(m).value, 0.0);
    EXPECT_NEAR(dobrushin_condition(from_ising(m)).value, 0.0, 1e-15);
}

TEST(Dobrushin, ClosedFormMatchesEnumeration) {
    std::mt19937_64 rng(81);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = testutil::random_binary(rng, 6, 0.6, 1.0, 1.0);
        const auto closed = dobrushin_matrix(m);
        const auto enumerated = dobrushin_matrix(from_ising(m));
        for (std::size_t k = 0; k < closed.data.size(); ++k)
            worst = std::max(worst, std::abs(closed.data[k] - enumerated.data[k]));
    }
    EXPECT_LT(worst, 1e-12);
}

TEST(Dobrushin, EntriesInUnitIntervalForMultiStateModels) {
    std::mt19937_64 rng(82);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Factor> fs;
        for (VarId i = 0; i < 4; ++i) fs.push_back({{i, (i + 1) % 4}, testutil::random_table(9, rng)});
        fs.push_back({{1}, testutil::random_table(3, rng)});
        const FactorGraph fg(std::vector<std::size_t>(4, 3), fs);
        const auto C = dobrushin_matrix(fg);
        for (std::size_t i = 0; i < 4; ++i) {
            EXPECT_EQ(C(i, i), 0.0);
            EXPECT_EQ(C(i, (i + 2) % 4), 0.0);
            for (std::size_t j = 0; j < 4; ++j) {
                EXPECT_GE(C(i, j), 0.0);
                EXPECT_LE(C(i, j), 1.0);
            }
        }
    }
}

TEST(Dobrushin, FailsBeforeSpectralOnCompleteGraph) {
    const auto m = complete4(0.45);
    EXPECT_NEAR(dobrushin_condition(m).value, 3 * std::tanh(0.45), 1e-12);
    EXPECT_FALSE(dobrushin_condition(m).holds);
    EXPECT_TRUE(certify_spectral_binary(m).holds);
}

TEST(Dobrushin, TransposedUsesColumnSums) {
    BinaryPairwiseModel m(3, {{0, 1, 0.4}, {0, 2, 0.9}}, {0.5, 0.0, 0.0});
    const auto C = dobrushin_matrix(m);
    double rows = 0.0, cols = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        double r = 0.0, c = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            r += C(i, j);
            c += C(j, i);
        }
        rows = std::max(rows, r);
        cols = std::max(cols, c);
    }
    EXPECT_NEAR(dobrushin_condition(m).value, rows, 1e-15);
    const auto t = dobrushin_condition(m, {.max_states = 1 << 16, .transposed = true});
    EXPECT_NEAR(t.value, cols, 1e-15);
    EXPECT_EQ(t.detail.front(), "column sums");
}

TEST(Dobrushin, Errors) {
    EXPECT_THROW(dobrushin_matrix(testutil::uniform_loop(3, 0.0)), ModelError);
    EXPECT_THROW(dobrushin_matrix(FactorGraph({2, 2, 2}, {{{0, 1, 2}, std::vector<double>(8, 1.0)}})), ModelError);
    std::vector<Coupling> cs;
    for (VarId j = 1; j < 8; ++j) cs.push_back({0, j, 0.1});
    BinaryPairwiseModel star(8, cs, {});
    EXPECT_THROW(dobrushin_matrix(star, {.max_states = 16}), EnumerationCapError);
    EXPECT_THROW(dobrushin_matrix(from_ising(star), {.max_states = 16}), EnumerationCapError);
}

TEST(Simon, Values) {
    EXPECT_EQ(simon_condition(FactorGraph({2, 2}, {{{0, 1}, {1, 1, 1, 1}}})).value, 0.0);
    BinaryPairwiseModel chain(3, {{0, 1, 0.3}, {1, 2, -0.5}}, {1.0, 0.0, 0.0});
    EXPECT_NEAR(simon_condition(chain).value, 0.8, 1e-15);
    EXPECT_NEAR(simon_condition(from_ising(chain)).value, 0.8, 1e-12);
    EXPECT_TRUE(std::isinf(simon_condition(testutil::uniform_loop(3, 0.0)).value));
}

TEST(Simon, ImpliesPairwiseL1) {
    std::mt19937_64 rng(83);
    for (int trial = 0; trial < 5000; ++trial) {
        const auto m = testutil::random_binary(rng, 4, 0.7, 0.4, 1.0);
        if (simon_condition(m).holds) {
            EXPECT_TRUE(l1_condition_binary(m).holds);
        }
    }
}

TEST(Heskes, UniformFactorsAreFeasible) {
    const FactorGraph fg({2, 3, 2}, {{{0, 1}, std::vector<double>(6, 1.0)},
                                     {{1, 2}, std::vector<double>(6, 1.0)},
                                     {{0, 2}, std::vector<double>(4, 1.0)},
                                     {{1}, {1, 1, 1}}});
    const auto r = heskes_condition_detailed(fg);
    EXPECT_TRUE(r.certificate.holds);
    EXPECT_EQ(r.certificate.value, 0.0);
}

TEST(Heskes, IsolatedStrongPairIsFeasible) {
    BinaryPairwiseModel m(2, {{0, 1, 5.0}}, {});
    EXPECT_TRUE(heskes_condition(m).holds);
}

TEST(Heskes, CompleteGraphThreshold) {
    // symmetric allocation: x(1 + sigma) <= 1 and 3x >= 2, so sigma <= 1/2, J <= log(2)/4
    EXPECT_TRUE(heskes_condition(complete4(0.15)).holds);
    const auto strong = complete4(0.3);
    const auto c = heskes_condition(strong);
    EXPECT_FALSE(c.holds);
    EXPECT_GT(c.value, 0.0);
    EXPECT_TRUE(certify_spectral_binary(strong).holds);
}

TEST(Heskes, AllocationSatisfiesConstraintsWhenRechecked) {
    std::mt19937_64 rng(84);
    int feasible = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto fg = from_ising(testutil::random_binary(rng, 5, 0.5, 0.3, 0.8));
        const auto r = heskes_condition_detailed(fg);
        if (!r.certificate.holds) continue;
        ++feasible;
        std::vector<double> per_var(fg.num_vars(), 0.0);
        for (FactorId f = 0; f < fg.num_factors(); ++f) {
            const double sigma = heskes_sigma(fg, f).sigma;
            const auto& x = r.allocation[f];
            const double mx = *std::max_element(x.begin(), x.end());
            const double sum = std::accumulate(x.begin(), x.end(), 0.0);
            for (double v : x) EXPECT_GE(v, -1e-9);
            EXPECT_LE((1 - sigma) * mx + sigma * sum, 1.0 + 1e-9);
            for (std::size_t p = 0; p < x.size(); ++p) per_var[fg.factor(f).scope[p]] += x[p];
        }
        for (VarId v = 0; v < fg.num_vars(); ++v)
            EXPECT_GE(per_var[v], static_cast<double>(fg.factors_of(v).size()) - 1.0 - 1e-9);
    }
    EXPECT_GT(feasible, 10);
}

TEST(Heskes, VerdictInvariantUnderRelabeling) {
    std::mt19937_64 rng(85);
    for (int trial = 0; trial < 50; ++trial) {
        const auto m = testutil::random_binary(rng, 5, 0.6, 0.4, 0.8);
        const auto fg = from_ising(m);
        std::vector<VarId> perm(5);
        std::iota(perm.begin(), perm.end(), VarId{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Factor> fs;
        for (const Factor& f : fg.factors()) {
            Factor g = f;
            for (VarId& v : g.scope) v = perm[v];
            fs.push_back(g);
        }
        std::reverse(fs.begin(), fs.end());
        const FactorGraph relabeled(fg.cardinalities(), fs);
        EXPECT_EQ(heskes_condition(fg).holds, heskes_condition(relabeled).holds);
    }
}

TEST(Heskes, ZerosWarn) {
    const auto c = heskes_condition(testutil::uniform_loop(3, 0.0));
    ASSERT_FALSE(c.detail.empty());
    EXPECT_NE(c.detail.front().find("sigma set to 1"), std::string::npos);
}
