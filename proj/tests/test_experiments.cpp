#include <gtest/gtest.h>

#include <atomic>
#include <random>

#include "test_util.hpp"

using namespace lbpcert;

TEST(Seeds, DerivedSeedsAreStableAndDistinct) {
    EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
    EXPECT_NE(derive_seed(42, 7), derive_seed(42, 8));
    EXPECT_NE(derive_seed(42, 7), derive_seed(43, 7));
}

TEST(ParallelFor, VisitsEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Generators, UniformModel) {
    const auto m = gen_uniform_model(4, 0.0, 0.0);
    EXPECT_EQ(m.couplings().size(), 6u);
    const auto r = run_binary(m);
    for (double b : r.beliefs) EXPECT_DOUBLE_EQ(b, 0.5);
    EXPECT_NEAR(spectral_radius(build_matrix_binary(gen_uniform_model(4, -0.7, 0.3))), 2 * std::tanh(0.7), 1e-9);
    EXPECT_EQ(spectral_radius(build_matrix_binary(gen_uniform_model(2, 1.5, 0.0))), 0.0);
}

TEST(Generators, TorusShape) {
    EXPECT_EQ(gen_toroidal_grid(2, 2, 0.5, 1.0, 1).num_edges(), 8u);
    const auto g = gen_toroidal_grid(5, 4, 0.3, 0.0, 9);
    EXPECT_EQ(g.num_edges(), 2u * 2u * 20u);
    for (VarId i = 0; i < 20; ++i) EXPECT_EQ(g.degree(i), 4u);
    for (const auto& c : g.couplings()) EXPECT_EQ(c.J, 0.3);
    for (VarId i = 0; i < 20; ++i) EXPECT_EQ(g.field(i), 0.0);
    const auto a = gen_toroidal_grid(4, 4, 0.1, 0.7, 123), b = gen_toroidal_grid(4, 4, 0.1, 0.7, 123);
    for (std::size_t k = 0; k < a.couplings().size(); ++k) EXPECT_EQ(a.couplings()[k].J, b.couplings()[k].J);
    EXPECT_THROW(gen_toroidal_grid(1, 4, 0.1, 0.1, 1), std::invalid_argument);
}

TEST(Generators, FullyRandomDeterministicAndShaped) {
    const auto a = gen_fully_random(4, 5), b = gen_fully_random(4, 5);
    ASSERT_EQ(a.couplings().size(), 6u);
    for (std::size_t k = 0; k < 6; ++k) EXPECT_EQ(a.couplings()[k].J, b.couplings()[k].J);
    EXPECT_EQ(a.fields(), b.fields());
    EXPECT_EQ(gen_fully_random(2, 1).couplings().size(), 1u);
}

TEST(Generators, FullyRandomMoments) {
    // J_ij = J0 + |s| z has mean 0 and variance 2; so does theta_i
    const std::size_t draws = 100000;
    double sj = 0, sj2 = 0, sj4 = 0, st = 0, st2 = 0;
    for (std::size_t k = 0; k < draws; ++k) {
        const auto m = gen_fully_random(3, derive_seed(2024, k));
        const double J = m.couplings()[0].J, t = m.field(0);
        sj += J;
        sj2 += J * J;
        sj4 += J * J * J * J;
        st += t;
        st2 += t * t;
    }
    const double n = static_cast<double>(draws);
    EXPECT_NEAR(sj / n, 0.0, 3 * std::sqrt(2.0 / n));
    EXPECT_NEAR(st / n, 0.0, 3 * std::sqrt(2.0 / n));
    const double var_sd = std::sqrt((sj4 / n - 4.0) / n);
    EXPECT_NEAR(sj2 / n, 2.0, 3 * var_sd);
    EXPECT_NEAR(st2 / n, 2.0, 3 * var_sd);
}

TEST(Empirical, LoopTreeAndCertified) {
    EXPECT_FALSE(empirical_convergence(testutil::uniform_loop(4, 0.0), {.inits = 3, .seed = 0, .run = {}, .agreement = 1e-6}).converged);
    std::mt19937_64 rng(91);
    EXPECT_TRUE(empirical_convergence(testutil::random_tree(rng)).converged);
    BinaryPairwiseModel chain(4, {{0, 1, 3.0}, {1, 2, -2.0}, {2, 3, 4.0}}, {0.1, 0.0, 0.0, -0.3});
    EXPECT_TRUE(empirical_convergence(chain).converged);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = gen_fully_random(4, derive_seed(7, trial));
        if (certify_improved(m).holds) {
            EXPECT_TRUE(empirical_convergence(m).converged);
        }
    }
}

TEST(Bounds, DispatchAndUnknownName) {
    const auto m = gen_uniform_model(4, 0.2, 0.5);
    for (const auto& b : known_bounds()) EXPECT_EQ(evaluate_bound(b, m).name, b);
    EXPECT_THROW(evaluate_bound("bogus", m), std::invalid_argument);
}

TEST(CriticalRadius, StepFunction) {
    const auto r = critical_radius([](double x) { return x < 0.3141; }, 1.0, 1e-6);
    EXPECT_NEAR(r.r, 0.3141, 1e-6);
    EXPECT_FALSE(r.saturated);
    EXPECT_TRUE(critical_radius([](double) { return true; }, 2.0, 1e-3).saturated);
    EXPECT_THROW(critical_radius([](double x) { return x < 0.2 || x > 0.6; }, 1.0, 1e-6), NonMonotoneError);
}

TEST(CriticalRadius, UniformFerromagnetOnTorus) {
    const auto inst = make_torus_instance(6, 6, 3);
    const auto r = critical_radius("spectral", 0.0, 1e-7, inst, 1.2);
    EXPECT_NEAR(r.r, std::atanh(1.0 / 3.0), 1e-7);
    EXPECT_NEAR(r.r, 0.34657, 1e-5);
}

TEST(Plane, SpectralFlipAndFieldHelp) {
    const std::vector<double> Js{0.0, 0.5, 0.56, 0.6};
    const std::vector<double> thetas{0.0, 2.0};
    BoundSettings s;
    s.m = 5;
    const auto rows = sweep_plane(4, Js, thetas, {"spectral", "improved", "l1", "empirical"}, s, 2);
    ASSERT_EQ(rows.size(), Js.size() * thetas.size() * 4);
    auto find = [&](double J, double th, const std::string& b) {
        for (const auto& r : rows)
            if (r.J == J && r.theta == th && r.bound == b) return r;
        ADD_FAILURE() << "missing row";
        return PlaneRow{};
    };
    // 2 tanh J = 1 at J = atanh(1/2) = 0.5493
    EXPECT_TRUE(find(0.5, 0.0, "spectral").holds);
    EXPECT_FALSE(find(0.56, 0.0, "spectral").holds);
    EXPECT_FALSE(find(0.6, 2.0, "spectral").holds);
    EXPECT_TRUE(find(0.6, 2.0, "improved").holds);
    for (const auto& r : rows)
        if (r.J == 0.0) {
            EXPECT_TRUE(r.holds) << r.bound;
        }
}

TEST(WinTable, DiagonalDominatesAndThreadsDoNotMatter) {
    const std::vector<std::string> bounds{"l1", "spectral", "improved", "dobrushin", "heskes", "empirical"};
    const auto a = win_table(300, 4, 42, bounds, {}, 1);
    const auto b = win_table(300, 4, 42, bounds, {}, 3);
    EXPECT_EQ(a.counts, b.counts);
    for (std::size_t i = 0; i < bounds.size(); ++i)
        for (std::size_t j = 0; j < bounds.size(); ++j) EXPECT_GE(a.counts[i][i], a.counts[i][j]);
    // improved never loses to spectral; empirical never loses to any certificate
    EXPECT_EQ(a.counts[1][2], 0u);
    for (std::size_t i = 0; i + 1 < bounds.size(); ++i) EXPECT_EQ(a.counts[i][5], 0u);
    ASSERT_EQ(a.trials.size(), 300u);
    EXPECT_EQ(a.trials[17].seed, derive_seed(42, 17));
}

TEST(Polar, SmallRunShapesAndOrdering) {
    PolarOptions o;
    o.width = 4;
    o.height = 4;
    o.instances = 3;
    o.angles = 2;
    o.tol = 1e-3;
    o.seed = 5;
    const auto rows = polar_experiment({"l1", "spectral"}, o);
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t a = 0; a < 2; ++a) {
        EXPECT_EQ(rows[2 * a].bound, "l1");
        EXPECT_EQ(rows[2 * a].radii.size(), 3u);
        for (std::size_t k = 0; k < 3; ++k) EXPECT_LE(rows[2 * a].radii[k], rows[2 * a + 1].radii[k] + 1e-3);
    }
}
