#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "newsrank/error.hpp"
#include "newsrank/stats.hpp"

using namespace newsrank;
using namespace newsrank::stats;

// Reference values below come from tests/oracles/stats_oracle.py (scipy).

namespace {

std::vector<double> normal_sample(std::uint64_t seed, std::size_t n, double mu = 0.0, double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mu, sd);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

std::vector<double> exponential_sample(std::uint64_t seed, std::size_t n) {
    std::mt19937_64 rng(seed);
    std::exponential_distribution<double> d(1.0);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

const std::vector<double> kA{1, 2, 3, 4, 5};
const std::vector<double> kB{2, 3, 4, 5, 6};
const std::vector<double> kX{2.1, 3.4, 1.9, 5.6, 4.4, 3.3, 2.8};
const std::vector<double> kY{6.0, 7.5, 1.0, 9.2, 3.3, 12.0};

} // namespace

TEST(TTest, StudentReferencePair) {
    const auto r = t_test(kA, kB, TVariant::Student);
    EXPECT_NEAR(r.statistic, -1.0, 1e-12);
    EXPECT_NEAR(r.p_value, 0.34659350708733416, 1e-12);
    EXPECT_NEAR(r.effect_size, -0.632455532033675866, 1e-12);
    EXPECT_EQ(r.effect_kind, EffectKind::CohenD);
    EXPECT_EQ(r.n_a, 5u);
}

TEST(TTest, StudentAndWelchUnequalSamples) {
    const auto s = t_test(kX, kY, TVariant::Student);
    EXPECT_NEAR(s.statistic, -1.9813607614973885, 1e-12);
    EXPECT_NEAR(s.p_value, 0.07309905943894526, 1e-12);
    EXPECT_NEAR(s.effect_size, -1.1023273655318857, 1e-12);
    const auto w = t_test(kX, kY, TVariant::Welch);
    EXPECT_NEAR(w.statistic, -1.8506528654044254, 1e-12);
    EXPECT_NEAR(w.p_value, 0.11440042367062474, 1e-10);
    EXPECT_NEAR(w.effect_size, -1.0611003785895894, 1e-12);
}

TEST(TTest, IdenticalSamples) {
    const auto r = t_test(kX, kX, TVariant::Welch);
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_DOUBLE_EQ(r.p_value, 1.0);
    EXPECT_DOUBLE_EQ(r.effect_size, 0.0);
}

TEST(TTest, OneStandardDeviationShift) {
    const auto b = normal_sample(1, 20000);
    std::vector<double> a = b;
    const double sd = std::sqrt(variance(b));
    for (auto& v : a) v += sd;
    EXPECT_NEAR(t_test(a, b, TVariant::Student).effect_size, 1.0, 0.05);
}

TEST(TTest, SwapNegatesEffectKeepsP) {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto a = normal_sample(s, 12, 0.3);
        const auto b = normal_sample(s + 100, 9);
        for (TVariant v : {TVariant::Student, TVariant::Welch}) {
            const auto ab = t_test(a, b, v);
            const auto ba = t_test(b, a, v);
            EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
            EXPECT_NEAR(ab.effect_size, -ba.effect_size, 1e-12);
        }
    }
}

TEST(TTest, Preconditions) {
    EXPECT_THROW(t_test(std::vector<double>{1}, kA, TVariant::Student), InvalidArgument);
    EXPECT_THROW(t_test(std::vector<double>{3, 3, 3}, std::vector<double>{3, 3}, TVariant::Welch), InvalidArgument);
}

TEST(MannWhitney, ExactSmallSamples) {
    const auto r = mann_whitney_u(std::vector<double>{1, 2}, std::vector<double>{3, 4});
    EXPECT_DOUBLE_EQ(r.statistic, 0.0);
    EXPECT_NEAR(r.p_value, 1.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(r.effect_size, -1.0);
    EXPECT_EQ(r.effect_kind, EffectKind::CliffsDelta);
    const auto q = mann_whitney_u(std::vector<double>{1, 2, 3, 5}, std::vector<double>{4, 6, 7});
    EXPECT_DOUBLE_EQ(q.statistic, 1.0);
    EXPECT_NEAR(q.p_value, 4.0 / 35.0, 1e-12);
    const auto w = mann_whitney_u(std::vector<double>{1.5, 2.5, 3.5, 8}, std::vector<double>{4, 5, 6, 7, 9});
    EXPECT_DOUBLE_EQ(w.statistic, 4.0);
    EXPECT_NEAR(w.p_value, 0.19047619047619047, 1e-12);
}

TEST(MannWhitney, NormalApproximationWithTies) {
    const std::vector<double> a{1, 2, 2, 3, 5, 7, 8, 9};
    const std::vector<double> b{2, 4, 4, 6, 10, 11, 12, 13, 14};
    const auto r = mann_whitney_u(a, b);
    EXPECT_DOUBLE_EQ(r.statistic, 17.0);
    EXPECT_NEAR(r.p_value, 0.07415716828482817, 1e-12);
    const auto xy = mann_whitney_u(kX, kY);
    EXPECT_DOUBLE_EQ(xy.statistic, 10.5);
    EXPECT_NEAR(xy.p_value, 0.1525627236365771, 1e-12);
}

TEST(MannWhitney, DeltaBoundaries) {
    EXPECT_DOUBLE_EQ(mann_whitney_u(kX, kX).effect_size, 0.0);
    EXPECT_DOUBLE_EQ(cliffs_delta(std::vector<double>{10, 11, 12}, std::vector<double>{1, 2}), 1.0);
}

TEST(MannWhitney, DeltaMatchesUAndSwapSymmetry) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> d(0, 9);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> a(7 + trial % 5);
        std::vector<double> b(5 + trial % 7);
        for (auto& v : a) v = d(rng);
        for (auto& v : b) v = d(rng);
        const auto ab = mann_whitney_u(a, b);
        const auto ba = mann_whitney_u(b, a);
        const double nn = static_cast<double>(a.size() * b.size());
        EXPECT_NEAR(ab.effect_size, 2.0 * ab.statistic / nn - 1.0, 1e-12);
        EXPECT_NEAR(ab.effect_size, cliffs_delta(a, b), 1e-12);
        EXPECT_NEAR(ab.p_value, ba.p_value, 1e-12);
        EXPECT_NEAR(ab.effect_size, -ba.effect_size, 1e-12);
        EXPECT_GE(ab.p_value, 0.0);
        EXPECT_LE(ab.p_value, 1.0);
    }
}

TEST(MannWhitney, ExactAgreesWithNormalAtFifteen) {
    for (std::uint64_t s = 0; s < 100; ++s) {
        const auto a = normal_sample(s, 15, 0.4);
        const auto b = normal_sample(s + 1000, 15);
        const double pe = mann_whitney_u(a, b, MwuMethod::Exact).p_value;
        const double pn = mann_whitney_u(a, b, MwuMethod::Normal).p_value;
        EXPECT_LE(std::abs(pe - pn), 0.02) << "seed " << s;
    }
}

TEST(ChiSquared, ReferenceTable) {
    const auto r = chi_squared(std::vector<double>{50, 30, 20}, std::vector<double>{45, 35, 20});
    EXPECT_NEAR(r.statistic, 0.6477732793522267, 1e-12);
    EXPECT_NEAR(r.p_value, 0.7233322349088317, 1e-12);
    EXPECT_NEAR(r.effect_size, 0.05691103932244722, 1e-12);
    EXPECT_EQ(r.effect_kind, EffectKind::CramersV);
}

TEST(ChiSquared, Boundaries) {
    const auto same = chi_squared(std::vector<double>{5, 7, 9}, std::vector<double>{5, 7, 9});
    EXPECT_NEAR(same.statistic, 0.0, 1e-12);
    EXPECT_NEAR(same.p_value, 1.0, 1e-12);
    EXPECT_NEAR(same.effect_size, 0.0, 1e-12);
    const auto diag = chi_squared(std::vector<double>{10, 0}, std::vector<double>{0, 10});
    EXPECT_NEAR(diag.statistic, 20.0, 1e-12);
    EXPECT_NEAR(diag.p_value, 7.744216431044088e-06, 1e-15);
    EXPECT_NEAR(diag.effect_size, 1.0, 1e-12);
    EXPECT_THROW(chi_squared(std::vector<double>{1, 0}, std::vector<double>{2, 0}), InvalidArgument);
    EXPECT_THROW(chi_squared(std::vector<double>{1}, std::vector<double>{2}), InvalidArgument);
    EXPECT_THROW(chi_squared(std::vector<double>{1, 2}, std::vector<double>{2, 1, 3}), InvalidArgument);
}

TEST(Jsd, ReferenceValues) {
    const std::vector<double> p{0.5, 0.5};
    const std::vector<double> q{1.0, 0.0};
    EXPECT_NEAR(js_divergence(p, q), 0.3112781244591328, 1e-12);
    EXPECT_NEAR(js_divergence(std::vector<double>{0.2, 0.3, 0.5}, std::vector<double>{0.5, 0.3, 0.2}),
                0.0958156020033584, 1e-12);
    EXPECT_DOUBLE_EQ(js_divergence(p, p), 0.0);
    EXPECT_NEAR(js_divergence(std::vector<double>{1, 0}, std::vector<double>{0, 1}), 1.0, 1e-12);
    EXPECT_THROW(js_divergence(std::vector<double>{0.5, 0.6}, q), InvalidArgument);
    EXPECT_THROW(js_divergence(p, std::vector<double>{1.0}), InvalidArgument);
}

TEST(Jsd, SymmetricAndBounded) {
    std::mt19937_64 rng(5);
    std::gamma_distribution<double> g(0.7, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(6), q(6);
        double sp = 0, sq = 0;
        for (int i = 0; i < 6; ++i) {
            p[i] = g(rng);
            q[i] = g(rng);
            sp += p[i];
            sq += q[i];
        }
        for (int i = 0; i < 6; ++i) {
            p[i] /= sp;
            q[i] /= sq;
        }
        const double d = js_divergence(p, q);
        EXPECT_NEAR(d, js_divergence(q, p), 1e-12);
        EXPECT_GE(d, 0.0);
        EXPECT_LE(d, 1.0);
        EXPECT_NEAR(js_divergence(p, p), 0.0, 1e-12);
    }
}

TEST(Permutation, DisjointSectionsReachMinimum) {
    const std::vector<std::uint32_t> a(100, 0);
    const std::vector<std::uint32_t> b(100, 1);
    for (PermutationMethod m : {PermutationMethod::CountSampling, PermutationMethod::EventShuffle}) {
        PermutationOptions o;
        o.permutations = 999;
        o.seed = 4;
        o.method = m;
        const auto r = permutation_test_jsd(a, b, 2, o);
        EXPECT_NEAR(r.statistic, 1.0, 1e-12);
        EXPECT_DOUBLE_EQ(r.p_value, 1.0 / 1000.0);
    }
}

TEST(Permutation, SmallDisjointMatchesExhaustiveEnumeration) {
    // Three against three: only 2 of the C(6,3) = 20 splits are disjoint.
    const std::vector<std::uint32_t> a{0, 0, 0};
    const std::vector<std::uint32_t> b{1, 1, 1};
    PermutationOptions o;
    o.permutations = 40000;
    o.seed = 9;
    const auto r = permutation_test_jsd(a, b, 2, o);
    EXPECT_NEAR(r.p_value, 0.1, 0.01);
}

TEST(Permutation, ZeroPermutationsGivePOne) {
    PermutationOptions o;
    o.permutations = 0;
    const std::vector<std::uint32_t> a{0, 1, 1};
    const std::vector<std::uint32_t> b{1, 0, 2};
    EXPECT_DOUBLE_EQ(permutation_test_jsd(a, b, 3, o).p_value, 1.0);
}

TEST(Permutation, DeterministicAndThreadIndependent) {
    std::mt19937_64 rng(1);
    std::discrete_distribution<int> sect{5, 3, 2, 1};
    std::vector<std::uint32_t> a(400), b(350);
    for (auto& v : a) v = static_cast<std::uint32_t>(sect(rng));
    for (auto& v : b) v = static_cast<std::uint32_t>(sect(rng));
    for (PermutationMethod m : {PermutationMethod::CountSampling, PermutationMethod::EventShuffle}) {
        PermutationOptions o;
        o.permutations = 500;
        o.seed = 77;
        o.method = m;
        const auto par = permutation_test_jsd(a, b, 4, o);
        o.execution = Execution::Serial;
        const auto ser = permutation_test_jsd(a, b, 4, o);
        EXPECT_EQ(par.p_value, ser.p_value);
        EXPECT_EQ(par.statistic, ser.statistic);
    }
}

TEST(Permutation, NullCalibration) {
    int above = 0;
    for (std::uint64_t s = 0; s < 50; ++s) {
        std::mt19937_64 rng(s);
        std::discrete_distribution<int> sect{4, 3, 2, 1, 1};
        std::vector<std::uint32_t> a(300), b(300);
        for (auto& v : a) v = static_cast<std::uint32_t>(sect(rng));
        for (auto& v : b) v = static_cast<std::uint32_t>(sect(rng));
        PermutationOptions o;
        o.permutations = 400;
        o.seed = s;
        above += permutation_test_jsd(a, b, 5, o).p_value > 0.05;
    }
    EXPECT_GE(above, 45);
}

TEST(Hypergeometric, MeanMatches) {
    Rng rng(3);
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        const auto k = sample_hypergeometric(100, 30, 20, rng);
        ASSERT_LE(k, 20u);
        sum += static_cast<double>(k);
    }
    EXPECT_NEAR(sum / n, 6.0, 0.05);
    EXPECT_EQ(sample_hypergeometric(10, 10, 4, rng), 4u);
    EXPECT_EQ(sample_hypergeometric(10, 0, 4, rng), 0u);
}

TEST(Shapiro, ReferenceValues) {
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i) grid.push_back(i);
    auto r = shapiro_wilk(grid);
    EXPECT_NEAR(r.w, 0.9574505592737159, 1e-6);
    EXPECT_NEAR(r.p_value, 0.2662326827959217, 1e-4);
    r = shapiro_wilk(std::vector<double>{1, 2, 4});
    EXPECT_NEAR(r.w, 0.9642857142857142, 1e-9);
    EXPECT_NEAR(r.p_value, 0.6368868450289689, 1e-6);
    r = shapiro_wilk(kX);
    EXPECT_NEAR(r.w, 0.9401366781979513, 1e-6);
    EXPECT_NEAR(r.p_value, 0.6399513746153818, 1e-4);
    r = shapiro_wilk(std::vector<double>{0.1, 0.2, 0.25, 0.4, 0.9, 1.3, 2.2, 3.5, 5.0, 8.0, 12.0, 20.0});
    EXPECT_NEAR(r.w, 0.7562358728463752, 1e-6);
    EXPECT_NEAR(r.p_value, 0.0031069774481458437, 1e-5);
    r = shapiro_wilk(std::vector<double>{0.00123, 0.298746, -0.274138, -0.890592, -0.454671, -0.991647, 0.060144,
                                         1.340215, -0.492207, -0.620475, 0.489842, 0.356887, 0.105414, -0.930468,
                                         -0.029252, 0.695303, -1.344215, -0.457616, -1.901223, -1.289538});
    EXPECT_NEAR(r.w, 0.9921231778323484, 1e-6);
    EXPECT_NEAR(r.p_value, 0.9996440430491582, 1e-4);
}

TEST(Shapiro, NullCalibrationAndPowerOrdering) {
    int accept = 0;
    int grid_rejects = 0;
    int exp_rejects = 0;
    std::vector<double> grid;
    for (int i = 1; i <= 30; ++i) grid.push_back(i);
    for (std::uint64_t s = 0; s < 100; ++s) {
        accept += shapiro_wilk(normal_sample(s, 50)).p_value > 0.05;
        std::vector<double> jittered = grid;
        std::mt19937_64 rng(s);
        for (auto& v : jittered) v += std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
        grid_rejects += shapiro_wilk(jittered).p_value < 0.05;
        exp_rejects += shapiro_wilk(exponential_sample(s, 30)).p_value < 0.05;
    }
    EXPECT_GE(accept, 90);
    EXPECT_LT(grid_rejects, exp_rejects);
}

TEST(Shapiro, Preconditions) {
    EXPECT_THROW(shapiro_wilk(std::vector<double>{1, 2}), InvalidArgument);
    EXPECT_THROW(shapiro_wilk(std::vector<double>{4, 4, 4, 4}), InvalidArgument);
    EXPECT_THROW(shapiro_wilk(std::vector<double>(5001, 1.0)), InvalidArgument);
}

TEST(SelectTest, RuleTrace) {
    const auto a = normal_sample(10, 60);
    const auto b = normal_sample(11, 60);
    EXPECT_EQ(select_test(a, b).kind, TestKind::Student);
    const auto wide = normal_sample(12, 60, 0.0, 2.0);
    const auto choice = select_test(a, wide);
    EXPECT_EQ(choice.kind, TestKind::Welch);
    EXPECT_GE(choice.variance_ratio, 2.0);
    EXPECT_EQ(select_test(exponential_sample(13, 60), b).kind, TestKind::MannWhitney);
    EXPECT_THROW(select_test(std::vector<double>{1, 2}, b), InvalidArgument);
}

TEST(SelectTest, LargeSamplesAreSubsampled) {
    const auto a = normal_sample(20, 8000);
    const auto b = normal_sample(21, 6000);
    const auto c = select_test(a, b);
    EXPECT_GE(c.shapiro_p_a, 0.0);
    EXPECT_LE(c.shapiro_p_a, 1.0);
}
