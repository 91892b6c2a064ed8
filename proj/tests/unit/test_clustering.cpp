#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "newsrank/error.hpp"
#include "newsrank/stats.hpp"

using namespace newsrank;
using namespace newsrank::stats;

namespace {
const std::vector<double> kPoints{0.0, 0.1, 0.2, 5.0, 5.1, 5.3, 9.9, 10.0};
const std::vector<int> kLabels{0, 0, 0, 1, 1, 1, 2, 2};
} // namespace

// sklearn calinski_harabasz_score / davies_bouldin_score on the same points.
// sklearn's DB goes through the expanded-square distance formula and is off
// by about 6e-11; the direct computation gives 0.0346962833958411.
TEST(ClusterIndices, ReferenceValues) {
    EXPECT_NEAR(calinski_harabasz(kPoints, kLabels, 3), 4139.593023255818, 1e-8);
    EXPECT_NEAR(davies_bouldin(kPoints, kLabels, 3), 0.034696283453984414, 1e-9);
    EXPECT_NEAR(davies_bouldin(kPoints, kLabels, 3), 0.0346962833958411, 1e-13);
}

TEST(KMeans, SeparatesObviousGroups) {
    const std::vector<double> x{0.0, 0.1, 0.2, 5.0, 5.1, 5.3, 9.9, 10.0};
    Rng rng(1);
    const auto run = kmeans_1d(x, 3, rng);
    EXPECT_EQ(run.labels[0], run.labels[2]);
    EXPECT_EQ(run.labels[3], run.labels[5]);
    EXPECT_EQ(run.labels[6], run.labels[7]);
    EXPECT_EQ(std::set<int>(run.labels.begin(), run.labels.end()).size(), 3u);
}

TEST(KMeans, InertiaNeverIncreases) {
    std::mt19937_64 gen(4);
    std::lognormal_distribution<double> d(1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> x(300);
        for (auto& v : x) v = std::log1p(d(gen));
        Rng rng(trial);
        const auto run = kmeans_1d(x, 4, rng);
        ASSERT_FALSE(run.inertia_history.empty());
        for (std::size_t i = 1; i < run.inertia_history.size(); ++i) {
            EXPECT_LE(run.inertia_history[i], run.inertia_history[i - 1] + 1e-9);
        }
        EXPECT_NEAR(run.inertia, run.inertia_history.back(), 1e-9);
    }
}

TEST(KMeans, Preconditions) {
    Rng rng(0);
    EXPECT_THROW(kmeans_1d(std::vector<double>{1, 2}, 3, rng), InvalidArgument);
    EXPECT_THROW(kmeans_1d(std::vector<double>{1, 2}, 0, rng), InvalidArgument);
}

TEST(ActivityClusters, PureGroups) {
    const std::vector<double> clicks{1, 1, 1, 50, 50, 50, 200, 200, 200};
    const std::vector<int> ks{3};
    const auto r = activity_clusters(clicks, ks, 7);
    ASSERT_FALSE(r.degenerate);
    EXPECT_EQ(r.chosen_k, 3);
    EXPECT_EQ(r.labels, (std::vector<int>{0, 0, 0, 1, 1, 1, 2, 2, 2}));
    ASSERT_EQ(r.centers.size(), 3u);
    EXPECT_NEAR(r.centers[0], std::log1p(1.0), 1e-12);
    EXPECT_NEAR(r.centers[2], std::log1p(200.0), 1e-12);
}

TEST(ActivityClusters, ChoosesByCalinskiHarabasz) {
    // Two well separated log-normal blobs; few distinct values would let a
    // large k drive the within-cluster spread to zero.
    std::mt19937_64 gen(2);
    std::normal_distribution<double> noise(0.0, 0.15);
    std::vector<double> clicks;
    for (int i = 0; i < 60; ++i) clicks.push_back(std::expm1(std::log1p(2.0) + noise(gen)));
    for (int i = 0; i < 60; ++i) clicks.push_back(std::expm1(std::log1p(60.0) + noise(gen)));
    const std::vector<int> ks{2, 3, 4, 5};
    const auto r = activity_clusters(clicks, ks, 3);
    for (int k : ks) ASSERT_TRUE(r.calinski_harabasz.count(k));
    for (int k : ks) EXPECT_LE(r.calinski_harabasz.at(k), r.calinski_harabasz.at(r.chosen_k));
    // sklearn KMeans(n_init=50) + calinski_harabasz_score gives 10755.42 at k = 2.
    EXPECT_NEAR(r.calinski_harabasz.at(2), 10755.416641032542, 1e-6);
    EXPECT_EQ(r.davies_bouldin.size(), ks.size());
}

TEST(ActivityClusters, EqualCountsAreDegenerate) {
    const std::vector<double> clicks(12, 4.0);
    const std::vector<int> ks{2, 3};
    const auto r = activity_clusters(clicks, ks, 1);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.chosen_k, 1);
    for (int l : r.labels) EXPECT_EQ(l, 0);
}

TEST(ActivityClusters, DeterministicAcrossExecution) {
    std::mt19937_64 gen(8);
    std::geometric_distribution<int> d(0.05);
    std::vector<double> clicks(500);
    for (auto& v : clicks) v = 1 + d(gen);
    const std::vector<int> ks{2, 3, 4, 5, 6};
    const auto a = activity_clusters(clicks, ks, 11, 20, Execution::Parallel);
    const auto b = activity_clusters(clicks, ks, 11, 20, Execution::Serial);
    const auto c = activity_clusters(clicks, ks, 11, 20, Execution::Parallel);
    EXPECT_EQ(a.labels, b.labels);
    EXPECT_EQ(a.labels, c.labels);
    EXPECT_EQ(a.chosen_k, b.chosen_k);
    EXPECT_EQ(a.calinski_harabasz, b.calinski_harabasz);
}

TEST(ActivityClusters, TooFewUsers) {
    const std::vector<double> clicks{1, 5};
    const std::vector<int> ks{3};
    EXPECT_THROW(activity_clusters(clicks, ks, 0), InvalidArgument);
}
