#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "newsrank/execution.hpp"
#include "newsrank/io.hpp"
#include "newsrank/random.hpp"

namespace newsrank::stats {

enum class EffectKind { CohenD, CliffsDelta, CramersV, JSD };

std::string_view to_string(EffectKind kind) noexcept;

struct TestResult {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    double effect_size = 0.0;
    EffectKind effect_kind = EffectKind::CohenD;
    std::size_t n_a = 0;
    std::size_t n_b = 0;
};

Json to_json(const TestResult& result);

double mean(std::span<const double> x);
// Unbiased (n - 1) sample variance.
double variance(std::span<const double> x);

struct ShapiroResult {
    double w = 1.0;
    double p_value = 1.0;
};

// Royston's approximation (AS R94). Requires 3 <= n <= 5000 and a non-zero
// range; throws InvalidArgument otherwise.
ShapiroResult shapiro_wilk(std::span<const double> sample);

enum class TestKind { Student, Welch, MannWhitney };

std::string_view to_string(TestKind kind) noexcept;

struct TestChoice {
    TestKind kind = TestKind::MannWhitney;
    double shapiro_p_a = 0.0;
    double shapiro_p_b = 0.0;
    double variance_ratio = 1.0; // larger over smaller variance
};

// Both samples normal (Shapiro p > alpha) and variance ratio < 2: Student.
// Both normal, ratio >= 2: Welch. Otherwise Mann-Whitney U. Samples larger
// than 5000 are checked on an evenly spaced subsample of 5000 values.
// Throws InvalidArgument for n < 3 or a constant sample.
TestChoice select_test(std::span<const double> a, std::span<const double> b, double alpha = 0.05);

enum class TVariant { Student, Welch };

// Two-sided t-test with Cohen's d (pooled SD for Student, root mean variance
// for Welch). Throws InvalidArgument for n < 2 or zero variance.
TestResult t_test(std::span<const double> a, std::span<const double> b, TVariant variant);

enum class MwuMethod { Auto, Exact, Normal };

// Mann-Whitney U of `a` (mid-ranks for ties) with Cliff's delta as effect.
// Auto uses the exact permutation distribution when n_a * n_b <= 20 and the
// tie- and continuity-corrected normal approximation otherwise. Two-sided.
TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b,
                          MwuMethod method = MwuMethod::Auto);

// (#(a > b) - #(a < b)) / (n_a n_b), counted directly.
double cliffs_delta(std::span<const double> a, std::span<const double> b);

// Pearson chi-squared on a 2 x k table with Cramer's V. Throws
// InvalidArgument for k < 2, mismatched rows or a zero row or column sum.
TestResult chi_squared(std::span<const double> row_a, std::span<const double> row_b);

// Base-2 Jensen-Shannon divergence, in [0, 1]. Inputs must be distributions
// over the same support (sum 1 within 1e-9).
double js_divergence(std::span<const double> p, std::span<const double> q);

// Normalized category histogram of integer labels.
std::vector<double> label_distribution(std::span<const std::uint32_t> labels, std::size_t categories);

enum class PermutationMethod {
    // Shuffle the pooled labels and split at the original sizes.
    EventShuffle,
    // Draw the split's category counts from the multivariate hypergeometric
    // law, which is the exact distribution of the shuffled split's counts.
    CountSampling,
};

struct PermutationOptions {
    std::size_t permutations = 10000;
    std::uint64_t seed = 0;
    PermutationMethod method = PermutationMethod::CountSampling;
    Execution execution = Execution::Parallel;
};

// Observed JSD between the label distributions of A and B; p-value
// (1 + #{perm >= observed}) / (1 + permutations). Permutation i draws from a
// stream derived from (seed, i), so results do not depend on thread count.
TestResult permutation_test_jsd(std::span<const std::uint32_t> labels_a, std::span<const std::uint32_t> labels_b,
                                std::size_t categories, const PermutationOptions& options);

// Hypergeometric draw: successes among `draws` items taken without
// replacement from `population` items of which `successes` are marked.
std::uint64_t sample_hypergeometric(std::uint64_t population, std::uint64_t successes, std::uint64_t draws,
                                    Rng& rng);

struct KMeansRun {
    std::vector<int> labels;
    std::vector<double> centers;
    double inertia = 0.0;
    std::vector<double> inertia_history; // after every Lloyd iteration
};

// One-dimensional k-means with k-means++ seeding and Lloyd iterations.
KMeansRun kmeans_1d(std::span<const double> x, int k, Rng& rng, int max_iterations = 100);

double calinski_harabasz(std::span<const double> x, std::span<const int> labels, int k);
double davies_bouldin(std::span<const double> x, std::span<const int> labels, int k);

struct ClusterResult {
    std::vector<int> labels; // per user; cluster means ascend with the label
    int chosen_k = 1;
    bool degenerate = false;
    std::map<int, double> calinski_harabasz;
    std::map<int, double> davies_bouldin;
    std::vector<double> centers; // on the log(1 + clicks) scale
};

// Activity levels from per-user click counts: k-means on log(1 + clicks)
// for every candidate k (best of `restarts` seeded runs), choosing the k that
// maximizes Calinski-Harabasz. Equal counts give a degenerate single cluster.
// Throws InvalidArgument when there are fewer users than a candidate k.
ClusterResult activity_clusters(std::span<const double> clicks_per_user, std::span<const int> k_candidates,
                                std::uint64_t seed, int restarts = 50,
                                Execution execution = Execution::Parallel);

} // namespace newsrank::stats
