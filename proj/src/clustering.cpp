#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "newsrank/error.hpp"
#include "newsrank/stats.hpp"

namespace newsrank::stats {

namespace {

int nearest(double v, const std::vector<double>& centers) {
    int best = 0;
    double best_d = std::abs(v - centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d = std::abs(v - centers[c]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(c);
        }
    }
    return best;
}

} // namespace

KMeansRun kmeans_1d(std::span<const double> x, int k, Rng& rng, int max_iterations) {
    if (k < 1) throw InvalidArgument("k must be >= 1");
    const std::size_t n = x.size();
    if (n < static_cast<std::size_t>(k)) throw InvalidArgument("fewer points than clusters");

    // k-means++ seeding.
    std::vector<double> centers;
    centers.reserve(k);
    centers.push_back(x[uniform_index(rng, n)]);
    std::vector<double> d2(n);
    while (centers.size() < static_cast<std::size_t>(k)) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - centers[nearest(x[i], centers)];
            d2[i] = d * d;
            total += d2[i];
        }
        if (total <= 0.0) {
            centers.push_back(x[uniform_index(rng, n)]);
            continue;
        }
        double target = uniform01(rng) * total;
        std::size_t pick = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= d2[i];
            if (target < 0.0) {
                pick = i;
                break;
            }
        }
        centers.push_back(x[pick]);
    }

    KMeansRun run;
    run.labels.assign(n, -1);
    std::vector<double> sum(k);
    std::vector<std::size_t> count(k);
    for (int it = 0; it < max_iterations; ++it) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            const int c = nearest(x[i], centers);
            if (c != run.labels[i]) {
                run.labels[i] = c;
                changed = true;
            }
        }
        std::fill(sum.begin(), sum.end(), 0.0);
        std::fill(count.begin(), count.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            sum[run.labels[i]] += x[i];
            ++count[run.labels[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (count[c] > 0) centers[c] = sum[c] / static_cast<double>(count[c]);
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - centers[run.labels[i]];
            inertia += d * d;
        }
        run.inertia_history.push_back(inertia);
        run.inertia = inertia;
        if (!changed) break;
    }
    run.centers = std::move(centers);
    return run;
}

double calinski_harabasz(std::span<const double> x, std::span<const int> labels, int k) {
    const std::size_t n = x.size();
    if (k < 2 || n <= static_cast<std::size_t>(k)) throw InvalidArgument("Calinski-Harabasz needs 2 <= k < n");
    const double grand = mean(x);
    std::vector<double> sum(k, 0.0);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        sum[labels[i]] += x[i];
        count[labels[i]] += 1.0;
    }
    double between = 0.0;
    double within = 0.0;
    for (int c = 0; c < k; ++c) {
        if (count[c] == 0.0) continue;
        const double m = sum[c] / count[c];
        between += count[c] * (m - grand) * (m - grand);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double m = sum[labels[i]] / count[labels[i]];
        within += (x[i] - m) * (x[i] - m);
    }
    if (within == 0.0) return 1.0;
    return between * static_cast<double>(n - k) / (within * static_cast<double>(k - 1));
}

double davies_bouldin(std::span<const double> x, std::span<const int> labels, int k) {
    std::vector<double> sum(k, 0.0);
    std::vector<double> count(k, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum[labels[i]] += x[i];
        count[labels[i]] += 1.0;
    }
    std::vector<double> centroid(k, 0.0);
    for (int c = 0; c < k; ++c) centroid[c] = count[c] > 0.0 ? sum[c] / count[c] : 0.0;
    std::vector<double> spread(k, 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) spread[labels[i]] += std::abs(x[i] - centroid[labels[i]]);
    for (int c = 0; c < k; ++c) {
        if (count[c] > 0.0) spread[c] /= count[c];
    }
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
        double worst = 0.0;
        for (int j = 0; j < k; ++j) {
            const double sep = std::abs(centroid[i] - centroid[j]);
            if (i == j || sep == 0.0) continue;
            worst = std::max(worst, (spread[i] + spread[j]) / sep);
        }
        total += worst;
    }
    return total / static_cast<double>(k);
}

ClusterResult activity_clusters(std::span<const double> clicks_per_user, std::span<const int> k_candidates,
                                std::uint64_t seed, int restarts, Execution execution) {
    if (restarts < 1) throw InvalidArgument("restarts must be >= 1");
    const std::size_t n = clicks_per_user.size();
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(clicks_per_user[i] >= 0.0)) throw InvalidArgument("negative click count");
        x[i] = std::log1p(clicks_per_user[i]);
    }
    for (int k : k_candidates) {
        if (k < 2) throw InvalidArgument("candidate k must be >= 2");
        if (n < static_cast<std::size_t>(k)) throw InvalidArgument("fewer users than candidate k");
    }

    ClusterResult result;
    const std::size_t distinct = std::set<double>(x.begin(), x.end()).size();
    if (distinct < 2) {
        result.labels.assign(n, 0);
        result.degenerate = true;
        result.centers = {n > 0 ? x[0] : 0.0};
        return result;
    }

    const bool parallel = execution == Execution::Parallel;
    double best_ch = -std::numeric_limits<double>::infinity();
    KMeansRun chosen;
    for (int k : k_candidates) {
        // More clusters than distinct values cannot all be populated.
        if (static_cast<std::size_t>(k) > distinct) continue;
        std::vector<KMeansRun> runs(restarts);
#pragma omp parallel for schedule(dynamic) if (parallel)
        for (int r = 0; r < restarts; ++r) {
            Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(r)));
            runs[r] = kmeans_1d(x, k, rng);
        }
        std::size_t best = 0;
        for (std::size_t r = 1; r < runs.size(); ++r) {
            if (runs[r].inertia < runs[best].inertia - 1e-12) best = r;
        }
        const double ch = calinski_harabasz(x, runs[best].labels, k);
        result.calinski_harabasz[k] = ch;
        result.davies_bouldin[k] = davies_bouldin(x, runs[best].labels, k);
        if (ch > best_ch) {
            best_ch = ch;
            result.chosen_k = k;
            chosen = std::move(runs[best]);
        }
    }
    if (chosen.labels.empty()) {
        result.labels.assign(n, 0);
        result.degenerate = true;
        result.centers = {mean(x)};
        return result;
    }

    // Relabel so that cluster means ascend.
    const int k = result.chosen_k;
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return chosen.centers[a] < chosen.centers[b]; });
    std::vector<int> rank(k);
    for (int i = 0; i < k; ++i) rank[order[i]] = i;
    result.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) result.labels[i] = rank[chosen.labels[i]];
    result.centers.resize(k);
    for (int i = 0; i < k; ++i) result.centers[i] = chosen.centers[order[i]];
    return result;
}

} // namespace newsrank::stats
