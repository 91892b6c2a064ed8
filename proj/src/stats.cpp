#include "newsrank/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "newsrank/error.hpp"

namespace newsrank::stats {

std::string_view to_string(EffectKind kind) noexcept {
    switch (kind) {
    case EffectKind::CohenD: return "cohen_d";
    case EffectKind::CliffsDelta: return "cliffs_delta";
    case EffectKind::CramersV: return "cramers_v";
    case EffectKind::JSD: return "jsd";
    }
    return "unknown";
}

std::string_view to_string(TestKind kind) noexcept {
    switch (kind) {
    case TestKind::Student: return "student_t";
    case TestKind::Welch: return "welch_t";
    case TestKind::MannWhitney: return "mann_whitney_u";
    }
    return "unknown";
}

Json to_json(const TestResult& r) {
    Json j;
    j["test"] = r.test_name;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["effect_size"] = r.effect_size;
    j["effect_kind"] = std::string(to_string(r.effect_kind));
    j["n_a"] = r.n_a;
    j["n_b"] = r.n_b;
    return j;
}

double mean(std::span<const double> x) {
    if (x.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

namespace {

double clamp_p(double p) { return std::clamp(p, 0.0, 1.0); }

double normal_two_sided(double z) { return clamp_p(std::erfc(std::abs(z) / std::sqrt(2.0))); }

std::vector<double> systematic_subsample(std::span<const double> x, std::size_t limit) {
    if (x.size() <= limit) return {x.begin(), x.end()};
    std::vector<double> out;
    out.reserve(limit);
    for (std::size_t i = 0; i < limit; ++i) out.push_back(x[i * x.size() / limit]);
    return out;
}

} // namespace

TestChoice select_test(std::span<const double> a, std::span<const double> b, double alpha) {
    if (a.size() < 3 || b.size() < 3) throw InvalidArgument("select_test needs at least 3 values per sample");
    TestChoice choice;
    choice.shapiro_p_a = shapiro_wilk(systematic_subsample(a, 5000)).p_value;
    choice.shapiro_p_b = shapiro_wilk(systematic_subsample(b, 5000)).p_value;
    const double va = variance(a);
    const double vb = variance(b);
    const double lo = std::min(va, vb);
    choice.variance_ratio = lo > 0.0 ? std::max(va, vb) / lo : std::numeric_limits<double>::infinity();
    const bool normal = choice.shapiro_p_a > alpha && choice.shapiro_p_b > alpha;
    if (!normal) {
        choice.kind = TestKind::MannWhitney;
    } else {
        choice.kind = choice.variance_ratio < 2.0 ? TestKind::Student : TestKind::Welch;
    }
    return choice;
}

TestResult t_test(std::span<const double> a, std::span<const double> b, TVariant variant) {
    if (a.size() < 2 || b.size() < 2) throw InvalidArgument("t-test needs at least 2 values per sample");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double ma = mean(a);
    const double mb = mean(b);
    const double va = variance(a);
    const double vb = variance(b);
    const double diff = ma - mb;

    TestResult r;
    r.n_a = a.size();
    r.n_b = b.size();
    r.effect_kind = EffectKind::CohenD;
    double se = 0.0;
    double df = 0.0;
    if (variant == TVariant::Student) {
        r.test_name = "student_t";
        const double pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
        if (!(pooled > 0.0)) throw InvalidArgument("zero pooled variance");
        se = std::sqrt(pooled * (1.0 / na + 1.0 / nb));
        df = na + nb - 2.0;
        r.effect_size = diff / std::sqrt(pooled);
    } else {
        r.test_name = "welch_t";
        const double qa = va / na;
        const double qb = vb / nb;
        if (!(qa + qb > 0.0)) throw InvalidArgument("zero variance in both samples");
        se = std::sqrt(qa + qb);
        df = (qa + qb) * (qa + qb) / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0));
        r.effect_size = diff / std::sqrt((va + vb) / 2.0);
    }
    r.statistic = diff / se;
    if (r.statistic == 0.0) {
        r.p_value = 1.0;
    } else {
        const boost::math::students_t dist(df);
        r.p_value = clamp_p(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.statistic))));
    }
    return r;
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw InvalidArgument("Cliff's delta needs non-empty samples");
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sb.begin(), sb.end());
    double greater = 0.0;
    double less = 0.0;
    for (double v : a) {
        const auto lo = std::lower_bound(sb.begin(), sb.end(), v);
        const auto hi = std::upper_bound(sb.begin(), sb.end(), v);
        greater += static_cast<double>(lo - sb.begin());
        less += static_cast<double>(sb.end() - hi);
    }
    return (greater - less) / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

namespace {

struct RankInfo {
    std::vector<double> doubled_ranks; // 2 * mid-rank, integral
    double tie_term = 0.0;             // sum of t^3 - t over tie groups
};

RankInfo mid_ranks(std::span<const double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    RankInfo info;
    info.doubled_ranks.assign(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && pooled[order[j]] == pooled[order[i]]) ++j;
        // Positions i..j-1 (1-based i+1..j) share rank (i+1+j)/2.
        const double doubled = static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t) info.doubled_ranks[order[t]] = doubled;
        const double t = static_cast<double>(j - i);
        info.tie_term += t * t * t - t;
        i = j;
    }
    return info;
}

// Exact two-sided p for U under random assignment of the pooled mid-ranks.
double exact_mwu_p(const RankInfo& ranks, std::size_t na, double u_obs) {
    const std::size_t n = ranks.doubled_ranks.size();
    const auto max_sum = static_cast<std::size_t>(
        std::accumulate(ranks.doubled_ranks.begin(), ranks.doubled_ranks.end(), 0.0));
    // ways[j][s]: subsets of size j with doubled-rank sum s.
    std::vector<std::vector<double>> ways(na + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t item = 0; item < n; ++item) {
        const auto r = static_cast<std::size_t>(ranks.doubled_ranks[item]);
        for (std::size_t j = std::min(na, item + 1); j >= 1; --j) {
            for (std::size_t s = max_sum; s >= r; --s) {
                ways[j][s] += ways[j - 1][s - r];
                if (s == r) break;
            }
        }
    }
    const double nb = static_cast<double>(n - na);
    const double mu = static_cast<double>(na) * nb / 2.0;
    const double offset = static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
    const double observed = std::abs(u_obs - mu);
    double total = 0.0;
    double extreme = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        if (ways[na][s] == 0.0) continue;
        const double u = static_cast<double>(s) / 2.0 - offset;
        total += ways[na][s];
        if (std::abs(u - mu) >= observed - 1e-9) extreme += ways[na][s];
    }
    return clamp_p(extreme / total);
}

} // namespace

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b, MwuMethod method) {
    if (a.empty() || b.empty()) throw InvalidArgument("Mann-Whitney U needs non-empty samples");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const RankInfo ranks = mid_ranks(pooled);

    const std::size_t na = a.size();
    const double dna = static_cast<double>(na);
    const double dnb = static_cast<double>(b.size());
    double rank_sum_a = 0.0;
    for (std::size_t i = 0; i < na; ++i) rank_sum_a += ranks.doubled_ranks[i] / 2.0;
    const double u = rank_sum_a - dna * (dna + 1.0) / 2.0;

    TestResult r;
    r.test_name = "mann_whitney_u";
    r.statistic = u;
    r.n_a = na;
    r.n_b = b.size();
    r.effect_kind = EffectKind::CliffsDelta;
    r.effect_size = 2.0 * u / (dna * dnb) - 1.0;

    const bool exact = method == MwuMethod::Exact || (method == MwuMethod::Auto && dna * dnb <= 20.0);
    if (exact) {
        if (pooled.size() > 400) throw InvalidArgument("exact Mann-Whitney limited to 400 pooled values");
        r.p_value = exact_mwu_p(ranks, na, u);
        return r;
    }
    const double n = dna + dnb;
    const double var = dna * dnb / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(std::abs(u - dna * dnb / 2.0) - 0.5, 0.0) / std::sqrt(var);
    r.p_value = normal_two_sided(z);
    return r;
}

TestResult chi_squared(std::span<const double> row_a, std::span<const double> row_b) {
    if (row_a.size() != row_b.size()) throw InvalidArgument("chi-squared rows differ in length");
    const std::size_t k = row_a.size();
    if (k < 2) throw InvalidArgument("chi-squared needs at least 2 columns");
    const double total_a = std::accumulate(row_a.begin(), row_a.end(), 0.0);
    const double total_b = std::accumulate(row_b.begin(), row_b.end(), 0.0);
    if (!(total_a > 0.0) || !(total_b > 0.0)) throw InvalidArgument("chi-squared row with zero total");
    const double total = total_a + total_b;
    double chi2 = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (row_a[c] < 0.0 || row_b[c] < 0.0) throw InvalidArgument("negative count in contingency table");
        const double col = row_a[c] + row_b[c];
        if (!(col > 0.0)) throw InvalidArgument("chi-squared column with zero total");
        const double ea = total_a * col / total;
        const double eb = total_b * col / total;
        chi2 += (row_a[c] - ea) * (row_a[c] - ea) / ea + (row_b[c] - eb) * (row_b[c] - eb) / eb;
    }
    TestResult r;
    r.test_name = "chi_squared";
    r.statistic = chi2;
    r.n_a = static_cast<std::size_t>(total_a);
    r.n_b = static_cast<std::size_t>(total_b);
    r.effect_kind = EffectKind::CramersV;
    r.effect_size = std::min(1.0, std::sqrt(chi2 / total)); // min(r - 1, c - 1) = 1
    if (chi2 <= 0.0) {
        r.p_value = 1.0;
    } else {
        const boost::math::chi_squared dist(static_cast<double>(k - 1));
        r.p_value = clamp_p(boost::math::cdf(boost::math::complement(dist, chi2)));
    }
    return r;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw InvalidArgument("JSD inputs have different supports");
    const auto check = [](std::span<const double> d) {
        double sum = 0.0;
        for (double v : d) {
            if (!(v >= 0.0)) throw InvalidArgument("JSD input has a negative or NaN mass");
            sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("JSD input is not normalized");
    };
    check(p);
    check(q);
    double jsd = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) jsd += 0.5 * p[i] * std::log2(p[i] / m);
        if (q[i] > 0.0) jsd += 0.5 * q[i] * std::log2(q[i] / m);
    }
    return std::clamp(jsd, 0.0, 1.0);
}

std::vector<double> label_distribution(std::span<const std::uint32_t> labels, std::size_t categories) {
    std::vector<double> d(categories, 0.0);
    for (auto l : labels) {
        if (l >= categories) throw InvalidArgument("label outside category range");
        d[l] += 1.0;
    }
    const double n = static_cast<double>(labels.size());
    if (n > 0.0) {
        for (auto& v : d) v /= n;
    }
    return d;
}

std::uint64_t sample_hypergeometric(std::uint64_t population, std::uint64_t successes, std::uint64_t draws,
                                    Rng& rng) {
    if (successes > population || draws > population) throw InvalidArgument("invalid hypergeometric parameters");
    const std::uint64_t failures = population - successes;
    const std::uint64_t lo = draws > failures ? draws - failures : 0;
    const std::uint64_t hi = std::min(draws, successes);
    if (lo == hi) return lo;

    const double big_n = static_cast<double>(population);
    const double big_k = static_cast<double>(successes);
    const double n = static_cast<double>(draws);
    const auto lchoose = [](double a, double b) {
        return boost::math::lgamma(a + 1.0) - boost::math::lgamma(b + 1.0) - boost::math::lgamma(a - b + 1.0);
    };
    auto mode = static_cast<std::uint64_t>(std::floor((n + 1.0) * (big_k + 1.0) / (big_n + 2.0)));
    mode = std::clamp(mode, lo, hi);
    const double m = static_cast<double>(mode);
    const double p_mode =
        std::exp(lchoose(big_k, m) + lchoose(big_n - big_k, n - m) - lchoose(big_n, n));

    // Inversion by chop-down search outward from the mode.
    double u = uniform01(rng) - p_mode;
    if (u <= 0.0) return mode;
    double p_up = p_mode;
    double p_down = p_mode;
    std::uint64_t up = mode;
    std::uint64_t down = mode;
    while (up < hi || down > lo) {
        if (up < hi) {
            const double x = static_cast<double>(up);
            p_up *= (big_k - x) * (n - x) / ((x + 1.0) * (big_n - big_k - n + x + 1.0));
            ++up;
            u -= p_up;
            if (u <= 0.0) return up;
        }
        if (down > lo) {
            const double x = static_cast<double>(down);
            p_down *= x * (big_n - big_k - n + x) / ((big_k - x + 1.0) * (n - x + 1.0));
            --down;
            u -= p_down;
            if (u <= 0.0) return down;
        }
    }
    return mode; // rounding residue
}

namespace {

double jsd_of_counts(std::span<const double> a, double total_a, std::span<const double> b, double total_b) {
    double jsd = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double p = a[i] / total_a;
        const double q = b[i] / total_b;
        const double m = 0.5 * (p + q);
        if (p > 0.0) jsd += 0.5 * p * std::log2(p / m);
        if (q > 0.0) jsd += 0.5 * q * std::log2(q / m);
    }
    return std::clamp(jsd, 0.0, 1.0);
}

} // namespace

TestResult permutation_test_jsd(std::span<const std::uint32_t> labels_a, std::span<const std::uint32_t> labels_b,
                                std::size_t categories, const PermutationOptions& options) {
    if (labels_a.empty() || labels_b.empty()) throw InvalidArgument("permutation test needs non-empty groups");
    const std::vector<double> pa = label_distribution(labels_a, categories);
    const std::vector<double> pb = label_distribution(labels_b, categories);
    const double observed = js_divergence(pa, pb);

    std::vector<std::uint32_t> pooled(labels_a.begin(), labels_a.end());
    pooled.insert(pooled.end(), labels_b.begin(), labels_b.end());
    std::vector<std::uint64_t> totals(categories, 0);
    for (auto l : pooled) ++totals[l];

    const std::uint64_t n_total = pooled.size();
    const std::uint64_t n_a = labels_a.size();
    const double dn_a = static_cast<double>(n_a);
    const double dn_b = static_cast<double>(labels_b.size());
    // The smaller side is drawn; the other side is the complement.
    const bool draw_a = labels_a.size() <= labels_b.size();
    const std::uint64_t n_draw = draw_a ? n_a : n_total - n_a;
    const double threshold = observed - 1e-12;

    const auto n_perm = static_cast<long>(options.permutations);
    const bool parallel = options.execution == Execution::Parallel;
    long extreme = 0;
#pragma omp parallel if (parallel)
    {
        std::vector<std::uint32_t> scratch;
        std::vector<double> drawn(categories);
        std::vector<double> rest(categories);
#pragma omp for schedule(static) reduction(+ : extreme)
        for (long i = 0; i < n_perm; ++i) {
            Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(i)));
            std::fill(drawn.begin(), drawn.end(), 0.0);
            if (options.method == PermutationMethod::EventShuffle) {
                scratch = pooled;
                for (std::uint64_t j = 0; j < n_draw; ++j) {
                    const std::uint64_t pick = j + uniform_index(rng, n_total - j);
                    std::swap(scratch[j], scratch[pick]);
                    drawn[scratch[j]] += 1.0;
                }
            } else {
                std::uint64_t remaining_population = n_total;
                std::uint64_t remaining_draws = n_draw;
                for (std::size_t c = 0; c < categories && remaining_draws > 0; ++c) {
                    const std::uint64_t x =
                        c + 1 == categories
                            ? remaining_draws
                            : sample_hypergeometric(remaining_population, totals[c], remaining_draws, rng);
                    drawn[c] = static_cast<double>(x);
                    remaining_population -= totals[c];
                    remaining_draws -= x;
                }
            }
            for (std::size_t c = 0; c < categories; ++c) rest[c] = static_cast<double>(totals[c]) - drawn[c];
            const double jsd = draw_a ? jsd_of_counts(drawn, dn_a, rest, dn_b) : jsd_of_counts(rest, dn_a, drawn, dn_b);
            if (jsd >= threshold) ++extreme;
        }
    }

    TestResult r;
    r.test_name = "permutation_jsd";
    r.statistic = observed;
    r.effect_size = observed;
    r.effect_kind = EffectKind::JSD;
    r.n_a = labels_a.size();
    r.n_b = labels_b.size();
    r.p_value = clamp_p((1.0 + static_cast<double>(extreme)) / (1.0 + static_cast<double>(options.permutations)));
    return r;
}

} // namespace newsrank::stats
