#include "newsrank/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "newsrank/error.hpp"
#include "newsrank/schema.hpp"
#include "newsrank/stats.hpp"

namespace newsrank {

namespace {

constexpr const char* kArmNames[2] = {"control", "personalization"};

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

struct Samples {
    std::vector<double> a; // control
    std::vector<double> b; // personalization
};

enum class Family { Daily, Rank };

// Runs the family's test on two samples and records the protocol's choice.
Json sample_test(const std::string& id, const std::string& metric, const char* unit, const std::string& segment,
                 const Samples& s, Family family, double alpha) {
    Json entry;
    entry["id"] = id;
    entry["metric"] = metric;
    entry["unit"] = unit;
    entry["segment"] = segment;
    entry["mean_control"] = s.a.empty() ? Json(nullptr) : number_or_null(stats::mean(s.a));
    entry["mean_personalization"] = s.b.empty() ? Json(nullptr) : number_or_null(stats::mean(s.b));
    entry["recommended"] = nullptr;
    try {
        const auto choice = stats::select_test(s.a, s.b, alpha);
        entry["recommended"] = std::string(stats::to_string(choice.kind));
    } catch (const Error&) {
        // Too small or constant for the normality check.
    }
    entry["result"] = nullptr;
    entry["error"] = nullptr;
    try {
        const stats::TestResult r = family == Family::Daily ? stats::t_test(s.a, s.b, stats::TVariant::Welch)
                                                            : stats::mann_whitney_u(s.a, s.b);
        entry["result"] = stats::to_json(r);
        entry["significant"] = r.p_value < alpha;
    } catch (const Error& e) {
        entry["error"] = e.what();
    }
    if (!entry.contains("significant")) entry["significant"] = false;
    return entry;
}

struct ArmData {
    EventLog log;
    EngagementSummary engagement;
    JournalisticSummary journalistic;
    std::vector<std::int64_t> days;
    std::vector<EventLog> daily;
};

ArmData arm_data(EventLog log, const MetricsConfig& mc) {
    ArmData d;
    d.log = std::move(log);
    d.engagement = engagement(d.log, mc);
    d.journalistic = journalistic(d.log, mc);
    d.daily = split_by_day(d.log, mc.timezone_offset_s, &d.days);
    return d;
}

std::vector<double> daily_values(const ArmData& d, DailyMetric metric, const MetricsConfig& mc,
                                  std::vector<std::int64_t>* days = nullptr) {
    std::vector<double> out;
    for (std::size_t i = 0; i < d.daily.size(); ++i) {
        const Metric v = evaluate(d.daily[i], metric, mc);
        if (!v) continue;
        out.push_back(*v);
        if (days != nullptr) days->push_back(d.days[i]);
    }
    return out;
}

struct UserValues {
    std::vector<double> impressions;
    std::vector<double> clicks;
    std::vector<double> ppi;
};

UserValues per_user(const EventLog& log, const std::vector<std::string>& popular) {
    const std::unordered_set<std::string_view> pop(popular.begin(), popular.end());
    std::map<std::string_view, std::array<double, 3>> acc; // impressions, clicks, popular clicks
    for (const auto& e : log.events) {
        auto& a = acc[e.user_id];
        if (e.is_click()) {
            a[1] += 1.0;
            if (pop.count(e.article_id) != 0) a[2] += 1.0;
        } else {
            a[0] += 1.0;
        }
    }
    UserValues out;
    for (const auto& [_, a] : acc) {
        out.impressions.push_back(a[0]);
        out.clicks.push_back(a[1]);
        if (a[1] > 0.0) out.ppi.push_back(a[2] / a[1]);
    }
    return out;
}

std::vector<double> click_values(const EventLog& log, bool reading) {
    std::vector<double> out;
    for (const auto& e : log.events) {
        if (!e.is_click()) continue;
        out.push_back(reading ? e.reading_percentage.value_or(0.0) : e.activity_duration_s.value_or(0.0));
    }
    return out;
}

Json arm_json(const ArmData& d, const MetricsConfig& mc) {
    Json j;
    j["engagement"] = to_json(d.engagement);
    j["journalistic"] = to_json(d.journalistic);
    Json daily_means = Json::object();
    for (DailyMetric m : all_daily_metrics()) {
        const auto v = daily_values(d, m, mc);
        daily_means[std::string(to_string(m))] = v.empty() ? Json(nullptr) : number_or_null(stats::mean(v));
    }
    j["daily_means"] = daily_means;
    j["days"] = d.days.size();
    return j;
}

std::vector<std::uint32_t> section_labels(const EventLog& log, EventKind kind,
                                          const std::unordered_map<std::string, std::uint32_t>& index) {
    std::vector<std::uint32_t> out;
    for (const auto& e : log.events) {
        if (e.kind != kind) continue;
        const Article* a = log.catalog->find_article(e.article_id);
        if (a != nullptr) out.push_back(index.at(a->section));
    }
    return out;
}

void section_tests(const ArmData& c, const ArmData& p, EventKind kind, const ExperimentConfig& config,
                   std::uint64_t stream, Json& tests) {
    const char* name = kind == EventKind::Impression ? "impressions" : "clicks";
    const auto& sections = c.log.catalog->sections();
    const auto ca = section_count_vector(c.log, kind);
    const auto pa = section_count_vector(p.log, kind);
    std::vector<double> row_a;
    std::vector<double> row_b;
    for (std::size_t i = 0; i < sections.size(); ++i) {
        if (ca[i] + pa[i] == 0.0) continue;
        row_a.push_back(ca[i]);
        row_b.push_back(pa[i]);
    }
    Json chi;
    chi["id"] = std::string("sections_") + name + "_chi_squared";
    chi["metric"] = std::string("section_") + name;
    chi["unit"] = "section";
    chi["segment"] = "all";
    chi["recommended"] = nullptr;
    chi["mean_control"] = nullptr;
    chi["mean_personalization"] = nullptr;
    chi["result"] = nullptr;
    chi["error"] = nullptr;
    chi["significant"] = false;
    try {
        const auto r = stats::chi_squared(row_a, row_b);
        chi["result"] = stats::to_json(r);
        chi["significant"] = r.p_value < config.stats.alpha;
    } catch (const Error& e) {
        chi["error"] = e.what();
    }
    tests.push_back(chi);

    std::unordered_map<std::string, std::uint32_t> index;
    for (std::size_t i = 0; i < sections.size(); ++i) index[sections[i]] = static_cast<std::uint32_t>(i);
    Json perm = chi;
    perm["id"] = std::string("sections_") + name + "_jsd_permutation";
    perm["result"] = nullptr;
    perm["error"] = nullptr;
    perm["significant"] = false;
    try {
        stats::PermutationOptions opt;
        opt.permutations = config.stats.permutations;
        opt.method = config.stats.permutation_method;
        opt.seed = derive_seed(config.seed, 0x5e5, stream);
        const auto r = stats::permutation_test_jsd(section_labels(c.log, kind, index),
                                                   section_labels(p.log, kind, index), sections.size(), opt);
        perm["result"] = stats::to_json(r);
        perm["significant"] = r.p_value < config.stats.alpha;
    } catch (const Error& e) {
        perm["error"] = e.what();
    }
    tests.push_back(perm);
}

// The battery for one pair of arm logs; `full` adds the whole-scope tests.
Json comparison_tests(const ArmData& c, const ArmData& p, const std::string& segment, const ExperimentConfig& config,
                      bool full) {
    const MetricsConfig& mc = config.metrics;
    const double alpha = config.stats.alpha;
    Json tests = Json::array();
    const auto daily = [&](DailyMetric m) {
        const std::string name(to_string(m));
        tests.push_back(sample_test(name + "_daily", name, "day", segment,
                                    {daily_values(c, m, mc), daily_values(p, m, mc)}, Family::Daily, alpha));
    };
    daily(DailyMetric::CTR);
    daily(DailyMetric::CCR);
    daily(DailyMetric::IPU);
    if (full) {
        daily(DailyMetric::CPU);
        daily(DailyMetric::ClickCoverage);
        daily(DailyMetric::ARP);
        daily(DailyMetric::ACP);
        daily(DailyMetric::PPI);
        daily(DailyMetric::GiniImpressions);
        daily(DailyMetric::GiniClicks);
    }

    // One popular set for both arms so user PPI is comparable.
    std::vector<std::string> popular;
    {
        std::map<std::string, std::size_t> clicks;
        for (const ArmData* d : {&c, &p}) {
            for (const auto& e : d->log.events) {
                if (e.is_click()) ++clicks[e.article_id];
            }
        }
        popular = popular_set(clicks, mc);
    }
    const UserValues uc = per_user(c.log, popular);
    const UserValues up = per_user(p.log, popular);
    tests.push_back(sample_test("ipu_user", "ipu", "user", segment, {uc.impressions, up.impressions}, Family::Rank, alpha));
    tests.push_back(sample_test("cpu_user", "cpu", "user", segment, {uc.clicks, up.clicks}, Family::Rank, alpha));
    if (full) tests.push_back(sample_test("ppi_user", "ppi", "user", segment, {uc.ppi, up.ppi}, Family::Rank, alpha));
    tests.push_back(sample_test("reading_percentage_click", "reading_percentage", "click", segment,
                                {click_values(c.log, true), click_values(p.log, true)}, Family::Rank, alpha));
    tests.push_back(sample_test("activity_duration_click", "activity_duration_s", "click", segment,
                                {click_values(c.log, false), click_values(p.log, false)}, Family::Rank, alpha));
    if (full) {
        section_tests(c, p, EventKind::Impression, config, 1, tests);
        section_tests(c, p, EventKind::Click, config, 2, tests);
    }
    return tests;
}

std::string segment_name(int label, int k) {
    if (k == 3) {
        static const char* names[3] = {"low", "medium", "high"};
        return names[label];
    }
    if (k == 2) return label == 0 ? "low" : "high";
    return "segment-" + std::to_string(label);
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

} // namespace

Analysis analyze(const EventLog& log, const ExperimentConfig& config) {
    const MetricsConfig& mc = config.metrics;

    // Scope: users who clicked at least once.
    std::unordered_set<std::string> clickers;
    for (const auto& e : log.events) {
        if (e.is_click()) clickers.insert(e.user_id);
    }
    std::unordered_set<std::string> all_users;
    std::vector<InteractionEvent> scoped;
    for (const auto& e : log.events) {
        all_users.insert(e.user_id);
        if (clickers.count(e.user_id) != 0) scoped.push_back(e);
    }
    const std::size_t dropped_events = log.events.size() - scoped.size();
    const ArmPartition parts = partition_by_arm(log.with_events(std::move(scoped)));

    ArmData control = arm_data(parts.control, mc);
    ArmData treatment = arm_data(parts.personalization, mc);
    if (control.engagement.users == 0) throw Error("arm control has no users with clicks");
    if (treatment.engagement.users == 0) throw Error("arm personalization has no users with clicks");

    Json report;
    report["schema_version"] = kReportSchemaVersion;
    report["settings"] = Json{{"seed", config.seed},
                              {"alpha", config.stats.alpha},
                              {"permutations", config.stats.permutations},
                              {"permutation_method", config.stats.permutation_method ==
                                                             stats::PermutationMethod::CountSampling
                                                         ? "count_sampling"
                                                         : "event_shuffle"},
                              {"activity_k", config.stats.activity_k},
                              {"restarts", config.stats.restarts},
                              {"timezone_offset_s", config.timezone_offset_s},
                              {"popular_rule", mc.popular_rule == PopularRule::TopShare ? "top_share" : "click_mass"},
                              {"popular_share", mc.popular_share}};
    if (log.period) {
        report["period"] = Json{{"start", log.period->start}, {"end", log.period->end}};
    } else {
        report["period"] = nullptr;
    }
    report["scope"] = Json{{"users_with_clicks", Json{{"control", control.engagement.users},
                                                      {"personalization", treatment.engagement.users}}},
                           {"excluded_users_without_clicks", all_users.size() - clickers.size()},
                           {"excluded_events_without_clicks", dropped_events},
                           {"excluded_events_without_arm", parts.excluded_events},
                           {"excluded_users_without_arm", parts.excluded_users}};
    report["arms"] = Json{{"control", arm_json(control, mc)}, {"personalization", arm_json(treatment, mc)}};
    report["tests"] = comparison_tests(control, treatment, "all", config, true);

    // Activity segments over both arms.
    std::map<std::string, double> clicks_by_user;
    for (const ArmData* d : {&control, &treatment}) {
        for (const auto& e : d->log.events) {
            auto& c = clicks_by_user[e.user_id];
            if (e.is_click()) c += 1.0;
        }
    }
    std::vector<std::string> ids;
    std::vector<double> counts;
    for (const auto& [id, c] : clicks_by_user) {
        ids.push_back(id);
        counts.push_back(c);
    }
    Json seg;
    try {
        const auto clusters = stats::activity_clusters(counts, config.stats.activity_k, derive_seed(config.seed, 0xac7),
                                                       config.stats.restarts);
        seg["chosen_k"] = clusters.chosen_k;
        seg["degenerate"] = clusters.degenerate;
        Json ch = Json::object();
        Json db = Json::object();
        for (const auto& [k, v] : clusters.calinski_harabasz) ch[std::to_string(k)] = number_or_null(v);
        for (const auto& [k, v] : clusters.davies_bouldin) db[std::to_string(k)] = number_or_null(v);
        seg["calinski_harabasz"] = ch;
        seg["davies_bouldin"] = db;
        seg["centers"] = clusters.centers;
        std::map<std::string, int> labels;
        for (std::size_t i = 0; i < ids.size(); ++i) labels[ids[i]] = clusters.labels[i];
        Json groups = Json::array();
        const int k = clusters.degenerate ? 1 : clusters.chosen_k;
        const auto c_seg = segment_by_activity(control.log, labels);
        const auto p_seg = segment_by_activity(treatment.log, labels);
        for (int label = 0; label < k; ++label) {
            const std::string name = clusters.degenerate ? "single" : segment_name(label, k);
            const auto c_it = c_seg.find(label);
            const auto p_it = p_seg.find(label);
            ArmData cd = arm_data(c_it != c_seg.end() ? c_it->second : control.log.with_events({}), mc);
            ArmData pd = arm_data(p_it != p_seg.end() ? p_it->second : treatment.log.with_events({}), mc);
            Json g;
            g["label"] = label;
            g["name"] = name;
            g["users"] = Json{{"control", cd.engagement.users}, {"personalization", pd.engagement.users}};
            g["arms"] = Json{{"control", Json{{"engagement", to_json(cd.engagement)}}},
                             {"personalization", Json{{"engagement", to_json(pd.engagement)}}}};
            g["tests"] = comparison_tests(cd, pd, name, config, false);
            groups.push_back(g);
        }
        seg["groups"] = groups;
        seg["error"] = nullptr;
    } catch (const Error& e) {
        seg = Json{{"chosen_k", nullptr}, {"degenerate", true}, {"calinski_harabasz", Json::object()},
                   {"davies_bouldin", Json::object()}, {"centers", Json::array()}, {"groups", Json::array()},
                   {"error", e.what()}};
    }
    report["segments"] = seg;

    std::ostringstream csv;
    csv << "day,metric,arm,value\n";
    for (DailyMetric m : all_daily_metrics()) {
        for (std::size_t arm = 0; arm < 2; ++arm) {
            const ArmData& d = arm == 0 ? control : treatment;
            std::vector<std::int64_t> days;
            const auto values = daily_values(d, m, mc, &days);
            for (std::size_t i = 0; i < values.size(); ++i) {
                csv << day_label(days[i]) << ',' << to_string(m) << ',' << kArmNames[arm] << ','
                    << format_value(values[i]) << '\n';
            }
        }
    }
    return {std::move(report), csv.str()};
}

std::string significance_marker(std::optional<double> p) {
    if (!p) return "";
    if (*p < 0.001) return "***";
    if (*p < 0.01) return "**";
    if (*p < 0.05) return "*";
    return "";
}

const Json* find_test(const Json& report, const std::string& id, const std::string& segment) {
    const auto search = [&](const Json& tests) -> const Json* {
        if (!tests.is_array()) return nullptr;
        for (const auto& t : tests) {
            if (t.value("id", "") == id && t.value("segment", "") == segment) return &t;
        }
        return nullptr;
    };
    if (const auto it = report.find("tests"); it != report.end()) {
        if (const Json* t = search(*it)) return t;
    }
    const auto seg = report.find("segments");
    if (seg == report.end() || !seg->is_object()) return nullptr;
    const auto groups = seg->find("groups");
    if (groups == seg->end() || !groups->is_array()) return nullptr;
    for (const auto& g : *groups) {
        if (const auto t = g.find("tests"); t != g.end()) {
            if (const Json* found = search(*t)) return found;
        }
    }
    return nullptr;
}

namespace {

std::string cell(const Json* v, int precision = 4) {
    if (v == nullptr || !v->is_number()) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v->get<double>());
    return buf;
}

const Json* path(const Json& j, std::initializer_list<const char*> keys) {
    const Json* cur = &j;
    for (const char* k : keys) {
        if (!cur->is_object()) return nullptr;
        const auto it = cur->find(k);
        if (it == cur->end()) return nullptr;
        cur = &*it;
    }
    return cur;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

void test_columns(std::ostringstream& out, const Json* test) {
    if (test == nullptr) {
        out << pad("n/a", 26) << pad("n/a", 10) << '\n';
        return;
    }
    const Json* result = path(*test, {"result"});
    if (result == nullptr || result->is_null()) {
        out << pad("n/a", 26) << pad("n/a", 10) << '\n';
        return;
    }
    const std::string name = result->value("test", "?") + " (" + test->value("unit", "?") + ")";
    const Json* p = path(*result, {"p_value"});
    std::optional<double> pv;
    if (p != nullptr && p->is_number()) pv = p->get<double>();
    out << pad(name, 26) << pad(cell(p), 10) << significance_marker(pv) << '\n';
}

} // namespace

std::string render_report(const Json& report) {
    const auto errors = validate_schema(report_schema(), report);
    if (!errors.empty()) {
        std::string msg = "report does not match the schema";
        for (std::size_t i = 0; i < std::min<std::size_t>(errors.size(), 5); ++i) msg += "\n  " + errors[i];
        throw Error(msg);
    }
    struct Row {
        const char* label;
        const char* group;
        const char* key;
        const char* test;
    };
    static const Row rows[] = {
        {"CTR", "engagement", "ctr", "ctr_daily"},
        {"CCR", "engagement", "ccr", "ccr_daily"},
        {"IPU", "engagement", "ipu", "ipu_user"},
        {"CPU", "engagement", "cpu", "cpu_user"},
        {"RP", "engagement", "avg_reading_percentage", "reading_percentage_click"},
        {"AD (s)", "engagement", "avg_activity_duration_s", "activity_duration_click"},
        {"Gini impressions", "journalistic", "gini_impressions", "gini_impressions_daily"},
        {"Gini clicks", "journalistic", "gini_clicks", "gini_clicks_daily"},
        {"Click coverage", "journalistic", "click_coverage", "click_coverage_daily"},
        {"ARP", "journalistic", "arp", "arp_daily"},
        {"ACP", "journalistic", "acp", "acp_daily"},
        {"PPI", "journalistic", "ppi", "ppi_daily"},
    };
    std::ostringstream out;
    out << pad("metric", 20) << pad("control", 14) << pad("personalization", 17) << pad("test", 26) << pad("p", 10)
        << '\n';
    for (const Row& r : rows) {
        out << pad(r.label, 20) << pad(cell(path(report, {"arms", "control", r.group, r.key})), 14)
            << pad(cell(path(report, {"arms", "personalization", r.group, r.key})), 17);
        test_columns(out, find_test(report, r.test));
    }
    out << '\n' << pad("daily mean", 20) << pad("control", 14) << pad("personalization", 17) << '\n';
    for (DailyMetric m : all_daily_metrics()) {
        const std::string key(to_string(m));
        out << pad(key, 20) << pad(cell(path(report, {"arms", "control", "daily_means", key.c_str()})), 14)
            << pad(cell(path(report, {"arms", "personalization", "daily_means", key.c_str()})), 17) << '\n';
    }
    out << '\n' << pad("section test", 37) << pad("statistic", 12) << pad("effect", 10) << pad("p", 10) << '\n';
    for (const char* id : {"sections_impressions_chi_squared", "sections_impressions_jsd_permutation",
                           "sections_clicks_chi_squared", "sections_clicks_jsd_permutation"}) {
        const Json* t = find_test(report, id);
        const Json* result = t != nullptr ? path(*t, {"result"}) : nullptr;
        std::optional<double> pv;
        const Json* p = result != nullptr ? path(*result, {"p_value"}) : nullptr;
        if (p != nullptr && p->is_number()) pv = p->get<double>();
        out << pad(id, 37) << pad(cell(result ? path(*result, {"statistic"}) : nullptr), 12)
            << pad(cell(result ? path(*result, {"effect_size"}) : nullptr), 10) << pad(cell(p), 10)
            << significance_marker(pv) << '\n';
    }
    out << '\n' << pad("segment CTR", 20) << pad("control", 14) << pad("personalization", 17) << pad("test", 26)
        << pad("p", 10) << '\n';
    const Json* groups = path(report, {"segments", "groups"});
    if (groups == nullptr || !groups->is_array() || groups->empty()) {
        out << "n/a\n";
    } else {
        for (const auto& g : *groups) {
            const std::string name = g.value("name", "?");
            out << pad(name, 20) << pad(cell(path(g, {"arms", "control", "engagement", "ctr"})), 14)
                << pad(cell(path(g, {"arms", "personalization", "engagement", "ctr"})), 17);
            test_columns(out, find_test(report, "ctr_daily", name));
        }
    }
    out << "\n* p<0.05, ** p<0.01, *** p<0.001\n";
    return out.str();
}

} // namespace newsrank
