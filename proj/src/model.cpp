#include "newsrank/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "newsrank/error.hpp"

namespace newsrank {

std::string_view to_string(Arm arm) noexcept {
    return arm == Arm::Control ? "control" : "personalization";
}

std::string_view to_string(EventKind kind) noexcept {
    return kind == EventKind::Impression ? "impression" : "click";
}

std::optional<Arm> parse_arm(std::string_view text) noexcept {
    if (text == "control") return Arm::Control;
    if (text == "personalization") return Arm::Personalization;
    return std::nullopt;
}

std::optional<EventKind> parse_event_kind(std::string_view text) noexcept {
    if (text == "impression") return EventKind::Impression;
    if (text == "click") return EventKind::Click;
    return std::nullopt;
}

void RankingWeights::validate() const {
    const auto check = [](double w, const char* name) {
        if (!std::isfinite(w) || w < 0.0) {
            throw InvalidArgument(std::string(name) + " must be a finite non-negative weight");
        }
    };
    check(w1, "w1");
    check(w2, "w2");
    check(w3, "w3");
    check(w4, "w4");
    if (w1 + w2 + w3 <= 0.0) {
        throw InvalidArgument("w1, w2 and w3 are all zero; at least one must be positive");
    }
}

Catalog::Catalog(std::vector<Article> articles, std::vector<User> users)
    : articles_(std::move(articles)), users_(std::move(users)) {
    std::set<std::string> sections;
    article_index_.reserve(articles_.size());
    for (std::size_t i = 0; i < articles_.size(); ++i) {
        const Article& a = articles_[i];
        if (a.initial_news_value < 0 || a.initial_news_value > 100) {
            throw InvalidArgument("article " + a.article_id + ": initial_news_value outside [0,100]");
        }
        if (a.length_chars < 1) {
            throw InvalidArgument("article " + a.article_id + ": length_chars must be >= 1");
        }
        if (a.editorial_pinned != a.pinned_position.has_value()) {
            throw InvalidArgument("article " + a.article_id +
                                  ": pinned_position must be present exactly when editorial_pinned");
        }
        if (!article_index_.emplace(a.article_id, i).second) {
            throw InvalidArgument("duplicate article id " + a.article_id);
        }
        sections.insert(a.section);
    }
    user_index_.reserve(users_.size());
    for (std::size_t i = 0; i < users_.size(); ++i) {
        const User& u = users_[i];
        if (u.arm && !u.subscriber) {
            throw InvalidArgument("user " + u.user_id + ": only subscribers may carry an arm");
        }
        if (!user_index_.emplace(u.user_id, i).second) {
            throw InvalidArgument("duplicate user id " + u.user_id);
        }
    }
    sections_.assign(sections.begin(), sections.end());
}

const Article* Catalog::find_article(const std::string& id) const {
    const auto it = article_index_.find(id);
    return it == article_index_.end() ? nullptr : &articles_[it->second];
}

const User* Catalog::find_user(const std::string& id) const {
    const auto it = user_index_.find(id);
    return it == user_index_.end() ? nullptr : &users_[it->second];
}

std::optional<std::size_t> Catalog::article_index(const std::string& id) const {
    const auto it = article_index_.find(id);
    if (it == article_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> Catalog::user_index(const std::string& id) const {
    const auto it = user_index_.find(id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
    case Verdict::Ok: return "ok";
    case Verdict::UnknownUser: return "unknown_user";
    case Verdict::UnknownArticle: return "unknown_article";
    case Verdict::IncompleteClick: return "incomplete_click";
    case Verdict::FieldOnWrongKind: return "field_on_wrong_kind";
    case Verdict::NegativeDuration: return "negative_duration";
    case Verdict::ReadingPercentageOutOfRange: return "reading_percentage_out_of_range";
    }
    return "unknown";
}

Verdict validate_event(const InteractionEvent& event, const Catalog& catalog) noexcept {
    if (catalog.find_user(event.user_id) == nullptr) return Verdict::UnknownUser;
    if (catalog.find_article(event.article_id) == nullptr) return Verdict::UnknownArticle;
    if (event.kind == EventKind::Impression) {
        if (event.reading_percentage || event.activity_duration_s) return Verdict::FieldOnWrongKind;
        return Verdict::Ok;
    }
    if (!event.reading_percentage || !event.activity_duration_s) return Verdict::IncompleteClick;
    const double rp = *event.reading_percentage;
    if (!(rp >= 0.0 && rp <= 1.0)) return Verdict::ReadingPercentageOutOfRange;
    const double ad = *event.activity_duration_s;
    if (!(ad >= 0.0) || !std::isfinite(ad)) return Verdict::NegativeDuration;
    return Verdict::Ok;
}

ArmPartition partition_by_arm(const EventLog& log) {
    ArmPartition out{log.with_events({}), log.with_events({}), 0, 0};
    std::unordered_set<std::string> excluded;
    for (const auto& e : log.events) {
        const User* u = log.catalog->find_user(e.user_id);
        if (u == nullptr || !u->arm) {
            ++out.excluded_events;
            excluded.insert(e.user_id);
            continue;
        }
        (*u->arm == Arm::Control ? out.control : out.personalization).events.push_back(e);
    }
    out.excluded_users = excluded.size();
    return out;
}

} // namespace newsrank
