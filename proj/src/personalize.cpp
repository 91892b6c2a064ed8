#include "newsrank/personalize.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "newsrank/error.hpp"
#include "newsrank/random.hpp"
#include "newsrank/scores.hpp"

namespace newsrank {

InteractionMatrix build_interaction_matrix(std::span<const InteractionEvent> events, const Catalog& catalog,
                                           Timestamp now, int window_days, std::size_t min_clicks,
                                           bool subscribers_only) {
    if (window_days <= 0) throw InvalidArgument("window_days must be > 0");
    const Timestamp from = now - static_cast<Timestamp>(window_days) * kSecondsPerDay;

    std::map<std::pair<std::string, std::string>, double> counts;
    std::unordered_map<std::string, std::size_t> article_totals;
    for (const auto& e : events) {
        if (!e.is_click() || e.at < from || e.at > now) continue;
        const User* u = catalog.find_user(e.user_id);
        if (u == nullptr || (subscribers_only && !u->subscriber)) continue;
        counts[{e.user_id, e.article_id}] += 1.0;
        ++article_totals[e.article_id];
    }

    InteractionMatrix m;
    m.window_days = window_days;
    m.min_article_clicks = min_clicks;
    std::map<std::string, std::uint32_t> rows;
    std::map<std::string, std::uint32_t> cols;
    for (const auto& [key, value] : counts) {
        if (article_totals[key.second] < min_clicks) continue;
        rows.emplace(key.first, 0);
        cols.emplace(key.second, 0);
    }
    for (auto& [id, index] : rows) {
        index = static_cast<std::uint32_t>(m.user_ids.size());
        m.user_ids.push_back(id);
    }
    for (auto& [id, index] : cols) {
        index = static_cast<std::uint32_t>(m.article_ids.size());
        m.article_ids.push_back(id);
    }
    for (const auto& [key, value] : counts) {
        const auto col = cols.find(key.second);
        if (col == cols.end()) continue;
        m.cells.push_back({rows.at(key.first), col->second, value});
    }
    // counts is ordered by (user id, article id), which matches (row, col).
    return m;
}

InteractionMatrix build_interaction_matrix(const EventLog& log, Timestamp now, int window_days,
                                           std::size_t min_clicks, bool subscribers_only) {
    return build_interaction_matrix(log.events, *log.catalog, now, window_days, min_clicks, subscribers_only);
}

void AlsParams::validate() const {
    if (k < 1) throw InvalidArgument("personalization.k must be >= 1");
    if (!(lambda >= 0.0)) throw InvalidArgument("personalization.lambda must be >= 0");
    if (!(alpha >= 0.0)) throw InvalidArgument("personalization.alpha must be >= 0");
    if (iterations < 0) throw InvalidArgument("personalization.iterations must be >= 0");
}

FactorModel::FactorModel(std::vector<std::string> user_ids, std::vector<std::string> item_ids,
                         Eigen::MatrixXd user_factors, Eigen::MatrixXd item_factors, AlsParams params,
                         Timestamp trained_at, std::vector<double> loss_history)
    : user_ids_(std::move(user_ids)),
      item_ids_(std::move(item_ids)),
      user_factors_(std::move(user_factors)),
      item_factors_(std::move(item_factors)),
      params_(params),
      trained_at_(trained_at),
      loss_history_(std::move(loss_history)) {
    if (user_factors_.cols() < 1 || user_factors_.cols() != item_factors_.cols()) {
        throw InvalidArgument("factor matrices must share k >= 1 columns");
    }
    if (static_cast<std::size_t>(user_factors_.rows()) != user_ids_.size() ||
        static_cast<std::size_t>(item_factors_.rows()) != item_ids_.size()) {
        throw InvalidArgument("factor matrix rows must match id lists");
    }
    if (!user_factors_.allFinite() || !item_factors_.allFinite()) {
        throw Error("factor model contains non-finite entries");
    }
    for (std::size_t i = 0; i < user_ids_.size(); ++i) user_index_.emplace(user_ids_[i], i);
    for (std::size_t i = 0; i < item_ids_.size(); ++i) item_index_.emplace(item_ids_[i], i);
}

std::optional<std::size_t> FactorModel::user_row(const std::string& user_id) const {
    const auto it = user_index_.find(user_id);
    if (it == user_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> FactorModel::item_row(const std::string& article_id) const {
    const auto it = item_index_.find(article_id);
    if (it == item_index_.end()) return std::nullopt;
    return it->second;
}

double FactorModel::raw_score(std::size_t user_row, std::size_t item_row) const {
    return user_factors_.row(static_cast<Eigen::Index>(user_row))
        .dot(item_factors_.row(static_cast<Eigen::Index>(item_row)));
}

namespace {

// Compressed adjacency of the matrix, one list per row or per column.
struct Adjacency {
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> other;
    std::vector<double> value;
};

Adjacency adjacency(const InteractionMatrix& m, bool by_row) {
    const std::size_t n = by_row ? m.rows() : m.cols();
    Adjacency adj;
    adj.offsets.assign(n + 1, 0);
    for (const auto& c : m.cells) ++adj.offsets[(by_row ? c.row : c.col) + 1];
    for (std::size_t i = 0; i < n; ++i) adj.offsets[i + 1] += adj.offsets[i];
    adj.other.resize(m.cells.size());
    adj.value.resize(m.cells.size());
    std::vector<std::size_t> cursor(adj.offsets.begin(), adj.offsets.end() - 1);
    for (const auto& c : m.cells) {
        const std::size_t slot = cursor[by_row ? c.row : c.col]++;
        adj.other[slot] = by_row ? c.col : c.row;
        adj.value[slot] = c.value;
    }
    return adj;
}

// Solves every row of `target` given the fixed factors.
void solve_side(Eigen::MatrixXd& target, const Eigen::MatrixXd& fixed, const Adjacency& adj, double lambda,
                double alpha, Execution execution) {
    const Eigen::Index k = fixed.cols();
    const Eigen::MatrixXd gram = fixed.transpose() * fixed;
    const auto n = static_cast<long>(target.rows());
    const bool parallel = execution == Execution::Parallel;
#pragma omp parallel for schedule(dynamic, 32) if (parallel)
    for (long r = 0; r < n; ++r) {
        Eigen::MatrixXd a = gram;
        a.diagonal().array() += lambda;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(k);
        for (std::size_t s = adj.offsets[static_cast<std::size_t>(r)];
             s < adj.offsets[static_cast<std::size_t>(r) + 1]; ++s) {
            const auto y = fixed.row(adj.other[s]).transpose();
            const double confidence = 1.0 + alpha * adj.value[s];
            a.noalias() += (confidence - 1.0) * y * y.transpose();
            b.noalias() += confidence * y;
        }
        target.row(r) = a.ldlt().solve(b).transpose();
    }
}

} // namespace

double als_objective(const InteractionMatrix& matrix, const Eigen::MatrixXd& user_factors,
                     const Eigen::MatrixXd& item_factors, double lambda, double alpha) {
    // Every cell contributes (x.y)^2 at confidence 1; observed cells replace
    // that with c (1 - x.y)^2.
    const Eigen::MatrixXd xtx = user_factors.transpose() * user_factors;
    const Eigen::MatrixXd yty = item_factors.transpose() * item_factors;
    double loss = (xtx.array() * yty.array()).sum();
    for (const auto& c : matrix.cells) {
        const double s = user_factors.row(c.row).dot(item_factors.row(c.col));
        const double confidence = 1.0 + alpha * c.value;
        loss += confidence * (1.0 - s) * (1.0 - s) - s * s;
    }
    loss += lambda * (user_factors.squaredNorm() + item_factors.squaredNorm());
    return loss;
}

FactorModel train(const InteractionMatrix& matrix, const AlsParams& params, Timestamp trained_at,
                  Execution execution) {
    params.validate();
    if (matrix.empty()) throw InvalidArgument("cannot train on an empty interaction matrix");

    const auto users = static_cast<Eigen::Index>(matrix.rows());
    const auto items = static_cast<Eigen::Index>(matrix.cols());
    Eigen::MatrixXd x(users, params.k);
    Eigen::MatrixXd y(items, params.k);
    Rng rng(derive_seed(params.seed, 0xa15));
    std::normal_distribution<double> init(0.0, 0.1 / std::sqrt(static_cast<double>(params.k)));
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = init(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = init(rng);

    const Adjacency by_user = adjacency(matrix, true);
    const Adjacency by_item = adjacency(matrix, false);

    std::vector<double> history;
    history.reserve(static_cast<std::size_t>(params.iterations) + 1);
    history.push_back(als_objective(matrix, x, y, params.lambda, params.alpha));
    for (int it = 0; it < params.iterations; ++it) {
        solve_side(x, y, by_user, params.lambda, params.alpha, execution);
        solve_side(y, x, by_item, params.lambda, params.alpha, execution);
        const double loss = als_objective(matrix, x, y, params.lambda, params.alpha);
        if (!std::isfinite(loss)) throw Error("ALS objective became non-finite at iteration " + std::to_string(it));
        history.push_back(loss);
    }
    return FactorModel(matrix.user_ids, matrix.article_ids, std::move(x), std::move(y), params, trained_at,
                       std::move(history));
}

std::vector<double> relevance_scores(const FactorModel& model, std::optional<std::size_t> user_row,
                                     std::span<const std::optional<std::size_t>> item_rows) {
    std::vector<double> out(item_rows.size(), 50.0);
    if (!user_row) return out;
    std::vector<double> raw;
    std::vector<std::size_t> known;
    for (std::size_t i = 0; i < item_rows.size(); ++i) {
        if (!item_rows[i]) continue;
        raw.push_back(model.raw_score(*user_row, *item_rows[i]));
        known.push_back(i);
    }
    const auto scaled = min_max_scale(raw);
    for (std::size_t j = 0; j < known.size(); ++j) out[known[j]] = scaled[j];
    return out;
}

ScoreMap relevance_scores(const FactorModel& model, const std::string& user_id,
                          std::span<const std::string> candidates) {
    std::vector<std::optional<std::size_t>> rows;
    rows.reserve(candidates.size());
    for (const auto& id : candidates) rows.push_back(model.item_row(id));
    const auto scores = relevance_scores(model, model.user_row(user_id), rows);
    ScoreMap out;
    for (std::size_t i = 0; i < candidates.size(); ++i) out[candidates[i]] = scores[i];
    return out;
}

std::vector<Timestamp> retrain_schedule(Timestamp start, double horizon_hours, double interval_hours) {
    if (!(interval_hours > 0.0)) throw InvalidArgument("retrain interval must be > 0 hours");
    if (horizon_hours < 0.0) throw InvalidArgument("horizon must be >= 0 hours");
    const auto interval = static_cast<Timestamp>(std::llround(interval_hours * kSecondsPerHour));
    const auto horizon = static_cast<Timestamp>(std::llround(horizon_hours * kSecondsPerHour));
    if (interval <= 0) throw InvalidArgument("retrain interval rounds to zero seconds");
    std::vector<Timestamp> out;
    for (Timestamp t = 0; t <= horizon; t += interval) out.push_back(start + t);
    return out;
}

Json model_to_json(const FactorModel& model) {
    Json j;
    j["k"] = model.k();
    j["seed"] = model.params().seed;
    j["lambda"] = model.params().lambda;
    j["alpha"] = model.params().alpha;
    j["iterations"] = model.params().iterations;
    j["trained_at"] = model.trained_at();
    j["loss_history"] = model.loss_history();
    const auto factors = [](const std::vector<std::string>& ids, const Eigen::MatrixXd& f) {
        Json out = Json::object();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            std::vector<double> row(static_cast<std::size_t>(f.cols()));
            for (Eigen::Index c = 0; c < f.cols(); ++c) row[static_cast<std::size_t>(c)] = f(static_cast<Eigen::Index>(i), c);
            out[ids[i]] = row;
        }
        return out;
    };
    j["user_factors"] = factors(model.user_ids(), model.user_factors());
    j["item_factors"] = factors(model.item_ids(), model.item_factors());
    return j;
}

} // namespace newsrank
