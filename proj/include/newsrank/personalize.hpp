#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "newsrank/execution.hpp"
#include "newsrank/io.hpp"
#include "newsrank/model.hpp"

namespace newsrank {

using ScoreMap = std::unordered_map<std::string, double>;

struct MatrixCell {
    std::uint32_t row = 0;
    std::uint32_t col = 0;
    double value = 0.0; // click count
};

// Implicit-feedback user x article click counts.
struct InteractionMatrix {
    std::vector<std::string> user_ids;    // row order, sorted
    std::vector<std::string> article_ids; // column order, sorted
    std::vector<MatrixCell> cells;        // sorted by (row, col), values > 0
    int window_days = 21;
    std::size_t min_article_clicks = 100;

    bool empty() const noexcept { return cells.empty(); }
    std::size_t rows() const noexcept { return user_ids.size(); }
    std::size_t cols() const noexcept { return article_ids.size(); }
};

// Counts clicks at `now - window_days <= at <= now`, keeping only subscriber
// users (when requested) and articles with at least `min_clicks` such clicks.
InteractionMatrix build_interaction_matrix(std::span<const InteractionEvent> events, const Catalog& catalog,
                                           Timestamp now, int window_days = 21, std::size_t min_clicks = 100,
                                           bool subscribers_only = true);
InteractionMatrix build_interaction_matrix(const EventLog& log, Timestamp now, int window_days = 21,
                                           std::size_t min_clicks = 100, bool subscribers_only = true);

// Implicit ALS hyperparameters; confidence is 1 + alpha * count.
struct AlsParams {
    int k = 16;
    double lambda = 0.1;
    double alpha = 40.0;
    int iterations = 15;
    std::uint64_t seed = 0;

    void validate() const;
};

// Trained latent factors. Immutable; safe to query concurrently.
class FactorModel {
public:
    FactorModel(std::vector<std::string> user_ids, std::vector<std::string> item_ids, Eigen::MatrixXd user_factors,
                Eigen::MatrixXd item_factors, AlsParams params, Timestamp trained_at,
                std::vector<double> loss_history);

    int k() const noexcept { return static_cast<int>(user_factors_.cols()); }
    const AlsParams& params() const noexcept { return params_; }
    Timestamp trained_at() const noexcept { return trained_at_; }
    const std::vector<std::string>& user_ids() const noexcept { return user_ids_; }
    const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
    const Eigen::MatrixXd& user_factors() const noexcept { return user_factors_; }
    const Eigen::MatrixXd& item_factors() const noexcept { return item_factors_; }
    // Objective after initialization followed by one value per iteration.
    const std::vector<double>& loss_history() const noexcept { return loss_history_; }

    std::optional<std::size_t> user_row(const std::string& user_id) const;
    std::optional<std::size_t> item_row(const std::string& article_id) const;
    double raw_score(std::size_t user_row, std::size_t item_row) const;

private:
    std::vector<std::string> user_ids_;
    std::vector<std::string> item_ids_;
    std::unordered_map<std::string, std::size_t> user_index_;
    std::unordered_map<std::string, std::size_t> item_index_;
    Eigen::MatrixXd user_factors_;
    Eigen::MatrixXd item_factors_;
    AlsParams params_;
    Timestamp trained_at_ = 0;
    std::vector<double> loss_history_;
};

// Weighted implicit-feedback objective
//   sum_{u,i} c_ui (p_ui - x_u.y_i)^2 + lambda (|X|^2 + |Y|^2)
// with p_ui = [count > 0] and c_ui = 1 + alpha * count.
double als_objective(const InteractionMatrix& matrix, const Eigen::MatrixXd& user_factors,
                     const Eigen::MatrixXd& item_factors, double lambda, double alpha);

// Alternating least squares. Deterministic given params.seed; the parallel
// and serial paths produce bit-identical factors. Throws InvalidArgument on
// an empty matrix or bad params, Error on a non-finite objective.
FactorModel train(const InteractionMatrix& matrix, const AlsParams& params, Timestamp trained_at = 0,
                  Execution execution = Execution::Parallel);

// Per-user relevance on 0..100: min-max of dot products over the candidates
// the model knows. Unknown users, unknown articles and all-equal raw scores
// fall back to 50.
ScoreMap relevance_scores(const FactorModel& model, const std::string& user_id,
                          std::span<const std::string> candidates);

// Same rule over precomputed rows; nullopt item rows fall back to 50.
std::vector<double> relevance_scores(const FactorModel& model, std::optional<std::size_t> user_row,
                                     std::span<const std::optional<std::size_t>> item_rows);

// start, start + interval, ... up to start + horizon inclusive.
std::vector<Timestamp> retrain_schedule(Timestamp start, double horizon_hours, double interval_hours = 3.0);

Json model_to_json(const FactorModel& model);

} // namespace newsrank
