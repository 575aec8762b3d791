#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metarec/experiment_store.hpp"

namespace metarec {

/// Which recorded metric drives the ranking: larger F-score is better,
/// smaller permutation p-value is better.
enum class Strategy { fscore, pvalue };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& text);

/// Floor applied to neighbour distances before they divide a score.
inline constexpr double kDistanceFloor = 1e-6;

struct Neighbor {
    std::string dataset_id;
    double distance = 0.0;  // already floored at kDistanceFloor

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

struct ScoredClassifier {
    std::string classifier_id;
    double score = 0.0;

    friend bool operator==(const ScoredClassifier&, const ScoredClassifier&) = default;
};

struct Recommendation {
    Strategy strategy = Strategy::pvalue;
    std::vector<ScoredClassifier> ranked;  // score descending, classifier_id ascending on ties
    std::vector<Neighbor> neighbors;

    const std::string& best() const { return ranked.front().classifier_id; }
};

struct RecommendOptions {
    std::size_t neighbors = 5;
    std::size_t top_per_neighbor = 2;
    std::optional<std::string> exclude_dataset;  // ignore this dataset's rows (leave-one-out)
};

using FeatureArray = std::array<double, kFeatureCount>;

/// Min-max scaled feature vectors of the table's datasets and of the query.
/// Bounds come from the distinct datasets plus the query; a constant feature maps to 0.
struct NormalizedSpace {
    std::vector<std::string> dataset_ids;  // ascending
    std::vector<FeatureArray> datasets;
    FeatureArray query{};
};

NormalizedSpace normalize_features(const ExperimentTable& table, const MetaFeatureVector& query,
                                   const std::optional<std::string>& exclude = std::nullopt);

/// The `count` closest datasets by Euclidean distance in the normalized space,
/// ordered by (distance, dataset_id).
std::vector<Neighbor> nearest_datasets(const ExperimentTable& table, const MetaFeatureVector& query,
                                       std::size_t count = 5,
                                       const std::optional<std::string>& exclude = std::nullopt);

/// Each neighbour contributes its `top_per_neighbor` best rows, scored
/// F1 / d^2 or (1 - p) / d^2; scores of a repeated classifier are summed.
/// Returned in candidate order of first appearance.
std::vector<ScoredClassifier> score_candidates(const std::vector<Neighbor>& neighbors, const ExperimentTable& table,
                                               Strategy strategy, std::size_t top_per_neighbor = 2);

/// Full ranking for a dataset with the given meta-features. Throws
/// ValidationError on an empty table (after exclusion).
Recommendation recommend(const ExperimentTable& table, const MetaFeatureVector& query, Strategy strategy,
                         const RecommendOptions& options = {});

nlohmann::json to_json(const Recommendation& rec);

/// Human-readable ranking with the neighbours used.
std::string format_recommendation(const Recommendation& rec, bool by_family = false);

}  // namespace metarec
