#include "metarec/recommender.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "metarec/error.hpp"

namespace metarec {

std::string to_string(Strategy s) { return s == Strategy::fscore ? "fscore" : "pvalue"; }

Strategy strategy_from_string(const std::string& text) {
    if (text == "fscore") return Strategy::fscore;
    if (text == "pvalue") return Strategy::pvalue;
    throw ValidationError("unknown strategy '" + text + "' (expected fscore or pvalue)");
}

NormalizedSpace normalize_features(const ExperimentTable& table, const MetaFeatureVector& query,
                                   const std::optional<std::string>& exclude) {
    NormalizedSpace space;
    for (const auto& id : table.dataset_ids()) {
        if (exclude && id == *exclude) continue;
        space.dataset_ids.push_back(id);
        space.datasets.push_back(table.meta_features_of(id).values);
    }
    space.query = query.values;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
        double lo = space.query[f], hi = space.query[f];
        for (const auto& v : space.datasets) {
            lo = std::min(lo, v[f]);
            hi = std::max(hi, v[f]);
        }
        const double span = hi - lo;
        auto scale = [&](double x) { return span > 0.0 ? (x - lo) / span : 0.0; };
        for (auto& v : space.datasets) v[f] = scale(v[f]);
        space.query[f] = scale(space.query[f]);
    }
    return space;
}

std::vector<Neighbor> nearest_datasets(const ExperimentTable& table, const MetaFeatureVector& query,
                                       std::size_t count, const std::optional<std::string>& exclude) {
    const NormalizedSpace space = normalize_features(table, query, exclude);
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(space.datasets.size());
    for (std::size_t i = 0; i < space.datasets.size(); ++i) {
        double sum = 0.0;
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const double d = space.datasets[i][f] - space.query[f];
            sum += d * d;
        }
        order.emplace_back(std::sqrt(sum), i);
    }
    // dataset_ids are ascending, so index order breaks distance ties by id.
    std::sort(order.begin(), order.end());
    std::vector<Neighbor> out;
    for (std::size_t i = 0; i < std::min(count, order.size()); ++i)
        out.push_back({space.dataset_ids[order[i].second], std::max(order[i].first, kDistanceFloor)});
    return out;
}

std::vector<ScoredClassifier> score_candidates(const std::vector<Neighbor>& neighbors, const ExperimentTable& table,
                                               Strategy strategy, std::size_t top_per_neighbor) {
    std::vector<ScoredClassifier> merged;
    std::map<std::string, std::size_t> position;
    for (const auto& nb : neighbors) {
        auto rows = table.rows_for_dataset(nb.dataset_id);
        if (rows.empty()) continue;
        // rows_for_dataset is ordered by (classifier_id, seed); stable_sort keeps that for metric ties.
        std::stable_sort(rows.begin(), rows.end(), [&](const ExperimentRow& a, const ExperimentRow& b) {
            return strategy == Strategy::fscore ? a.f_score > b.f_score : a.p_value < b.p_value;
        });
        const double d2 = nb.distance * nb.distance;
        for (std::size_t i = 0; i < std::min(top_per_neighbor, rows.size()); ++i) {
            const auto& row = rows[i];
            const double merit = strategy == Strategy::fscore ? row.f_score : 1.0 - row.p_value;
            const double score = merit / d2;
            const auto [it, inserted] = position.emplace(row.classifier_id, merged.size());
            if (inserted) merged.push_back({row.classifier_id, score});
            else merged[it->second].score += score;
        }
    }
    return merged;
}

Recommendation recommend(const ExperimentTable& table, const MetaFeatureVector& query, Strategy strategy,
                         const RecommendOptions& options) {
    Recommendation rec;
    rec.strategy = strategy;
    rec.neighbors = nearest_datasets(table, query, options.neighbors, options.exclude_dataset);
    if (rec.neighbors.empty()) throw ValidationError("recommend: the experiment table has no usable datasets");
    rec.ranked = score_candidates(rec.neighbors, table, strategy, options.top_per_neighbor);
    std::sort(rec.ranked.begin(), rec.ranked.end(), [](const ScoredClassifier& a, const ScoredClassifier& b) {
        return a.score != b.score ? a.score > b.score : a.classifier_id < b.classifier_id;
    });
    return rec;
}

nlohmann::json to_json(const Recommendation& rec) {
    nlohmann::json ranked = nlohmann::json::array(), neighbors = nlohmann::json::array();
    for (std::size_t i = 0; i < rec.ranked.size(); ++i)
        ranked.push_back({{"rank", i + 1}, {"classifier_id", rec.ranked[i].classifier_id}, {"score", rec.ranked[i].score}});
    for (const auto& nb : rec.neighbors) neighbors.push_back({{"dataset_id", nb.dataset_id}, {"distance", nb.distance}});
    return {{"strategy", to_string(rec.strategy)}, {"ranked", ranked}, {"neighbors", neighbors}};
}

std::string format_recommendation(const Recommendation& rec, bool by_family) {
    std::ostringstream out;
    out << "strategy: " << to_string(rec.strategy) << "\n\n";
    std::vector<ScoredClassifier> rows = rec.ranked;
    if (by_family) {
        std::map<std::string, double> totals;
        for (const auto& r : rec.ranked) totals[family_of_id(r.classifier_id)] += r.score;
        rows.clear();
        for (const auto& [family, score] : totals) rows.push_back({family, score});
        std::stable_sort(rows.begin(), rows.end(),
                         [](const ScoredClassifier& a, const ScoredClassifier& b) { return a.score > b.score; });
    }
    out << std::left << std::setw(6) << "rank" << std::setw(56) << (by_family ? "family" : "classifier") << "score\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        out << std::setw(6) << (i + 1) << std::setw(56) << rows[i].classifier_id << std::setprecision(6)
            << rows[i].score << "\n";
    out << "\nneighbors:\n";
    for (const auto& nb : rec.neighbors) out << "  " << std::setw(48) << nb.dataset_id << nb.distance << "\n";
    return out.str();
}

}  // namespace metarec
