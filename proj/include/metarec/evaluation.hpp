#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metarec/experiment_store.hpp"
#include "metarec/recommender.hpp"

namespace metarec {

enum class Metric { fscore, pvalue };
enum class Band { good = 0, neutral = 1, poor = 2 };

std::string to_string(Band band);

/// Three-way banding of a metric value:
///   F-score: good [0.9, 1], neutral [0.5, 0.9), poor [0, 0.5)
///   p-value: good [0, 0.045], neutral (0.045, 0.2], poor (0.2, 1]
/// Throws ValidationError outside [0, 1].
Band discretize(Metric metric, double value);

/// Rows per (F-score band, p-value band) cell, indexed [fscore][pvalue].
struct AgreementMatrix {
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::array<std::array<double, 3>, 3> percent{};  // one decimal, largest-remainder rounded so the cells sum to 100
    std::size_t total = 0;

    /// Share of rows where both metrics fall in the same band.
    double agreement_percent() const;
};

AgreementMatrix agreement_matrix(const ExperimentTable& table);
nlohmann::json to_json(const AgreementMatrix& m);
std::string format_agreement(const AgreementMatrix& m);

struct RankResult {
    std::size_t rank = 0;  // 1 = best
    std::size_t rows = 0;  // m_i
    bool found = true;

    double normalized() const { return static_cast<double>(rank) / static_cast<double>(rows); }
};

/// Position of the recommended classifier's best row among a dataset's rows
/// sorted by F-score descending: 1 + #rows with a strictly larger F-score.
/// An absent classifier gets the worst position (rank = rows, found = false).
RankResult rank_of_recommendation(std::span<const ExperimentRow> rows, const std::string& classifier_id);

/// Area under the empirical CDF of values in [0, 1], integrated exactly over
/// its steps. Equals 1 - mean(values). Throws ValidationError on an empty list
/// or a value outside [0, 1].
double cdf_auc(std::span<const double> nranks);

struct DatasetEvaluation {
    std::string dataset_id;
    std::string recommended;
    std::size_t rank = 0;
    std::size_t rows = 0;
    double nrank = 0.0;
    bool found = true;
};

struct CdfPoint {
    double x = 0.0;
    double cumulative = 0.0;
};

struct EvalReport {
    Strategy strategy = Strategy::pvalue;
    std::vector<DatasetEvaluation> records;  // dataset_id ascending
    double auc = 0.0;
    double mean_nrank = 0.0;
    std::array<std::size_t, 10> histogram{};  // bins (0,0.1], (0.1,0.2], ..., (0.9,1]
    std::vector<CdfPoint> cdf;
    std::vector<std::string> warnings;
};

using RecommendFn =
    std::function<Recommendation(const ExperimentTable&, const MetaFeatureVector&, Strategy, const RecommendOptions&)>;

/// For every dataset, recommends from a table holding only the other datasets'
/// rows, then ranks the pick against the dataset's own rows. `recommender`
/// defaults to recommend().
EvalReport leave_one_dataset_out(const ExperimentTable& table, Strategy strategy,
                                 const RecommendOptions& options = {}, const RecommendFn& recommender = {});

nlohmann::json to_json(const EvalReport& report);
std::string histogram_csv(const EvalReport& report);
std::string cdf_csv(const EvalReport& report);

}  // namespace metarec
