#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "metarec/classifiers.hpp"
#include "metarec/meta_features.hpp"
#include "metarec/significance.hpp"

namespace metarec {

inline constexpr const char* kToolkitVersion = "metarec-0.1.0";

/// One experiment: a dataset's characterization, a classifier configuration,
/// and how well that configuration did on the dataset.
struct ExperimentRow {
    std::string dataset_id;
    MetaFeatureVector meta_features;
    std::string classifier_id;
    double f_score = 0.0;
    double p_value = 1.0;
    double error_original = 0.0;
    std::size_t k_permutations = 0;
    std::uint64_t seed = 0;  // campaign seed
    std::string timestamp;   // ISO-8601 UTC
    std::string toolkit_version = kToolkitVersion;

    friend bool operator==(const ExperimentRow&, const ExperimentRow&) = default;
};

/// Rows keyed uniquely by (dataset_id, classifier_id, seed); all rows of one
/// dataset carry the same meta-features. add() enforces both.
class ExperimentTable {
public:
    ExperimentTable() = default;
    explicit ExperimentTable(std::vector<ExperimentRow> rows);

    void add(ExperimentRow row);

    const std::vector<ExperimentRow>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    /// Distinct dataset ids, ascending.
    std::vector<std::string> dataset_ids() const;
    const MetaFeatureVector& meta_features_of(const std::string& dataset_id) const;
    bool contains_dataset(const std::string& dataset_id) const { return features_.count(dataset_id) > 0; }
    bool contains_key(const std::string& dataset_id, const std::string& classifier_id, std::uint64_t seed) const;

    /// Rows of one dataset ordered by classifier_id (then seed); empty for an unknown id.
    std::vector<ExperimentRow> rows_for_dataset(const std::string& dataset_id) const;

    /// Copy of the table without any row of the given dataset.
    ExperimentTable without_dataset(const std::string& dataset_id) const;

    friend bool operator==(const ExperimentTable& a, const ExperimentTable& b) { return a.rows_ == b.rows_; }

private:
    std::vector<ExperimentRow> rows_;
    std::map<std::string, MetaFeatureVector> features_;
    std::map<std::string, std::size_t> key_index_;
};

/// Header of the CSV file: dataset_id, the 15 features, classifier_id,
/// f_score, p_value, error_original, k_permutations, seed, timestamp, toolkit_version.
std::vector<std::string> table_header();

std::string serialize_table(const ExperimentTable& table, bool with_header = true);
void save_table(const ExperimentTable& table, const std::string& path);

/// Appends rows to an existing table file (or creates it). Refuses, without
/// touching the file, if any row's key already exists there or in `rows`.
void append_rows(const std::string& path, const std::vector<ExperimentRow>& rows);

/// Parses and validates a table file. Throws SchemaError on a header mismatch,
/// malformed field, out-of-range metric (p must lie in (0, 1]), duplicate key,
/// or inconsistent meta-features.
ExperimentTable load_table(const std::string& path);
ExperimentTable parse_table(const std::string& text);

struct RunOptions {
    std::size_t permutations = kDefaultPermutations;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::optional<Protocol> protocol;
    std::string timestamp = "1970-01-01T00:00:00Z";
    bool keep_null_distribution = false;  // copy each pair's permuted errors into the report
};

struct SkippedPair {
    std::string dataset_id;
    std::string classifier_id;
    std::string reason;
};

struct RunReport {
    std::size_t datasets = 0;
    std::size_t configs = 0;
    std::size_t rows = 0;
    std::vector<SkippedPair> not_applicable;
    std::vector<SkippedPair> failures;
    std::vector<SkippedPair> fallbacks;  // pairs where some fold trained as majority

    struct NullDistribution {
        std::string dataset_id;
        std::string classifier_id;
        std::vector<double> permuted_errors;
    };
    std::vector<NullDistribution> null_distributions;  // only with keep_null_distribution
};

nlohmann::json to_json(const RunReport& report);

struct CampaignResult {
    ExperimentTable table;
    RunReport report;
};

/// Seed for one (dataset, classifier) pair of a campaign.
std::uint64_t pair_seed(const std::string& dataset_id, const std::string& classifier_id, std::uint64_t campaign_seed);

/// Evaluates every applicable (dataset, config) pair: meta-features plus a
/// permutation test. Pairs run on `jobs` threads; rows come out in
/// (dataset, grid) order regardless. A failing pair is reported, never fatal.
CampaignResult run_experiments(const std::vector<Dataset>& datasets, const std::vector<GridEntry>& grid,
                               const RunOptions& options);

/// True when every row of the dataset carries exactly featurize(ds).
bool meta_features_match(const ExperimentTable& table, const Dataset& ds);

}  // namespace metarec
