#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "metarec/dataset.hpp"

namespace metarec {

enum class Family {
    knn,
    logistic_regression,
    majority,
    naive_bayes,
    neural_network,
    random_forest,
    svm,
    decision_tree,
};

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::knn,          Family::logistic_regression, Family::majority, Family::naive_bayes,
    Family::neural_network, Family::random_forest,     Family::svm,      Family::decision_tree,
};

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// Integer, real, or symbolic ("none") parameter value.
using ParamValue = std::variant<long long, double, std::string>;

/// A classifier family plus a complete parameter assignment. Unspecified
/// parameters take the family defaults, so two configs with equal ids behave
/// identically. The id `family(key=value,...)` lists keys in sorted order and
/// is what the experiment table stores.
class ClassifierConfig {
public:
    /// Throws ValidationError for unknown keys or ill-typed / out-of-range values.
    static ClassifierConfig make(Family family, const std::map<std::string, ParamValue>& params = {});

    /// Inverse of id().
    static ClassifierConfig parse(const std::string& id);

    Family family() const { return family_; }
    const std::map<std::string, ParamValue>& params() const { return params_; }
    const std::string& id() const { return id_; }

    long long int_param(const std::string& key) const;
    double real_param(const std::string& key) const;
    /// Depth-like parameter; nullopt means unlimited ("none").
    std::optional<long long> limit_param(const std::string& key) const;

    friend bool operator==(const ClassifierConfig& a, const ClassifierConfig& b) { return a.id_ == b.id_; }

private:
    ClassifierConfig() = default;
    Family family_ = Family::majority;
    std::map<std::string, ParamValue> params_;
    std::string id_;
};

/// Family name of a canonical id, without parsing its parameters.
std::string family_of_id(const std::string& classifier_id);

/// A grid entry with capability flags restricting where it is applied.
struct GridEntry {
    ClassifierConfig config;
    bool numeric_only = false;               // skip datasets with categorical attributes
    std::vector<std::string> skip_datasets;  // explicit exclusions by dataset id

    bool applies_to(const Dataset& ds) const;
};

/// The shipped grid: 15 configurations over all eight families, fixed order.
std::vector<ClassifierConfig> default_grid();

/// Reads a JSON grid file: `[{"family": "knn", "params": {"k": 3},
/// "numeric_only": false, "skip_datasets": []}, ...]`.
std::vector<GridEntry> load_grid(const std::string& path);

std::vector<GridEntry> as_grid(const std::vector<ClassifierConfig>& configs);

/// Fitted state of one family; immutable after construction.
class Model {
public:
    virtual ~Model() = default;
    virtual int predict_row(std::span<const double> x) const = 0;
};

/// Result of fit(). Copies share the immutable fitted state.
class TrainedModel {
public:
    TrainedModel(ClassifierConfig config, std::shared_ptr<const Model> model, std::size_t n_features,
                 std::uint64_t seed)
        : config_(std::move(config)), model_(std::move(model)), n_features_(n_features), seed_(seed) {}

    const ClassifierConfig& config() const { return config_; }
    std::size_t n_features() const { return n_features_; }
    std::uint64_t seed() const { return seed_; }

    /// One label (0 or 1) per row. Throws ValidationError on a column-count mismatch.
    std::vector<int> predict(const Matrix& X) const;
    int predict_row(std::span<const double> x) const;

private:
    ClassifierConfig config_;
    std::shared_ptr<const Model> model_;
    std::size_t n_features_;
    std::uint64_t seed_;
};

/// Trains a binary classifier. y holds class indices in {0, 1}; ties in any
/// vote go to class 0 (the lexicographically smaller token).
/// Throws TrainingError on non-finite cells, shape mismatch, or a single-class
/// y for any family other than majority.
TrainedModel fit(const ClassifierConfig& config, const Matrix& X, std::span<const int> y, std::uint64_t seed);

}  // namespace metarec
