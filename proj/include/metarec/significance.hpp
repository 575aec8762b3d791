#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "metarec/classifiers.hpp"
#include "metarec/dataset.hpp"

namespace metarec {

/// Cross-validation scheme used for the error statistic.
struct Protocol {
    enum class Kind { loocv, kfold };

    Kind kind = Kind::loocv;
    std::size_t folds = 0;       // kfold only
    std::uint64_t fold_seed = 0;  // kfold only: drives the stratified assignment

    static Protocol loocv() { return {}; }
    static Protocol kfold(std::size_t folds, std::uint64_t seed) { return {Kind::kfold, folds, seed}; }

    /// Leave-one-out up to 200 rows, stratified 10-fold above.
    static Protocol default_for(std::size_t rows, std::uint64_t seed);

    std::string describe() const;
};

inline constexpr std::size_t kLoocvRowLimit = 200;
inline constexpr std::size_t kDefaultPermutations = 199;
inline constexpr double kSignificanceLevel = 0.05;

struct ContingencyTable {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

    std::size_t total() const { return tp + fp + fn + tn; }
    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

ContingencyTable contingency(std::span<const int> predicted, std::span<const int> actual, int positive);

/// F1 = 2tp / (2tp + fp + fn), and 0 when tp = fp = fn = 0.
double f_score(const ContingencyTable& table);

struct CvResult {
    std::size_t mistakes = 0;
    std::size_t rows = 0;
    std::vector<int> predictions;   // held-out prediction for every row
    std::size_t fallback_folds = 0;  // folds trained with majority because only one class was present

    double error() const { return rows ? static_cast<double>(mistakes) / static_cast<double>(rows) : 0.0; }
};

/// Held-out misclassification rate. For leave-one-out this is the mean of
/// I(f_{D\i}(x_i) != y_i) over all rows. Fold k trains with seed
/// derive_seed(fit_seed, k), so the statistic is a pure function of the labels.
CvResult cv_error(const ClassifierConfig& config, const Matrix& X, std::span<const int> y,
                  const Protocol& protocol, std::uint64_t fit_seed);

CvResult cv_error(const ClassifierConfig& config, const Dataset& ds, const Protocol& protocol,
                  std::uint64_t fit_seed = 0);

/// Stratified fold index for every row.
std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds, std::uint64_t seed);

struct PermutationOptions {
    std::size_t permutations = kDefaultPermutations;
    std::uint64_t seed = 0;
    std::optional<Protocol> protocol;  // default: Protocol::default_for(rows, seed)
    bool keep_null_distribution = false;
    std::size_t jobs = 1;
};

struct SignificanceResult {
    double error_original = 0.0;
    double f_score = 0.0;
    double p_value = 1.0;
    std::size_t k_permutations = 0;
    std::size_t count_at_most = 0;  // permuted runs with error <= error_original
    std::vector<double> permuted_errors;
    std::uint64_t seed = 0;
    Protocol protocol;
    std::string positive_class;
    ContingencyTable table;
    std::size_t fallback_folds = 0;

    bool significant() const { return p_value <= kSignificanceLevel; }
};

/// Label-permutation test. Replicate r shuffles the labels with a Fisher-Yates
/// pass seeded from (seed, r) and recomputes the same cross-validated error with
/// the same fold seeds; p = (#{permuted error <= original} + 1) / (k + 1).
/// The F-score comes from the original run's pooled held-out predictions.
SignificanceResult permutation_test(const ClassifierConfig& config, const Dataset& ds,
                                    const PermutationOptions& options);

/// Same test on pre-encoded data; `positive` is the class index treated as positive.
SignificanceResult permutation_test(const ClassifierConfig& config, const Matrix& X, std::span<const int> y,
                                    int positive, const PermutationOptions& options);

/// Fit seed used for every fold model of a permutation test run with `seed`,
/// for the original labels and every replicate alike.
std::uint64_t test_fit_seed(std::uint64_t seed);

/// Labels for permutation replicate r (0-based).
std::vector<int> permuted_labels(std::span<const int> y, std::uint64_t seed, std::size_t replicate);

nlohmann::json to_json(const SignificanceResult& result);

}  // namespace metarec
