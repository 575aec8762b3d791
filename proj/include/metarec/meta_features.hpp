#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

#include "metarec/dataset.hpp"

namespace metarec {

/// Position of each characterization in MetaFeatureVector. The order is part
/// of the experiment table's on-disk contract.
enum class Feature : std::size_t {
    n_instances,
    n_attributes,
    instance_attribute_ratio,
    has_missing,
    pct_missing_avg,
    pct_unique_avg,
    linear_correlation_avg,
    skewness_avg,
    kurtosis_avg,
    variance_fraction_1d,
    class_entropy_norm,
    attribute_entropy_norm_avg,
    max_norm_mutual_information,
    equivalent_num_attributes,
    noise_to_signal,
};

inline constexpr std::size_t kFeatureCount = 15;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "n_instances",           "n_attributes",
    "instance_attribute_ratio", "has_missing",
    "pct_missing_avg",       "pct_unique_avg",
    "linear_correlation_avg", "skewness_avg",
    "kurtosis_avg",          "variance_fraction_1d",
    "class_entropy_norm",    "attribute_entropy_norm_avg",
    "max_norm_mutual_information", "equivalent_num_attributes",
    "noise_to_signal",
};

/// Bins per numeric attribute when estimating entropies.
inline constexpr int kEntropyBins = 10;

/// Stand-in for equivalent_num_attributes / noise_to_signal when no attribute
/// carries information about the class (mean mutual information of zero).
inline constexpr double kUninformativeSentinel = 1000.0;

struct MetaFeatureVector {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

    friend bool operator==(const MetaFeatureVector&, const MetaFeatureVector&) = default;
};

nlohmann::json to_json(const MetaFeatureVector& v);
MetaFeatureVector meta_features_from_json(const nlohmann::json& j);

/// Header line and single data row, in feature order.
std::string to_csv(const MetaFeatureVector& v);

struct GeneralFeatures {
    double n_instances = 0, n_attributes = 0, instance_attribute_ratio = 0;
    double has_missing = 0, pct_missing_avg = 0, pct_unique_avg = 0;
};

struct StatisticalFeatures {
    double linear_correlation_avg = 0, skewness_avg = 0, kurtosis_avg = 0, variance_fraction_1d = 0;
};

struct InformationFeatures {
    double class_entropy_norm = 0, attribute_entropy_norm_avg = 0, max_norm_mutual_information = 0;
    double equivalent_num_attributes = 0, noise_to_signal = 0;
};

GeneralFeatures extract_general(const Dataset& ds);

/// Computed on the mean-imputed numeric attributes only; categoricals are ignored.
/// Fewer than two numeric attributes gives zero mean correlation; none gives
/// all zeros. Constant columns contribute zero correlation, skewness, and kurtosis.
StatisticalFeatures extract_statistical(const Dataset& ds);

/// Numeric attributes are imputed and cut into kEntropyBins equal-width bins
/// over [min, max]; categoricals are mode-imputed and used as is. Logs base 2.
InformationFeatures extract_information_theoretic(const Dataset& ds);

/// All fifteen characterizations in Feature order. Rows are put in a canonical
/// order first, so the result is bit-identical for any row permutation.
MetaFeatureVector featurize(const Dataset& ds);

/// The dataset with rows sorted into a canonical order.
Dataset canonical_row_order(const Dataset& ds);

}  // namespace metarec
