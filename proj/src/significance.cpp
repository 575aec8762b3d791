#include "metarec/significance.hpp"

#include <algorithm>

#include <json.hpp>

#include "metarec/error.hpp"
#include "metarec/parallel.hpp"
#include "metarec/random.hpp"

namespace metarec {

namespace {

constexpr std::uint64_t kFitStream = 0x666974;       // "fit"
constexpr std::uint64_t kPermuteStream = 0x7065726D;  // "perm"

bool has_both_classes(std::span<const int> y) {
    bool seen[2] = {false, false};
    for (int v : y) seen[v] = true;
    return seen[0] && seen[1];
}

}  // namespace

Protocol Protocol::default_for(std::size_t rows, std::uint64_t seed) {
    return rows <= kLoocvRowLimit ? loocv() : kfold(10, seed);
}

std::string Protocol::describe() const {
    return kind == Kind::loocv ? "loocv" : "kfold(" + std::to_string(folds) + ")";
}

ContingencyTable contingency(std::span<const int> predicted, std::span<const int> actual, int positive) {
    if (predicted.size() != actual.size()) throw ValidationError("contingency: length mismatch");
    ContingencyTable t;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] == positive, a = actual[i] == positive;
        if (p && a) ++t.tp;
        else if (p) ++t.fp;
        else if (a) ++t.fn;
        else ++t.tn;
    }
    return t;
}

double f_score(const ContingencyTable& t) {
    const std::size_t denom = 2 * t.tp + t.fp + t.fn;
    return denom == 0 ? 0.0 : 2.0 * static_cast<double>(t.tp) / static_cast<double>(denom);
}

std::vector<std::size_t> stratified_folds(std::span<const int> y, std::size_t folds, std::uint64_t seed) {
    Engine engine(seed);
    std::vector<std::size_t> fold(y.size());
    std::size_t counter = 0;
    for (int c = 0; c < 2; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c) members.push_back(i);
        shuffle(std::span<std::size_t>(members), engine);
        for (auto i : members) fold[i] = counter++ % folds;
    }
    return fold;
}

CvResult cv_error(const ClassifierConfig& config, const Matrix& X, std::span<const int> y,
                  const Protocol& protocol, std::uint64_t fit_seed) {
    const std::size_t n = y.size();
    if (static_cast<std::size_t>(X.rows()) != n) throw ValidationError("cv_error: row/label count mismatch");
    if (n < 2) throw ValidationError("cv_error: needs at least 2 rows");

    std::vector<std::size_t> fold_of(n);
    std::size_t folds = n;
    if (protocol.kind == Protocol::Kind::loocv) {
        for (std::size_t i = 0; i < n; ++i) fold_of[i] = i;
    } else {
        if (protocol.folds < 2 || protocol.folds > n)
            throw ValidationError("cv_error: fold count must lie in [2, rows]");
        folds = protocol.folds;
        fold_of = stratified_folds(y, folds, protocol.fold_seed);
    }

    const auto majority = ClassifierConfig::make(Family::majority);
    CvResult result;
    result.rows = n;
    result.predictions.assign(n, 0);
    const Eigen::Index m = X.cols();
    Matrix train, test;
    std::vector<int> train_y;
    std::vector<std::size_t> test_rows;
    for (std::size_t k = 0; k < folds; ++k) {
        test_rows.clear();
        train_y.clear();
        for (std::size_t i = 0; i < n; ++i) (fold_of[i] == k ? test_rows.push_back(i) : train_y.push_back(y[i]));
        if (test_rows.empty()) continue;
        train.resize(static_cast<Eigen::Index>(n - test_rows.size()), m);
        test.resize(static_cast<Eigen::Index>(test_rows.size()), m);
        Eigen::Index tr = 0, te = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = X.row(static_cast<Eigen::Index>(i));
            if (fold_of[i] == k) test.row(te++) = row;
            else train.row(tr++) = row;
        }
        const bool usable = config.family() == Family::majority || has_both_classes(train_y);
        if (!usable) ++result.fallback_folds;
        const TrainedModel model =
            fit(usable ? config : majority, train, train_y, derive_seed(fit_seed, k));
        const auto predicted = model.predict(test);
        for (std::size_t t = 0; t < test_rows.size(); ++t) {
            result.predictions[test_rows[t]] = predicted[t];
            result.mistakes += predicted[t] != y[test_rows[t]];
        }
    }
    return result;
}

CvResult cv_error(const ClassifierConfig& config, const Dataset& ds, const Protocol& protocol,
                  std::uint64_t fit_seed) {
    if (!ds.is_binary()) throw ValidationError("cv_error: dataset '" + ds.id() + "' is not binary");
    const EncodedDataset enc = impute_and_encode(ds);
    return cv_error(config, enc.X, enc.y, protocol, fit_seed);
}

std::uint64_t test_fit_seed(std::uint64_t seed) { return derive_seed(seed, kFitStream); }

std::vector<int> permuted_labels(std::span<const int> y, std::uint64_t seed, std::size_t replicate) {
    std::vector<int> out(y.begin(), y.end());
    Engine engine(derive_seed(derive_seed(seed, kPermuteStream), replicate));
    shuffle(std::span<int>(out), engine);
    return out;
}

SignificanceResult permutation_test(const ClassifierConfig& config, const Matrix& X, std::span<const int> y,
                                    int positive, const PermutationOptions& options) {
    if (options.permutations < 1) throw ValidationError("permutation_test: need at least one permutation");
    const Protocol protocol = options.protocol.value_or(Protocol::default_for(y.size(), options.seed));
    const std::uint64_t fit_seed = test_fit_seed(options.seed);

    const CvResult original = cv_error(config, X, y, protocol, fit_seed);
    const std::size_t k = options.permutations;
    std::vector<std::size_t> mistakes(k);
    std::vector<std::size_t> fallbacks(k);
    parallel_for(k, options.jobs, [&](std::size_t r) {
        const auto labels = permuted_labels(y, options.seed, r);
        const CvResult permuted = cv_error(config, X, labels, protocol, fit_seed);
        mistakes[r] = permuted.mistakes;
        fallbacks[r] = permuted.fallback_folds;
    });

    SignificanceResult result;
    result.error_original = original.error();
    result.table = contingency(original.predictions, y, positive);
    result.f_score = f_score(result.table);
    result.k_permutations = k;
    result.count_at_most = static_cast<std::size_t>(
        std::count_if(mistakes.begin(), mistakes.end(), [&](std::size_t e) { return e <= original.mistakes; }));
    result.p_value = static_cast<double>(result.count_at_most + 1) / static_cast<double>(k + 1);
    result.seed = options.seed;
    result.protocol = protocol;
    result.fallback_folds = original.fallback_folds;
    for (auto f : fallbacks) result.fallback_folds += f;
    if (options.keep_null_distribution) {
        result.permuted_errors.reserve(k);
        for (auto e : mistakes) result.permuted_errors.push_back(static_cast<double>(e) / static_cast<double>(y.size()));
    }
    return result;
}

SignificanceResult permutation_test(const ClassifierConfig& config, const Dataset& ds,
                                    const PermutationOptions& options) {
    if (!ds.is_binary()) throw ValidationError("permutation_test: dataset '" + ds.id() + "' is not binary");
    const EncodedDataset enc = impute_and_encode(ds);
    const auto& classes = ds.class_values();
    const int positive =
        static_cast<int>(std::find(classes.begin(), classes.end(), ds.positive_class()) - classes.begin());
    SignificanceResult result = permutation_test(config, enc.X, enc.y, positive, options);
    result.positive_class = ds.positive_class();
    return result;
}

nlohmann::json to_json(const SignificanceResult& r) {
    nlohmann::json j = {
        {"error_original", r.error_original},
        {"f_score", r.f_score},
        {"p_value", r.p_value},
        {"k_permutations", r.k_permutations},
        {"count_at_most", r.count_at_most},
        {"seed", r.seed},
        {"protocol", r.protocol.describe()},
        {"positive_class", r.positive_class},
        {"contingency", {{"tp", r.table.tp}, {"fp", r.table.fp}, {"fn", r.table.fn}, {"tn", r.table.tn}}},
        {"fallback_folds", r.fallback_folds},
        {"significant", r.significant()},
    };
    if (!r.permuted_errors.empty()) j["permuted_errors"] = r.permuted_errors;
    return j;
}

}  // namespace metarec
