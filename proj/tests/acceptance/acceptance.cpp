// Acceptance checks. Each criterion prints one PASS/FAIL line; the process
// exits non-zero if any selected criterion fails.
//
//   metarec_acceptance                 run all nine
//   metarec_acceptance 3 5             run a subset
//   --cli PATH   metarec executable used by the end-to-end criteria
//   --work DIR   scratch directory shared by criteria 7 and 8

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <thread>
#include <vector>

#include "metarec/corpus.hpp"
#include "metarec/evaluation.hpp"
#include "metarec/experiment_store.hpp"
#include "metarec/meta_features.hpp"
#include "metarec/recommender.hpp"
#include "metarec/significance.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

namespace fs = std::filesystem;
using namespace metarec;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

struct Settings {
    std::string cli = METAREC_CLI_PATH;
    std::string work = METAREC_ACCEPTANCE_WORK;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* pattern, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, pattern, a);
    return buf;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, Engine& e) {
    Matrix X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = std::round(uniform_unit(e) * 1000.0) / 100.0;
    return X;
}

std::vector<int> random_binary_labels(std::size_t n, Engine& e) {
    const std::size_t positives = 1 + uniform_below(e, n - 1);  // both classes present
    std::vector<int> y(n, 0);
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(positives), 1);
    shuffle(std::span<int>(y), e);
    return y;
}

// --- 1: Monte Carlo p against exhaustive enumeration ------------------------------

Verdict permutation_exactness(const Settings&) {
    const auto start = Clock::now();
    const std::vector<ClassifierConfig> configs = {
        ClassifierConfig::make(Family::knn, {{"k", 1LL}}),
        ClassifierConfig::make(Family::knn, {{"k", 3LL}}),
        ClassifierConfig::make(Family::naive_bayes),
        ClassifierConfig::make(Family::decision_tree, {{"max_depth", 2LL}, {"min_leaf", 1LL}}),
        ClassifierConfig::make(Family::logistic_regression, {{"lambda", 0.1}}),
        ClassifierConfig::make(Family::random_forest, {{"trees", 5LL}}),
    };
    constexpr std::size_t k = 4999;
    std::size_t cases = 0, failures = 0;
    double worst = 0.0;
    std::string worst_case;
    for (std::uint64_t d = 0; d < 12; ++d) {
        Engine e(derive_seed(0xACCE1, d));
        const std::size_t n = 4 + d % 4;  // 4..7 rows
        const Matrix X = random_matrix(n, 1 + d % 3, e);
        const std::vector<int> y = random_binary_labels(n, e);
        for (const auto& config : configs) {
            const std::uint64_t seed = derive_seed(d, cases);
            const double exact = oracle::exact_permutation_p(config, X, y, seed);
            PermutationOptions opt;
            opt.permutations = k;
            opt.seed = seed;
            opt.protocol = Protocol::loocv();
            const double mc = permutation_test(config, X, y, 1, opt).p_value;
            const double se = std::sqrt(exact * (1.0 - exact) / static_cast<double>(k));
            const double z = se > 0 ? std::abs(mc - exact) / se : (mc == exact ? 0.0 : INFINITY);
            ++cases;
            if (z > 3.0) ++failures;
            if (z > worst) {
                worst = z;
                worst_case = "n=" + std::to_string(n) + " " + config.id() + " exact=" + fmt("%.5f", exact) +
                             " mc=" + fmt("%.5f", mc);
            }
        }
    }
    const double elapsed = seconds_since(start);
    Verdict v;
    v.pass = failures == 0 && elapsed < 300.0;
    v.detail = std::to_string(cases) + " dataset/config cases with n<=7, k=4999; " + std::to_string(failures) +
               " beyond 3 SE; largest deviation " + fmt("%.2f SE", worst) + " (" + worst_case + "); " +
               fmt("%.1f s", elapsed);
    return v;
}

// --- 2: p-value quantisation ---------------------------------------------------------

Verdict pvalue_quantisation(const Settings&) {
    const std::vector<ClassifierConfig> configs = {
        ClassifierConfig::make(Family::majority),
        ClassifierConfig::make(Family::knn, {{"k", 1LL}}),
        ClassifierConfig::make(Family::knn, {{"k", 5LL}}),
        ClassifierConfig::make(Family::naive_bayes),
        ClassifierConfig::make(Family::decision_tree, {{"max_depth", 3LL}}),
        ClassifierConfig::make(Family::svm, {{"C", 1.0}, {"epochs", 10LL}}),
    };
    std::size_t runs = 0, bad = 0;
    std::set<std::size_t> counts_seen;
    for (std::uint64_t r = 0; r < 1000; ++r) {
        Engine e(derive_seed(0xACCE2, r));
        const std::size_t n = 5 + uniform_below(e, 12);
        const Matrix X = random_matrix(n, 1 + uniform_below(e, 3), e);
        const std::vector<int> y = random_binary_labels(n, e);
        PermutationOptions opt;
        opt.permutations = 199;
        opt.seed = e();
        opt.keep_null_distribution = true;
        const auto result = permutation_test(configs[r % configs.size()], X, y, 1, opt);
        // Count independently from the retained null distribution.
        const auto c = static_cast<std::size_t>(std::count_if(result.permuted_errors.begin(), result.permuted_errors.end(),
                                                              [&](double err) { return err <= result.error_original; }));
        const bool ok = result.p_value == static_cast<double>(c + 1) / 200.0 && c <= 199 && result.p_value > 0.0 &&
                        result.count_at_most == c && result.k_permutations == 199;
        bad += !ok;
        counts_seen.insert(c);
        ++runs;
    }
    return {bad == 0, std::to_string(runs) + " runs, " + std::to_string(bad) + " p-values off the (c+1)/200 lattice; " +
                          std::to_string(counts_seen.size()) + " distinct counts observed"};
}

// --- 3: meta-features against oracles ----------------------------------------------

Verdict meta_feature_oracles(const Settings&) {
    std::size_t mismatches = 0, not_invariant = 0;
    double worst = 0.0;
    std::string worst_feature;
    for (std::uint64_t s = 0; s < 50; ++s) {
        Engine e(derive_seed(0xACCE3, s));
        gen::DatasetShape shape;
        shape.rows = 4 + uniform_below(e, 27);  // 4..30
        shape.cols = 1 + uniform_below(e, 6);   // 1..6
        shape.categorical_share = uniform_unit(e) * 0.6;
        shape.missing_rate = s % 3 == 0 ? 0.0 : 0.15 * uniform_unit(e);
        shape.integer_values = s % 4 == 0;
        const Dataset ds = gen::random_dataset(e(), shape, "acc" + std::to_string(s));
        const auto got = featurize(ds);
        const auto want = oracle::meta_features(ds);
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
            const double scale = std::max({std::abs(got.values[f]), std::abs(want[f]), 1e-300});
            const double rel = std::abs(got.values[f] - want[f]) / scale;
            if (!oracle::close(got.values[f], want[f], 1e-9)) ++mismatches;
            if (rel > worst) worst = rel, worst_feature = std::string(kFeatureNames[f]);
        }
        for (std::uint64_t p = 0; p < 3; ++p)
            if (!(featurize(gen::shuffled_rows(ds, derive_seed(s, p))) == got)) ++not_invariant;
    }
    return {mismatches == 0 && not_invariant == 0,
            "50 datasets x 15 features: " + std::to_string(mismatches) + " outside 1e-9 (largest relative gap " +
                fmt("%.2e", worst) + (worst_feature.empty() ? "" : " in " + worst_feature) + "); " +
                std::to_string(not_invariant) + " of 150 row shuffles changed a bit"};
}

// --- 4: recommender against the straight-line version ----------------------------

Verdict recommender_oracle(const Settings&) {
    std::size_t compared = 0, differ = 0, with_ties = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        Engine e(derive_seed(0xACCE4, s));
        const bool coarse = s % 2 == 0;
        const auto table = gen::random_table(e(), 6 + uniform_below(e, 10), 3 + uniform_below(e, 8), coarse);
        std::array<double, 15> q{};
        for (auto& v : q) v = coarse ? static_cast<double>(uniform_below(e, 3)) : uniform_unit(e) * 100.0;
        for (bool by_p : {false, true}) {
            const auto rec = recommend(table, MetaFeatureVector{q}, by_p ? Strategy::pvalue : Strategy::fscore);
            const auto want = oracle::recommend(table, q, by_p);
            bool same = rec.ranked.size() == want.size();
            for (std::size_t i = 0; same && i < want.size(); ++i)
                same = rec.ranked[i].classifier_id == want[i].first &&
                       oracle::close(rec.ranked[i].score, want[i].second, 1e-12);
            for (std::size_t i = 1; i < want.size(); ++i)
                if (want[i].second == want[i - 1].second) {
                    ++with_ties;
                    break;
                }
            differ += !same;
            ++compared;
        }
    }
    return {differ == 0, std::to_string(compared) + " rankings (20 tables x 2 strategies), " + std::to_string(differ) +
                             " differ from the reference; " + std::to_string(with_ties) + " contained tied scores"};
}

// --- 5: AUC identity -----------------------------------------------------------------

Verdict auc_identity(const Settings&) {
    double worst_mean = 0.0, worst_quad = 0.0;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        Engine e(derive_seed(0xACCE5, s));
        std::vector<double> v(1 + uniform_below(e, 65));
        const std::size_t m = 1 + uniform_below(e, 20);
        for (auto& x : v) x = s % 2 ? static_cast<double>(1 + uniform_below(e, m)) / static_cast<double>(m) : uniform_unit(e);
        const double auc = cdf_auc(v);
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        worst_mean = std::max(worst_mean, std::abs(auc - (1.0 - mean)));
        worst_quad = std::max(worst_quad, std::abs(auc - oracle::integrate_step_cdf(v)));
    }
    const bool bounds = cdf_auc(std::vector<double>(7, 0.0)) == 1.0 && cdf_auc(std::vector<double>(7, 1.0)) == 0.0;
    return {worst_mean <= 1e-12 && worst_quad <= 1e-9 && bounds,
            "1000 lists: max |auc - (1 - mean)| " + fmt("%.2e", worst_mean) + ", max |auc - quadrature| " +
                fmt("%.2e", worst_quad) + "; all-0 -> 1 and all-1 -> 0 " + (bounds ? "exact" : "WRONG")};
}

// --- 6: band endpoints and agreement percentages -----------------------------------

Verdict band_endpoints(const Settings& settings) {
    struct Case {
        Metric metric;
        double value;
        Band band;
    };
    const std::vector<Case> cases = {
        {Metric::fscore, 0.9, Band::good},       {Metric::fscore, std::nextafter(0.9, 0.0), Band::neutral},
        {Metric::fscore, 0.5, Band::neutral},    {Metric::fscore, std::nextafter(0.5, 0.0), Band::poor},
        {Metric::fscore, 1.0, Band::good},       {Metric::fscore, 0.0, Band::poor},
        {Metric::pvalue, 0.045, Band::good},     {Metric::pvalue, std::nextafter(0.045, 1.0), Band::neutral},
        {Metric::pvalue, 0.2, Band::neutral},    {Metric::pvalue, std::nextafter(0.2, 1.0), Band::poor},
        {Metric::pvalue, 0.0, Band::good},       {Metric::pvalue, 1.0, Band::poor},
    };
    std::size_t wrong = 0;
    for (const auto& c : cases) wrong += discretize(c.metric, c.value) != c.band;

    std::vector<ExperimentTable> tables;
    for (std::uint64_t s = 0; s < 50; ++s) tables.push_back(gen::random_table(derive_seed(0xACCE6, s), 5 + s % 20, 7, s % 2));
    const std::string campaign = (fs::path(settings.work) / "table.csv").string();
    if (fs::exists(campaign)) tables.push_back(load_table(campaign));
    double worst = 0.0;
    for (const auto& t : tables) {
        const auto m = agreement_matrix(t);
        double sum = 0.0;
        for (const auto& row : m.percent) sum += std::accumulate(row.begin(), row.end(), 0.0);
        worst = std::max(worst, std::abs(sum - 100.0));
    }
    return {wrong == 0 && worst <= 0.2, std::to_string(cases.size() - wrong) + "/" + std::to_string(cases.size()) +
                                            " endpoint cases banded correctly; agreement percentages of " +
                                            std::to_string(tables.size()) + " tables sum to 100 within " +
                                            fmt("%.2f", worst)};
}

// --- 7: end-to-end determinism ------------------------------------------------------

int shell(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return testing_support::read_file(p.string()); }

Verdict end_to_end_determinism(const Settings& settings) {
    const fs::path work = settings.work;
    fs::remove_all(work);
    fs::create_directories(work);
    const auto start = Clock::now();
    const std::string cli = settings.cli;
    if (shell(cli + " gen-corpus --out " + (work / "corpus").string() + " --seed 7 > " + (work / "gen.log").string()) != 0)
        return {false, "gen-corpus failed"};
    const std::size_t manifests = static_cast<std::size_t>(
        std::count_if(fs::directory_iterator(work / "corpus"), fs::directory_iterator{},
                      [](const auto& entry) { return entry.path().extension() == ".json"; }));
    double times[2] = {0, 0};
    const int jobs[2] = {1, 8};
    for (int i = 0; i < 2; ++i) {
        const auto t0 = Clock::now();
        const std::string out = (work / ("jobs" + std::to_string(jobs[i]) + ".csv")).string();
        const int code = shell(cli + " run " + (work / "corpus").string() + " --k 199 --seed 7 --quiet --jobs " +
                               std::to_string(jobs[i]) + " --out " + out);
        times[i] = seconds_since(t0);
        if (code != 0) return {false, "run --jobs " + std::to_string(jobs[i]) + " exited with " + std::to_string(code)};
    }
    const std::string a = slurp(work / "jobs1.csv"), b = slurp(work / "jobs8.csv");
    fs::copy_file(work / "jobs1.csv", work / "table.csv", fs::copy_options::overwrite_existing);
    const double total = seconds_since(start);
    const std::size_t rows = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n')) - 1;
    Verdict v;
    v.pass = manifests == 12 && !a.empty() && a == b && total < 1800.0;
    v.detail = std::to_string(manifests) + " datasets, " + std::to_string(rows) + " rows; jobs=1 and jobs=8 tables " +
               (a == b ? "byte-identical" : "DIFFER") + "; " + fmt("jobs=1 %.0f s", times[0]) + fmt(", jobs=8 %.0f s", times[1]) +
               fmt(", total %.0f s", total) + " on " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
    return v;
}

// --- 8: directional smoke test ------------------------------------------------------

Verdict leave_one_out_direction(const Settings& settings) {
    const fs::path table_path = fs::path(settings.work) / "table.csv";
    ExperimentTable table;
    if (fs::exists(table_path)) {
        table = load_table(table_path.string());
    } else {
        RunOptions opt;
        opt.seed = 7;
        opt.permutations = 199;
        opt.jobs = std::max(1u, std::thread::hardware_concurrency());
        table = run_experiments(generate_corpus(7), as_grid(default_grid()), opt).table;
        fs::create_directories(settings.work);
        save_table(table, table_path.string());
    }
    const auto p = leave_one_dataset_out(table, Strategy::pvalue);
    const auto f = leave_one_dataset_out(table, Strategy::fscore);
    std::ostringstream detail;
    detail << "mean nrank pvalue " << fmt("%.4f", p.mean_nrank) << " fscore " << fmt("%.4f", f.mean_nrank)
           << " (need < 0.4 for both); AUC pvalue " << fmt("%.4f", p.auc) << " fscore " << fmt("%.4f", f.auc)
           << "; p-value strategy " << (p.auc > f.auc ? "ahead" : "not ahead");
    return {p.mean_nrank < 0.4 && f.mean_nrank < 0.4, detail.str()};
}

// --- 9: one-vs-one splitter ----------------------------------------------------------

Verdict one_vs_one(const Settings&) {
    std::size_t datasets = 0, bad = 0;
    for (std::size_t classes = 2; classes <= 15; ++classes) {
        for (std::uint64_t s = 0; s < 3; ++s) {
            const Dataset parent = generate_multiclass("mc" + std::to_string(classes) + "_" + std::to_string(s), classes,
                                                       2 + s, 1 + s, derive_seed(classes, s));
            const auto children = split_one_vs_one(parent);
            std::map<std::string, int> uses;
            bool ok = children.size() == classes / 2;
            for (const auto& child : children) {
                ok = ok && child.is_binary();
                for (const auto& c : child.class_values()) ++uses[c];
                for (const auto& label : child.labels())
                    ok = ok && std::find(child.class_values().begin(), child.class_values().end(), label) !=
                                   child.class_values().end();
            }
            for (const auto& [token, count] : uses) ok = ok && count == 1;
            bad += !ok;
            ++datasets;
        }
    }
    return {bad == 0, std::to_string(datasets) + " multiclass datasets (2..15 classes), " + std::to_string(bad) +
                          " with a wrong child count or a reused class"};
}

}  // namespace

int main(int argc, char** argv) {
    Settings settings;
    std::vector<int> selected;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--cli" && i + 1 < argc) settings.cli = argv[++i];
        else if (arg == "--work" && i + 1 < argc) settings.work = argv[++i];
        else selected.push_back(std::atoi(arg.c_str()));
    }
    const std::vector<std::pair<std::string, std::function<Verdict(const Settings&)>>> criteria = {
        {"permutation p-value matches exhaustive enumeration", permutation_exactness},
        {"p-values lie on the (c+1)/(k+1) lattice", pvalue_quantisation},
        {"meta-features match brute-force oracles", meta_feature_oracles},
        {"recommender matches straight-line reference", recommender_oracle},
        {"CDF area equals 1 - mean nrank", auc_identity},
        {"band endpoints and agreement percentages", band_endpoints},
        {"end-to-end campaign is byte-identical across job counts", end_to_end_determinism},
        {"leave-one-dataset-out beats random recommendation", leave_one_out_direction},
        {"one-vs-one split uses each class once", one_vs_one},
    };
    if (selected.empty())
        for (std::size_t i = 1; i <= criteria.size(); ++i) selected.push_back(static_cast<int>(i));

    int failed = 0;
    for (int id : selected) {
        if (id < 1 || id > static_cast<int>(criteria.size())) {
            std::printf("criterion %d: FAIL unknown criterion\n", id);
            ++failed;
            continue;
        }
        const auto& [name, check] = criteria[static_cast<std::size_t>(id - 1)];
        Verdict v;
        try {
            v = check(settings);
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %d: %s %s -- %s\n", id, v.pass ? "PASS" : "FAIL", name.c_str(), v.detail.c_str());
        std::fflush(stdout);
        failed += !v.pass;
    }
    return failed == 0 ? 0 : 1;
}
