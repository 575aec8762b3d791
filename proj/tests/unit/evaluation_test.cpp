#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "metarec/error.hpp"
#include "metarec/evaluation.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace metarec;

namespace {

ExperimentRow row(const std::string& dataset, double feature, const std::string& classifier, double f, double p) {
    ExperimentRow r;
    r.dataset_id = dataset;
    r.meta_features.values[0] = feature;
    r.classifier_id = classifier;
    r.f_score = f;
    r.p_value = p;
    r.k_permutations = 199;
    return r;
}

std::vector<ExperimentRow> ten_rows(double recommended_f) {
    std::vector<ExperimentRow> rows;
    for (int i = 0; i < 9; ++i) rows.push_back(row("d", 0, "knn(k=" + std::to_string(i + 1) + ")", 0.3 + 0.05 * i, 0.5));
    rows.push_back(row("d", 0, "svm()", recommended_f, 0.5));
    return rows;
}

}  // namespace

TEST(Discretize, BandEndpoints) {
    EXPECT_EQ(discretize(Metric::fscore, 0.9), Band::good);
    EXPECT_EQ(discretize(Metric::fscore, 1.0), Band::good);
    EXPECT_EQ(discretize(Metric::fscore, std::nextafter(0.9, 0.0)), Band::neutral);
    EXPECT_EQ(discretize(Metric::fscore, 0.5), Band::neutral);
    EXPECT_EQ(discretize(Metric::fscore, std::nextafter(0.5, 0.0)), Band::poor);
    EXPECT_EQ(discretize(Metric::fscore, 0.0), Band::poor);
    EXPECT_EQ(discretize(Metric::pvalue, 0.0), Band::good);
    EXPECT_EQ(discretize(Metric::pvalue, 0.045), Band::good);
    EXPECT_EQ(discretize(Metric::pvalue, std::nextafter(0.045, 1.0)), Band::neutral);
    EXPECT_EQ(discretize(Metric::pvalue, 0.2), Band::neutral);
    EXPECT_EQ(discretize(Metric::pvalue, std::nextafter(0.2, 1.0)), Band::poor);
    EXPECT_EQ(discretize(Metric::pvalue, 1.0), Band::poor);
    EXPECT_THROW(discretize(Metric::pvalue, 1.5), ValidationError);
    EXPECT_THROW(discretize(Metric::fscore, -0.1), ValidationError);
}

TEST(AgreementMatrix, SingleCellConcentration) {
    ExperimentTable t;
    for (int d = 0; d < 4; ++d) t.add(row("d" + std::to_string(d), d, "knn(k=1)", 1.0, 1.0 / 200.0));
    const auto m = agreement_matrix(t);
    EXPECT_EQ(m.counts[0][0], 4u);
    EXPECT_EQ(m.percent[0][0], 100.0);
    EXPECT_EQ(m.agreement_percent(), 100.0);
}

TEST(AgreementMatrix, PercentagesSumToHundred) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto m = agreement_matrix(gen::random_table(seed, 7, 6, seed % 2));
        double sum = 0.0;
        std::size_t count = 0;
        for (int f = 0; f < 3; ++f)
            for (int p = 0; p < 3; ++p) sum += m.percent[f][p], count += m.counts[f][p];
        EXPECT_EQ(count, m.total);
        EXPECT_NEAR(sum, 100.0, 1e-9);
        for (int f = 0; f < 3; ++f)
            for (int p = 0; p < 3; ++p)
                EXPECT_LT(std::abs(m.percent[f][p] - 100.0 * m.counts[f][p] / m.total), 0.1 + 1e-9);
    }
}

TEST(RankOfRecommendation, Examples) {
    const auto best = ten_rows(0.99);
    const auto r1 = rank_of_recommendation(best, "svm()");
    EXPECT_EQ(r1.rank, 1u);
    EXPECT_DOUBLE_EQ(r1.normalized(), 0.1);
    const auto worst = ten_rows(0.01);
    EXPECT_EQ(rank_of_recommendation(worst, "svm()").rank, 10u);
    EXPECT_DOUBLE_EQ(rank_of_recommendation(worst, "svm()").normalized(), 1.0);

    std::vector<ExperimentRow> tied = {row("d", 0, "a()", 0.8, 0.1), row("d", 0, "b()", 0.8, 0.1),
                                       row("d", 0, "c()", 0.8, 0.1), row("d", 0, "e()", 0.2, 0.1)};
    EXPECT_EQ(rank_of_recommendation(tied, "c()").rank, 1u);
    const auto absent = rank_of_recommendation(tied, "zzz()");
    EXPECT_FALSE(absent.found);
    EXPECT_EQ(absent.rank, 4u);
}

TEST(CdfAuc, Examples) {
    EXPECT_EQ(cdf_auc(std::vector<double>(5, 0.0)), 1.0);
    EXPECT_EQ(cdf_auc(std::vector<double>(5, 1.0)), 0.0);
    EXPECT_DOUBLE_EQ(cdf_auc(std::vector<double>{0.25, 0.75}), 0.5);
    EXPECT_NEAR(oracle::integrate_step_cdf({0.25, 0.75}), 0.5, 1e-12);
    EXPECT_THROW(cdf_auc(std::vector<double>{}), ValidationError);
    EXPECT_THROW(cdf_auc(std::vector<double>{1.2}), ValidationError);
}

TEST(CdfAuc, EqualsOneMinusMeanAndQuadrature) {
    Engine e(9);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> v(1 + uniform_below(e, 30));
        for (auto& x : v) x = static_cast<double>(1 + uniform_below(e, 15)) / 15.0;
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        EXPECT_NEAR(cdf_auc(v), 1.0 - mean, 1e-12);
        EXPECT_NEAR(cdf_auc(v), oracle::integrate_step_cdf(v), 1e-9);
    }
}

TEST(LeaveOneDatasetOut, DominantClassifierGivesMinimalRanks) {
    ExperimentTable t;
    for (int d = 0; d < 6; ++d) {
        const auto id = "d" + std::to_string(d);
        t.add(row(id, d, "naive_bayes()", 0.95, 0.005));
        t.add(row(id, d, "knn(k=1)", 0.5, 0.3));
        t.add(row(id, d, "majority()", 0.0, 1.0));
    }
    for (Strategy s : {Strategy::fscore, Strategy::pvalue}) {
        const auto report = leave_one_dataset_out(t, s);
        ASSERT_EQ(report.records.size(), 6u);
        for (const auto& r : report.records) EXPECT_EQ(r.rank, 1u);
        EXPECT_NEAR(report.auc, 1.0 - 1.0 / 3.0, 1e-12);
        EXPECT_EQ(report.histogram[3], 6u);
    }
}

TEST(LeaveOneDatasetOut, AdversarialRecommenderGivesWorstRanks) {
    ExperimentTable t;
    for (int d = 0; d < 4; ++d) {
        const auto id = "d" + std::to_string(d);
        t.add(row(id, d, "good()", 0.9, 0.005));
        t.add(row(id, d, "bad()", 0.1, 0.9));
    }
    const RecommendFn always_bad = [](const ExperimentTable&, const MetaFeatureVector&, Strategy s,
                                      const RecommendOptions&) {
        Recommendation rec;
        rec.strategy = s;
        rec.ranked = {{"bad()", 1.0}};
        return rec;
    };
    const auto report = leave_one_dataset_out(t, Strategy::pvalue, {}, always_bad);
    for (const auto& r : report.records) EXPECT_EQ(r.nrank, 1.0);
    EXPECT_EQ(report.auc, 0.0);
}

TEST(LeaveOneDatasetOut, RecommenderNeverSeesTheHeldOutDataset) {
    const auto table = gen::random_table(11, 6, 4, false);
    std::set<std::string> queried;
    const RecommendFn spy = [&](const ExperimentTable& others, const MetaFeatureVector& query, Strategy s,
                                const RecommendOptions& opts) {
        for (const auto& id : table.dataset_ids())
            if (table.meta_features_of(id) == query) {
                EXPECT_FALSE(others.contains_dataset(id)) << id;
                queried.insert(id);
            }
        EXPECT_EQ(others.dataset_ids().size(), 5u);
        return recommend(others, query, s, opts);
    };
    const auto report = leave_one_dataset_out(table, Strategy::fscore, {}, spy);
    EXPECT_EQ(queried.size(), 6u);
    const auto plain = leave_one_dataset_out(table, Strategy::fscore);
    EXPECT_EQ(to_json(report).dump(), to_json(plain).dump());
}

TEST(LeaveOneDatasetOut, NeedsTwoDatasets) {
    ExperimentTable t;
    t.add(row("only", 0, "knn(k=1)", 0.5, 0.5));
    EXPECT_THROW(leave_one_dataset_out(t, Strategy::pvalue), ValidationError);
}

TEST(LeaveOneDatasetOut, CdfAndHistogramSeries) {
    const auto report = leave_one_dataset_out(gen::random_table(12, 8, 5, true), Strategy::pvalue);
    std::size_t total = 0;
    for (auto c : report.histogram) total += c;
    EXPECT_EQ(total, report.records.size());
    EXPECT_EQ(report.cdf.front().x, 0.0);
    EXPECT_EQ(report.cdf.back().cumulative, 1.0);
    EXPECT_EQ(histogram_csv(report).substr(0, 22), "bin_low,bin_high,count");
    EXPECT_EQ(cdf_csv(report).substr(0, 17), "nrank,cumulative\n");
}
