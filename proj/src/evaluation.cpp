#include "metarec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "metarec/csv.hpp"
#include "metarec/error.hpp"

namespace metarec {

std::string to_string(Band band) {
    switch (band) {
        case Band::good: return "good";
        case Band::neutral: return "neutral";
        case Band::poor: return "poor";
    }
    return "?";
}

Band discretize(Metric metric, double value) {
    if (!(value >= 0.0 && value <= 1.0))
        throw ValidationError("discretize: value " + csv::format_double(value) + " outside [0, 1]");
    if (metric == Metric::fscore) {
        if (value >= 0.9) return Band::good;
        if (value >= 0.5) return Band::neutral;
        return Band::poor;
    }
    if (value <= 0.045) return Band::good;
    if (value <= 0.2) return Band::neutral;
    return Band::poor;
}

double AgreementMatrix::agreement_percent() const {
    if (total == 0) return 0.0;
    const std::size_t same = counts[0][0] + counts[1][1] + counts[2][2];
    return 100.0 * static_cast<double>(same) / static_cast<double>(total);
}

AgreementMatrix agreement_matrix(const ExperimentTable& table) {
    AgreementMatrix m;
    for (const auto& row : table.rows()) {
        const auto f = static_cast<std::size_t>(discretize(Metric::fscore, row.f_score));
        const auto p = static_cast<std::size_t>(discretize(Metric::pvalue, row.p_value));
        ++m.counts[f][p];
        ++m.total;
    }
    if (m.total == 0) return m;
    // Largest-remainder rounding to tenths of a percent: every cell is its exact
    // share rounded up or down, and the nine cells always add up to 100.0.
    std::array<std::size_t, 9> tenths{}, remainder{};
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < 9; ++c) {
        const std::size_t scaled = m.counts[c / 3][c % 3] * 1000;
        tenths[c] = scaled / m.total;
        remainder[c] = scaled % m.total;
        assigned += tenths[c];
    }
    std::array<std::size_t, 9> order{};
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < 1000; ++i, ++assigned) ++tenths[order[i]];
    for (std::size_t c = 0; c < 9; ++c) m.percent[c / 3][c % 3] = static_cast<double>(tenths[c]) / 10.0;
    return m;
}

nlohmann::json to_json(const AgreementMatrix& m) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t f : {2u, 1u, 0u})
        for (std::size_t p : {2u, 1u, 0u})
            cells.push_back({{"fscore", to_string(static_cast<Band>(f))},
                             {"pvalue", to_string(static_cast<Band>(p))},
                             {"count", m.counts[f][p]},
                             {"percent", m.percent[f][p]}});
    return {{"total", m.total}, {"agreement_percent", m.agreement_percent()}, {"cells", cells}};
}

std::string format_agreement(const AgreementMatrix& m) {
    std::ostringstream out;
    out << std::left << std::setw(10) << "F-score" << std::setw(10) << "p-value" << std::setw(8) << "count"
        << "%\n";
    for (std::size_t f : {2u, 1u, 0u})
        for (std::size_t p : {2u, 1u, 0u})
            out << std::setw(10) << to_string(static_cast<Band>(f)) << std::setw(10)
                << to_string(static_cast<Band>(p)) << std::setw(8) << m.counts[f][p] << std::fixed
                << std::setprecision(1) << m.percent[f][p] << "\n";
    out << "total " << m.total << ", same band " << std::fixed << std::setprecision(1) << m.agreement_percent()
        << "%\n";
    return out.str();
}

RankResult rank_of_recommendation(std::span<const ExperimentRow> rows, const std::string& classifier_id) {
    RankResult r;
    r.rows = rows.size();
    if (rows.empty()) throw ValidationError("rank_of_recommendation: no rows for the dataset");
    double best = -1.0;
    for (const auto& row : rows)
        if (row.classifier_id == classifier_id) best = std::max(best, row.f_score);
    if (best < 0.0) {
        r.rank = r.rows;
        r.found = false;
        return r;
    }
    r.rank = 1 + static_cast<std::size_t>(
                     std::count_if(rows.begin(), rows.end(), [&](const ExperimentRow& row) { return row.f_score > best; }));
    return r;
}

double cdf_auc(std::span<const double> nranks) {
    if (nranks.empty()) throw ValidationError("cdf_auc: empty list");
    std::vector<double> x(nranks.begin(), nranks.end());
    for (double v : x)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("cdf_auc: value outside [0, 1]");
    std::sort(x.begin(), x.end());
    // F(t) = (#values <= t) / n is constant between consecutive distinct values.
    const double n = static_cast<double>(x.size());
    double area = 0.0;
    std::size_t i = 0;
    while (i < x.size()) {
        std::size_t j = i;
        while (j < x.size() && x[j] == x[i]) ++j;
        const double next = j < x.size() ? x[j] : 1.0;
        area += static_cast<double>(j) / n * (next - x[i]);
        i = j;
    }
    return area;
}

EvalReport leave_one_dataset_out(const ExperimentTable& table, Strategy strategy, const RecommendOptions& options,
                                 const RecommendFn& recommender) {
    const auto ids = table.dataset_ids();
    if (ids.size() < 2) throw ValidationError("leave_one_dataset_out: needs at least 2 datasets");
    EvalReport report;
    report.strategy = strategy;
    std::vector<double> nranks;
    for (const auto& id : ids) {
        const ExperimentTable others = table.without_dataset(id);
        const MetaFeatureVector& query = table.meta_features_of(id);
        RecommendOptions opt = options;
        opt.exclude_dataset.reset();
        Recommendation rec;
        try {
            rec = recommender ? recommender(others, query, strategy, opt) : recommend(others, query, strategy, opt);
        } catch (const ValidationError& e) {
            report.warnings.push_back(id + ": skipped (" + e.what() + ")");
            continue;
        }
        if (rec.ranked.empty()) {
            report.warnings.push_back(id + ": skipped (no candidates)");
            continue;
        }
        const auto rows = table.rows_for_dataset(id);
        const RankResult rank = rank_of_recommendation(rows, rec.best());
        if (!rank.found)
            report.warnings.push_back(id + ": recommended " + rec.best() + " has no row; counted as last");
        DatasetEvaluation ev{id, rec.best(), rank.rank, rank.rows, rank.normalized(), rank.found};
        nranks.push_back(ev.nrank);
        const auto bin = std::clamp(static_cast<int>(std::ceil(ev.nrank * 10.0)) - 1, 0, 9);
        ++report.histogram[static_cast<std::size_t>(bin)];
        report.records.push_back(std::move(ev));
    }
    if (nranks.empty()) throw ValidationError("leave_one_dataset_out: no dataset could be evaluated");
    report.auc = cdf_auc(nranks);
    report.mean_nrank = std::accumulate(nranks.begin(), nranks.end(), 0.0) / static_cast<double>(nranks.size());

    std::sort(nranks.begin(), nranks.end());
    const double n = static_cast<double>(nranks.size());
    report.cdf.push_back({0.0, 0.0});
    for (std::size_t i = 0; i < nranks.size(); ++i) {
        if (i + 1 < nranks.size() && nranks[i + 1] == nranks[i]) continue;
        report.cdf.push_back({nranks[i], static_cast<double>(i + 1) / n});
    }
    if (report.cdf.back().x < 1.0) report.cdf.push_back({1.0, 1.0});
    return report;
}

nlohmann::json to_json(const EvalReport& report) {
    nlohmann::json records = nlohmann::json::array(), cdf = nlohmann::json::array();
    for (const auto& r : report.records)
        records.push_back({{"dataset_id", r.dataset_id},
                           {"recommended", r.recommended},
                           {"rank", r.rank},
                           {"rows", r.rows},
                           {"nrank", r.nrank},
                           {"found", r.found}});
    for (const auto& p : report.cdf) cdf.push_back({p.x, p.cumulative});
    return {{"strategy", to_string(report.strategy)},
            {"auc", report.auc},
            {"mean_nrank", report.mean_nrank},
            {"records", records},
            {"histogram", report.histogram},
            {"cdf", cdf},
            {"warnings", report.warnings}};
}

std::string histogram_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "bin_low,bin_high,count\n";
    for (std::size_t b = 0; b < report.histogram.size(); ++b)
        out << csv::format_double(static_cast<double>(b) / 10.0) << ','
            << csv::format_double(static_cast<double>(b + 1) / 10.0) << ',' << report.histogram[b] << '\n';
    return out.str();
}

std::string cdf_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "nrank,cumulative\n";
    for (const auto& p : report.cdf) out << csv::format_double(p.x) << ',' << csv::format_double(p.cumulative) << '\n';
    return out.str();
}

}  // namespace metarec
