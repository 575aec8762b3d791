#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "metarec/random.hpp"

namespace oracle {

using metarec::AttributeKind;
using metarec::Cell;
using metarec::Dataset;

namespace {

std::vector<double> numeric_imputed(const metarec::Attribute& a) {
    double total = 0.0;
    int seen = 0;
    for (const Cell& c : a.cells)
        if (std::holds_alternative<double>(c)) total += std::get<double>(c), ++seen;
    const double mean = seen ? total / seen : 0.0;
    std::vector<double> out;
    for (const Cell& c : a.cells) out.push_back(std::holds_alternative<double>(c) ? std::get<double>(c) : mean);
    return out;
}

std::vector<std::string> categorical_imputed(const metarec::Attribute& a) {
    std::map<std::string, int> freq;
    for (const Cell& c : a.cells)
        if (std::holds_alternative<std::string>(c)) freq[std::get<std::string>(c)]++;
    std::string mode;
    int best = -1;
    for (const auto& [token, count] : freq)  // map order: smaller token wins ties
        if (count > best) best = count, mode = token;
    std::vector<std::string> out;
    for (const Cell& c : a.cells) out.push_back(std::holds_alternative<std::string>(c) ? std::get<std::string>(c) : mode);
    return out;
}

std::string exact_text(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

bool all_equal(const std::vector<double>& x) {
    for (double v : x)
        if (v != x[0]) return false;
    return true;
}

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double central_moment(const std::vector<double>& x, int k) {
    const double mu = mean_of(x);
    double s = 0.0;
    for (double v : x) s += std::pow(v - mu, k);
    return s / static_cast<double>(x.size());
}

double covariance(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / static_cast<double>(a.size() - 1);
}

std::vector<std::string> discrete_codes(const metarec::Attribute& a) {
    if (a.kind == AttributeKind::categorical) return categorical_imputed(a);
    const auto x = numeric_imputed(a);
    const double lo = *std::min_element(x.begin(), x.end());
    const double hi = *std::max_element(x.begin(), x.end());
    std::vector<std::string> out;
    for (double v : x) {
        int bin = 0;
        if (hi > lo) bin = std::min(9, static_cast<int>(std::floor((v - lo) / (hi - lo) * 10)));
        out.push_back("bin" + std::to_string(bin));
    }
    return out;
}

}  // namespace

bool close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b)}) + 1e-12;
}

std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (a[p][q] == 0.0) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(a[i][i]);
    return out;
}

double entropy(const std::vector<std::string>& values) {
    std::map<std::string, double> freq;
    for (const auto& v : values) freq[v] += 1.0;
    double h = 0.0;
    for (const auto& [v, count] : freq) {
        const double p = count / static_cast<double>(values.size());
        h -= p * std::log2(p);
    }
    return h;
}

double mutual_information(const std::vector<std::string>& x, const std::vector<std::string>& c) {
    const double n = static_cast<double>(x.size());
    std::map<std::pair<std::string, std::string>, double> joint;
    std::map<std::string, double> px, pc;
    for (std::size_t i = 0; i < x.size(); ++i) {
        joint[{x[i], c[i]}] += 1.0 / n;
        px[x[i]] += 1.0 / n;
        pc[c[i]] += 1.0 / n;
    }
    double mi = 0.0;
    for (const auto& [key, p] : joint) mi += p * std::log2(p / (px[key.first] * pc[key.second]));
    return mi;
}

std::array<double, 15> meta_features(const Dataset& ds) {
    std::array<double, 15> f{};
    const double n = static_cast<double>(ds.rows()), m = static_cast<double>(ds.cols());
    f[0] = n;
    f[1] = m;
    f[2] = n / m;

    double missing_pct = 0.0, unique_pct = 0.0;
    bool any_missing = false;
    for (const auto& a : ds.attributes()) {
        int missing = 0;
        std::set<std::string> distinct;
        for (const Cell& c : a.cells) {
            if (std::holds_alternative<std::monostate>(c)) ++missing;
            else if (std::holds_alternative<double>(c)) distinct.insert("n" + exact_text(std::get<double>(c)));
            else distinct.insert("s" + std::get<std::string>(c));
        }
        any_missing = any_missing || missing > 0;
        missing_pct += 100.0 * missing / n;
        unique_pct += 100.0 * static_cast<double>(distinct.size()) / n;
    }
    f[3] = any_missing ? 1.0 : 0.0;
    f[4] = missing_pct / m;
    f[5] = unique_pct / m;

    std::vector<std::vector<double>> cols;
    for (const auto& a : ds.attributes())
        if (a.kind == AttributeKind::numeric) cols.push_back(numeric_imputed(a));
    const std::size_t p = cols.size();
    if (p > 0) {
        double corr = 0.0;
        int pairs = 0;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                ++pairs;
                if (all_equal(cols[i]) || all_equal(cols[j])) continue;
                corr += std::abs(covariance(cols[i], cols[j]) /
                                 std::sqrt(covariance(cols[i], cols[i]) * covariance(cols[j], cols[j])));
            }
        }
        f[6] = pairs ? corr / pairs : 0.0;
        double skew = 0.0, kurt = 0.0;
        for (const auto& x : cols) {
            if (all_equal(x)) continue;
            const double m2 = central_moment(x, 2);
            skew += std::abs(central_moment(x, 3) / std::pow(m2, 1.5));
            kurt += central_moment(x, 4) / (m2 * m2) - 3.0;
        }
        f[7] = skew / static_cast<double>(p);
        f[8] = kurt / static_cast<double>(p);
        std::vector<std::vector<double>> cov(p, std::vector<double>(p));
        double trace = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            for (std::size_t j = 0; j < p; ++j)
                cov[i][j] = (all_equal(cols[i]) || all_equal(cols[j])) ? 0.0 : covariance(cols[i], cols[j]);
            trace += cov[i][i];
        }
        if (trace > 0.0) {
            const auto eig = jacobi_eigenvalues(cov);
            f[9] = *std::max_element(eig.begin(), eig.end()) / trace;
        }
    }

    const auto& labels = ds.labels();
    const double hc = entropy(labels);
    f[10] = hc / std::log2(static_cast<double>(ds.class_values().size()));
    double h_sum = 0.0, h_norm_sum = 0.0, mi_sum = 0.0, mi_max = 0.0;
    for (const auto& a : ds.attributes()) {
        const auto codes = discrete_codes(a);
        const double hx = entropy(codes);
        const std::size_t v = std::set<std::string>(codes.begin(), codes.end()).size();
        h_sum += hx;
        if (v > 1) h_norm_sum += hx / std::log2(static_cast<double>(v));
        const double mi = mutual_information(codes, labels);
        mi_sum += mi;
        mi_max = std::max(mi_max, mi);
    }
    f[11] = h_norm_sum / m;
    f[12] = mi_max / hc;
    const double mean_mi = mi_sum / m, mean_h = h_sum / m;
    if (mean_mi > 1e-12) {
        f[13] = std::min(1000.0, hc / mean_mi);
        f[14] = std::min(1000.0, std::max(0.0, (mean_h - mean_mi) / mean_mi));
    } else {
        f[13] = f[14] = 1000.0;
    }
    return f;
}

double loocv_error(const metarec::ClassifierConfig& config, const metarec::Matrix& X, const std::vector<int>& y,
                   std::uint64_t fit_seed) {
    const std::size_t n = y.size();
    int wrong = 0;
    for (std::size_t i = 0; i < n; ++i) {
        metarec::Matrix train(static_cast<Eigen::Index>(n - 1), X.cols());
        std::vector<int> train_y;
        for (std::size_t r = 0, t = 0; r < n; ++r) {
            if (r == i) continue;
            train.row(static_cast<Eigen::Index>(t++)) = X.row(static_cast<Eigen::Index>(r));
            train_y.push_back(y[r]);
        }
        const bool one_class = std::all_of(train_y.begin(), train_y.end(), [&](int v) { return v == train_y[0]; });
        const auto used = one_class ? metarec::ClassifierConfig::make(metarec::Family::majority) : config;
        const auto model = metarec::fit(used, train, train_y, metarec::derive_seed(fit_seed, i));
        std::vector<double> row(X.row(static_cast<Eigen::Index>(i)).data(),
                                X.row(static_cast<Eigen::Index>(i)).data() + X.cols());
        wrong += model.predict_row(row) != y[i];
    }
    return static_cast<double>(wrong) / static_cast<double>(n);
}

std::vector<std::vector<int>> distinct_arrangements(std::vector<int> labels) {
    std::sort(labels.begin(), labels.end());
    std::vector<std::vector<int>> out;
    do out.push_back(labels);
    while (std::next_permutation(labels.begin(), labels.end()));
    return out;
}

double exact_permutation_p(const metarec::ClassifierConfig& config, const metarec::Matrix& X,
                           const std::vector<int>& y, std::uint64_t test_seed) {
    const std::uint64_t fit_seed = metarec::test_fit_seed(test_seed);
    const double original = loocv_error(config, X, y, fit_seed);
    const auto all = distinct_arrangements(y);
    int at_most = 0;
    for (const auto& labels : all) at_most += loocv_error(config, X, labels, fit_seed) <= original;
    return static_cast<double>(at_most) / static_cast<double>(all.size());
}

std::vector<std::pair<std::string, double>> recommend(const metarec::ExperimentTable& table,
                                                      const std::array<double, 15>& query, bool by_pvalue,
                                                      std::size_t neighbors, std::size_t top,
                                                      const std::optional<std::string>& exclude) {
    std::map<std::string, std::array<double, 15>> features;
    for (const auto& row : table.rows())
        if (!exclude || row.dataset_id != *exclude) features[row.dataset_id] = row.meta_features.values;

    std::array<double, 15> lo = query, hi = query;
    for (const auto& [id, v] : features)
        for (int k = 0; k < 15; ++k) lo[k] = std::min(lo[k], v[k]), hi[k] = std::max(hi[k], v[k]);
    auto scaled = [&](const std::array<double, 15>& v) {
        std::array<double, 15> out{};
        for (int k = 0; k < 15; ++k) out[k] = hi[k] > lo[k] ? (v[k] - lo[k]) / (hi[k] - lo[k]) : 0.0;
        return out;
    };
    const auto q = scaled(query);

    std::vector<std::pair<double, std::string>> by_distance;
    for (const auto& [id, v] : features) {
        const auto s = scaled(v);
        double d2 = 0.0;
        for (int k = 0; k < 15; ++k) d2 += (s[k] - q[k]) * (s[k] - q[k]);
        by_distance.emplace_back(std::sqrt(d2), id);
    }
    std::sort(by_distance.begin(), by_distance.end());
    if (by_distance.size() > neighbors) by_distance.resize(neighbors);

    std::map<std::string, double> score;
    for (const auto& [raw, id] : by_distance) {
        const double d = std::max(raw, 1e-6);
        std::vector<metarec::ExperimentRow> rows;
        for (const auto& row : table.rows())
            if (row.dataset_id == id) rows.push_back(row);
        std::sort(rows.begin(), rows.end(), [&](const auto& a, const auto& b) {
            const double ka = by_pvalue ? a.p_value : -a.f_score, kb = by_pvalue ? b.p_value : -b.f_score;
            if (ka != kb) return ka < kb;
            if (a.classifier_id != b.classifier_id) return a.classifier_id < b.classifier_id;
            return a.seed < b.seed;
        });
        for (std::size_t i = 0; i < std::min(top, rows.size()); ++i) {
            const double merit = by_pvalue ? 1.0 - rows[i].p_value : rows[i].f_score;
            score[rows[i].classifier_id] += merit / (d * d);
        }
    }
    std::vector<std::pair<std::string, double>> ranked(score.begin(), score.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

double integrate_step_cdf(const std::vector<double>& values, std::size_t steps) {
    auto cdf = [&](double x) {
        double below = 0.0;
        for (double v : values) below += v <= x ? 1.0 : 0.0;
        return below / static_cast<double>(values.size());
    };
    std::vector<double> cuts;
    if (steps == 0) {
        cuts = values;
        cuts.push_back(0.0);
        cuts.push_back(1.0);
        std::sort(cuts.begin(), cuts.end());
        cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    } else {
        for (std::size_t i = 0; i <= steps; ++i) cuts.push_back(static_cast<double>(i) / static_cast<double>(steps));
    }
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        area += cdf((a + b) / 2.0) * (b - a);
    }
    return area;
}

}  // namespace oracle
