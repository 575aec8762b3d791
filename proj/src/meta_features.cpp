#include "metarec/meta_features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "metarec/csv.hpp"
#include "metarec/error.hpp"

namespace metarec {

namespace {

// missing < number < token, then by value.
int compare_cells(const Cell& a, const Cell& b) {
    if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
    if (const double* x = std::get_if<double>(&a)) {
        const double y = std::get<double>(b);
        return *x < y ? -1 : (*x > y ? 1 : 0);
    }
    if (const auto* s = std::get_if<std::string>(&a)) return s->compare(std::get<std::string>(b));
    return 0;
}

std::vector<double> imputed_numeric(const Attribute& a) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& cell : a.cells) {
        if (const double* v = std::get_if<double>(&cell)) {
            sum += *v;
            ++count;
        }
    }
    const double fill = count ? sum / static_cast<double>(count) : 0.0;
    std::vector<double> out;
    out.reserve(a.cells.size());
    for (const auto& cell : a.cells) out.push_back(is_missing(cell) ? fill : std::get<double>(cell));
    return out;
}

bool is_constant(const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); });
}

// Column minus its mean; exactly zero for a constant column.
std::vector<double> centered(const std::vector<double>& x) {
    std::vector<double> out(x.size(), 0.0);
    if (is_constant(x)) return out;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - mean;
    return out;
}

// Small integer codes for entropy estimation plus the number of distinct codes.
struct Discretized {
    std::vector<int> codes;
    int levels = 0;
};

Discretized discretize_attribute(const Attribute& a) {
    Discretized d;
    const std::size_t n = a.cells.size();
    d.codes.resize(n);
    if (a.kind == AttributeKind::numeric) {
        const auto x = imputed_numeric(a);
        const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
        const double min = *lo, max = *hi;
        for (std::size_t i = 0; i < n; ++i) {
            if (max == min) {
                d.codes[i] = 0;
            } else {
                const int bin = static_cast<int>(std::floor((x[i] - min) / (max - min) * kEntropyBins));
                d.codes[i] = std::clamp(bin, 0, kEntropyBins - 1);
            }
        }
        d.levels = kEntropyBins;
    } else {
        std::map<std::string, std::size_t> counts;
        for (const auto& cell : a.cells)
            if (const auto* s = std::get_if<std::string>(&cell)) ++counts[*s];
        std::string mode;
        std::size_t best = 0;
        for (const auto& [token, count] : counts)
            if (count > best) best = count, mode = token;
        std::map<std::string, int> index;
        for (const auto& [token, count] : counts) index.emplace(token, static_cast<int>(index.size()));
        for (std::size_t i = 0; i < n; ++i) {
            const auto* s = std::get_if<std::string>(&a.cells[i]);
            d.codes[i] = index.at(s ? *s : mode);
        }
        d.levels = std::max<int>(1, static_cast<int>(index.size()));
    }
    return d;
}

double entropy_of_counts(const std::vector<std::size_t>& counts, double total) {
    double h = 0.0;
    for (auto c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / total;
        h -= p * std::log2(p);
    }
    return h;
}

}  // namespace

nlohmann::json to_json(const MetaFeatureVector& v) {
    nlohmann::json j = nlohmann::json::object();
    for (std::size_t i = 0; i < kFeatureCount; ++i) j[std::string(kFeatureNames[i])] = v.values[i];
    return j;
}

MetaFeatureVector meta_features_from_json(const nlohmann::json& j) {
    MetaFeatureVector v;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const std::string key(kFeatureNames[i]);
        if (!j.contains(key)) throw ParseError("meta-feature object lacks '" + key + "'");
        v.values[i] = j.at(key).get<double>();
    }
    return v;
}

std::string to_csv(const MetaFeatureVector& v) {
    csv::Record header, row;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        header.emplace_back(kFeatureNames[i]);
        row.push_back(csv::format_double(v.values[i]));
    }
    return csv::join(header) + "\n" + csv::join(row) + "\n";
}

Dataset canonical_row_order(const Dataset& ds) {
    std::vector<std::size_t> order(ds.rows());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (const auto& attr : ds.attributes()) {
            const int c = compare_cells(attr.cells[a], attr.cells[b]);
            if (c != 0) return c < 0;
        }
        return ds.labels()[a] < ds.labels()[b];
    });
    return ds.select_rows(order, ds.id(), ds.class_values());
}

GeneralFeatures extract_general(const Dataset& ds) {
    const double n = static_cast<double>(ds.rows());
    const double m = static_cast<double>(ds.cols());
    GeneralFeatures g;
    g.n_instances = n;
    g.n_attributes = m;
    g.instance_attribute_ratio = n / m;
    g.has_missing = ds.has_missing() ? 1.0 : 0.0;
    double missing_sum = 0.0, unique_sum = 0.0;
    for (const auto& attr : ds.attributes()) {
        std::size_t missing = 0;
        std::set<double> numbers;
        std::set<std::string> tokens;
        for (const auto& cell : attr.cells) {
            if (is_missing(cell))
                ++missing;
            else if (const double* v = std::get_if<double>(&cell))
                numbers.insert(*v);
            else
                tokens.insert(std::get<std::string>(cell));
        }
        missing_sum += static_cast<double>(missing) / n * 100.0;
        unique_sum += static_cast<double>(numbers.size() + tokens.size()) / n * 100.0;
    }
    g.pct_missing_avg = missing_sum / m;
    g.pct_unique_avg = unique_sum / m;
    return g;
}

StatisticalFeatures extract_statistical(const Dataset& input) {
    const Dataset ds = canonical_row_order(input);
    std::vector<std::vector<double>> columns;
    for (const auto& attr : ds.attributes())
        if (attr.kind == AttributeKind::numeric) columns.push_back(centered(imputed_numeric(attr)));

    StatisticalFeatures s;
    const std::size_t p = columns.size();
    if (p == 0) return s;
    const std::size_t n = ds.rows();
    const double dn = static_cast<double>(n);

    // Centered second, third and fourth moments per column.
    std::vector<double> m2(p, 0.0);
    double skew_sum = 0.0, kurt_sum = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
        double s2 = 0.0, s3 = 0.0, s4 = 0.0;
        for (double d : columns[j]) {
            const double d2 = d * d;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        m2[j] = s2;
        if (s2 == 0.0) continue;
        const double var = s2 / dn;
        skew_sum += std::abs((s3 / dn) / std::pow(var, 1.5));
        kurt_sum += (s4 / dn) / (var * var) - 3.0;
    }
    s.skewness_avg = skew_sum / static_cast<double>(p);
    s.kurtosis_avg = kurt_sum / static_cast<double>(p);

    Eigen::MatrixXd cov(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    double corr_sum = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
        cov(a, a) = m2[a] / (dn - 1.0);
        for (std::size_t b = a + 1; b < p; ++b) {
            double sab = 0.0;
            for (std::size_t i = 0; i < n; ++i) sab += columns[a][i] * columns[b][i];
            cov(a, b) = cov(b, a) = sab / (dn - 1.0);
            if (m2[a] > 0.0 && m2[b] > 0.0) corr_sum += std::abs(sab / std::sqrt(m2[a] * m2[b]));
        }
    }
    if (p >= 2) s.linear_correlation_avg = corr_sum / (static_cast<double>(p * (p - 1)) / 2.0);

    const double trace = cov.trace();
    if (trace > 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov, Eigen::EigenvaluesOnly);
        s.variance_fraction_1d = std::clamp(solver.eigenvalues().maxCoeff() / trace, 0.0, 1.0);
    }
    return s;
}

InformationFeatures extract_information_theoretic(const Dataset& input) {
    const Dataset ds = canonical_row_order(input);
    const auto y = ds.label_indices();
    const std::size_t classes = ds.class_values().size();
    const double n = static_cast<double>(ds.rows());

    std::vector<std::size_t> class_counts(classes, 0);
    for (int c : y) ++class_counts[static_cast<std::size_t>(c)];
    std::size_t occupied_classes = 0;
    for (auto c : class_counts) occupied_classes += c > 0;
    const double h_class = entropy_of_counts(class_counts, n);

    InformationFeatures f;
    f.class_entropy_norm = std::clamp(h_class / std::log2(static_cast<double>(classes)), 0.0, 1.0);

    double h_attr_sum = 0.0, h_attr_norm_sum = 0.0, mi_sum = 0.0, mi_max = 0.0;
    for (const auto& attr : ds.attributes()) {
        const Discretized d = discretize_attribute(attr);
        const auto levels = static_cast<std::size_t>(d.levels);
        std::vector<std::size_t> counts(levels, 0), joint(levels * classes, 0);
        for (std::size_t i = 0; i < d.codes.size(); ++i) {
            const auto code = static_cast<std::size_t>(d.codes[i]);
            ++counts[code];
            ++joint[code * classes + static_cast<std::size_t>(y[i])];
        }
        const double h_attr = entropy_of_counts(counts, n);
        const double h_joint = entropy_of_counts(joint, n);
        const auto occupied = std::count_if(counts.begin(), counts.end(), [](auto c) { return c > 0; });
        h_attr_sum += h_attr;
        if (occupied > 1) h_attr_norm_sum += std::clamp(h_attr / std::log2(static_cast<double>(occupied)), 0.0, 1.0);
        const double mi = std::max(0.0, h_class + h_attr - h_joint);
        mi_sum += mi;
        mi_max = std::max(mi_max, mi);
    }
    const double m = static_cast<double>(ds.cols());
    const double mean_h_attr = h_attr_sum / m;
    const double mean_mi = mi_sum / m;
    f.attribute_entropy_norm_avg = h_attr_norm_sum / m;
    f.max_norm_mutual_information = h_class > 0.0 ? std::clamp(mi_max / h_class, 0.0, 1.0) : 0.0;
    if (mean_mi > 1e-12) {
        f.equivalent_num_attributes = std::min(kUninformativeSentinel, h_class / mean_mi);
        f.noise_to_signal =
            std::clamp((mean_h_attr - mean_mi) / mean_mi, 0.0, kUninformativeSentinel);
    } else {
        f.equivalent_num_attributes = kUninformativeSentinel;
        f.noise_to_signal = kUninformativeSentinel;
    }
    return f;
}

MetaFeatureVector featurize(const Dataset& input) {
    const Dataset ds = canonical_row_order(input);
    const auto g = extract_general(ds);
    const auto s = extract_statistical(ds);
    const auto i = extract_information_theoretic(ds);
    MetaFeatureVector v;
    v.values = {g.n_instances,
                g.n_attributes,
                g.instance_attribute_ratio,
                g.has_missing,
                g.pct_missing_avg,
                g.pct_unique_avg,
                s.linear_correlation_avg,
                s.skewness_avg,
                s.kurtosis_avg,
                s.variance_fraction_1d,
                i.class_entropy_norm,
                i.attribute_entropy_norm_avg,
                i.max_norm_mutual_information,
                i.equivalent_num_attributes,
                i.noise_to_signal};
    for (double x : v.values)
        if (!std::isfinite(x)) throw ValidationError("dataset '" + ds.id() + "': non-finite meta-feature");
    return v;
}

}  // namespace metarec
