#include "metarec/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "metarec/error.hpp"
#include "metarec/random.hpp"

namespace metarec {

namespace {

double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * uniform_unit(e); }

// Rounds to 3 decimals so CSV files stay short and readable.
double tidy(double x) { return std::round(x * 1000.0) / 1000.0; }

struct Builder {
    std::vector<Attribute> attributes;
    std::vector<std::string> labels;

    explicit Builder(const std::vector<std::pair<std::string, AttributeKind>>& columns) {
        for (const auto& [name, kind] : columns) attributes.push_back({name, kind, {}});
    }

    void add(std::vector<Cell> cells, bool positive) {
        for (std::size_t j = 0; j < cells.size(); ++j) attributes[j].cells.push_back(std::move(cells[j]));
        labels.emplace_back(positive ? "pos" : "neg");
    }

    Dataset build(std::string id) { return Dataset(std::move(id), std::move(attributes), std::move(labels)); }
};

std::vector<std::pair<std::string, AttributeKind>> numeric_columns(std::size_t m) {
    std::vector<std::pair<std::string, AttributeKind>> cols;
    for (std::size_t j = 0; j < m; ++j) cols.emplace_back("x" + std::to_string(j + 1), AttributeKind::numeric);
    return cols;
}

Dataset linear_dataset(const std::string& id, std::size_t n, Engine& e) {
    constexpr std::size_t m = 6;
    const double weights[m] = {1.0, -0.8, 0.6, 0.5, -0.4, 0.3};
    Builder b(numeric_columns(m));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<Cell> cells;
        double score = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double x = tidy(standard_normal(e) * (1.0 + 0.5 * static_cast<double>(j)));
            score += weights[j] * x / (1.0 + 0.5 * static_cast<double>(j));
            cells.emplace_back(x);
        }
        b.add(std::move(cells), score + 0.3 * standard_normal(e) > 0.0);
    }
    return b.build(id);
}

Dataset xor_dataset(const std::string& id, std::size_t n, Engine& e) {
    Builder b(numeric_columns(3));
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = tidy(uniform(e, -1.0, 1.0)), x2 = tidy(uniform(e, -1.0, 1.0));
        const double noise = tidy(uniform(e, -1.0, 1.0));
        b.add({x1, x2, noise}, x1 * x2 > 0.0);
    }
    return b.build(id);
}

Dataset rules_dataset(const std::string& id, std::size_t n, Engine& e) {
    const char* colors[] = {"red", "green", "blue"};
    const char* shapes[] = {"circle", "square", "star"};
    const char* sizes[] = {"small", "large"};
    const char* textures[] = {"rough", "smooth", "soft"};
    Builder b({{"color", AttributeKind::categorical},
               {"shape", AttributeKind::categorical},
               {"size", AttributeKind::categorical},
               {"texture", AttributeKind::categorical}});
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = uniform_below(e, 3), s = uniform_below(e, 3), z = uniform_below(e, 2), t = uniform_below(e, 3);
        // Parity of two attributes: no single attribute carries any signal.
        bool positive = (c == 0) != (z == 1);
        if (uniform_unit(e) < 0.04) positive = !positive;
        std::vector<Cell> cells = {std::string(colors[c]), std::string(shapes[s]), std::string(sizes[z]),
                                   std::string(textures[t])};
        for (std::size_t j = 2; j < cells.size(); ++j)
            if (uniform_unit(e) < 0.06) cells[j] = std::monostate{};
        b.add(std::move(cells), positive);
    }
    return b.build(id);
}

Dataset radial_dataset(const std::string& id, std::size_t n, Engine& e) {
    Builder b(numeric_columns(4));
    for (std::size_t i = 0; i < n; ++i) {
        const double x1 = tidy(uniform(e, -1.0, 1.0)), x2 = tidy(uniform(e, -1.0, 1.0));
        const double n1 = tidy(standard_normal(e)), n2 = tidy(std::exp(standard_normal(e)));
        const bool positive = x1 * x1 + x2 * x2 < 0.6;
        b.add({x1, x2, n1, n2}, positive);
    }
    return b.build(id);
}

}  // namespace

std::vector<Dataset> generate_corpus(std::uint64_t seed) {
    using Generator = Dataset (*)(const std::string&, std::size_t, Engine&);
    struct Family {
        const char* name;
        Generator make;
        std::size_t first_size;
    };
    // Each family gets its own narrow size band so that size is not noise inside a family.
    const Family families[] = {
        {"linear", linear_dataset, 30}, {"xor", xor_dataset, 36}, {"rules", rules_dataset, 33}, {"radial", radial_dataset, 39}};
    std::vector<Dataset> out;
    for (std::size_t f = 0; f < 4; ++f)
        for (std::size_t i = 0; i < 3; ++i) {
            Engine e(derive_seed(seed, 100 * (f + 1) + i));
            out.push_back(families[f].make(std::string(families[f].name) + "_" + std::to_string(i + 1),
                                           families[f].first_size + i, e));
        }
    return out;
}

Dataset generate_multiclass(const std::string& id, std::size_t classes, std::size_t rows_per_class,
                            std::size_t attributes, std::uint64_t seed) {
    Engine e(seed);
    std::vector<Attribute> attrs;
    for (std::size_t j = 0; j < attributes; ++j) attrs.push_back({"x" + std::to_string(j + 1), AttributeKind::numeric, {}});
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < classes; ++k) {
        char token[24];
        std::snprintf(token, sizeof token, "c%02zu", k);
        for (std::size_t r = 0; r < rows_per_class; ++r) {
            for (auto& a : attrs) a.cells.emplace_back(tidy(static_cast<double>(k) + standard_normal(e)));
            labels.emplace_back(token);
        }
    }
    return Dataset(id, std::move(attrs), std::move(labels));
}

std::vector<std::string> write_corpus(const std::string& dir, const std::vector<Dataset>& datasets) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<std::string> manifests;
    for (const auto& ds : datasets) {
        const auto csv_path = (fs::path(dir) / (ds.id() + ".csv")).string();
        const auto manifest = (fs::path(dir) / (ds.id() + ".json")).string();
        save_dataset(ds, csv_path, manifest);
        manifests.push_back(manifest);
    }
    return manifests;
}

}  // namespace metarec
