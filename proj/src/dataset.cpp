#include "metarec/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <json.hpp>

#include "metarec/csv.hpp"
#include "metarec/error.hpp"

namespace metarec {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(AttributeKind kind) {
    return kind == AttributeKind::numeric ? "numeric" : "categorical";
}

AttributeKind attribute_kind_from_string(const std::string& text) {
    if (text == "numeric") return AttributeKind::numeric;
    if (text == "categorical") return AttributeKind::categorical;
    throw ParseError("unknown attribute kind '" + text + "'");
}

Dataset::Dataset(std::string id, std::vector<Attribute> attributes, std::vector<std::string> labels,
                 std::vector<std::string> class_values, std::optional<std::string> positive_class,
                 std::string class_name)
    : id_(std::move(id)),
      attributes_(std::move(attributes)),
      labels_(std::move(labels)),
      class_values_(std::move(class_values)),
      positive_class_(std::move(positive_class)),
      class_name_(std::move(class_name)) {
    const std::size_t n = labels_.size();
    if (n < 2) throw ValidationError("dataset '" + id_ + "': needs at least 2 rows");
    if (attributes_.empty()) throw ValidationError("dataset '" + id_ + "': needs at least one attribute");
    if (class_values_.empty()) {
        class_values_ = labels_;
    }
    std::sort(class_values_.begin(), class_values_.end());
    class_values_.erase(std::unique(class_values_.begin(), class_values_.end()), class_values_.end());
    if (class_values_.size() < 2)
        throw ValidationError("dataset '" + id_ + "': needs at least 2 classes");
    for (const auto& label : labels_) {
        if (!std::binary_search(class_values_.begin(), class_values_.end(), label))
            throw ValidationError("dataset '" + id_ + "': label '" + label + "' is not a class value");
    }
    if (positive_class_ &&
        !std::binary_search(class_values_.begin(), class_values_.end(), *positive_class_))
        throw ValidationError("dataset '" + id_ + "': positive class '" + *positive_class_ +
                              "' is not a class value");
    for (const auto& attr : attributes_) {
        if (attr.cells.size() != n)
            throw ValidationError("dataset '" + id_ + "': attribute '" + attr.name +
                                  "' has the wrong number of cells");
        for (const auto& cell : attr.cells) {
            const bool ok = is_missing(cell) ||
                            (attr.kind == AttributeKind::numeric && std::holds_alternative<double>(cell) &&
                             std::isfinite(std::get<double>(cell))) ||
                            (attr.kind == AttributeKind::categorical &&
                             std::holds_alternative<std::string>(cell));
            if (!ok)
                throw ValidationError("dataset '" + id_ + "': attribute '" + attr.name +
                                      "' has a cell that does not match its kind");
        }
    }
}

bool Dataset::has_missing() const {
    return std::any_of(attributes_.begin(), attributes_.end(), [](const Attribute& a) {
        return std::any_of(a.cells.begin(), a.cells.end(), [](const Cell& c) { return is_missing(c); });
    });
}

const std::string& Dataset::positive_class() const {
    return positive_class_ ? *positive_class_ : class_values_.back();
}

std::vector<int> Dataset::label_indices() const {
    std::vector<int> out;
    out.reserve(labels_.size());
    for (const auto& label : labels_) {
        const auto it = std::lower_bound(class_values_.begin(), class_values_.end(), label);
        out.push_back(static_cast<int>(it - class_values_.begin()));
    }
    return out;
}

Dataset Dataset::with_labels(std::vector<std::string> labels) const {
    return Dataset(id_, attributes_, std::move(labels), class_values_, positive_class_, class_name_);
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows, std::string new_id,
                             std::vector<std::string> class_values) const {
    std::vector<Attribute> attrs;
    attrs.reserve(attributes_.size());
    for (const auto& a : attributes_) {
        Attribute sub{a.name, a.kind, {}};
        sub.cells.reserve(rows.size());
        for (auto r : rows) sub.cells.push_back(a.cells.at(r));
        attrs.push_back(std::move(sub));
    }
    std::vector<std::string> labels;
    labels.reserve(rows.size());
    for (auto r : rows) labels.push_back(labels_.at(r));
    std::optional<std::string> positive;
    if (positive_class_ &&
        std::find(class_values.begin(), class_values.end(), *positive_class_) != class_values.end())
        positive = positive_class_;
    return Dataset(std::move(new_id), std::move(attrs), std::move(labels), std::move(class_values),
                   std::move(positive), class_name_);
}

namespace {

bool is_missing_token(const std::string& s) { return s.empty() || s == "?"; }

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DatasetManifest read_manifest(const std::string& manifest_path) {
    const std::string text = read_text(manifest_path);
    try {
        const json doc = json::parse(text);
        if (!doc.is_object()) throw ParseError("manifest '" + manifest_path + "': expected an object");
        DatasetManifest m;
        const fs::path base = fs::path(manifest_path).parent_path();
        if (doc.contains("path")) {
            fs::path p = doc.at("path").get<std::string>();
            m.path = (p.is_relative() ? base / p : p).string();
        } else {
            m.path = (fs::path(manifest_path).replace_extension(".csv")).string();
        }
        if (doc.contains("id")) m.id = doc.at("id").get<std::string>();
        if (doc.contains("class_column")) {
            const auto& c = doc.at("class_column");
            m.class_column = c.is_number_integer() ? std::to_string(c.get<long long>()) : c.get<std::string>();
        }
        if (doc.contains("kinds")) {
            for (const auto& [name, kind] : doc.at("kinds").items())
                m.declared_kinds[name] = attribute_kind_from_string(kind.get<std::string>());
        }
        if (doc.contains("positive_class")) m.positive_class = doc.at("positive_class").get<std::string>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError("manifest '" + manifest_path + "': " + e.what());
    }
}

DatasetManifest resolve_manifest(const std::string& path) {
    if (!fs::exists(path)) throw ParseError("no such file '" + path + "'");
    if (fs::path(path).extension() == ".json") return read_manifest(path);
    const fs::path sidecar = fs::path(path).replace_extension(".json");
    if (fs::exists(sidecar)) {
        DatasetManifest m = read_manifest(sidecar.string());
        m.path = path;
        return m;
    }
    DatasetManifest m;
    m.path = path;
    return m;
}

Dataset load_dataset(const DatasetManifest& manifest) {
    const auto records = csv::read_file(manifest.path);
    if (records.empty()) throw ParseError("'" + manifest.path + "': empty file");
    const auto& header = records.front();
    const std::size_t width = header.size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != width)
            throw ParseError("'" + manifest.path + "': row " + std::to_string(r + 1) + " has " +
                             std::to_string(records[r].size()) + " fields, expected " +
                             std::to_string(width));
    }
    if (width < 2) throw ParseError("'" + manifest.path + "': need at least one attribute and a class column");

    std::size_t class_col = width - 1;
    if (!manifest.class_column.empty()) {
        const auto named = std::find(header.begin(), header.end(), manifest.class_column);
        if (named != header.end()) {
            class_col = static_cast<std::size_t>(named - header.begin());
        } else if (auto idx = csv::parse_int(manifest.class_column); idx && *idx >= 0 &&
                                                                      static_cast<std::size_t>(*idx) < width) {
            class_col = static_cast<std::size_t>(*idx);
        } else {
            throw ParseError("'" + manifest.path + "': class column '" + manifest.class_column + "' not found");
        }
    }
    for (const auto& [name, kind] : manifest.declared_kinds) {
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw ParseError("'" + manifest.path + "': manifest declares unknown column '" + name + "'");
    }

    const std::size_t n = records.size() - 1;
    std::vector<std::string> labels;
    labels.reserve(n);
    for (std::size_t r = 1; r <= n; ++r) {
        const auto& label = records[r][class_col];
        if (is_missing_token(label))
            throw ValidationError("'" + manifest.path + "': row " + std::to_string(r + 1) + " has no class label");
        labels.push_back(label);
    }

    std::vector<Attribute> attributes;
    for (std::size_t c = 0; c < width; ++c) {
        if (c == class_col) continue;
        Attribute attr;
        attr.name = header[c];
        bool any_present = false;
        bool all_numeric = true;
        for (std::size_t r = 1; r <= n; ++r) {
            const auto& text = records[r][c];
            if (is_missing_token(text)) continue;
            any_present = true;
            if (!csv::parse_double(text)) all_numeric = false;
        }
        if (!any_present)
            throw ValidationError("'" + manifest.path + "': column '" + attr.name + "' has only missing cells");
        const auto declared = manifest.declared_kinds.find(attr.name);
        attr.kind = declared != manifest.declared_kinds.end()
                        ? declared->second
                        : (all_numeric ? AttributeKind::numeric : AttributeKind::categorical);
        if (attr.kind == AttributeKind::numeric && !all_numeric)
            throw ParseError("'" + manifest.path + "': column '" + attr.name +
                             "' declared numeric but holds non-numeric values");
        attr.cells.reserve(n);
        for (std::size_t r = 1; r <= n; ++r) {
            const auto& text = records[r][c];
            if (is_missing_token(text))
                attr.cells.emplace_back(std::monostate{});
            else if (attr.kind == AttributeKind::numeric)
                attr.cells.emplace_back(*csv::parse_double(text));
            else
                attr.cells.emplace_back(text);
        }
        attributes.push_back(std::move(attr));
    }

    std::set<std::string> distinct(labels.begin(), labels.end());
    if (distinct.size() < 2) throw ValidationError("'" + manifest.path + "': only one class present");

    std::string id = manifest.id.value_or(fs::path(manifest.path).stem().string());
    return Dataset(std::move(id), std::move(attributes), std::move(labels), {}, manifest.positive_class,
                   header[class_col]);
}

void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::optional<std::string>& manifest_path) {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) throw ParseError("cannot write '" + csv_path + "'");
    csv::Record header;
    for (const auto& a : ds.attributes()) header.push_back(a.name);
    header.push_back(ds.class_name());
    out << csv::join(header) << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        csv::Record row;
        for (const auto& a : ds.attributes()) {
            const Cell& cell = a.cells[r];
            if (is_missing(cell))
                row.emplace_back("?");
            else if (const double* v = std::get_if<double>(&cell))
                row.push_back(csv::format_double(*v));
            else
                row.push_back(std::get<std::string>(cell));
        }
        row.push_back(ds.labels()[r]);
        out << csv::join(row) << '\n';
    }
    if (!out) throw ParseError("failed writing '" + csv_path + "'");

    if (manifest_path) {
        json doc;
        doc["path"] = fs::path(csv_path).filename().string();
        doc["id"] = ds.id();
        doc["class_column"] = ds.class_name();
        json kinds = json::object();
        for (const auto& a : ds.attributes()) kinds[a.name] = to_string(a.kind);
        doc["kinds"] = kinds;
        if (ds.declared_positive_class()) doc["positive_class"] = *ds.declared_positive_class();
        std::ofstream m(*manifest_path, std::ios::binary);
        if (!m) throw ParseError("cannot write '" + *manifest_path + "'");
        m << doc.dump(2) << '\n';
    }
}

std::vector<Dataset> split_one_vs_one(const Dataset& ds) {
    const auto& classes = ds.class_values();
    if (classes.size() < 2) throw ValidationError("one-vs-one split needs at least 2 classes");
    if (classes.size() == 2) return {ds};
    std::vector<Dataset> children;
    for (std::size_t p = 0; p + 1 < classes.size(); p += 2) {
        const std::string& a = classes[p];
        const std::string& b = classes[p + 1];
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            const auto& label = ds.labels()[r];
            if (label == a || label == b) rows.push_back(r);
        }
        children.push_back(ds.select_rows(rows, ds.id() + "__" + a + "_vs_" + b, {a, b}));
    }
    return children;
}

EncodedDataset impute_and_encode(const Dataset& ds) {
    const std::size_t n = ds.rows();
    struct Plan {
        std::size_t attribute;
        std::optional<std::string> token;  // set for one-hot columns
        double fill = 0.0;
    };
    std::vector<Plan> plan;
    std::vector<std::string> names;
    std::vector<std::string> modes(ds.cols());

    for (std::size_t j = 0; j < ds.cols(); ++j) {
        const Attribute& a = ds.attribute(j);
        if (a.kind == AttributeKind::numeric) {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& cell : a.cells) {
                if (const double* v = std::get_if<double>(&cell)) {
                    sum += *v;
                    ++count;
                }
            }
            plan.push_back({j, std::nullopt, count ? sum / static_cast<double>(count) : 0.0});
            names.push_back(a.name);
        } else {
            std::map<std::string, std::size_t> counts;
            for (const auto& cell : a.cells)
                if (const auto* s = std::get_if<std::string>(&cell)) ++counts[*s];
            std::size_t best = 0;
            for (const auto& [token, count] : counts) {
                if (count > best) {
                    best = count;
                    modes[j] = token;
                }
            }
            if (counts.empty()) counts[modes[j]] = 0;
            for (const auto& [token, count] : counts) {
                plan.push_back({j, token, 0.0});
                names.push_back(a.name + "=" + token);
            }
        }
    }

    EncodedDataset out;
    out.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(plan.size()));
    for (std::size_t c = 0; c < plan.size(); ++c) {
        const Plan& p = plan[c];
        const Attribute& a = ds.attribute(p.attribute);
        for (std::size_t r = 0; r < n; ++r) {
            const Cell& cell = a.cells[r];
            double value;
            if (!p.token) {
                value = is_missing(cell) ? p.fill : std::get<double>(cell);
            } else {
                const std::string& token = is_missing(cell) ? modes[p.attribute] : std::get<std::string>(cell);
                value = token == *p.token ? 1.0 : 0.0;
            }
            out.X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = value;
        }
        out.source_attribute.push_back(p.attribute);
    }
    out.column_names = std::move(names);
    out.y = ds.label_indices();
    out.class_values = ds.class_values();
    return out;
}

}  // namespace metarec
