#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace metarec {

enum class AttributeKind { numeric, categorical };

std::string to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(const std::string& text);

/// A single attribute value: missing, a finite number, or a categorical token.
using Cell = std::variant<std::monostate, double, std::string>;

inline bool is_missing(const Cell& cell) { return std::holds_alternative<std::monostate>(cell); }

struct Attribute {
    std::string name;
    AttributeKind kind = AttributeKind::numeric;
    std::vector<Cell> cells;  // one per row

    friend bool operator==(const Attribute&, const Attribute&) = default;
};

/// Labelled tabular data. Immutable once constructed; the constructor enforces
/// every structural invariant and throws ValidationError otherwise.
///
/// class_values is sorted lexicographically, so index 0 is always the smaller
/// class token. A class value need not occur in the labels (e.g. a subset of
/// rows of a larger dataset), but every label must be a class value.
class Dataset {
public:
    Dataset(std::string id, std::vector<Attribute> attributes, std::vector<std::string> labels,
            std::vector<std::string> class_values = {},
            std::optional<std::string> positive_class = std::nullopt,
            std::string class_name = "class");

    const std::string& id() const { return id_; }
    std::size_t rows() const { return labels_.size(); }
    std::size_t cols() const { return attributes_.size(); }

    const std::vector<Attribute>& attributes() const { return attributes_; }
    const Attribute& attribute(std::size_t j) const { return attributes_.at(j); }
    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<std::string>& class_values() const { return class_values_; }
    const std::string& class_name() const { return class_name_; }
    const std::optional<std::string>& declared_positive_class() const { return positive_class_; }

    bool is_binary() const { return class_values_.size() == 2; }
    bool has_missing() const;

    /// Positive class for contingency tables: the declared one if present,
    /// otherwise the lexicographically larger class token.
    const std::string& positive_class() const;

    /// Index of each label in class_values().
    std::vector<int> label_indices() const;

    /// Same attributes with a different label vector (class_values kept).
    Dataset with_labels(std::vector<std::string> labels) const;

    /// Subset of rows, in the given order, keeping only the listed class values.
    Dataset select_rows(const std::vector<std::size_t>& rows, std::string new_id,
                        std::vector<std::string> class_values) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::string id_;
    std::vector<Attribute> attributes_;
    std::vector<std::string> labels_;
    std::vector<std::string> class_values_;
    std::optional<std::string> positive_class_;
    std::string class_name_;
};

/// How to read a CSV file into a Dataset.
struct DatasetManifest {
    std::string path;
    std::optional<std::string> id;  // defaults to the file stem
    std::map<std::string, AttributeKind> declared_kinds;
    // Column name, or a zero-based index written as a number. Empty = last column.
    std::string class_column;
    std::optional<std::string> positive_class;
};

/// Reads a JSON manifest (`{"path", "class_column", "kinds", "positive_class", "id"}`).
/// A relative "path" is resolved against the manifest's directory.
DatasetManifest read_manifest(const std::string& manifest_path);

/// Accepts either a JSON manifest or a CSV file. For a CSV, a sidecar manifest
/// `<stem>.json` next to it is used when present.
DatasetManifest resolve_manifest(const std::string& path);

Dataset load_dataset(const DatasetManifest& manifest);

/// Writes the CSV (class column last, missing cells as `?`) and optionally a
/// manifest declaring the attribute kinds, so the pair reloads to an equal Dataset.
void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::optional<std::string>& manifest_path = std::nullopt);

/// One-vs-one reduction with disjoint lexicographic pairing:
/// (c1,c2), (c3,c4), ...; an odd last class is dropped.
std::vector<Dataset> split_one_vs_one(const Dataset& ds);

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully numeric view of a dataset for the classifiers.
struct EncodedDataset {
    Matrix X;
    std::vector<int> y;                     // index into class_values
    std::vector<std::string> column_names;  // "attr" or "attr=token" for one-hot columns
    std::vector<std::size_t> source_attribute;
    std::vector<std::string> class_values;
};

/// Mean-imputes numeric columns, mode-imputes categorical columns (ties to the
/// smaller token), then one-hot encodes categoricals in lexicographic token order.
/// Output columns follow attribute order; a categorical expands in place.
EncodedDataset impute_and_encode(const Dataset& ds);

}  // namespace metarec
