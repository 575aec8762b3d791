#include "metarec/experiment_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "metarec/csv.hpp"
#include "metarec/error.hpp"
#include "metarec/parallel.hpp"
#include "metarec/random.hpp"

namespace metarec {

namespace {

std::string key_of(const std::string& dataset_id, const std::string& classifier_id, std::uint64_t seed) {
    return dataset_id + '\x1f' + classifier_id + '\x1f' + std::to_string(seed);
}

void check_row(const ExperimentRow& row) {
    const auto where = [&] { return "row (" + row.dataset_id + ", " + row.classifier_id + ")"; };
    if (row.dataset_id.empty() || row.classifier_id.empty()) throw SchemaError("row with an empty id");
    if (!std::isfinite(row.f_score) || row.f_score < 0.0 || row.f_score > 1.0)
        throw SchemaError(where() + ": f_score outside [0, 1]");
    if (!std::isfinite(row.p_value) || row.p_value <= 0.0 || row.p_value > 1.0)
        throw SchemaError(where() + ": p_value outside (0, 1]");
    if (!std::isfinite(row.error_original) || row.error_original < 0.0 || row.error_original > 1.0)
        throw SchemaError(where() + ": error_original outside [0, 1]");
    if (row.k_permutations < 1) throw SchemaError(where() + ": k_permutations must be >= 1");
    for (double v : row.meta_features.values)
        if (!std::isfinite(v)) throw SchemaError(where() + ": non-finite meta-feature");
}

std::vector<std::string> row_fields(const ExperimentRow& row) {
    std::vector<std::string> f;
    f.reserve(26);
    f.push_back(row.dataset_id);
    for (double v : row.meta_features.values) f.push_back(csv::format_double(v));
    f.push_back(row.classifier_id);
    f.push_back(csv::format_double(row.f_score));
    f.push_back(csv::format_double(row.p_value));
    f.push_back(csv::format_double(row.error_original));
    f.push_back(std::to_string(row.k_permutations));
    f.push_back(std::to_string(row.seed));
    f.push_back(row.timestamp);
    f.push_back(row.toolkit_version);
    return f;
}

double number_field(const std::string& text, std::size_t line, const char* name) {
    const auto v = csv::parse_double(text);
    if (!v) throw SchemaError("line " + std::to_string(line) + ": field " + name + " is not a finite number");
    return *v;
}

std::uint64_t unsigned_field(const std::string& text, std::size_t line, const char* name) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        throw SchemaError("line " + std::to_string(line) + ": field " + name + " is not an unsigned integer");
    return v;
}

}  // namespace

ExperimentTable::ExperimentTable(std::vector<ExperimentRow> rows) {
    rows_.reserve(rows.size());
    for (auto& r : rows) add(std::move(r));
}

void ExperimentTable::add(ExperimentRow row) {
    check_row(row);
    const auto key = key_of(row.dataset_id, row.classifier_id, row.seed);
    if (key_index_.count(key))
        throw SchemaError("duplicate experiment (" + row.dataset_id + ", " + row.classifier_id + ", seed " +
                          std::to_string(row.seed) + ")");
    const auto [it, inserted] = features_.emplace(row.dataset_id, row.meta_features);
    if (!inserted && it->second != row.meta_features)
        throw SchemaError("dataset '" + row.dataset_id + "' has rows with different meta-features");
    key_index_.emplace(key, rows_.size());
    rows_.push_back(std::move(row));
}

std::vector<std::string> ExperimentTable::dataset_ids() const {
    std::vector<std::string> ids;
    ids.reserve(features_.size());
    for (const auto& [id, _] : features_) ids.push_back(id);
    return ids;
}

const MetaFeatureVector& ExperimentTable::meta_features_of(const std::string& dataset_id) const {
    const auto it = features_.find(dataset_id);
    if (it == features_.end()) throw ValidationError("unknown dataset '" + dataset_id + "'");
    return it->second;
}

bool ExperimentTable::contains_key(const std::string& dataset_id, const std::string& classifier_id,
                                   std::uint64_t seed) const {
    return key_index_.count(key_of(dataset_id, classifier_id, seed)) > 0;
}

std::vector<ExperimentRow> ExperimentTable::rows_for_dataset(const std::string& dataset_id) const {
    std::vector<ExperimentRow> out;
    for (const auto& r : rows_)
        if (r.dataset_id == dataset_id) out.push_back(r);
    std::stable_sort(out.begin(), out.end(), [](const ExperimentRow& a, const ExperimentRow& b) {
        return a.classifier_id != b.classifier_id ? a.classifier_id < b.classifier_id : a.seed < b.seed;
    });
    return out;
}

ExperimentTable ExperimentTable::without_dataset(const std::string& dataset_id) const {
    ExperimentTable out;
    for (const auto& r : rows_)
        if (r.dataset_id != dataset_id) out.add(r);
    return out;
}

std::vector<std::string> table_header() {
    std::vector<std::string> h{"dataset_id"};
    for (auto name : kFeatureNames) h.emplace_back(name);
    for (const char* name : {"classifier_id", "f_score", "p_value", "error_original", "k_permutations", "seed",
                             "timestamp", "toolkit_version"})
        h.emplace_back(name);
    return h;
}

std::string serialize_table(const ExperimentTable& table, bool with_header) {
    std::string out;
    if (with_header) out += csv::join(table_header()) + "\n";
    for (const auto& row : table.rows()) out += csv::join(row_fields(row)) + "\n";
    return out;
}

void save_table(const ExperimentTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    out << serialize_table(table);
    if (!out) throw SchemaError("failed writing '" + path + "'");
}

void append_rows(const std::string& path, const std::vector<ExperimentRow>& rows) {
    ExperimentTable merged;
    const bool exists = std::filesystem::exists(path) && std::filesystem::file_size(path) > 0;
    if (exists) merged = load_table(path);
    for (const auto& r : rows) merged.add(r);  // throws on any duplicate before we write

    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw SchemaError("cannot write '" + path + "'");
    if (!exists) out << csv::join(table_header()) << '\n';
    for (const auto& r : rows) out << csv::join(row_fields(r)) << '\n';
    if (!out) throw SchemaError("failed writing '" + path + "'");
}

ExperimentTable parse_table(const std::string& text) {
    std::vector<csv::Record> records;
    try {
        records = csv::parse(text);
    } catch (const ParseError& e) {
        throw SchemaError(e.what());
    }
    if (records.empty()) throw SchemaError("experiment table has no header");
    if (records.front() != table_header()) throw SchemaError("experiment table header does not match the schema");
    ExperimentTable table;
    const std::size_t width = table_header().size();
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r];
        const std::size_t line = r + 1;
        if (f.size() != width)
            throw SchemaError("line " + std::to_string(line) + ": expected " + std::to_string(width) + " fields");
        ExperimentRow row;
        row.dataset_id = f[0];
        for (std::size_t i = 0; i < kFeatureCount; ++i)
            row.meta_features.values[i] = number_field(f[1 + i], line, std::string(kFeatureNames[i]).c_str());
        std::size_t c = 1 + kFeatureCount;
        row.classifier_id = f[c++];
        row.f_score = number_field(f[c++], line, "f_score");
        row.p_value = number_field(f[c++], line, "p_value");
        row.error_original = number_field(f[c++], line, "error_original");
        row.k_permutations = static_cast<std::size_t>(unsigned_field(f[c++], line, "k_permutations"));
        row.seed = unsigned_field(f[c++], line, "seed");
        row.timestamp = f[c++];
        row.toolkit_version = f[c++];
        try {
            table.add(std::move(row));
        } catch (const SchemaError& e) {
            throw SchemaError("line " + std::to_string(line) + ": " + e.what());
        }
    }
    return table;
}

ExperimentTable load_table(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot open experiment table '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_table(buffer.str());
}

nlohmann::json to_json(const RunReport& report) {
    auto list = [](const std::vector<SkippedPair>& pairs) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& p : pairs)
            arr.push_back({{"dataset_id", p.dataset_id}, {"classifier_id", p.classifier_id}, {"reason", p.reason}});
        return arr;
    };
    nlohmann::json j = {
        {"datasets", report.datasets},
        {"configs", report.configs},
        {"rows", report.rows},
        {"not_applicable", list(report.not_applicable)},
        {"failures", list(report.failures)},
        {"majority_fallbacks", list(report.fallbacks)},
    };
    if (!report.null_distributions.empty()) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& n : report.null_distributions)
            arr.push_back({{"dataset_id", n.dataset_id},
                           {"classifier_id", n.classifier_id},
                           {"permuted_errors", n.permuted_errors}});
        j["null_distributions"] = std::move(arr);
    }
    return j;
}

std::uint64_t pair_seed(const std::string& dataset_id, const std::string& classifier_id,
                        std::uint64_t campaign_seed) {
    std::uint64_t h = fnv1a(dataset_id);
    h = fnv1a(std::string_view("\0", 1), h);
    h = fnv1a(classifier_id, h);
    return derive_seed(campaign_seed, h);
}

CampaignResult run_experiments(const std::vector<Dataset>& datasets, const std::vector<GridEntry>& grid,
                               const RunOptions& options) {
    if (datasets.empty()) throw ValidationError("run_experiments: no datasets");
    if (grid.empty()) throw ValidationError("run_experiments: empty classifier grid");
    std::set<std::string> ids;
    for (const auto& ds : datasets)
        if (!ids.insert(ds.id()).second) throw ValidationError("run_experiments: duplicate dataset id '" + ds.id() + "'");

    CampaignResult out;
    out.report.datasets = datasets.size();
    out.report.configs = grid.size();

    struct Prepared {
        std::optional<MetaFeatureVector> features;
        std::optional<EncodedDataset> encoded;
        int positive = 1;
        std::string error;
    };
    std::vector<Prepared> prepared(datasets.size());
    parallel_for(datasets.size(), options.jobs, [&](std::size_t d) {
        const Dataset& ds = datasets[d];
        try {
            if (!ds.is_binary()) throw ValidationError("dataset is not binary");
            prepared[d].features = featurize(ds);
            prepared[d].encoded = impute_and_encode(ds);
            const auto& cv = ds.class_values();
            prepared[d].positive =
                static_cast<int>(std::find(cv.begin(), cv.end(), ds.positive_class()) - cv.begin());
        } catch (const std::exception& e) {
            prepared[d].error = e.what();
        }
    });

    struct Slot {
        enum class State { pending, not_applicable, failed, done } state = State::pending;
        std::string message;
        std::optional<SignificanceResult> result;
    };
    const std::size_t pairs = datasets.size() * grid.size();
    std::vector<Slot> slots(pairs);
    parallel_for(pairs, options.jobs, [&](std::size_t index) {
        const std::size_t d = index / grid.size(), g = index % grid.size();
        const Dataset& ds = datasets[d];
        const GridEntry& entry = grid[g];
        Slot& slot = slots[index];
        if (!prepared[d].error.empty()) {
            slot.state = Slot::State::failed;
            slot.message = prepared[d].error;
            return;
        }
        if (!entry.applies_to(ds)) {
            slot.state = Slot::State::not_applicable;
            slot.message = "excluded by grid capability flags";
            return;
        }
        try {
            PermutationOptions popt;
            popt.permutations = options.permutations;
            popt.seed = pair_seed(ds.id(), entry.config.id(), options.seed);
            popt.protocol = options.protocol;
            popt.keep_null_distribution = options.keep_null_distribution;
            const auto& enc = *prepared[d].encoded;
            slot.result = permutation_test(entry.config, enc.X, enc.y, prepared[d].positive, popt);
            slot.state = Slot::State::done;
        } catch (const std::exception& e) {
            slot.state = Slot::State::failed;
            slot.message = e.what();
        }
    });

    for (std::size_t index = 0; index < pairs; ++index) {
        const std::size_t d = index / grid.size(), g = index % grid.size();
        const Slot& slot = slots[index];
        SkippedPair pair{datasets[d].id(), grid[g].config.id(), slot.message};
        switch (slot.state) {
            case Slot::State::not_applicable:
                out.report.not_applicable.push_back(std::move(pair));
                break;
            case Slot::State::failed:
            case Slot::State::pending:
                out.report.failures.push_back(std::move(pair));
                break;
            case Slot::State::done: {
                const auto& r = *slot.result;
                if (r.fallback_folds > 0) {
                    pair.reason = std::to_string(r.fallback_folds) + " single-class training folds fit as majority";
                    out.report.fallbacks.push_back(pair);
                }
                if (options.keep_null_distribution)
                    out.report.null_distributions.push_back({pair.dataset_id, pair.classifier_id, r.permuted_errors});
                ExperimentRow row;
                row.dataset_id = datasets[d].id();
                row.meta_features = *prepared[d].features;
                row.classifier_id = grid[g].config.id();
                row.f_score = r.f_score;
                row.p_value = r.p_value;
                row.error_original = r.error_original;
                row.k_permutations = r.k_permutations;
                row.seed = options.seed;
                row.timestamp = options.timestamp;
                out.table.add(std::move(row));
                break;
            }
        }
    }
    out.report.rows = out.table.size();
    return out;
}

bool meta_features_match(const ExperimentTable& table, const Dataset& ds) {
    if (!table.contains_dataset(ds.id())) return false;
    return table.meta_features_of(ds.id()) == featurize(ds);
}

}  // namespace metarec
