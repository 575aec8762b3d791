// metarec command-line tool: featurize datasets, run experiment campaigns,
// recommend classifiers and evaluate the recommender.
//
// Exit codes: 0 success, 1 domain failure (nothing produced, duplicate keys,
// too few datasets), 2 usage or I/O failure.

#include <algorithm>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "metarec/corpus.hpp"
#include "metarec/csv.hpp"
#include "metarec/dataset.hpp"
#include "metarec/error.hpp"
#include "metarec/evaluation.hpp"
#include "metarec/experiment_store.hpp"
#include "metarec/meta_features.hpp"
#include "metarec/recommender.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using namespace metarec;

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

/// Failure that maps to exit code 1 rather than 2.
struct DomainFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("METAREC_SEED"); env && *env) {
        const auto v = csv::parse_int(env);
        if (!v || *v < 0) throw ValidationError(std::string("METAREC_SEED is not a non-negative integer: ") + env);
        return static_cast<std::uint64_t>(*v);
    }
    return 0;
}

/// --timestamp wins, then SOURCE_DATE_EPOCH; otherwise the Unix epoch so that
/// reruns stay byte-identical.
std::string resolve_timestamp(const std::string& flag) {
    if (!flag.empty()) return flag;
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
        const auto v = csv::parse_int(env);
        if (!v || *v < 0) throw ValidationError(std::string("SOURCE_DATE_EPOCH is not a non-negative integer: ") + env);
        t = static_cast<std::time_t>(*v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ParseError("write failed for '" + path + "'");
}

void emit(const std::string& out_path, const std::string& text) {
    if (out_path.empty()) std::cout << text;
    else write_text(out_path, text);
}

/// A directory argument stands for the manifests inside it (or its CSV files
/// when there are no manifests).
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (!fs::is_directory(in)) {
            out.push_back(in);
            continue;
        }
        std::vector<std::string> manifests, tables;
        for (const auto& entry : fs::directory_iterator(in)) {
            if (!entry.is_regular_file()) continue;
            const auto ext = entry.path().extension();
            if (ext == ".json") manifests.push_back(entry.path().string());
            else if (ext == ".csv") tables.push_back(entry.path().string());
        }
        auto& chosen = manifests.empty() ? tables : manifests;
        std::sort(chosen.begin(), chosen.end());
        if (chosen.empty()) throw ParseError("directory '" + in + "' holds no datasets");
        out.insert(out.end(), chosen.begin(), chosen.end());
    }
    return out;
}

Dataset load_input(const std::string& path) { return load_dataset(resolve_manifest(path)); }

// --- featurize ------------------------------------------------------------------

struct FeaturizeArgs {
    std::string input;
    std::string format = "json";
    std::string out;
};

int cmd_featurize(const FeaturizeArgs& a) {
    const Dataset ds = load_input(a.input);
    const MetaFeatureVector v = featurize(ds);
    if (a.format == "csv") {
        emit(a.out, to_csv(v));
    } else {
        // Feature order rather than key order, so the output reads like the table columns.
        nlohmann::ordered_json doc;
        for (std::size_t i = 0; i < kFeatureCount; ++i) doc[std::string(kFeatureNames[i])] = v.values[i];
        emit(a.out, doc.dump(2) + "\n");
    }
    return kExitOk;
}

// --- run ------------------------------------------------------------------------

struct RunArgs {
    std::vector<std::string> inputs;
    std::string out;
    std::string report;
    std::string grid;
    std::size_t k = kDefaultPermutations;
    std::optional<std::uint64_t> seed;
    std::size_t jobs = 1;
    std::string timestamp;
    bool keep_null = false;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    const auto paths = expand_inputs(a.inputs);
    std::set<std::string> seen;
    for (const auto& p : paths)
        if (!seen.insert(fs::weakly_canonical(p).string()).second) throw ValidationError("input listed twice: " + p);

    std::vector<Dataset> datasets;
    for (const auto& p : paths) {
        const Dataset ds = load_input(p);
        // Multiclass inputs enter the campaign as their one-vs-one children.
        for (auto& child : split_one_vs_one(ds)) datasets.push_back(std::move(child));
    }
    const std::vector<GridEntry> grid = a.grid.empty() ? as_grid(default_grid()) : load_grid(a.grid);

    RunOptions opt;
    opt.permutations = a.k;
    opt.seed = resolve_seed(a.seed);
    opt.jobs = a.jobs;
    opt.timestamp = resolve_timestamp(a.timestamp);
    opt.keep_null_distribution = a.keep_null;

    // Refuse up front rather than after hours of work.
    if (fs::exists(a.out)) {
        const ExperimentTable existing = load_table(a.out);
        for (const auto& ds : datasets)
            for (const auto& g : grid)
                if (existing.contains_key(ds.id(), g.config.id(), opt.seed))
                    throw DomainFailure("'" + a.out + "' already holds (" + ds.id() + ", " + g.config.id() +
                                        ", seed " + std::to_string(opt.seed) + "); refusing to duplicate");
    }

    if (!a.quiet)
        std::cerr << "running " << datasets.size() << " datasets x " << grid.size() << " configs, k=" << opt.permutations
                  << ", seed=" << opt.seed << ", jobs=" << opt.jobs << "\n";
    const CampaignResult result = run_experiments(datasets, grid, opt);

    const std::string report_path =
        a.report.empty() ? fs::path(a.out).replace_extension(".report.json").string() : a.report;
    json report = to_json(result.report);
    report["seed"] = opt.seed;
    report["k_permutations"] = opt.permutations;
    report["table"] = a.out;
    write_text(report_path, report.dump(2) + "\n");

    if (result.table.empty()) {
        std::cerr << "no experiment rows were produced; see " << report_path << "\n";
        return kExitDomain;
    }
    try {
        append_rows(a.out, result.table.rows());
    } catch (const SchemaError& e) {
        throw DomainFailure(e.what());
    }
    if (!a.quiet)
        std::cerr << "wrote " << result.table.size() << " rows to " << a.out << " (" << result.report.failures.size()
                  << " failed, " << result.report.not_applicable.size() << " not applicable)\n";
    return kExitOk;
}

// --- recommend ------------------------------------------------------------------

struct RecommendArgs {
    std::string table;
    std::string input;
    std::string strategy = "pvalue";
    std::size_t neighbors = 5;
    std::size_t top = 2;
    bool by_family = false;
    bool exclude_self = false;
    bool as_json = false;
};

int cmd_recommend(const RecommendArgs& a) {
    const ExperimentTable table = load_table(a.table);
    if (table.empty()) throw DomainFailure("experiment table '" + a.table + "' is empty");
    const Dataset ds = load_input(a.input);
    RecommendOptions opt;
    opt.neighbors = a.neighbors;
    opt.top_per_neighbor = a.top;
    if (a.exclude_self) opt.exclude_dataset = ds.id();
    Recommendation rec;
    try {
        rec = recommend(table, featurize(ds), strategy_from_string(a.strategy), opt);
    } catch (const ValidationError& e) {
        throw DomainFailure(e.what());
    }
    if (a.as_json) {
        json doc = to_json(rec);
        doc["dataset_id"] = ds.id();
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << format_recommendation(rec, a.by_family);
    }
    return kExitOk;
}

// --- evaluate / agreement ------------------------------------------------------

struct EvaluateArgs {
    std::string table;
    std::string strategy = "both";
    std::string out_dir;
    std::size_t neighbors = 5;
    std::size_t top = 2;
    bool as_json = false;
};

int cmd_evaluate(const EvaluateArgs& a) {
    const ExperimentTable table = load_table(a.table);
    if (table.dataset_ids().size() < 2)
        throw DomainFailure("evaluation needs at least two datasets in '" + a.table + "'");

    std::vector<Strategy> strategies;
    if (a.strategy == "both") strategies = {Strategy::pvalue, Strategy::fscore};
    else strategies = {strategy_from_string(a.strategy)};

    RecommendOptions opt;
    opt.neighbors = a.neighbors;
    opt.top_per_neighbor = a.top;

    const AgreementMatrix agreement = agreement_matrix(table);
    json doc;
    doc["table"] = a.table;
    doc["rows"] = table.size();
    doc["datasets"] = table.dataset_ids().size();
    doc["agreement"] = to_json(agreement);
    doc["strategies"] = json::object();

    std::ostringstream text;
    text << std::fixed << std::setprecision(4);
    if (!a.out_dir.empty()) fs::create_directories(a.out_dir);
    for (const Strategy s : strategies) {
        const EvalReport report = leave_one_dataset_out(table, s, opt);
        doc["strategies"][to_string(s)] = to_json(report);
        text << std::left << std::setw(8) << to_string(s) << " AUC " << report.auc << "  mean nrank "
             << report.mean_nrank << "  (" << report.records.size() << " datasets)\n";
        for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
        if (!a.out_dir.empty()) {
            const fs::path dir(a.out_dir);
            write_text((dir / (to_string(s) + "_histogram.csv")).string(), histogram_csv(report));
            write_text((dir / (to_string(s) + "_cdf.csv")).string(), cdf_csv(report));
        }
    }
    if (!a.out_dir.empty()) write_text((fs::path(a.out_dir) / "eval_report.json").string(), doc.dump(2) + "\n");

    if (a.as_json) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << text.str() << "\n" << format_agreement(agreement);
    }
    return kExitOk;
}

int cmd_agreement(const std::string& table_path, bool as_json) {
    const ExperimentTable table = load_table(table_path);
    if (table.empty()) throw DomainFailure("experiment table '" + table_path + "' is empty");
    const AgreementMatrix m = agreement_matrix(table);
    if (as_json) std::cout << to_json(m).dump(2) << "\n";
    else std::cout << format_agreement(m);
    return kExitOk;
}

// --- gen-corpus / split -----------------------------------------------------------

int cmd_gen_corpus(const std::string& out_dir, const std::optional<std::uint64_t>& seed) {
    fs::create_directories(out_dir);
    const auto manifests = write_corpus(out_dir, generate_corpus(resolve_seed(seed)));
    for (const auto& m : manifests) std::cout << m << "\n";
    return kExitOk;
}

int cmd_split(const std::string& input, const std::string& out_dir) {
    const Dataset ds = load_input(input);
    fs::create_directories(out_dir);
    for (const auto& child : split_one_vs_one(ds)) {
        const fs::path base = fs::path(out_dir) / child.id();
        save_dataset(child, base.string() + ".csv", base.string() + ".json");
        std::cout << base.string() << ".json\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metarec: classifier recommendation from dataset meta-features"};
    app.require_subcommand(1);

    FeaturizeArgs fa;
    auto* featurize_cmd = app.add_subcommand("featurize", "Print the 15 meta-features of a dataset");
    featurize_cmd->add_option("dataset", fa.input, "Dataset CSV or JSON manifest")->required();
    featurize_cmd->add_option("--format", fa.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    featurize_cmd->add_option("--out", fa.out, "Write to a file instead of standard output");

    RunArgs ra;
    auto* run_cmd = app.add_subcommand("run", "Run every grid configuration on every dataset");
    run_cmd->add_option("datasets", ra.inputs, "Dataset manifests, CSV files or directories")->required();
    run_cmd->add_option("--out", ra.out, "Experiment table (created, or appended to)")->required();
    run_cmd->add_option("--report", ra.report, "Run report JSON (default: next to the table)");
    run_cmd->add_option("--grid", ra.grid, "JSON grid file (default: the built-in grid)");
    run_cmd->add_option("--k", ra.k, "Permutations per test")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", ra.seed, "Campaign seed (fallback: METAREC_SEED, then 0)");
    run_cmd->add_option("--jobs", ra.jobs, "Worker threads")->check(CLI::PositiveNumber);
    run_cmd->add_option("--timestamp", ra.timestamp, "Row timestamp (fallback: SOURCE_DATE_EPOCH, then the epoch)");
    run_cmd->add_flag("--keep-null-distribution", ra.keep_null, "Write each pair's permuted errors into the run report");
    run_cmd->add_flag("--quiet", ra.quiet, "No progress output");

    RecommendArgs rca;
    auto* rec_cmd = app.add_subcommand("recommend", "Rank classifiers for a dataset");
    rec_cmd->add_option("dataset", rca.input, "Dataset CSV or JSON manifest")->required();
    rec_cmd->add_option("--table", rca.table, "Experiment table")->required();
    rec_cmd->add_option("--strategy", rca.strategy, "fscore or pvalue")->check(CLI::IsMember({"fscore", "pvalue"}));
    rec_cmd->add_option("--neighbors", rca.neighbors, "Nearest datasets consulted")->check(CLI::PositiveNumber);
    rec_cmd->add_option("--top-per-neighbor", rca.top, "Candidates taken from each neighbour")->check(CLI::PositiveNumber);
    rec_cmd->add_flag("--by-family", rca.by_family, "Sum scores per classifier family in the printed table");
    rec_cmd->add_flag("--exclude-self", rca.exclude_self, "Ignore table rows carrying the query dataset's id");
    rec_cmd->add_flag("--json", rca.as_json, "Machine-readable output");

    EvaluateArgs ea;
    auto* eval_cmd = app.add_subcommand("evaluate", "Leave-one-dataset-out evaluation of the recommender");
    eval_cmd->add_option("--table", ea.table, "Experiment table")->required();
    eval_cmd->add_option("--strategy", ea.strategy, "fscore, pvalue or both")
        ->check(CLI::IsMember({"fscore", "pvalue", "both"}));
    eval_cmd->add_option("--out-dir", ea.out_dir, "Directory for the JSON report and CSV series");
    eval_cmd->add_option("--neighbors", ea.neighbors, "Nearest datasets consulted")->check(CLI::PositiveNumber);
    eval_cmd->add_option("--top-per-neighbor", ea.top, "Candidates taken from each neighbour")->check(CLI::PositiveNumber);
    eval_cmd->add_flag("--json", ea.as_json, "Print the JSON report");

    std::string agreement_table;
    bool agreement_json = false;
    auto* agree_cmd = app.add_subcommand("agreement", "F-score / p-value band agreement matrix");
    agree_cmd->add_option("--table", agreement_table, "Experiment table")->required();
    agree_cmd->add_flag("--json", agreement_json, "Machine-readable output");

    std::string corpus_dir;
    std::optional<std::uint64_t> corpus_seed;
    auto* gen_cmd = app.add_subcommand("gen-corpus", "Write the 12-dataset synthetic corpus");
    gen_cmd->add_option("--out", corpus_dir, "Output directory")->required();
    gen_cmd->add_option("--seed", corpus_seed, "Generator seed (fallback: METAREC_SEED, then 0)");

    std::string split_input, split_dir;
    auto* split_cmd = app.add_subcommand("split", "One-vs-one binary children of a multiclass dataset");
    split_cmd->add_option("dataset", split_input, "Dataset CSV or JSON manifest")->required();
    split_cmd->add_option("--out", split_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*featurize_cmd) return cmd_featurize(fa);
        if (*run_cmd) return cmd_run(ra);
        if (*rec_cmd) return cmd_recommend(rca);
        if (*eval_cmd) return cmd_evaluate(ea);
        if (*agree_cmd) return cmd_agreement(agreement_table, agreement_json);
        if (*gen_cmd) return cmd_gen_corpus(corpus_dir, corpus_seed);
        if (*split_cmd) return cmd_split(split_input, split_dir);
    } catch (const DomainFailure& e) {
        std::cerr << "metarec: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "metarec: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
