#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "metarec/corpus.hpp"
#include "metarec/dataset.hpp"
#include "metarec/error.hpp"
#include "metarec/evaluation.hpp"
#include "metarec/experiment_store.hpp"
#include "metarec/meta_features.hpp"
#include "metarec/recommender.hpp"
#include "metarec/significance.hpp"

namespace py = pybind11;
using namespace metarec;

namespace {

py::object to_python(const nlohmann::json& j) {
    switch (j.type()) {
        case nlohmann::json::value_t::null: return py::none();
        case nlohmann::json::value_t::boolean: return py::bool_(j.get<bool>());
        case nlohmann::json::value_t::number_integer: return py::int_(j.get<long long>());
        case nlohmann::json::value_t::number_unsigned: return py::int_(j.get<unsigned long long>());
        case nlohmann::json::value_t::number_float: return py::float_(j.get<double>());
        case nlohmann::json::value_t::string: return py::str(j.get<std::string>());
        case nlohmann::json::value_t::array: {
            py::list out;
            for (const auto& item : j) out.append(to_python(item));
            return out;
        }
        case nlohmann::json::value_t::object: {
            py::dict out;
            for (const auto& [key, value] : j.items()) out[py::str(key)] = to_python(value);
            return out;
        }
        default: return py::none();
    }
}

Dataset load(const std::string& path) { return load_dataset(resolve_manifest(path)); }

py::dict features_dict(const MetaFeatureVector& v) {
    py::dict out;
    for (std::size_t i = 0; i < kFeatureCount; ++i) out[py::str(std::string(kFeatureNames[i]))] = v.values[i];
    return out;
}

MetaFeatureVector features_from(const py::dict& d) {
    MetaFeatureVector v;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
        const py::str key(std::string(kFeatureNames[i]));
        if (!d.contains(key)) throw ValidationError("missing meta-feature '" + std::string(kFeatureNames[i]) + "'");
        v.values[i] = d[key].cast<double>();
    }
    return v;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Classifier recommendation from dataset meta-features";
    static py::exception<Error> error(m, "MetarecError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    m.attr("__version__") = kToolkitVersion;
    m.def("feature_names", [] {
        std::vector<std::string> names(kFeatureNames.begin(), kFeatureNames.end());
        return names;
    });
    m.def("default_grid", [] {
        std::vector<std::string> ids;
        for (const auto& c : default_grid()) ids.push_back(c.id());
        return ids;
    });

    m.def("featurize", [](const std::string& path) { return features_dict(featurize(load(path))); }, py::arg("path"),
          "The 15 meta-features of a dataset (CSV file or JSON manifest).");

    m.def(
        "permutation_test",
        [](const std::string& path, const std::string& classifier_id, std::size_t k, std::uint64_t seed) {
            PermutationOptions opt;
            opt.permutations = k;
            opt.seed = seed;
            const auto config = ClassifierConfig::parse(classifier_id);
            const Dataset ds = load(path);
            SignificanceResult result;
            {
                py::gil_scoped_release release;
                result = permutation_test(config, ds, opt);
            }
            return to_python(to_json(result));
        },
        py::arg("path"), py::arg("classifier_id"), py::arg("k") = kDefaultPermutations, py::arg("seed") = 0);

    m.def(
        "run",
        [](const std::vector<std::string>& paths, const std::string& out, std::size_t k, std::uint64_t seed,
           std::size_t jobs) {
            std::vector<Dataset> datasets;
            for (const auto& p : paths) datasets.push_back(load(p));
            RunOptions opt;
            opt.permutations = k;
            opt.seed = seed;
            opt.jobs = jobs;
            CampaignResult result;
            {
                py::gil_scoped_release release;
                result = run_experiments(datasets, as_grid(default_grid()), opt);
            }
            append_rows(out, result.table.rows());
            return to_python(to_json(result.report));
        },
        py::arg("paths"), py::arg("out"), py::arg("k") = kDefaultPermutations, py::arg("seed") = 0,
        py::arg("jobs") = 1, "Runs the default grid on every dataset and appends the rows to `out`.");

    m.def(
        "recommend",
        [](const std::string& table_path, const py::dict& features, const std::string& strategy,
           std::size_t neighbors, std::size_t top_per_neighbor) {
            RecommendOptions opt;
            opt.neighbors = neighbors;
            opt.top_per_neighbor = top_per_neighbor;
            const auto rec =
                recommend(load_table(table_path), features_from(features), strategy_from_string(strategy), opt);
            std::vector<std::pair<std::string, double>> ranked;
            for (const auto& r : rec.ranked) ranked.emplace_back(r.classifier_id, r.score);
            return ranked;
        },
        py::arg("table"), py::arg("features"), py::arg("strategy") = "pvalue", py::arg("neighbors") = 5,
        py::arg("top_per_neighbor") = 2);

    m.def(
        "evaluate",
        [](const std::string& table_path, const std::string& strategy) {
            return to_python(to_json(leave_one_dataset_out(load_table(table_path), strategy_from_string(strategy))));
        },
        py::arg("table"), py::arg("strategy") = "pvalue");

    m.def(
        "agreement", [](const std::string& table_path) { return to_python(to_json(agreement_matrix(load_table(table_path)))); },
        py::arg("table"));

    m.def("cdf_auc", [](const std::vector<double>& nranks) { return cdf_auc(nranks); }, py::arg("nranks"));

    m.def(
        "generate_corpus",
        [](const std::string& out_dir, std::uint64_t seed) { return write_corpus(out_dir, generate_corpus(seed)); },
        py::arg("out_dir"), py::arg("seed") = 0);
}
