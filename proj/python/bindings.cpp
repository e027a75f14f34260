#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "ctximp/cli.hpp"
#include "ctximp/dataset.hpp"
#include "ctximp/errors.hpp"
#include "ctximp/forest.hpp"
#include "ctximp/importance.hpp"
#include "ctximp/oracle.hpp"
#include "ctximp/pairwise.hpp"
#include "ctximp/permtest.hpp"

namespace py = pybind11;
using namespace ctximp;

namespace {

ImpurityKind impurity_from(const Dataset& ds, const std::optional<std::string>& name) {
  if (!name) return default_impurity(ds);
  if (*name == "entropy") return ImpurityKind::entropy;
  if (*name == "variance") return ImpurityKind::variance;
  throw ConfigError("impurity must be 'entropy' or 'variance'");
}

py::dict scores_dict(const ForestScores& s) {
  py::dict d;
  d["imp"] = s.imp;
  d["abs"] = s.abs;
  d["signed"] = s.signed_scores;
  d["imp_context"] = s.global_context;
  return d;
}

}  // namespace

PYBIND11_MODULE(_ctximp, m) {
  m.doc() = "Contextual variable importances from totally randomized trees";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<GuardError>(m, "GuardError", PyExc_RuntimeError);

  py::class_<Table>(m, "Table")
      .def_property_readonly("n_rows", &Table::n_rows)
      .def_property_readonly("n_columns", &Table::n_columns)
      .def_property_readonly("names", [](const Table& t) {
        std::vector<std::string> names;
        for (const auto& c : t.columns()) names.push_back(c.name);
        return names;
      })
      .def("to_csv", [](const Table& t) { return to_csv(t); });

  py::class_<Dataset>(m, "Dataset")
      .def(py::init([](const Table& t, const std::string& target, std::optional<std::string> context) {
             return context ? Dataset(t, target, std::string_view(*context)) : Dataset(t, target, std::nullopt);
           }),
           py::arg("table"), py::arg("target"), py::arg("context") = std::nullopt)
      .def_property_readonly("table", &Dataset::table)
      .def_property_readonly("n_samples", &Dataset::n_samples)
      .def_property_readonly("target", &Dataset::target)
      .def_property_readonly("context", &Dataset::context)
      .def_property_readonly("input_columns", &Dataset::input_columns)
      .def("to_csv", [](const Dataset& d) { return to_csv(d.table()); });

  m.def("generate", [](const std::string& name) { return generate(name); }, py::arg("name"),
        "Benchmark dataset: 'example1', 'problem1' or 'problem2'.");

  m.def(
      "read_table", [](const std::filesystem::path& path) { return read_table(path, {}); }, py::arg("path"),
      "CSV with every column read as categorical.");

  m.def(
      "load_csv",
      [](const std::filesystem::path& path, const std::string& target, std::optional<std::string> context) {
        std::optional<std::string_view> ctx;
        if (context) ctx = *context;
        return load_csv(path, {}, target, ctx);
      },
      py::arg("path"), py::arg("target"), py::arg("context") = std::nullopt);

  m.def(
      "forest_scores",
      [](const Dataset& ds, std::size_t n_trees, std::uint64_t seed, std::optional<std::string> impurity,
         unsigned jobs) {
        const ImpurityKind kind = impurity_from(ds, impurity);
        check_impurity(ds, kind);
        ForestScores s;
        {
          py::gil_scoped_release release;
          const Forest forest = build_forest(ds, ds.input_columns(), n_trees, RngSpec{seed}, kind, jobs);
          s = forest_scores(forest, ds, jobs);
        }
        return scores_dict(s);
      },
      py::arg("dataset"), py::arg("n_trees") = 1000, py::arg("seed") = 0, py::arg("impurity") = std::nullopt,
      py::arg("jobs") = 1, "MDI and contextual scores of a totally randomized forest, in input-column order.");

  m.def(
      "importance_report",
      [](const Dataset& ds, std::size_t n_trees, std::uint64_t seed, double epsilon) {
        const ImpurityKind kind = default_impurity(ds);
        const Forest forest = build_forest(ds, ds.input_columns(), n_trees, RngSpec{seed}, kind);
        auto report = make_report(forest, ds, forest_scores(forest, ds));
        if (report.has_context()) characterize(report, epsilon);
        return format_report_tsv(report, OutputMetadata{std::string(cli::version()), "importance", ""});
      },
      py::arg("dataset"), py::arg("n_trees") = 1000, py::arg("seed") = 0, py::arg("epsilon") = 1e-3,
      "Labelled report as TSV text.");

  m.def(
      "permutation_pvalues",
      [](const Dataset& ds, std::size_t n_trees, std::size_t n_permutations, std::optional<std::size_t> null_trees,
         std::uint64_t seed, unsigned jobs) {
        PermutationOptions o;
        o.n_trees = n_trees;
        o.n_permutations = n_permutations;
        o.null_trees = null_trees;
        o.jobs = jobs;
        const ImpurityKind kind = default_impurity(ds);
        PermutationResult r;
        {
          py::gil_scoped_release release;
          r = permutation_pvalues(ds, ds.input_columns(), o, RngSpec{seed}, kind);
        }
        std::vector<std::vector<double>> p_abs, p_signed;
        for (const auto& var : r.cells) {
          auto& a = p_abs.emplace_back();
          auto& s = p_signed.emplace_back();
          for (const auto& cell : var) {
            a.push_back(cell.p_abs);
            s.push_back(cell.p_signed);
          }
        }
        py::dict d;
        d["p_abs"] = p_abs;
        d["p_signed"] = p_signed;
        d["n_permutations"] = r.n_permutations;
        return d;
      },
      py::arg("dataset"), py::arg("n_trees") = 1000, py::arg("n_permutations") = 1000,
      py::arg("null_trees") = std::nullopt, py::arg("seed") = 0, py::arg("jobs") = 1,
      "Context-permutation p-values indexed [variable][context value].");

  m.def(
      "pairwise",
      [](const Table& t, const std::string& context, std::size_t n_trees, std::size_t n_permutations,
         std::optional<std::size_t> null_trees, std::size_t q_bins, double level, std::uint64_t seed, unsigned jobs) {
        PairwiseOptions o;
        o.n_trees = n_trees;
        o.n_permutations = n_permutations;
        o.null_trees = null_trees;
        o.q_bins = q_bins;
        o.level = level;
        o.jobs = jobs;
        std::vector<InteractionMatrix> ms;
        {
          py::gil_scoped_release release;
          ms = pairwise_analysis(t, t.index_of(context), o, RngSpec{seed});
        }
        py::list out;
        for (const auto& mtx : ms) {
          const std::size_t n = mtx.genes.size();
          std::vector<std::vector<std::optional<double>>> abs(n, std::vector<std::optional<double>>(n));
          auto sgn = abs, pv = abs;
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
              if (const auto& cell = mtx.at(i, j)) {
                abs[i][j] = cell->abs;
                sgn[i][j] = cell->signed_score;
                pv[i][j] = cell->p_value;
              }
            }
          }
          py::dict d;
          d["context"] = mtx.context_label;
          d["genes"] = mtx.genes;
          d["abs"] = abs;
          d["signed"] = sgn;
          d["p_value"] = pv;
          d["significant_count"] = mtx.significant_count();
          out.append(d);
        }
        return out;
      },
      py::arg("table"), py::arg("context"), py::arg("n_trees") = 1000, py::arg("n_permutations") = 1000,
      py::arg("null_trees") = std::nullopt, py::arg("q_bins") = 5, py::arg("level") = 0.05, py::arg("seed") = 0,
      py::arg("jobs") = 1, "Target-by-input contextual matrices, one per context value.");

  // Exact oracle
  py::class_<oracle::JointDistribution>(m, "JointDistribution")
      .def_property_readonly("n_inputs", &oracle::JointDistribution::n_inputs)
      .def_property_readonly("names", &oracle::JointDistribution::names)
      .def_property_readonly("support_size", &oracle::JointDistribution::support_size);

  m.def("distribution_from_dataset", &oracle::from_dataset, py::arg("dataset"));
  m.def("read_distribution", &oracle::read_distribution, py::arg("path"));
  m.def("cond_mi", &oracle::cond_mi, py::arg("dist"), py::arg("m"), py::arg("assignment"),
        py::arg("context_value") = std::nullopt);
  m.def("joint_mutual_information", &oracle::joint_mutual_information, py::arg("dist"));
  m.def("asymptotic_mdi", &oracle::asymptotic_mdi, py::arg("dist"), py::arg("m"));
  m.def(
      "asymptotic_contextual",
      [](const oracle::JointDistribution& dist, std::size_t m, std::uint32_t c) {
        const auto s = oracle::asymptotic_contextual(dist, m, c);
        py::dict d;
        d["abs"] = s.abs;
        d["signed"] = s.signed_score;
        d["baseline"] = s.baseline;
        d["difference"] = s.difference;
        d["imp_context"] = s.global_context;
        return d;
      },
      py::arg("dist"), py::arg("m"), py::arg("context_value"));
  m.def(
      "is_context_dependent",
      [](const oracle::JointDistribution& dist, std::size_t m, int condition) {
        return oracle::is_context_dependent(dist, m, oracle::condition_from_number(condition));
      },
      py::arg("dist"), py::arg("m"), py::arg("condition") = 1);
  m.def(
      "verify_theorems",
      [](const oracle::JointDistribution& dist) {
        const auto r = oracle::verify_theorems(dist);
        py::dict d;
        d["irrelevant_context"] = r.irrelevant_context.passed;
        d["zero_abs"] = r.zero_abs.passed;
        d["sign_characterizes"] = r.sign_characterizes.passed;
        std::vector<std::string> witnesses = r.irrelevant_context.witnesses;
        for (const auto* check : {&r.zero_abs, &r.sign_characterizes}) {
          witnesses.insert(witnesses.end(), check->witnesses.begin(), check->witnesses.end());
        }
        d["witnesses"] = witnesses;
        return d;
      },
      py::arg("dist"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");

  m.attr("__version__") = std::string(cli::version());
}
