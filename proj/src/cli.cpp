#include "ctximp/cli.hpp"

#include <algorithm>
#include <array>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <utility>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ctximp/dataset.hpp"
#include "ctximp/errors.hpp"
#include "ctximp/forest.hpp"
#include "ctximp/importance.hpp"
#include "ctximp/impurity.hpp"
#include "ctximp/oracle.hpp"
#include "ctximp/pairwise.hpp"
#include "ctximp/permtest.hpp"

namespace ctximp::cli {

std::string_view version() { return "0.1.0"; }

namespace {

namespace fs = std::filesystem;

struct Config {
  std::string input;
  std::string generator;
  std::string dist_path;
  std::string target;
  std::string context;
  bool numeric_target = false;
  std::size_t trees = 1000;
  std::size_t permutations = 1000;
  std::size_t perm_trees = 100;
  std::uint64_t seed = 0;
  std::string impurity;
  double epsilon = 1e-3;
  std::string out;
  std::string format = "tsv";
  unsigned jobs = 1;
  bool baselines = false;
  bool check_definitions = false;
  bool reuse_forest = false;
  std::size_t q_bins = 5;
  double level = 0.05;
  std::string method = "contextual";
};

/// Files to write once every result is computed, so a failing run leaves
/// nothing behind.
using Outputs = std::vector<std::pair<fs::path, std::string>>;

// Flags that do not change results are left out of the echoed metadata, so
// outputs compare equal across worker counts and destinations.
std::string echo_flags(const std::vector<std::string>& args) {
  std::string flags;
  for (std::size_t i = 1; i < args.size(); ++i) {
    const auto& arg = args[i];
    if (arg == "--jobs" || arg == "-j" || arg == "--out" || arg == "-o") {
      ++i;
      continue;
    }
    if (arg.starts_with("--jobs=") || arg.starts_with("--out=")) continue;
    if (!flags.empty()) flags += ' ';
    flags += arg;
  }
  return flags;
}

double parse_real(const std::string& text, const std::string& column, std::size_t row) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(value)) {
    throw DataError(fmt::format("column '{}' row {}: '{}' is not a number", column, row + 1, text));
  }
  return value;
}

Column as_numeric(const Column& column) {
  std::vector<double> values(column.size());
  for (std::size_t row = 0; row < column.size(); ++row) {
    values[row] = parse_real(column.labels[column.codes[row]], column.name, row);
  }
  return make_numeric(column.name, std::move(values));
}

Dataset load_dataset(const Config& cfg) {
  if (cfg.input.empty() == cfg.generator.empty()) throw ConfigError("give exactly one of --input or --generate");
  if (!cfg.generator.empty()) {
    Dataset ds = generate(cfg.generator);
    if (cfg.target.empty() && cfg.context.empty()) return ds;
    const std::string target = cfg.target.empty() ? ds.target_column().name : cfg.target;
    std::optional<std::string_view> context;
    if (!cfg.context.empty()) context = cfg.context;
    return Dataset(ds.table(), target, context);
  }
  if (cfg.target.empty()) throw ConfigError("--target is required with --input");
  Table table = read_table(cfg.input, {});
  if (cfg.numeric_target) {
    std::vector<Column> columns = table.columns();
    auto& target = columns.at(table.index_of(cfg.target));
    target = as_numeric(target);
    table = Table(std::move(columns));
  }
  std::optional<std::string_view> context;
  if (!cfg.context.empty()) context = cfg.context;
  return Dataset(std::move(table), cfg.target, context);
}

ImpurityKind impurity_for(const Config& cfg, const Dataset& dataset) {
  const ImpurityKind kind = cfg.impurity.empty() ? default_impurity(dataset) : parse_impurity(cfg.impurity);
  check_impurity(dataset, kind);
  return kind;
}

std::string render(const ImportanceReport& report, const OutputMetadata& meta, const std::string& format) {
  return format == "text" ? format_report_text(report, meta) : format_report_tsv(report, meta);
}

/// Forest, scores and optional per-context baselines shared by the
/// importance and permtest commands.
struct ForestRun {
  Dataset dataset;
  Forest forest;
  ImportanceReport report;
};

ForestRun grow_and_score(const Config& cfg) {
  ForestRun run;
  run.dataset = load_dataset(cfg);
  const auto kind = impurity_for(cfg, run.dataset);
  const RngSpec rng{cfg.seed};
  run.forest = build_forest(run.dataset, run.dataset.input_columns(), cfg.trees, rng, kind, cfg.jobs);
  run.report = make_report(run.forest, run.dataset, forest_scores(run.forest, run.dataset, cfg.jobs));
  if (cfg.baselines && run.dataset.context()) {
    for (std::uint32_t c = 0; c < run.dataset.context_arity(); ++c) {
      if (run.dataset.rows_in_context(c).empty()) continue;
      const Scores base = per_context_baseline(run.dataset, c, cfg.trees, rng.derive("baseline", c), kind, cfg.jobs);
      for (std::size_t v = 0; v < base.size(); ++v) run.report.variables[v].contexts[c].baseline = base[v];
    }
  }
  return run;
}

Outputs single_output(const Config& cfg, std::string text) {
  return Outputs{{fs::path(cfg.out), std::move(text)}};
}

Outputs cmd_importance(const Config& cfg, const OutputMetadata& meta) {
  ForestRun run = grow_and_score(cfg);
  characterize(run.report, cfg.epsilon);
  return single_output(cfg, render(run.report, meta, cfg.format));
}

Outputs cmd_permtest(const Config& cfg, const OutputMetadata& meta, bool epsilon_given) {
  ForestRun run = grow_and_score(cfg);
  if (!run.dataset.context()) throw ConfigError("permtest needs a context column");
  PermutationOptions options;
  options.n_permutations = cfg.permutations;
  options.n_trees = cfg.trees;
  options.null_trees = cfg.perm_trees;
  options.mode = cfg.reuse_forest ? NullMode::reuse_structure : NullMode::rebuild;
  options.keep_null_scores = true;
  options.jobs = cfg.jobs;
  const auto result = permutation_pvalues(run.dataset, run.forest, options, RngSpec{cfg.seed});
  attach_pvalues(run.report, result);
  run.report.n_permutations = cfg.permutations;
  run.report.significance_level = cfg.level;
  const double epsilon = epsilon_given ? cfg.epsilon : std::max(1e-9, null_abs_quantile(result, 0.95));
  characterize(run.report, epsilon);
  return single_output(cfg, render(run.report, meta, cfg.format));
}

Outputs cmd_generate(const Config& cfg) {
  if (cfg.generator.empty()) throw ConfigError("--generate is required");
  return single_output(cfg, to_csv(generate(cfg.generator).table()));
}

// ---------------------------------------------------------------------------
// oracle

struct OracleRow {
  std::string name;
  double imp = 0.0;
  bool relevant = false;
  std::vector<oracle::ContextualScores> contexts;
  std::vector<oracle::ExactLabel> exact;
  double global_context = 0.0;
  std::vector<bool> conditions;
};

constexpr std::array<oracle::Condition, 5> kConditions = {
    oracle::Condition::definition, oracle::Condition::pairwise, oracle::Condition::marginal_b,
    oracle::Condition::averaged_context, oracle::Condition::averaged_both};

std::string condition_name(oracle::Condition condition) {
  return condition == oracle::Condition::definition ? "def1" : fmt::format("cond{}", static_cast<int>(condition));
}

Outputs cmd_oracle(const Config& cfg, const OutputMetadata& meta, bool epsilon_given) {
  oracle::JointDistribution dist;
  std::vector<std::string> context_labels;
  if (!cfg.dist_path.empty()) {
    if (!cfg.input.empty() || !cfg.generator.empty()) {
      throw ConfigError("--dist cannot be combined with --input or --generate");
    }
    dist = oracle::read_distribution(cfg.dist_path);
    if (dist.has_context()) {
      for (std::uint32_t c = 0; c < dist.arity(dist.context()); ++c) context_labels.push_back(std::to_string(c));
    }
  } else {
    const Dataset dataset = load_dataset(cfg);
    dist = oracle::from_dataset(dataset);
    if (dataset.context()) context_labels = dataset.context_column().labels;
  }
  if (cfg.check_definitions && !dist.has_context()) throw ConfigError("--check-definitions needs a context");

  const bool has_context = dist.has_context();
  const std::size_t n_c = context_labels.size();
  std::vector<OracleRow> rows;
  for (std::size_t m = 0; m < dist.n_inputs(); ++m) {
    OracleRow row;
    row.name = dist.names()[m];
    row.imp = oracle::asymptotic_mdi(dist, m);
    row.relevant = oracle::is_relevant(dist, m);
    for (std::uint32_t c = 0; c < n_c; ++c) {
      row.contexts.push_back(oracle::asymptotic_contextual(dist, m, c));
      row.exact.push_back(oracle::characterize_exact(dist, m, c));
    }
    if (n_c > 0) row.global_context = row.contexts.front().global_context;
    if (cfg.check_definitions) {
      for (const auto condition : kConditions) row.conditions.push_back(oracle::is_context_dependent(dist, m, condition));
    }
    rows.push_back(std::move(row));
  }

  // Reuse the estimator labelling rules on the exact scores.
  ImportanceReport report;
  for (const auto& row : rows) {
    VariableReport var;
    var.name = row.name;
    var.imp = row.imp;
    var.global_context = row.global_context;
    for (const auto& scores : row.contexts) {
      ContextCell cell;
      cell.abs = scores.abs;
      cell.signed_score = scores.signed_score;
      cell.baseline = scores.baseline;
      var.contexts.push_back(cell);
    }
    report.variables.push_back(std::move(var));
  }
  if (has_context) report.context_name = dist.names()[dist.context()];
  report.context_labels = context_labels;
  characterize(report, epsilon_given ? cfg.epsilon : 1e-9);

  std::string header = fmt::format("# ctximp {}\n# command: {}\n", meta.version, meta.command);
  if (!meta.flags.empty()) header += fmt::format("# flags: {}\n", meta.flags);
  header += fmt::format("# target: {}\n", dist.names()[dist.target()]);
  header += fmt::format("# context: {}\n", has_context ? dist.names()[dist.context()] : "-");
  header += "# scores: asymptotic\n";
  header += fmt::format("# epsilon: {:.6g}\n", report.epsilon);
  header += fmt::format("# mutual_information: {}\n", format_score(oracle::joint_mutual_information(dist)));
  if (has_context) {
    const auto theorems = oracle::verify_theorems(dist);
    const auto verdict = [&](std::string_view name, const oracle::TheoremCheck& check) {
      header += fmt::format("# {}: {}\n", name, check.passed ? "pass" : "fail");
      for (const auto& witness : check.witnesses) header += fmt::format("#   witness: {}\n", witness);
    };
    header += fmt::format("# context_relevant: {}\n", oracle::context_is_relevant(dist));
    verdict("theorem_irrelevant_context", theorems.irrelevant_context);
    verdict("theorem_zero_abs", theorems.zero_abs);
    verdict("theorem_sign_characterizes", theorems.sign_characterizes);
  }

  std::string body;
  if (cfg.format == "text") {
    for (std::size_t v = 0; v < rows.size(); ++v) {
      const auto& row = rows[v];
      body += fmt::format("\nvariable: {}\n  imp: {}\n  relevant: {}\n", row.name, format_score(row.imp), row.relevant);
      for (std::size_t c = 0; c < n_c; ++c) {
        const auto& s = row.contexts[c];
        const auto& label = context_labels[c];
        body += fmt::format("  baseline[{}]: {}\n", label, format_score(s.baseline));
        body += fmt::format("  abs[{}]: {}\n", label, format_score(s.abs));
        body += fmt::format("  signed[{}]: {}\n", label, format_score(s.signed_score));
        body += fmt::format("  difference[{}]: {}\n", label, format_score(s.difference));
        body += fmt::format("  exact[{}]: {}\n", label, oracle::to_string(row.exact[c]));
        body += fmt::format("  label[{}]: {}\n", label, to_string(report.variables[v].contexts[c].label));
      }
      if (has_context) body += fmt::format("  imp_Xc: {}\n", format_score(row.global_context));
      for (std::size_t k = 0; k < row.conditions.size(); ++k) {
        body += fmt::format("  {}: {}\n", condition_name(kConditions[k]), row.conditions[k]);
      }
    }
  } else {
    body = "variable\timp";
    for (const auto& label : context_labels) {
      body += fmt::format("\tbaseline[{0}]\tabs[{0}]\tsigned[{0}]\tdifference[{0}]", label);
    }
    if (has_context) body += "\timp_Xc";
    body += "\trelevant";
    for (const auto& label : context_labels) body += fmt::format("\texact[{}]", label);
    for (const auto& label : context_labels) body += fmt::format("\tlabel[{}]", label);
    for (const auto& label : context_labels) body += fmt::format("\trank[{}]", label);
    if (cfg.check_definitions) {
      for (const auto condition : kConditions) body += '\t' + condition_name(condition);
    }
    body += '\n';
    for (std::size_t v = 0; v < rows.size(); ++v) {
      const auto& row = rows[v];
      const auto& var = report.variables[v];
      body += row.name + '\t' + format_score(row.imp);
      for (const auto& s : row.contexts) {
        body += fmt::format("\t{}\t{}\t{}\t{}", format_score(s.baseline), format_score(s.abs),
                            format_score(s.signed_score), format_score(s.difference));
      }
      if (has_context) body += '\t' + format_score(row.global_context);
      body += row.relevant ? "\ttrue" : "\tfalse";
      for (const auto label : row.exact) body += fmt::format("\t{}", oracle::to_string(label));
      for (const auto& cell : var.contexts) body += fmt::format("\t{}", to_string(cell.label));
      for (const auto& cell : var.contexts) body += cell.rank ? fmt::format("\t{}", *cell.rank) : "\t-";
      for (const bool flag : row.conditions) body += flag ? "\ttrue" : "\tfalse";
      body += '\n';
    }
  }
  return single_output(cfg, header + body);
}

// ---------------------------------------------------------------------------
// pairwise

Outputs cmd_pairwise(const Config& cfg, const OutputMetadata& meta) {
  if (cfg.input.empty()) throw ConfigError("--input is required for pairwise");
  if (cfg.context.empty()) throw ConfigError("--context is required for pairwise");
  if (cfg.out.empty()) throw ConfigError("--out (a directory) is required for pairwise");
  const Table raw = read_table(cfg.input, {});
  const std::size_t context = raw.index_of(cfg.context);
  std::vector<Column> columns;
  for (std::size_t i = 0; i < raw.n_columns(); ++i) {
    columns.push_back(i == context ? raw.column(i) : as_numeric(raw.column(i)));
  }
  const Table table(std::move(columns));

  PairwiseOptions options;
  options.n_trees = cfg.trees;
  options.n_permutations = cfg.permutations;
  options.null_trees = cfg.perm_trees;
  options.q_bins = cfg.q_bins;
  options.level = cfg.level;
  options.mode = cfg.reuse_forest ? NullMode::reuse_structure : NullMode::rebuild;
  options.jobs = cfg.jobs;
  const RngSpec rng{cfg.seed};
  const auto matrices = cfg.method == "baseline" ? baseline_pairwise(table, context, options, rng)
                                                 : pairwise_analysis(table, context, options, rng);

  const fs::path root(cfg.out);
  Outputs outputs;
  std::string summary = fmt::format("# ctximp {}\n# command: {}\n", meta.version, meta.command);
  if (!meta.flags.empty()) summary += fmt::format("# flags: {}\n", meta.flags);
  summary += fmt::format("# seed: {}\n# method: {}\n# q_bins: {}\n# level: {}\n", cfg.seed, cfg.method, cfg.q_bins,
                         cfg.level);
  summary += "context\tdirectory\tsignificant_cells\n";
  for (const auto& matrix : matrices) {
    const std::string dir = "context_" + matrix.context_label;
    const fs::path base = root / dir;
    outputs.emplace_back(base / "matrix_absscore.tsv", format_matrix(matrix, MatrixField::abs));
    outputs.emplace_back(base / "matrix_signed.tsv", format_matrix(matrix, MatrixField::signed_score));
    outputs.emplace_back(base / "matrix_pvalue.tsv", format_matrix(matrix, MatrixField::p_value));
    outputs.emplace_back(base / "matrix_significant.tsv", format_matrix(matrix, MatrixField::significant));
    outputs.emplace_back(base / "cells.tsv", format_cells_long(matrix));
    summary += fmt::format("{}\t{}\t{}\n", matrix.context_label, dir, matrix.significant_count());
  }
  outputs.emplace_back(root / "summary.tsv", std::move(summary));
  return outputs;
}

void write_outputs(const Outputs& outputs, std::ostream& out) {
  for (const auto& [path, text] : outputs) {
    if (path.empty()) {
      out << text;
      continue;
    }
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw ConfigError(fmt::format("cannot write '{}'", path.string()));
    file << text;
    if (!file) throw ConfigError(fmt::format("failed writing '{}'", path.string()));
  }
}

void add_source(CLI::App* sub, Config& cfg) {
  sub->add_option("--input,-i", cfg.input, "CSV file with a header row");
  sub->add_option("--generate,-g", cfg.generator, "built-in dataset: example1, problem1 or problem2");
  sub->add_option("--target,-t", cfg.target, "target column (default Y for built-in datasets)");
  sub->add_option("--context,-c", cfg.context, "context column (default X_c for built-in datasets)");
  sub->add_flag("--numeric-target", cfg.numeric_target, "parse the target column as real numbers");
}

void add_forest(CLI::App* sub, Config& cfg) {
  sub->add_option("--trees,-n", cfg.trees, "number of totally randomized trees")->check(CLI::PositiveNumber);
  sub->add_option("--seed,-s", cfg.seed, "random seed");
  sub->add_option("--impurity", cfg.impurity, "entropy or variance (default follows the target kind)")
      ->check(CLI::IsMember({"entropy", "variance"}));
  sub->add_option("--jobs,-j", cfg.jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
}

void add_permutations(CLI::App* sub, Config& cfg) {
  sub->add_option("--permutations,-P", cfg.permutations, "context permutations")->check(CLI::PositiveNumber);
  sub->add_option("--perm-trees", cfg.perm_trees, "trees per permutation forest")->check(CLI::PositiveNumber);
  sub->add_flag("--reuse-forest", cfg.reuse_forest, "rescore the observed forest instead of regrowing per permutation");
  sub->add_option("--level", cfg.level, "significance level")->check(CLI::Range(0.0, 1.0));
}

CLI::Option* add_epsilon(CLI::App* sub, Config& cfg, const std::string& help) {
  return sub->add_option("--epsilon,-e", cfg.epsilon, help)->check(CLI::NonNegativeNumber);
}

void add_output(CLI::App* sub, Config& cfg) {
  sub->add_option("--out,-o", cfg.out, "output file (default standard output)");
  sub->add_option("--format,-f", cfg.format, "tsv or text")->check(CLI::IsMember({"tsv", "text"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config cfg;
  CLI::App app{"Context-dependent variable importances from totally randomized trees", "ctximp"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);

  auto* importance = app.add_subcommand("importance", "forest importances with contextual scores and labels");
  add_source(importance, cfg);
  add_forest(importance, cfg);
  add_output(importance, cfg);
  auto* importance_eps = add_epsilon(importance, cfg, "characterization tolerance");
  importance->add_flag("--baselines", cfg.baselines, "also grow one forest per context value");

  auto* permtest = app.add_subcommand("permtest", "importance report with context-permutation p-values");
  add_source(permtest, cfg);
  add_forest(permtest, cfg);
  add_permutations(permtest, cfg);
  add_output(permtest, cfg);
  auto* permtest_eps =
      add_epsilon(permtest, cfg, "characterization tolerance (default: 95% quantile of the null abs scores)");
  permtest->add_flag("--baselines", cfg.baselines, "also grow one forest per context value");

  auto* oracle_cmd = app.add_subcommand("oracle", "exact asymptotic scores and definition checks");
  add_source(oracle_cmd, cfg);
  oracle_cmd->add_option("--dist", cfg.dist_path, "probability table file instead of a dataset");
  oracle_cmd->add_flag("--check-definitions", cfg.check_definitions, "evaluate every context-dependence condition");
  add_output(oracle_cmd, cfg);
  auto* oracle_eps = add_epsilon(oracle_cmd, cfg, "characterization tolerance (default 1e-9)");

  auto* generate_cmd = app.add_subcommand("generate", "write a built-in dataset as CSV");
  generate_cmd->add_option("name,--generate,-g", cfg.generator, "example1, problem1 or problem2")->required();
  generate_cmd->add_option("--out,-o", cfg.out, "output file (default standard output)");

  auto* pairwise = app.add_subcommand("pairwise", "every column in turn as the target; interaction matrices");
  pairwise->add_option("--input,-i", cfg.input, "CSV with numeric columns and a categorical context")->required();
  pairwise->add_option("--context,-c", cfg.context, "context column")->required();
  pairwise->add_option("--out,-o", cfg.out, "output directory")->required();
  pairwise->add_option("--trees,-n", cfg.trees, "trees per target forest")->check(CLI::PositiveNumber);
  pairwise->add_option("--seed,-s", cfg.seed, "random seed");
  pairwise->add_option("--jobs,-j", cfg.jobs, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  pairwise->add_option("--q-bins", cfg.q_bins, "quantile bins for numeric inputs")->check(CLI::Range(2, 1000));
  pairwise->add_option("--method", cfg.method, "contextual or baseline")
      ->check(CLI::IsMember({"contextual", "baseline"}));
  add_permutations(pairwise, cfg);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    if (cfg.level <= 0.0 || cfg.level >= 1.0) throw ConfigError("--level must be strictly between 0 and 1");
    const auto* sub = app.get_subcommands().front();
    const OutputMetadata meta{std::string(version()), sub->get_name(), echo_flags(args)};
    Outputs outputs;
    if (sub == importance) {
      outputs = cmd_importance(cfg, meta);
    } else if (sub == permtest) {
      outputs = cmd_permtest(cfg, meta, permtest_eps->count() > 0);
    } else if (sub == oracle_cmd) {
      outputs = cmd_oracle(cfg, meta, oracle_eps->count() > 0);
    } else if (sub == generate_cmd) {
      outputs = cmd_generate(cfg);
    } else {
      outputs = cmd_pairwise(cfg, meta);
    }
    (void)importance_eps;
    write_outputs(outputs, out);
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const GuardError& e) {
    err << "guard exceeded: " << e.what() << '\n';
    return kExitGuard;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace ctximp::cli
