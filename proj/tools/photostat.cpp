#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "photostat/cli/commands.hpp"
#include "photostat/cli/experiment.hpp"
#include "photostat/cli/result_table.hpp"
#include "photostat/error.hpp"

namespace pc = photostat::cli;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool json = false;
  unsigned threads = 0;

  std::optional<std::string> task;
  std::optional<std::string> state;
  std::optional<double> mean;
  std::optional<std::string> detector;
  std::optional<double> efficiency;
  std::optional<std::uint64_t> runs;
  std::optional<int> bins;
  std::vector<double> range;
  std::optional<double> vacuum_variance;
  std::optional<int> nu_max;
  std::optional<int> cutoff;
  std::optional<std::uint64_t> trials;
  std::optional<double> tail_tolerance;
  std::vector<double> sweep;

  std::string histogram_path;
  std::string replay_path;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config,-c", o.config_path, "Experiment config (JSON, or a result CSV to reuse its config)");
  sub->add_option("--seed", o.seed, "Master seed");
  sub->add_option("--out,-o", o.out, "Write the result here instead of stdout");
  sub->add_flag("--json", o.json, "Emit JSON instead of CSV");
  sub->add_option("--threads", o.threads, "Worker threads (0 = all cores); never changes results");
}

void add_experiment(CLI::App* sub, Overrides& o) {
  sub->add_option("--state", o.state, "coherent | thermal | squeezed_vacuum");
  sub->add_option("--mean", o.mean, "Mean photon number of the state");
  sub->add_option("--detector", o.detector, "photon_counting | random_phase_homodyne");
  sub->add_option("--efficiency,--eta", o.efficiency, "Detection efficiency");
  sub->add_option("--runs,-N", o.runs, "Runs (counting) or events (homodyne) per experiment");
  sub->add_option("--bins", o.bins, "Homodyne bin count");
  sub->add_option("--range", o.range, "Homodyne range: LO HI")->expected(2);
  sub->add_option("--vacuum-variance", o.vacuum_variance, "Vacuum variance of the recorded quadrature");
  sub->add_option("--nu-max", o.nu_max, "Highest photon number nu");
  sub->add_option("--cutoff,-K", o.cutoff, "Parity cut-off K");
  sub->add_option("--trials", o.trials, "Independent simulated experiments");
  sub->add_option("--tail-tolerance", o.tail_tolerance, "Photon-number truncation tolerance");
}

void apply_overrides(pc::Json& doc, const Overrides& o) {
  if (!doc.contains("schema_version")) doc["schema_version"] = pc::kSchemaVersion;
  if (o.task) doc["task"] = *o.task;
  if (o.state) doc["state"]["kind"] = *o.state;
  if (o.mean) doc["state"]["mean_photon_number"] = *o.mean;
  if (o.detector) {
    if (doc.contains("detector") && doc["detector"].value("kind", "") != *o.detector) doc.erase("detector");
    doc["detector"]["kind"] = *o.detector;
  }
  if (o.efficiency) doc["detector"]["efficiency"] = *o.efficiency;
  if (o.bins) doc["detector"]["bins"] = *o.bins;
  if (!o.range.empty()) doc["detector"]["range"] = o.range;
  if (o.vacuum_variance) doc["detector"]["vacuum_variance"] = *o.vacuum_variance;
  if (o.runs) doc["n_runs"] = *o.runs;
  if (o.nu_max) doc["nu_max"] = *o.nu_max;
  if (o.cutoff) doc["parity_cutoff"] = *o.cutoff;
  if (o.trials) doc["n_trials"] = *o.trials;
  if (o.tail_tolerance) doc["tail_tolerance"] = *o.tail_tolerance;
  if (!o.sweep.empty()) doc["sweep"] = o.sweep;
  if (o.seed) doc["seed"] = *o.seed;
}

pc::ExperimentConfig resolve(const Overrides& o, pc::Task implied) {
  pc::Json doc = pc::Json::object();
  std::string text;
  std::string source = "command line";
  if (!o.config_path.empty()) {
    text = pc::read_file(o.config_path);
    source = o.config_path;
    if (!text.empty() && text[0] == '#') {
      doc = pc::read_metadata(o.config_path).value("config", pc::Json::object());
      text.clear();
    } else {
      try {
        doc = pc::Json::parse(text);
      } catch (const pc::Json::parse_error&) {
        return pc::parse_config(text, implied, source);  // reports the parse error with its line
      }
    }
  }
  apply_overrides(doc, o);
  return pc::config_from_json(doc, implied, text, source);
}

void emit(const pc::ResultTable& table, const Overrides& o) {
  const std::string body = o.json ? table.to_json() : table.to_csv();
  if (o.out.empty()) {
    std::cout << body;
    return;
  }
  std::ofstream out(o.out, std::ios::binary);
  if (!out) throw photostat::InvalidArgument("cannot write '" + o.out + "'");
  out << body;
}

photostat::Histogram load_histogram(const std::string& path) {
  const std::string text = pc::read_file(path);
  if (!text.empty() && text[0] == '#') return pc::histogram_from_table(pc::parse_csv_table(text));
  pc::Json doc;
  try {
    doc = pc::Json::parse(text);
  } catch (const pc::Json::parse_error& e) {
    throw photostat::InvalidArgument(path + ": not a simulate result: " + e.what());
  }
  pc::ResultTable t;
  t.metadata = doc.value("metadata", pc::Json::object());
  std::vector<pc::Cell> counts;
  for (const auto& v : doc.at("columns").at("count")) counts.emplace_back(v.get<std::int64_t>());
  t.add_column("count", std::move(counts));
  return pc::histogram_from_table(t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photostat: statistical errors of linear estimators in photon statistics"};
  app.require_subcommand(1);
  Overrides o;

  auto* reconstruct = app.add_subcommand("reconstruct", "Photon-number distribution with error bars");
  auto* correlations = app.add_subcommand("correlations", "Correlation of neighbouring rho_nu estimates");
  auto* parity = app.add_subcommand("parity-scan", "Parity against mean photon number or cut-off K");
  auto* pattern = app.add_subcommand("pattern-table", "Export pattern functions on the bin grid");
  auto* simulate = app.add_subcommand("simulate", "Draw one histogram");
  auto* estimate = app.add_subcommand("estimate", "Apply the estimators to a recorded histogram");
  auto* replay = app.add_subcommand("replay", "Recompute a result from its metadata block");

  for (auto* sub : {reconstruct, correlations, parity, pattern, simulate, estimate}) {
    add_common(sub, o);
    add_experiment(sub, o);
  }
  parity->add_option("--task", o.task, "parity_vs_mean_photon (default) | truncated_parity_vs_k");
  parity->add_option("--sweep", o.sweep, "Mean photon numbers or cut-offs K to scan");
  estimate->add_option("--histogram", o.histogram_path, "Result of 'simulate' (CSV or JSON)")->required();
  replay->add_option("result", o.replay_path, "CSV or JSON result file")->required();
  replay->add_option("--out,-o", o.out, "Write the result here instead of stdout");
  replay->add_flag("--json", o.json, "Emit JSON instead of CSV");
  replay->add_option("--threads", o.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    pc::RunOptions run;
    run.threads = o.threads;
    if (replay->parsed()) {
      emit(pc::replay(pc::read_metadata(o.replay_path), run), o);
      return 0;
    }
    if (estimate->parsed()) {
      const auto histogram = load_histogram(o.histogram_path);
      pc::ExperimentConfig config;
      if (o.config_path.empty()) {
        // Reuse the simulation's own description of the experiment.
        auto doc = pc::read_metadata(o.histogram_path).value("config", pc::Json::object());
        doc.erase("task");
        doc.erase("sweep");
        apply_overrides(doc, o);
        config = pc::config_from_json(doc, pc::Task::Estimate, {}, o.histogram_path);
      } else {
        config = resolve(o, pc::Task::Estimate);
      }
      emit(pc::cmd_estimate(config, histogram, run), o);
      return 0;
    }
    pc::Task task = pc::Task::ReconstructPhotonDist;
    if (correlations->parsed()) task = pc::Task::Correlations;
    if (parity->parsed()) task = pc::Task::ParityVsMeanPhoton;
    if (pattern->parsed()) task = pc::Task::PatternTableExport;
    if (simulate->parsed()) task = pc::Task::Simulate;
    if (o.task && parity->parsed()) {
      const auto named = pc::parse_task(*o.task);
      if (!named) throw pc::ConfigError("--task: unknown task '" + *o.task + "'");
    }
    emit(pc::run_task(resolve(o, task), run), o);
    return 0;
  } catch (const photostat::NumericalError& e) {
    std::cerr << "photostat: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const photostat::InvalidArgument& e) {
    std::cerr << "photostat: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "photostat: internal error: " << e.what() << '\n';
    return 1;
  }
}
