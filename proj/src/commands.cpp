#include "photostat/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "photostat/error.hpp"
#include "photostat/estimation.hpp"
#include "photostat/montecarlo.hpp"
#include "photostat/patterns.hpp"

namespace photostat::cli {

namespace {

// Everything derived from (state, detector) that the commands share.
struct Scheme {
  const ExperimentConfig* config = nullptr;
  bool homodyne = false;
  PhotonDistribution photons;
  DistributionSet outcomes;
  std::optional<PatternTable> table;
  std::unique_ptr<HomodyneSampler> sampler;
  int outcome_max = 0;  // highest photocount carried

  KernelSet rho_kernel(int nu) const {
    if (homodyne) return homodyne_rho_kernel(*table, nu);
    return inverse_bernoulli_kernel(nu, config->detector.efficiency, std::max(outcome_max, nu));
  }

  KernelSet parity_kernel(int cutoff) const {
    if (homodyne) return parity_homodyne_kernel(*table, cutoff);
    return parity_counting_kernel(config->detector.efficiency, cutoff);
  }

  MomentReport moments(const KernelSet& k) const {
    return mean_and_variance(k, outcomes, static_cast<long long>(config->n_runs));
  }

  std::vector<TrialEnsemble> trials(const std::vector<KernelSet>& kernels, std::uint64_t seed,
                                    const RunOptions& options) const {
    TrialOptions opt;
    opt.n_runs = config->n_runs;
    opt.n_trials = static_cast<std::size_t>(config->n_trials);
    opt.seed = seed;
    opt.threads = options.threads;
    if (homodyne) return run_event_trials(kernels, *sampler, opt);
    return run_trials(kernels, outcomes, opt);
  }

  Json diagnostics() const {
    Json d;
    d["photon_cutoff"] = photons.cutoff;
    d["photon_tail"] = photons.tail_bound;
    const auto& dist = outcomes.begin()->second;
    d["outcome_leftover"] = dist.leftover;
    if (table) d["orthogonality_error"] = table->orthogonality_error();
    return d;
  }
};

// `table_order` is the highest pattern function needed (homodyne only);
// `min_outcomes` the highest photocount that must be carried (counting only).
Scheme build_scheme(const ExperimentConfig& config, const StateSpec& state, int table_order, int min_outcomes,
                    bool with_sampler) {
  Scheme s;
  s.config = &config;
  s.homodyne = config.detector.kind == DetectorKind::RandomPhaseHomodyne;
  s.photons = photon_distribution(state, config.tail_tolerance);
  if (s.homodyne) {
    const auto density = phase_averaged_density(s.photons);
    s.outcomes = single_setting(homodyne_bin_distribution(density, config.detector));
    s.table.emplace(config.detector, table_order);
    if (with_sampler) s.sampler = std::make_unique<HomodyneSampler>(density, config.detector);
  } else {
    s.outcome_max = std::max(s.photons.cutoff, min_outcomes);
    s.outcomes = single_setting(bernoulli_transform(s.photons, config.detector.efficiency, s.outcome_max));
  }
  return s;
}

const StateSpec& require_state(const ExperimentConfig& config) {
  if (!config.state) throw ConfigError("config: /state: required for task " + std::string(to_string(config.task)));
  return *config.state;
}

Json base_metadata(const ExperimentConfig& config) {
  Json m;
  m["artifact"] = "photostat";
  m["version"] = kArtifactVersion;
  m["command"] = std::string(to_string(config.task));
  m["config"] = config.to_json();
  return m;
}

std::vector<std::string> collect_warnings(const std::vector<KernelSet>& kernels) {
  std::vector<std::string> out;
  for (const auto& k : kernels) {
    for (const auto& w : k.warnings) {
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
  }
  return out;
}

// mc_estimate is the first trial; the ensemble columns appear for n_trials >= 2.
void add_monte_carlo_columns(ResultTable& t, const std::vector<TrialEnsemble>& ensembles, std::uint64_t n_trials) {
  std::vector<Cell> first, mean, sd;
  for (const auto& e : ensembles) {
    first.emplace_back(e.estimates.front());
    mean.emplace_back(e.mean());
    sd.emplace_back(std::sqrt(e.variance()));
  }
  t.add_column("mc_estimate", std::move(first));
  if (n_trials >= 2) {
    t.add_column("mc_mean", std::move(mean));
    t.add_column("mc_std_dev", std::move(sd));
  }
}

Cell optional_cell(const std::optional<double>& v) {
  if (v) return *v;
  return kUndefined;
}

int default_parity_cutoff(const ExperimentConfig& config, const Scheme& s) {
  if (config.parity_cutoff) return *config.parity_cutoff;
  return s.homodyne ? config.nu_max : s.photons.cutoff;
}

struct LimitParity {
  std::optional<double> mean;
  std::optional<double> variance;
};

// K -> infinity moments of the photocount parity estimator; empty = diverged.
LimitParity counting_parity_limit(const StateSpec& state, double eta, std::uint64_t n_runs) {
  const auto runs = static_cast<long long>(n_runs);
  LimitParity out;
  switch (state.kind) {
    case StateKind::Coherent:
      out.mean = exact_parity(state);
      out.variance = var_parity_coherent(state.mean_photon_number, eta, runs);
      break;
    case StateKind::Thermal: {
      const auto v = var_parity_thermal(state.mean_photon_number, eta, runs);
      if (v.mean_exists) out.mean = exact_parity(state);
      out.variance = v.variance;
      break;
    }
    case StateKind::SqueezedVacuum: {
      const auto conv = counting_parity_convergence(state, eta);
      if (conv.mean_exists) out.mean = exact_parity(state);
      if (conv.variance_exists) {
        const auto rho = photon_distribution(state, kMinTailTolerance);
        const auto p = single_setting(bernoulli_transform(rho, eta));
        out.variance = mean_and_variance(parity_counting_kernel(eta, rho.cutoff), p, runs).variance;
      }
      break;
    }
  }
  return out;
}

}  // namespace

ResultTable cmd_reconstruct(const ExperimentConfig& config, const RunOptions& options) {
  const StateSpec& state = require_state(config);
  const Scheme s = build_scheme(config, state, config.nu_max, config.nu_max, true);

  std::vector<KernelSet> kernels;
  for (int nu = 0; nu <= config.nu_max; ++nu) kernels.push_back(s.rho_kernel(nu));
  const auto ensembles = s.trials(kernels, config.seed, options);

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["diagnostics"] = s.diagnostics();
  t.metadata["diagnostics"]["warnings"] = collect_warnings(kernels);

  std::vector<Cell> nu_col, rho, expected, sd;
  for (int nu = 0; nu <= config.nu_max; ++nu) {
    const auto m = s.moments(kernels[static_cast<std::size_t>(nu)]);
    nu_col.emplace_back(std::int64_t{nu});
    rho.emplace_back(s.photons[nu]);
    expected.emplace_back(m.mean);
    sd.emplace_back(std::sqrt(m.variance));
  }
  t.add_column("nu", std::move(nu_col));
  t.add_column("rho", std::move(rho));
  t.add_column("expected", std::move(expected));
  t.add_column("std_dev", std::move(sd));
  add_monte_carlo_columns(t, ensembles, config.n_trials);
  return t;
}

ResultTable cmd_correlations(const ExperimentConfig& config, const RunOptions& options) {
  const StateSpec& state = require_state(config);
  const Scheme s = build_scheme(config, state, config.nu_max, config.nu_max, config.n_trials >= 2);

  std::vector<KernelSet> kernels;
  for (int nu = 0; nu <= config.nu_max; ++nu) kernels.push_back(s.rho_kernel(nu));

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["diagnostics"] = s.diagnostics();
  t.metadata["diagnostics"]["warnings"] = collect_warnings(kernels);

  std::vector<Cell> nu_col, cov, corr;
  for (int nu = 0; nu < config.nu_max; ++nu) {
    const auto i = static_cast<std::size_t>(nu);
    const auto pr = covariance_and_correlation(kernels[i], kernels[i + 1], s.outcomes,
                                               static_cast<long long>(config.n_runs));
    nu_col.emplace_back(std::int64_t{nu});
    cov.emplace_back(pr.cov);
    corr.emplace_back(optional_cell(pr.corr));
  }
  t.add_column("nu", std::move(nu_col));
  t.add_column("cov", std::move(cov));
  t.add_column("corr", std::move(corr));

  if (config.n_trials >= 2) {
    const auto ensembles = s.trials(kernels, config.seed, options);
    std::vector<Cell> mc;
    for (std::size_t i = 0; i + 1 < ensembles.size(); ++i) {
      mc.emplace_back(optional_cell(sample_correlation(ensembles[i], ensembles[i + 1])));
    }
    t.add_column("mc_corr", std::move(mc));
  }
  return t;
}

namespace {

ResultTable parity_vs_mean(const ExperimentConfig& config, const RunOptions& options) {
  const StateSpec& base = require_state(config);
  const bool homodyne = config.detector.kind == DetectorKind::RandomPhaseHomodyne;

  ResultTable t;
  t.metadata = base_metadata(config);
  std::vector<Cell> mean_col, exact, expected, sd, status, k_col, t_expected, t_sd;
  std::vector<TrialEnsemble> ensembles;
  const int table_order = config.parity_cutoff.value_or(config.nu_max);
  for (std::size_t i = 0; i < config.sweep.size(); ++i) {
    const StateSpec state{base.kind, config.sweep[i]};
    const Scheme s = build_scheme(config, state, table_order, 0, true);
    const int cutoff = default_parity_cutoff(config, s);
    const auto kernel = s.parity_kernel(cutoff);
    const auto truncated = s.moments(kernel);

    mean_col.emplace_back(state.mean_photon_number);
    exact.emplace_back(exact_parity(state));
    k_col.emplace_back(std::int64_t{cutoff});
    t_expected.emplace_back(truncated.mean);
    t_sd.emplace_back(std::sqrt(truncated.variance));
    if (homodyne) {
      expected.emplace_back(truncated.mean);
      sd.emplace_back(std::sqrt(truncated.variance));
      status.emplace_back(std::string("finite"));
    } else {
      const auto limit = counting_parity_limit(state, config.detector.efficiency, config.n_runs);
      expected.emplace_back(limit.mean ? Cell{*limit.mean} : Cell{kDiverged});
      sd.emplace_back(limit.variance ? Cell{std::sqrt(*limit.variance)} : Cell{kDiverged});
      status.emplace_back(std::string(!limit.mean ? "diverged" : !limit.variance ? "variance_diverged" : "finite"));
    }
    ensembles.push_back(std::move(s.trials({kernel}, derive_seed(config.seed, i, 0), options).front()));
  }
  t.add_column("mean_photon_number", std::move(mean_col));
  t.add_column("exact_parity", std::move(exact));
  t.add_column("expected", std::move(expected));
  t.add_column("std_dev", std::move(sd));
  t.add_column("status", std::move(status));
  t.add_column("K", std::move(k_col));
  t.add_column("truncated_expected", std::move(t_expected));
  t.add_column("truncated_std_dev", std::move(t_sd));
  add_monte_carlo_columns(t, ensembles, config.n_trials);
  return t;
}

ResultTable parity_vs_cutoff(const ExperimentConfig& config, const RunOptions& options) {
  const StateSpec& state = require_state(config);
  std::vector<int> cutoffs;
  for (double v : config.sweep) cutoffs.push_back(static_cast<int>(v));
  const int highest = *std::max_element(cutoffs.begin(), cutoffs.end());
  const Scheme s = build_scheme(config, state, highest, highest, true);

  std::vector<KernelSet> kernels;
  for (int k : cutoffs) kernels.push_back(s.parity_kernel(k));
  const auto ensembles = s.trials(kernels, config.seed, options);

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["diagnostics"] = s.diagnostics();
  t.metadata["diagnostics"]["exact_parity"] = exact_parity(state);

  std::vector<Cell> k_col, expected, sd;
  for (std::size_t i = 0; i < cutoffs.size(); ++i) {
    const auto m = s.moments(kernels[i]);
    k_col.emplace_back(std::int64_t{cutoffs[i]});
    expected.emplace_back(m.mean);
    sd.emplace_back(std::sqrt(m.variance));
  }
  t.add_column("K", std::move(k_col));
  t.add_column("expected", std::move(expected));
  t.add_column("std_dev", std::move(sd));
  add_monte_carlo_columns(t, ensembles, config.n_trials);
  return t;
}

}  // namespace

ResultTable cmd_parity_scan(const ExperimentConfig& config, const RunOptions& options) {
  if (config.task == Task::ParityVsMeanPhoton) return parity_vs_mean(config, options);
  if (config.task == Task::TruncatedParityVsK) return parity_vs_cutoff(config, options);
  throw ConfigError("config: /task: parity-scan needs parity_vs_mean_photon or truncated_parity_vs_k");
}

ResultTable cmd_pattern_table(const ExperimentConfig& config, const RunOptions&) {
  if (config.detector.kind != DetectorKind::RandomPhaseHomodyne) {
    throw ConfigError("config: /detector/kind: pattern tables need a random_phase_homodyne detector");
  }
  const int order = std::max(config.nu_max, config.parity_cutoff.value_or(0));
  const PatternTable table(config.detector, order);

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["diagnostics"] = {{"orthogonality_error", table.orthogonality_error()}, {"spacing", table.spacing()}};
  t.add_column("x", config.detector.bins.centers());
  t.add_column("x_oscillator", table.grid());
  for (int nu = 0; nu <= config.nu_max; ++nu) {
    const auto f = table.values(nu);
    t.add_column("f_" + std::to_string(nu), std::vector<double>(f.begin(), f.end()));
  }
  if (config.parity_cutoff) {
    t.add_column("g_" + std::to_string(*config.parity_cutoff), table.parity_kernel_values(*config.parity_cutoff));
  }
  return t;
}

ResultTable cmd_simulate(const ExperimentConfig& config, const RunOptions&) {
  const StateSpec& state = require_state(config);
  const bool homodyne = config.detector.kind == DetectorKind::RandomPhaseHomodyne;
  const auto photons = photon_distribution(state, config.tail_tolerance);
  const std::uint64_t seed = derive_seed(config.seed, 0, 0);

  OutcomeDistribution dist;
  Histogram h;
  if (homodyne) {
    const auto density = phase_averaged_density(photons);
    dist = homodyne_bin_distribution(density, config.detector);
    h = HomodyneSampler(density, config.detector).sample_events(config.n_runs, seed);
  } else {
    dist = bernoulli_transform(photons, config.detector.efficiency);
    h = sample_histogram(dist, config.n_runs, seed);
  }

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["diagnostics"] = {{"setting", h.setting},
                               {"histogram_seed", seed},
                               {"recorded_runs", h.recorded()},
                               {"outcome_leftover", dist.leftover},
                               {"photon_cutoff", photons.cutoff}};
  std::vector<Cell> outcome, centre, prob, count;
  for (std::size_t n = 0; n < dist.probs.size(); ++n) {
    outcome.emplace_back(static_cast<std::int64_t>(n));
    if (homodyne) centre.emplace_back(config.detector.bins.center(static_cast<int>(n)));
    prob.emplace_back(dist.probs[n]);
    count.emplace_back(static_cast<std::int64_t>(h.counts[n]));
  }
  t.add_column("outcome", std::move(outcome));
  if (homodyne) t.add_column("x", std::move(centre));
  t.add_column("probability", std::move(prob));
  t.add_column("count", std::move(count));
  return t;
}

Histogram histogram_from_table(const ResultTable& table) {
  if (!table.metadata.contains("config") || !table.metadata.contains("diagnostics")) {
    throw InvalidArgument("histogram file lacks the metadata written by 'simulate'");
  }
  const auto config = config_from_json(table.metadata["config"]);
  if (config.task != Task::Simulate) throw InvalidArgument("histogram file was not written by 'simulate'");
  Histogram h;
  h.n_runs = config.n_runs;
  h.setting = config.detector.kind == DetectorKind::RandomPhaseHomodyne ? kHomodyneSetting : kPhotocountSetting;
  h.seed = table.metadata["diagnostics"].value("histogram_seed", std::uint64_t{0});
  for (const auto& cell : table.column("count").cells) {
    const auto* v = std::get_if<std::int64_t>(&cell);
    if (!v || *v < 0) throw InvalidArgument("histogram counts must be non-negative integers");
    h.counts.push_back(static_cast<std::uint64_t>(*v));
  }
  if (h.recorded() > h.n_runs) throw InvalidArgument("histogram records more runs than n_runs");
  return h;
}

ResultTable cmd_estimate(const ExperimentConfig& config_in, const Histogram& input, const RunOptions&) {
  ExperimentConfig config = config_in;
  config.n_runs = input.n_runs;
  validate(config);
  const bool homodyne = config.detector.kind == DetectorKind::RandomPhaseHomodyne;
  const SettingLabel expected_setting = homodyne ? kHomodyneSetting : kPhotocountSetting;
  if (input.setting != expected_setting) {
    throw InvalidArgument("histogram setting '" + input.setting + "' does not match the detector");
  }
  if (homodyne && input.counts.size() != static_cast<std::size_t>(config.detector.bins.count)) {
    throw InvalidArgument("histogram has " + std::to_string(input.counts.size()) + " bins, detector has " +
                          std::to_string(config.detector.bins.count));
  }
  if (input.counts.empty()) throw InvalidArgument("histogram is empty");

  const int top = static_cast<int>(input.counts.size()) - 1;
  const int cutoff = config.parity_cutoff.value_or(homodyne ? config.nu_max : top);
  std::optional<PatternTable> table;
  if (homodyne) table.emplace(config.detector, std::max(config.nu_max, cutoff));

  std::vector<KernelSet> kernels;
  for (int nu = 0; nu <= config.nu_max; ++nu) {
    kernels.push_back(homodyne ? homodyne_rho_kernel(*table, nu)
                               : inverse_bernoulli_kernel(nu, config.detector.efficiency, std::max(top, nu)));
  }
  kernels.push_back(homodyne ? parity_homodyne_kernel(*table, cutoff)
                             : parity_counting_kernel(config.detector.efficiency, cutoff));

  // Plug-in error bars: the closed-form variance at the observed frequencies.
  OutcomeDistribution observed;
  observed.setting = input.setting;
  for (auto k : input.counts) observed.probs.push_back(static_cast<double>(k) / static_cast<double>(input.n_runs));
  observed.leftover = static_cast<double>(input.n_runs - input.recorded()) / static_cast<double>(input.n_runs);
  const auto observed_set = single_setting(observed);
  HistogramSet histograms{{input.setting, input}};

  std::optional<Scheme> truth;
  if (config.state) truth.emplace(build_scheme(config, *config.state, std::max(config.nu_max, cutoff), top, false));

  ResultTable t;
  t.metadata = base_metadata(config);
  t.metadata["input"] = {{"setting", input.setting}, {"n_runs", input.n_runs}, {"seed", input.seed},
                         {"counts", input.counts}};
  t.metadata["diagnostics"] = {{"warnings", collect_warnings(kernels)}};
  if (table) t.metadata["diagnostics"]["orthogonality_error"] = table->orthogonality_error();

  std::vector<Cell> label, estimate, plugin, expected, sd;
  for (const auto& k : kernels) {
    label.emplace_back(k.label);
    estimate.emplace_back(estimate_from_histograms(k, histograms));
    plugin.emplace_back(std::sqrt(mean_and_variance(k, observed_set, static_cast<long long>(input.n_runs)).variance));
    if (truth) {
      const auto m = truth->moments(k);
      expected.emplace_back(m.mean);
      sd.emplace_back(std::sqrt(m.variance));
    }
  }
  t.add_column("quantity", std::move(label));
  t.add_column("estimate", std::move(estimate));
  t.add_column("plugin_std_dev", std::move(plugin));
  if (truth) {
    t.add_column("expected", std::move(expected));
    t.add_column("std_dev", std::move(sd));
  }
  return t;
}

ResultTable run_task(const ExperimentConfig& config, const RunOptions& options, const std::optional<Histogram>& input) {
  switch (config.task) {
    case Task::ReconstructPhotonDist:
      return cmd_reconstruct(config, options);
    case Task::Correlations:
      return cmd_correlations(config, options);
    case Task::ParityVsMeanPhoton:
    case Task::TruncatedParityVsK:
      return cmd_parity_scan(config, options);
    case Task::PatternTableExport:
      return cmd_pattern_table(config, options);
    case Task::Simulate:
      return cmd_simulate(config, options);
    case Task::Estimate:
      if (!input) throw InvalidArgument("estimate needs an input histogram");
      return cmd_estimate(config, *input, options);
  }
  throw InvalidArgument("unknown task");
}

ResultTable replay(const Json& metadata, const RunOptions& options) {
  if (!metadata.is_object() || !metadata.contains("config")) {
    throw ConfigError("metadata: /config: missing");
  }
  const auto config = config_from_json(metadata["config"], std::nullopt, {}, "metadata");
  std::optional<Histogram> input;
  if (config.task == Task::Estimate) {
    if (!metadata.contains("input")) throw ConfigError("metadata: /input: missing for an estimate result");
    const Json& in = metadata["input"];
    try {
      Histogram h;
      h.setting = in.at("setting").get<std::string>();
      h.n_runs = in.at("n_runs").get<std::uint64_t>();
      h.seed = in.at("seed").get<std::uint64_t>();
      h.counts = in.at("counts").get<std::vector<std::uint64_t>>();
      input = std::move(h);
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("metadata: /input: ") + e.what());
    }
  }
  return run_task(config, options, input);
}

}  // namespace photostat::cli
