#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "photostat/cli/experiment.hpp"
#include "photostat/cli/result_table.hpp"
#include "photostat/histogram.hpp"

namespace photostat::cli {

struct RunOptions {
  /// Worker threads for Monte Carlo trials; 0 picks the hardware count.
  /// Never affects results.
  unsigned threads = 0;
};

/// Per nu: exact rho_nu, closed-form E and sqrt(Var) of the estimator, and
/// Monte Carlo estimates.
ResultTable cmd_reconstruct(const ExperimentConfig& config, const RunOptions& options = {});

/// Per nu: closed-form Cov and Corr of (rho_nu, rho_{nu+1}).
ResultTable cmd_correlations(const ExperimentConfig& config, const RunOptions& options = {});

/// Parity against mean photon number, or truncated parity against K.
ResultTable cmd_parity_scan(const ExperimentConfig& config, const RunOptions& options = {});

/// Pattern functions on the detector's bin centres.
ResultTable cmd_pattern_table(const ExperimentConfig& config, const RunOptions& options = {});

/// One simulated histogram with its outcome probabilities.
ResultTable cmd_simulate(const ExperimentConfig& config, const RunOptions& options = {});

/// Applies the rho_nu and parity estimators to a recorded histogram.
ResultTable cmd_estimate(const ExperimentConfig& config, const Histogram& input,
                         const RunOptions& options = {});

/// Extracts the histogram from a simulate result.
Histogram histogram_from_table(const ResultTable& table);

/// Dispatches on config.task.
ResultTable run_task(const ExperimentConfig& config, const RunOptions& options = {},
                     const std::optional<Histogram>& input = std::nullopt);

/// Recomputes a result from its metadata block.
ResultTable replay(const Json& metadata, const RunOptions& options = {});

}  // namespace photostat::cli
