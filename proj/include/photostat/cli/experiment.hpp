#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "photostat/error.hpp"
#include "photostat/measurement.hpp"
#include "photostat/states.hpp"

namespace photostat::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "1.0.0";

enum class Task {
  ReconstructPhotonDist,
  Correlations,
  ParityVsMeanPhoton,
  TruncatedParityVsK,
  PatternTableExport,
  Simulate,
  Estimate,
};

std::string_view to_string(Task task);
std::optional<Task> parse_task(std::string_view name);

/// Fully resolved experiment description. Every default is filled in, so the
/// JSON form is a complete recipe for reproducing a result.
struct ExperimentConfig {
  Task task = Task::ReconstructPhotonDist;
  std::optional<StateSpec> state;
  DetectorModel detector = DetectorModel::photon_counting(0.8);
  std::uint64_t n_runs = 4000;
  int nu_max = 20;
  /// Parity cut-off K. Empty: the photocount cut-off of the state for
  /// counting, nu_max for homodyne.
  std::optional<int> parity_cutoff;
  /// Mean photon numbers (ParityVsMeanPhoton) or cut-offs K (TruncatedParityVsK).
  std::vector<double> sweep;
  double tail_tolerance = 1e-14;
  std::uint64_t seed = 1;
  std::uint64_t n_trials = 1;

  Json to_json() const;
};

/// Invalid configuration; the message carries the JSON pointer of the
/// offending field and, when it can be located, its line.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Parses and validates a configuration. `implied_task` fills in a missing
/// "task" field and must agree with it when both are given. `source_name`
/// prefixes error messages.
ExperimentConfig parse_config(std::string_view text, std::optional<Task> implied_task = std::nullopt,
                              std::string_view source_name = "config");

ExperimentConfig config_from_json(const Json& doc, std::optional<Task> implied_task = std::nullopt,
                                  std::string_view source_text = {}, std::string_view source_name = "config");

/// Reads a JSON config, or the metadata block at the top of a CSV result.
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<Task> implied_task = std::nullopt);

/// Re-checks every cross-field precondition (after command-line overrides).
void validate(const ExperimentConfig& config);

/// The "# "-prefixed JSON block at the top of a CSV result, or a whole JSON
/// result file; returns its metadata object.
Json read_metadata(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace photostat::cli
