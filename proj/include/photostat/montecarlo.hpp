#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "photostat/estimation.hpp"
#include "photostat/histogram.hpp"
#include "photostat/measurement.hpp"
#include "photostat/states.hpp"

namespace photostat {

/// Stateless splitmix64-style mix of (master, trial, setting). Independent of
/// the order in which trials are executed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t setting);

/// Multinomial draw over the recorded outcomes plus the leftover category by
/// sequential binomial conditioning. Leftover runs are counted in n_runs only.
Histogram sample_histogram(const OutcomeDistribution& dist, std::uint64_t n_runs, std::uint64_t seed);

/// Two-stage sampler for random-phase homodyne events: a Fock index nu from
/// rho, then x from psi_nu^2 by inverse CDF on a 2^14-point table spanning the
/// density's support.
class HomodyneSampler {
 public:
  static constexpr std::size_t kTablePoints = std::size_t{1} << 14;

  HomodyneSampler(const QuadratureDensity& density, const DetectorModel& model);

  /// One quadrature value in recorded units.
  double draw_quadrature(std::mt19937_64& rng) const;
  std::vector<double> sample_quadratures(std::uint64_t count, std::uint64_t seed) const;
  Histogram sample_events(std::uint64_t n_runs, std::uint64_t seed) const;

  const DetectorModel& model() const { return model_; }

 private:
  DetectorModel model_;
  double to_recorded_;
  std::vector<double> photon_cdf_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> cdf_;  // [nu][grid point], normalized to end at 1
};

Histogram sample_homodyne_events(const QuadratureDensity& density, const DetectorModel& model,
                                 std::uint64_t n_runs, std::uint64_t seed);

struct TrialEnsemble {
  std::vector<double> estimates;

  std::size_t n_trials() const { return estimates.size(); }
  double mean() const;
  /// Unbiased sample variance; zero for fewer than two trials.
  double variance() const;
};

/// Pearson correlation of two ensembles of equal length, paired by trial.
/// Empty when either sample variance vanishes.
std::optional<double> sample_correlation(const TrialEnsemble& a, const TrialEnsemble& b);

struct TrialOptions {
  std::uint64_t n_runs = 0;
  std::size_t n_trials = 0;
  std::uint64_t seed = 0;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Each trial samples fresh histograms for every setting (seeded by
/// derive_seed(seed, trial, setting index)) and applies every kernel to the
/// same histograms. Results are ordered by trial regardless of threading.
std::vector<TrialEnsemble> run_trials(const std::vector<KernelSet>& kernels,
                                      const DistributionSet& dists, const TrialOptions& options);

TrialEnsemble run_trials(const KernelSet& kernels, const DistributionSet& dists,
                         std::uint64_t n_runs, std::size_t n_trials, std::uint64_t seed);

/// Like run_trials, but homodyne histograms come from event-by-event sampling.
std::vector<TrialEnsemble> run_event_trials(const std::vector<KernelSet>& kernels,
                                            const HomodyneSampler& sampler,
                                            const TrialOptions& options);

}  // namespace photostat
