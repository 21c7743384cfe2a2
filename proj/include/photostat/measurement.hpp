#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <vector>

#include "photostat/histogram.hpp"
#include "photostat/states.hpp"

namespace photostat {

enum class DetectorKind { PhotonCounting, RandomPhaseHomodyne };

std::string_view to_string(DetectorKind kind);
std::optional<DetectorKind> parse_detector_kind(std::string_view name);

/// Uniform bins on [lo, hi]. Bins are half-open [edge_m, edge_{m+1}) except the
/// last, which also contains hi.
struct BinGrid {
  int count = 0;
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return (hi - lo) / count; }
  double edge(int m) const { return m == count ? hi : lo + m * width(); }
  double center(int m) const { return lo + (m + 0.5) * width(); }
  std::optional<int> locate(double x) const;
  std::vector<double> centers() const;
  BinGrid scaled(double factor) const { return {count, lo * factor, hi * factor}; }
};

struct DetectorModel {
  DetectorKind kind = DetectorKind::PhotonCounting;
  double efficiency = 1.0;
  BinGrid bins{};
  /// Vacuum variance of the recorded homodyne variable. Bins are given in
  /// recorded units; internally everything runs in oscillator units, where
  /// the vacuum variance is 1/2.
  double vacuum_variance = 0.25;

  static DetectorModel photon_counting(double eta);
  static DetectorModel homodyne(int bins, double lo, double hi, double vacuum_variance = 0.25);

  void validate() const;
  /// Factor converting a recorded quadrature value to oscillator units.
  double recorded_to_oscillator() const;
  BinGrid oscillator_bins() const { return bins.scaled(recorded_to_oscillator()); }
};

/// Outcome probabilities p_n for one setting. `leftover` is the probability of
/// an outcome outside the recorded set; it is carried explicitly, never
/// folded back by renormalization.
struct OutcomeDistribution {
  std::vector<double> probs;
  SettingLabel setting = kPhotocountSetting;
  double leftover = 0.0;

  double recorded_mass() const;
  double mean() const;
};

using DistributionSet = std::map<SettingLabel, OutcomeDistribution>;

inline DistributionSet single_setting(OutcomeDistribution dist) {
  DistributionSet out;
  auto label = dist.setting;
  out.emplace(std::move(label), std::move(dist));
  return out;
}

/// Photocount statistics p_n = sum_{nu>=n} C(nu,n) eta^n (1-eta)^{nu-n} rho_nu
/// for n <= n_max.
OutcomeDistribution bernoulli_transform(const PhotonDistribution& rho, double eta, int n_max);
OutcomeDistribution bernoulli_transform(const PhotonDistribution& rho, double eta);

/// Bin probabilities by adaptive Gauss-Kronrod quadrature; absolute error per
/// bin below 1e-10 or NumericalError.
OutcomeDistribution homodyne_bin_distribution(const QuadratureDensity& density,
                                              const DetectorModel& model);

}  // namespace photostat
