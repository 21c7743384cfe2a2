#pragma once

#include <span>
#include <vector>

#include "photostat/estimation.hpp"
#include "photostat/measurement.hpp"

namespace photostat {

/// Pattern functions f_nu(x) = d/dx[psi_nu(x) phi_nu(x)] for nu = 0..nu_max at
/// the points `xs` (oscillator units). phi_nu is the irregular solution of the
/// oscillator equation, normalized so that psi_nu phi_nu' - psi_nu' phi_nu = 2,
/// which makes int f_nu psi_mu^2 dx = delta_{nu mu}.
///
/// phi_nu is integrated outward from x = 0, where its value and slope follow
/// exactly from the ladder recurrence; outward is the direction in which the
/// irregular solution dominates, so the integration is stable. The derivative
/// of the product is evaluated analytically. Result is indexed [nu][point].
std::vector<std::vector<double>> pattern_functions(int nu_max, std::span<const double> xs);

/// Single pattern function on a grid. Throws InvalidArgument when the grid
/// does not reach the classical turning point of nu.
std::vector<double> pattern_function(int nu, std::span<const double> xs);

inline constexpr double kOrthogonalityTolerance = 1e-3;

/// Pattern functions tabulated at the bin centres of a homodyne detector.
class PatternTable {
 public:
  /// Builds f_0..f_{nu_max} on the detector's bin centres and runs the
  /// orthogonality self-test; throws NumericalError if it fails.
  PatternTable(const DetectorModel& model, int nu_max);

  int nu_max() const { return nu_max_; }
  /// Bin centres in oscillator units.
  const std::vector<double>& grid() const { return grid_; }
  double spacing() const { return spacing_; }
  std::span<const double> values(int nu) const;

  /// max over nu, mu <= nu_max of |sum_m f_nu(x_m) psi_mu(x_m)^2 dx - delta|.
  double orthogonality_error() const { return orthogonality_error_; }

  /// g_K(x_m) = sum_{nu<=K} (-1)^nu f_nu(x_m).
  std::vector<double> parity_kernel_values(int cutoff) const;

 private:
  int nu_max_;
  std::vector<double> grid_;
  double spacing_;
  std::vector<std::vector<double>> values_;
  double orthogonality_error_ = 0.0;
};

double orthogonality_error(const std::vector<std::vector<double>>& values,
                           std::span<const double> grid, double spacing);

/// Midpoint-rule kernel a_m = f_nu(x_m) on bin probabilities.
KernelSet homodyne_rho_kernel(const PatternTable& table, int nu);
KernelSet homodyne_rho_kernel(int nu, const DetectorModel& model);

/// a_m = g_K(x_m).
KernelSet parity_homodyne_kernel(const PatternTable& table, int cutoff);
KernelSet parity_homodyne_kernel(int cutoff, const DetectorModel& model);

}  // namespace photostat
