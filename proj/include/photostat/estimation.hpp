#pragma once

#include <complex>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "photostat/histogram.hpp"
#include "photostat/measurement.hpp"
#include "photostat/states.hpp"

namespace photostat {

/// Coefficients a_n(theta_i) of a linear estimator A = sum_i sum_n a_n (k_n/N).
/// Outcomes beyond the end of a setting's vector have coefficient zero.
struct KernelSet {
  std::string label;
  std::map<SettingLabel, std::vector<double>> coefficients;
  std::vector<std::string> warnings;

  double coefficient(const SettingLabel& setting, std::size_t n) const;
};

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  long long n_runs = 0;

  double standard_error() const;
};

/// `corr` is empty when either variance is at or below 1e-30.
struct PairReport {
  double cov = 0.0;
  std::optional<double> corr;
};

struct GeneratingFunctionValue {
  std::complex<double> value;
  /// N * sum_i log(base_i) on the principal branch.
  std::complex<double> log_value;
  /// |lambda| below which every per-setting base stays in the disc |base - 1| < 1.
  double safe_radius = 0.0;
  /// Some per-setting base has modulus below 1e-6; log_value is then unreliable.
  bool branch_hazard = false;
};

double estimate_from_histograms(const KernelSet& kernels, const HistogramSet& histograms);

GeneratingFunctionValue generating_function(const KernelSet& kernels, const DistributionSet& probs,
                                            long long n_runs, double lambda);

GeneratingFunctionValue joint_generating_function(const KernelSet& a, const KernelSet& b,
                                                  const DistributionSet& probs, long long n_runs,
                                                  double lambda, double mu);

MomentReport mean_and_variance(const KernelSet& kernels, const DistributionSet& probs,
                               long long n_runs);

PairReport covariance_and_correlation(const KernelSet& a, const KernelSet& b,
                                      const DistributionSet& probs, long long n_runs);

/// r_{nu n} = eta^{-nu} C(n,nu) (1 - 1/eta)^{n-nu} for nu <= n <= n_max.
KernelSet inverse_bernoulli_kernel(int nu, double eta, int n_max);

/// (1 - 2/eta)^n for 0 <= n <= K.
KernelSet parity_counting_kernel(double eta, int cutoff);

double var_parity_coherent(double alpha_sq, double eta, long long n_runs);

/// Whether E(Pi) and Var(Pi) of the photocount parity estimator converge as K -> infinity.
struct ParityConvergence {
  bool mean_exists = true;
  bool variance_exists = true;
};

struct ThermalParityVariance {
  std::optional<double> variance;  // empty: diverged
  bool mean_exists = true;

  bool diverged() const { return !variance.has_value(); }
};

ThermalParityVariance var_parity_thermal(double nbar, double eta, long long n_runs);

/// Existence of the K -> infinity moments for any benchmark state, from the
/// radius of convergence of the photocount generating function.
ParityConvergence counting_parity_convergence(const StateSpec& spec, double eta);

}  // namespace photostat
