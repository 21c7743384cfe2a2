#include "photostat/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <span>
#include <string>

#include "photostat/error.hpp"
#include "summation.hpp"

namespace photostat {

namespace {

constexpr double kVarianceFloor = 1e-14;
constexpr double kCorrelationFloor = 1e-30;
constexpr double kBranchHazard = 1e-6;
// Relative width of the divergence boundaries; points closer than this to a
// threshold count as on it, so that e.g. nbar = 1 at eta = 0.8 is reported
// diverged despite 1 - 0.8 != 0.2 in binary floating point.
constexpr double kBoundaryTolerance = 1e-12;

void require_runs(long long n_runs) {
  if (n_runs < 1) throw InvalidArgument("number of runs N must be >= 1");
}

void require_efficiency(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
}

const OutcomeDistribution& lookup(const DistributionSet& probs, const SettingLabel& setting) {
  auto it = probs.find(setting);
  if (it == probs.end()) {
    throw InvalidArgument("no outcome distribution for kernel setting '" + setting + "'");
  }
  return it->second;
}

struct SettingMoments {
  double first = 0.0;   // sum' a_n p_n
  double second = 0.0;  // sum' a_n^2 p_n
};

SettingMoments setting_moments(std::span<const double> a, std::span<const double> p) {
  detail::CompensatedSum first;
  detail::CompensatedSum second;
  const std::size_t n = std::min(a.size(), p.size());
  for (std::size_t i = 0; i < n; ++i) {
    first.add(a[i] * p[i]);
    second.add(a[i] * a[i] * p[i]);
  }
  return {first.value(), second.value()};
}

// log(1 + z) without cancellation for small |z|.
std::complex<double> log1p_complex(std::complex<double> z) {
  const double re = z.real();
  const double im = z.imag();
  const double modulus_term = std::log1p(2.0 * re + re * re + im * im) * 0.5;
  return {modulus_term, std::atan2(im, 1.0 + re)};
}

// e^{i theta} - 1 accurate for small theta.
std::complex<double> expm1_i(double theta) {
  const double s = std::sin(0.5 * theta);
  return {-2.0 * s * s, std::sin(theta)};
}

std::span<const double> coefficients_or_empty(const KernelSet& k, const SettingLabel& setting) {
  auto it = k.coefficients.find(setting);
  if (it == k.coefficients.end()) return {};
  return it->second;
}

// Shared core of the single and joint generating functions: the phase of
// outcome n at setting i is (lambda a_n + mu b_n) / N.
GeneratingFunctionValue generating_core(const KernelSet& a, const KernelSet* b,
                                        const DistributionSet& probs, long long n_runs,
                                        double lambda, double mu) {
  require_runs(n_runs);
  std::set<SettingLabel> settings;
  for (const auto& [s, _] : a.coefficients) settings.insert(s);
  if (b != nullptr) {
    for (const auto& [s, _] : b->coefficients) settings.insert(s);
  }

  const double n = static_cast<double>(n_runs);
  GeneratingFunctionValue out;
  out.safe_radius = std::numeric_limits<double>::infinity();
  std::complex<double> log_total{0.0, 0.0};
  for (const auto& setting : settings) {
    const auto& p = lookup(probs, setting).probs;
    const auto ca = coefficients_or_empty(a, setting);
    const auto cb = b != nullptr ? coefficients_or_empty(*b, setting) : std::span<const double>{};
    std::complex<double> z{0.0, 0.0};
    double abs_weight = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double ai = i < ca.size() ? ca[i] : 0.0;
      const double bi = i < cb.size() ? cb[i] : 0.0;
      const double phase_weight = lambda * ai + mu * bi;
      if (phase_weight == 0.0 && ai == 0.0 && bi == 0.0) continue;
      z += p[i] * expm1_i(phase_weight / n);
      abs_weight += p[i] * (std::abs(ai) + std::abs(bi));
    }
    if (abs_weight > 0.0) out.safe_radius = std::min(out.safe_radius, n / abs_weight);
    if (std::abs(1.0 + z) < kBranchHazard) out.branch_hazard = true;
    log_total += n * log1p_complex(z);
  }
  out.log_value = log_total;
  out.value = std::exp(log_total);
  return out;
}

}  // namespace

double KernelSet::coefficient(const SettingLabel& setting, std::size_t n) const {
  auto it = coefficients.find(setting);
  if (it == coefficients.end() || n >= it->second.size()) return 0.0;
  return it->second[n];
}

double MomentReport::standard_error() const {
  return std::sqrt(variance);
}

double estimate_from_histograms(const KernelSet& kernels, const HistogramSet& histograms) {
  std::optional<std::uint64_t> runs;
  for (const auto& [setting, h] : histograms) {
    if (h.n_runs == 0) throw InvalidArgument("histogram '" + setting + "' has N = 0");
    if (runs && *runs != h.n_runs) {
      throw InvalidArgument("histograms disagree on the number of runs N");
    }
    runs = h.n_runs;
  }
  detail::CompensatedSum total;
  for (const auto& [setting, a] : kernels.coefficients) {
    auto it = histograms.find(setting);
    if (it == histograms.end()) {
      throw InvalidArgument("no histogram for kernel setting '" + setting + "'");
    }
    const Histogram& h = it->second;
    const double n = static_cast<double>(h.n_runs);
    const std::size_t top = std::min(a.size(), h.counts.size());
    for (std::size_t i = 0; i < top; ++i) {
      if (h.counts[i] != 0) total.add(a[i] * (static_cast<double>(h.counts[i]) / n));
    }
  }
  return total.value();
}

GeneratingFunctionValue generating_function(const KernelSet& kernels, const DistributionSet& probs,
                                            long long n_runs, double lambda) {
  return generating_core(kernels, nullptr, probs, n_runs, lambda, 0.0);
}

GeneratingFunctionValue joint_generating_function(const KernelSet& a, const KernelSet& b,
                                                  const DistributionSet& probs, long long n_runs,
                                                  double lambda, double mu) {
  return generating_core(a, &b, probs, n_runs, lambda, mu);
}

MomentReport mean_and_variance(const KernelSet& kernels, const DistributionSet& probs,
                               long long n_runs) {
  require_runs(n_runs);
  detail::CompensatedSum mean;
  detail::CompensatedSum second;
  detail::CompensatedSum squared_means;
  for (const auto& [setting, a] : kernels.coefficients) {
    const SettingMoments m = setting_moments(a, lookup(probs, setting).probs);
    mean.add(m.first);
    second.add(m.second);
    squared_means.add(m.first * m.first);
  }
  const double n = static_cast<double>(n_runs);
  double variance = (second.value() - squared_means.value()) / n;
  if (variance < 0.0) {
    const double scale = std::max(1.0, second.value() / n);
    if (variance < -kVarianceFloor * scale) {
      throw NumericalError("negative variance " + std::to_string(variance) + " for kernel '" +
                           kernels.label + "'");
    }
    variance = 0.0;
  }
  return MomentReport{mean.value(), variance, n_runs};
}

PairReport covariance_and_correlation(const KernelSet& a, const KernelSet& b,
                                      const DistributionSet& probs, long long n_runs) {
  require_runs(n_runs);
  std::set<SettingLabel> settings;
  for (const auto& [s, _] : a.coefficients) settings.insert(s);
  for (const auto& [s, _] : b.coefficients) settings.insert(s);

  detail::CompensatedSum cov;
  for (const auto& setting : settings) {
    const auto ca = coefficients_or_empty(a, setting);
    const auto cb = coefficients_or_empty(b, setting);
    if (ca.empty() || cb.empty()) continue;  // disjoint settings are independent
    const auto& p = lookup(probs, setting).probs;
    detail::CompensatedSum cross;
    detail::CompensatedSum mean_a;
    detail::CompensatedSum mean_b;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double ai = i < ca.size() ? ca[i] : 0.0;
      const double bi = i < cb.size() ? cb[i] : 0.0;
      cross.add(ai * bi * p[i]);
      mean_a.add(ai * p[i]);
      mean_b.add(bi * p[i]);
    }
    cov.add(cross.value() - mean_a.value() * mean_b.value());
  }

  PairReport out;
  out.cov = cov.value() / static_cast<double>(n_runs);
  const double var_a = mean_and_variance(a, probs, n_runs).variance;
  const double var_b = mean_and_variance(b, probs, n_runs).variance;
  if (var_a > kCorrelationFloor && var_b > kCorrelationFloor) {
    out.corr = std::clamp(out.cov / std::sqrt(var_a * var_b), -1.0, 1.0);
  }
  return out;
}

KernelSet inverse_bernoulli_kernel(int nu, double eta, int n_max) {
  require_efficiency(eta);
  if (nu < 0) throw InvalidArgument("photon number nu must be >= 0");
  if (n_max < nu) throw InvalidArgument("n_max must be >= nu");

  KernelSet k;
  k.label = "rho_" + std::to_string(nu);
  std::vector<double> a(static_cast<std::size_t>(n_max) + 1, 0.0);
  const double step = 1.0 - 1.0 / eta;
  a[static_cast<std::size_t>(nu)] = std::pow(eta, -static_cast<double>(nu));
  for (int n = nu; n < n_max; ++n) {
    a[static_cast<std::size_t>(n) + 1] =
        a[static_cast<std::size_t>(n)] * (n + 1.0) / (n + 1.0 - nu) * step;
  }
  k.coefficients.emplace(kPhotocountSetting, std::move(a));
  if (eta <= 0.5) {
    k.warnings.push_back("inverse Bernoulli transform is unstable for efficiency <= 50%");
  }
  return k;
}

KernelSet parity_counting_kernel(double eta, int cutoff) {
  require_efficiency(eta);
  if (cutoff < 0) throw InvalidArgument("parity cutoff K must be >= 0");
  KernelSet k;
  k.label = "parity_K" + std::to_string(cutoff);
  std::vector<double> a(static_cast<std::size_t>(cutoff) + 1);
  const double base = 1.0 - 2.0 / eta;
  for (int n = 0; n <= cutoff; ++n) a[static_cast<std::size_t>(n)] = std::pow(base, n);
  k.coefficients.emplace(kPhotocountSetting, std::move(a));
  return k;
}

double var_parity_coherent(double alpha_sq, double eta, long long n_runs) {
  require_efficiency(eta);
  require_runs(n_runs);
  if (!(alpha_sq >= 0.0)) throw InvalidArgument("|alpha|^2 must be >= 0");
  return (std::exp(4.0 * (1.0 - eta) * alpha_sq / eta) - std::exp(-4.0 * alpha_sq)) /
         static_cast<double>(n_runs);
}

ThermalParityVariance var_parity_thermal(double nbar, double eta, long long n_runs) {
  require_efficiency(eta);
  require_runs(n_runs);
  if (!(nbar >= 0.0)) throw InvalidArgument("thermal mean photon number must be >= 0");

  const double loss = 1.0 - eta;
  ThermalParityVariance out;
  out.mean_exists = 2.0 * nbar * loss < 1.0 - kBoundaryTolerance;
  if (4.0 * nbar * loss < eta * (1.0 - kBoundaryTolerance)) {
    const double inv = 1.0 + 2.0 * nbar;
    out.variance = (eta / (eta - 4.0 * nbar * loss) - 1.0 / (inv * inv)) / static_cast<double>(n_runs);
  }
  return out;
}

ParityConvergence counting_parity_convergence(const StateSpec& spec, double eta) {
  require_efficiency(eta);
  spec.validate();
  const double m = spec.mean_photon_number;
  switch (spec.kind) {
    case StateKind::Coherent:
      return {true, true};
    case StateKind::Thermal: {
      const auto v = var_parity_thermal(m, eta, 1);
      return {v.mean_exists, !v.diverged()};
    }
    case StateKind::SqueezedVacuum: {
      if (m == 0.0) return {true, true};
      // G(z) = G_rho(1 - eta + eta z) is singular where (1 - eta + eta z)^2 = 1/tanh^2 r.
      const double inv_tanh = std::sqrt((1.0 + m) / m);
      const double radius = (inv_tanh - 1.0 + eta) / eta;
      const double base = std::abs(1.0 - 2.0 / eta);
      return {base < radius * (1.0 - kBoundaryTolerance),
              base * base < radius * (1.0 - kBoundaryTolerance)};
    }
  }
  return {};
}

}  // namespace photostat
