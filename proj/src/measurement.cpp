#include "photostat/measurement.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "photostat/error.hpp"

namespace photostat {

namespace {

constexpr double kMassTolerance = 1e-10;
constexpr double kBinQuadratureTolerance = 1e-10;

double checked_leftover(double recorded, const char* what) {
  double leftover = 1.0 - recorded;
  if (leftover < 0.0) {
    if (leftover < -kMassTolerance) {
      throw NumericalError(std::string(what) + ": recorded mass exceeds 1 by " +
                           std::to_string(-leftover));
    }
    leftover = 0.0;
  }
  return leftover;
}


// GK15 with bisection until the Kronrod/Gauss difference is below a relative
// 1e-13 or an absolute floor; the floor keeps far-tail bins, where the density
// is near underflow, from recursing to full depth.
template <class F>
double adaptive_gk15(const F& f, double a, double b, int depth, double abs_floor, double& error) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  double e = 0.0;
  const double v = Integrator::integrate(f, a, b, 0, 0.0, &e);
  if (depth == 0 || e <= std::max(1e-13 * std::abs(v), abs_floor)) {
    error += e;
    return v;
  }
  const double mid = 0.5 * (a + b);
  return adaptive_gk15(f, a, mid, depth - 1, 0.5 * abs_floor, error) +
         adaptive_gk15(f, mid, b, depth - 1, 0.5 * abs_floor, error);
}

}  // namespace

std::string_view to_string(DetectorKind kind) {
  return kind == DetectorKind::PhotonCounting ? "photon_counting" : "random_phase_homodyne";
}

std::optional<DetectorKind> parse_detector_kind(std::string_view name) {
  if (name == "photon_counting" || name == "counting") return DetectorKind::PhotonCounting;
  if (name == "random_phase_homodyne" || name == "homodyne") return DetectorKind::RandomPhaseHomodyne;
  return std::nullopt;
}

std::optional<int> BinGrid::locate(double x) const {
  if (!(x >= lo && x <= hi)) return std::nullopt;
  if (x == hi) return count - 1;
  int m = static_cast<int>(std::floor((x - lo) / width()));
  // Guard the floating-point floor against the half-open edge convention.
  if (m >= count) m = count - 1;
  if (m > 0 && x < edge(m)) --m;
  if (m + 1 < count && x >= edge(m + 1)) ++m;
  return m;
}

std::vector<double> BinGrid::centers() const {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int m = 0; m < count; ++m) out[static_cast<std::size_t>(m)] = center(m);
  return out;
}

DetectorModel DetectorModel::photon_counting(double eta) {
  DetectorModel m;
  m.kind = DetectorKind::PhotonCounting;
  m.efficiency = eta;
  m.validate();
  return m;
}

DetectorModel DetectorModel::homodyne(int bins, double lo, double hi, double vacuum_variance) {
  DetectorModel m;
  m.kind = DetectorKind::RandomPhaseHomodyne;
  m.efficiency = 1.0;
  m.bins = BinGrid{bins, lo, hi};
  m.vacuum_variance = vacuum_variance;
  m.validate();
  return m;
}

void DetectorModel::validate() const {
  if (!(efficiency > 0.0 && efficiency <= 1.0)) {
    throw InvalidArgument("detector efficiency must lie in (0, 1]");
  }
  if (kind == DetectorKind::RandomPhaseHomodyne) {
    if (bins.count < 2) throw InvalidArgument("homodyne detector needs at least 2 bins");
    if (!(bins.lo < bins.hi) || !std::isfinite(bins.lo) || !std::isfinite(bins.hi)) {
      throw InvalidArgument("homodyne bin range must satisfy lo < hi");
    }
    if (!(vacuum_variance > 0.0) || !std::isfinite(vacuum_variance)) {
      throw InvalidArgument("homodyne vacuum variance must be positive");
    }
  }
}

double DetectorModel::recorded_to_oscillator() const {
  return std::sqrt(0.5 / vacuum_variance);
}

double OutcomeDistribution::recorded_mass() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

double OutcomeDistribution::mean() const {
  double s = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) s += static_cast<double>(n) * probs[n];
  return s;
}

OutcomeDistribution bernoulli_transform(const PhotonDistribution& rho, double eta, int n_max) {
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("efficiency must lie in (0, 1]");
  if (n_max < 0) throw InvalidArgument("n_max must be >= 0");

  OutcomeDistribution out;
  out.setting = kPhotocountSetting;
  out.probs.assign(static_cast<std::size_t>(n_max) + 1, 0.0);

  if (eta == 1.0) {
    for (int n = 0; n <= std::min(n_max, rho.cutoff); ++n) out.probs[static_cast<std::size_t>(n)] = rho[n];
  } else {
    std::vector<double> log_factorial(static_cast<std::size_t>(rho.cutoff) + 1);
    for (int k = 0; k <= rho.cutoff; ++k) log_factorial[static_cast<std::size_t>(k)] = std::lgamma(k + 1.0);
    const double log_eta = std::log(eta);
    const double log_loss = std::log1p(-eta);
    // Largest photon numbers first, so small contributions accumulate before large ones.
    for (int nu = rho.cutoff; nu >= 0; --nu) {
      const double r = rho[nu];
      if (r <= 0.0) continue;
      const double log_r = std::log(r) + log_factorial[static_cast<std::size_t>(nu)];
      const int top = std::min(nu, n_max);
      for (int n = 0; n <= top; ++n) {
        const double log_term = log_r - log_factorial[static_cast<std::size_t>(n)] -
                                log_factorial[static_cast<std::size_t>(nu - n)] + n * log_eta +
                                (nu - n) * log_loss;
        out.probs[static_cast<std::size_t>(n)] += std::exp(log_term);
      }
    }
  }
  out.leftover = checked_leftover(out.recorded_mass(), "bernoulli_transform");
  return out;
}

OutcomeDistribution bernoulli_transform(const PhotonDistribution& rho, double eta) {
  return bernoulli_transform(rho, eta, rho.cutoff);
}

OutcomeDistribution homodyne_bin_distribution(const QuadratureDensity& density,
                                              const DetectorModel& model) {
  model.validate();
  if (model.kind != DetectorKind::RandomPhaseHomodyne) {
    throw InvalidArgument("homodyne_bin_distribution needs a random-phase homodyne detector");
  }
  const BinGrid grid = model.oscillator_bins();
  auto f = [&](double x) { return density(x); };

  OutcomeDistribution out;
  out.setting = kHomodyneSetting;
  out.probs.resize(static_cast<std::size_t>(grid.count));
  for (int m = 0; m < grid.count; ++m) {
    double error = 0.0;
    const double p = adaptive_gk15(f, grid.edge(m), grid.edge(m + 1), 15, 1e-15, error);
    if (!(error < kBinQuadratureTolerance) || !std::isfinite(p)) {
      throw NumericalError("bin quadrature did not converge in bin " + std::to_string(m) +
                           " (error estimate " + std::to_string(error) + ")");
    }
    out.probs[static_cast<std::size_t>(m)] = std::max(p, 0.0);
  }
  out.leftover = checked_leftover(out.recorded_mass(), "homodyne_bin_distribution");
  return out;
}

}  // namespace photostat
