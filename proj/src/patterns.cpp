#include "photostat/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <string>

#include "photostat/error.hpp"
#include "photostat/oscillator.hpp"

namespace photostat {

namespace {

constexpr double kMaxStep = 5e-4;

// y'' = (x^2 - 2n - 1) y for all n at once, advanced by classical RK4.
class IrregularSolutions {
 public:
  explicit IrregularSolutions(int nu_max)
      : size_(static_cast<std::size_t>(nu_max) + 1), value_(size_), slope_(size_) {
    // phi_n(0) from phi_{n+1}(0) = -sqrt(n/(n+1)) phi_{n-1}(0), with phi_0 odd
    // and phi_1(0) = -sqrt(2) pi^{1/4}; the slope from phi_n' = x phi_n - sqrt(2(n+1)) phi_{n+1}.
    std::vector<double> at_origin(size_ + 1, 0.0);
    if (at_origin.size() > 1) at_origin[1] = -std::numbers::sqrt2 * std::sqrt(std::sqrt(std::numbers::pi));
    for (std::size_t n = 1; n + 1 < at_origin.size(); ++n) {
      const double dn = static_cast<double>(n);
      at_origin[n + 1] = -std::sqrt(dn / (dn + 1.0)) * at_origin[n - 1];
    }
    for (std::size_t n = 0; n < size_; ++n) {
      value_[n] = at_origin[n];
      slope_[n] = -std::sqrt(2.0 * (static_cast<double>(n) + 1.0)) * at_origin[n + 1];
    }
  }

  void advance_to(double target) {
    while (x_ < target) {
      const double h = std::min(kMaxStep, target - x_);
      step(h);
      x_ = (target - x_ <= kMaxStep) ? target : x_ + h;
    }
  }

  double value(std::size_t n) const { return value_[n]; }
  double slope(std::size_t n) const { return slope_[n]; }

 private:
  void step(double h) {
    k1v_.resize(size_), k1s_.resize(size_), k2v_.resize(size_), k2s_.resize(size_);
    k3v_.resize(size_), k3s_.resize(size_), k4v_.resize(size_), k4s_.resize(size_);
    const double x0 = x_;
    const double xm = x_ + 0.5 * h;
    const double x1 = x_ + h;
    for (std::size_t n = 0; n < size_; ++n) {
      const double e = 2.0 * static_cast<double>(n) + 1.0;
      const double v = value_[n];
      const double s = slope_[n];
      const double k1v = s;
      const double k1s = (x0 * x0 - e) * v;
      const double k2v = s + 0.5 * h * k1s;
      const double k2s = (xm * xm - e) * (v + 0.5 * h * k1v);
      const double k3v = s + 0.5 * h * k2s;
      const double k3s = (xm * xm - e) * (v + 0.5 * h * k2v);
      const double k4v = s + h * k3s;
      const double k4s = (x1 * x1 - e) * (v + h * k3v);
      value_[n] = v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
      slope_[n] = s + h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
    }
  }

  std::size_t size_;
  std::vector<double> value_;
  std::vector<double> slope_;
  std::vector<double> k1v_, k1s_, k2v_, k2s_, k3v_, k3s_, k4v_, k4s_;
  double x_ = 0.0;
};

void require_turning_point(int nu_max, std::span<const double> xs) {
  double reach = 0.0;
  for (double x : xs) reach = std::max(reach, std::abs(x));
  if (reach < turning_point(nu_max)) {
    throw InvalidArgument("grid half-width " + std::to_string(reach) +
                          " does not reach the turning point of nu = " + std::to_string(nu_max));
  }
}

}  // namespace

std::vector<std::vector<double>> pattern_functions(int nu_max, std::span<const double> xs) {
  if (nu_max < 0) throw InvalidArgument("nu_max must be >= 0");
  std::vector<std::vector<double>> out(static_cast<std::size_t>(nu_max) + 1,
                                       std::vector<double>(xs.size()));
  // f_nu is even, so integrate once over |x| in increasing order.
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(xs[a]) < std::abs(xs[b]); });

  IrregularSolutions phi(nu_max + 1);
  std::vector<double> psi(static_cast<std::size_t>(nu_max) + 2);
  for (std::size_t idx : order) {
    const double x = std::abs(xs[idx]);
    phi.advance_to(x);
    hermite_functions(x, psi);
    for (std::size_t n = 0; n <= static_cast<std::size_t>(nu_max); ++n) {
      const double dpsi = x * psi[n] - std::sqrt(2.0 * (static_cast<double>(n) + 1.0)) * psi[n + 1];
      out[n][idx] = dpsi * phi.value(n) + psi[n] * phi.slope(n);
    }
  }
  return out;
}

std::vector<double> pattern_function(int nu, std::span<const double> xs) {
  if (nu < 0) throw InvalidArgument("nu must be >= 0");
  require_turning_point(nu, xs);
  return std::move(pattern_functions(nu, xs).back());
}

double orthogonality_error(const std::vector<std::vector<double>>& values,
                           std::span<const double> grid, double spacing) {
  const std::size_t count = values.size();
  if (count == 0) return 0.0;
  std::vector<std::vector<double>> weights(count, std::vector<double>(grid.size()));
  std::vector<double> psi(count);
  for (std::size_t m = 0; m < grid.size(); ++m) {
    hermite_functions(grid[m], psi);
    for (std::size_t mu = 0; mu < count; ++mu) weights[mu][m] = psi[mu] * psi[mu] * spacing;
  }
  double worst = 0.0;
  for (std::size_t nu = 0; nu < count; ++nu) {
    for (std::size_t mu = 0; mu < count; ++mu) {
      double s = 0.0;
      for (std::size_t m = 0; m < grid.size(); ++m) s += values[nu][m] * weights[mu][m];
      worst = std::max(worst, std::abs(s - (nu == mu ? 1.0 : 0.0)));
    }
  }
  return worst;
}

PatternTable::PatternTable(const DetectorModel& model, int nu_max) : nu_max_(nu_max) {
  model.validate();
  if (model.kind != DetectorKind::RandomPhaseHomodyne) {
    throw InvalidArgument("pattern functions need a random-phase homodyne detector");
  }
  if (model.efficiency != 1.0) {
    throw InvalidArgument("pattern functions are implemented for unit efficiency only");
  }
  if (nu_max < 0) throw InvalidArgument("nu_max must be >= 0");
  const BinGrid bins = model.oscillator_bins();
  grid_ = bins.centers();
  spacing_ = bins.width();
  require_turning_point(nu_max, grid_);
  values_ = pattern_functions(nu_max, grid_);
  orthogonality_error_ = photostat::orthogonality_error(values_, grid_, spacing_);
  if (!(orthogonality_error_ < kOrthogonalityTolerance)) {
    throw NumericalError("pattern-function orthogonality self-test failed for nu_max = " +
                         std::to_string(nu_max) + ": error " + std::to_string(orthogonality_error_) +
                         " exceeds 1e-3 (grid too coarse or too narrow)");
  }
}

std::span<const double> PatternTable::values(int nu) const {
  if (nu < 0 || nu > nu_max_) {
    throw InvalidArgument("pattern table holds nu <= " + std::to_string(nu_max_) + ", asked for " +
                          std::to_string(nu));
  }
  return values_[static_cast<std::size_t>(nu)];
}

std::vector<double> PatternTable::parity_kernel_values(int cutoff) const {
  if (cutoff < 0 || cutoff > nu_max_) {
    throw InvalidArgument("parity cutoff K must lie in [0, " + std::to_string(nu_max_) + "]");
  }
  std::vector<double> g(grid_.size(), 0.0);
  for (int nu = 0; nu <= cutoff; ++nu) {
    const double sign = nu % 2 == 0 ? 1.0 : -1.0;
    const auto f = values(nu);
    for (std::size_t m = 0; m < g.size(); ++m) g[m] += sign * f[m];
  }
  return g;
}

KernelSet homodyne_rho_kernel(const PatternTable& table, int nu) {
  KernelSet k;
  k.label = "rho_" + std::to_string(nu);
  const auto f = table.values(nu);
  k.coefficients.emplace(kHomodyneSetting, std::vector<double>(f.begin(), f.end()));
  return k;
}

KernelSet homodyne_rho_kernel(int nu, const DetectorModel& model) {
  return homodyne_rho_kernel(PatternTable(model, nu), nu);
}

KernelSet parity_homodyne_kernel(const PatternTable& table, int cutoff) {
  KernelSet k;
  k.label = "parity_K" + std::to_string(cutoff);
  k.coefficients.emplace(kHomodyneSetting, table.parity_kernel_values(cutoff));
  return k;
}

KernelSet parity_homodyne_kernel(int cutoff, const DetectorModel& model) {
  if (cutoff < 0) throw InvalidArgument("parity cutoff K must be >= 0");
  return parity_homodyne_kernel(PatternTable(model, cutoff), cutoff);
}

}  // namespace photostat
