#include "photostat/oscillator.hpp"

#include <cmath>
#include <numbers>

#include "photostat/error.hpp"

namespace photostat {

namespace {

constexpr double kRescaleThreshold = 1e200;
constexpr double kRescaleFactor = 1e-200;
const double kLogRescale = 200.0 * std::numbers::ln10;

}  // namespace

void hermite_functions(double x, std::span<double> out) {
  if (out.empty()) return;
  const double psi0 = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  double log_scale = -0.5 * x * x;

  out[0] = psi0;
  if (out.size() > 1) out[1] = std::numbers::sqrt2 * x * psi0;
  for (std::size_t n = 1; n + 1 < out.size(); ++n) {
    const double dn = static_cast<double>(n);
    out[n + 1] = std::sqrt(2.0 / (dn + 1.0)) * x * out[n] - std::sqrt(dn / (dn + 1.0)) * out[n - 1];
    if (std::abs(out[n + 1]) > kRescaleThreshold) {
      for (std::size_t k = 0; k <= n + 1; ++k) out[k] *= kRescaleFactor;
      log_scale += kLogRescale;
    }
  }

  const double gauss = std::exp(log_scale);
  if (gauss > 1e-280 && log_scale < 600.0) {
    for (double& v : out) v *= gauss;
    return;
  }
  for (double& v : out) {
    if (v == 0.0) continue;
    v = std::copysign(std::exp(std::log(std::abs(v)) + log_scale), v);
  }
}

std::vector<double> hermite_functions(double x, int nu_max) {
  if (nu_max < 0) throw InvalidArgument("hermite_functions: nu_max must be >= 0");
  std::vector<double> out(static_cast<std::size_t>(nu_max) + 1);
  hermite_functions(x, out);
  return out;
}

double hermite_function(int nu, double x) {
  return hermite_functions(x, nu).back();
}

double turning_point(int nu) {
  return std::sqrt(2.0 * nu + 1.0);
}

}  // namespace photostat
