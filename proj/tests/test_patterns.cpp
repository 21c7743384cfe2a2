#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "photostat/error.hpp"
#include "photostat/patterns.hpp"

using namespace photostat;

namespace {

const DetectorModel& paper_grid() {
  static const DetectorModel model = DetectorModel::homodyne(1200, -6.0, 6.0);
  return model;
}

const PatternTable& table20() {
  static const PatternTable t(paper_grid(), 20);
  return t;
}

// D(x) = int_0^x exp(t^2 - x^2) dt by composite Simpson
double dawson(double x) {
  const int steps = 20000;
  const double h = x / steps;
  double s = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = i * h;
    const double w = (i == 0 || i == steps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * std::exp(t * t - x * x);
  }
  return s * h / 3.0;
}

}  // namespace

TEST(Patterns, GroundStateClosedForm) {
  std::vector<double> xs{0.0, 0.4, 1.1, 2.5, 4.0};
  const auto f = pattern_function(0, std::vector<double>{0.0, 0.4, 1.1, 2.5, 4.0, -4.0});
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(f[i], 2.0 - 4.0 * xs[i] * dawson(xs[i]), 1e-8);
}

TEST(Patterns, AgreeWithLaguerreIntegral) {
  std::vector<double> xs;
  for (double x = -7.0; x <= 7.0; x += 0.35) xs.push_back(x);
  const auto f = pattern_functions(30, xs);
  for (int n : {0, 1, 2, 5, 12, 20, 30}) {
    for (std::size_t i = 0; i < xs.size(); i += 3) {
      EXPECT_NEAR(f[static_cast<std::size_t>(n)][i], oracle::pattern_function(n, xs[i]), 1e-6)
          << "n=" << n << " x=" << xs[i];
    }
  }
}

TEST(Patterns, ValueAtOrigin) {
  const auto f = pattern_functions(12, std::vector<double>{0.0});
  for (int n = 0; n <= 12; ++n) EXPECT_NEAR(f[static_cast<std::size_t>(n)][0], n % 2 ? -2.0 : 2.0, 1e-9);
}

TEST(Patterns, EvenAndBounded) {
  const auto& t = table20();
  const std::size_t m = t.grid().size();
  for (int nu = 0; nu <= 20; ++nu) {
    const auto f = t.values(nu);
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      EXPECT_NEAR(f[i], f[m - 1 - i], 1e-9);
      worst = std::max(worst, std::abs(f[i]));
    }
    EXPECT_LE(worst, 4.0) << nu;
  }
}

TEST(Patterns, OrthogonalityOnPaperGrid) {
  EXPECT_LT(table20().orthogonality_error(), 1e-3);
  EXPECT_NEAR(table20().spacing(), 12.0 / 1200 * std::numbers::sqrt2, 1e-15);
}

TEST(Patterns, SelfTestRejectsCoarseGrid) {
  EXPECT_THROW(PatternTable(DetectorModel::homodyne(40, -6.0, 6.0), 20), NumericalError);
}

TEST(Patterns, RejectsGridShortOfTurningPoint) {
  EXPECT_THROW(PatternTable(DetectorModel::homodyne(1200, -1.0, 1.0), 20), InvalidArgument);
  EXPECT_THROW(pattern_function(20, std::vector<double>{0.0, 1.0, 2.0}), InvalidArgument);
}

TEST(Patterns, RejectsCountingDetector) {
  EXPECT_THROW(PatternTable(DetectorModel::photon_counting(1.0), 3), InvalidArgument);
}

TEST(Patterns, VacuumReconstruction) {
  const auto density = phase_averaged_density(StateSpec::vacuum(), 0);
  auto probs = single_setting(homodyne_bin_distribution(density, paper_grid()));
  EXPECT_NEAR(mean_and_variance(homodyne_rho_kernel(table20(), 0), probs, 40000).mean, 1.0, 2e-3);
  EXPECT_NEAR(mean_and_variance(homodyne_rho_kernel(table20(), 5), probs, 40000).mean, 0.0, 2e-3);
  for (int k = 0; k <= 20; ++k)
    EXPECT_NEAR(mean_and_variance(parity_homodyne_kernel(table20(), k), probs, 40000).mean, 1.0, 5e-3);
}

TEST(Patterns, ThermalReconstruction) {
  const auto rho = photon_distribution(StateSpec::thermal(2.0), 1e-16);
  auto probs = single_setting(homodyne_bin_distribution(phase_averaged_density(rho), paper_grid()));
  for (int nu = 0; nu <= 20; ++nu)
    EXPECT_NEAR(mean_and_variance(homodyne_rho_kernel(table20(), nu), probs, 40000).mean, rho[nu], 3e-3);
}

TEST(Patterns, ParityKernel) {
  const auto& t = table20();
  const auto g0 = t.parity_kernel_values(0);
  const auto f0 = t.values(0);
  for (std::size_t i = 0; i < g0.size(); ++i) EXPECT_EQ(g0[i], f0[i]);
  double prev = 0.0;
  std::vector<double> peaks;
  for (int k = 0; k <= 20; ++k) {
    const auto g = t.parity_kernel_values(k);
    double peak = 0.0;
    for (double v : g) peak = std::max(peak, std::abs(v));
    EXPECT_GE(peak, prev - 1e-12) << k;
    prev = peak;
    peaks.push_back(peak);
  }
  EXPECT_GT(peaks[16], 2.0 * peaks[4]);
  EXPECT_EQ(parity_homodyne_kernel(t, 7).label, "parity_K7");
  EXPECT_THROW(t.parity_kernel_values(21), InvalidArgument);
}

TEST(Patterns, KernelFromModel) {
  const auto k = homodyne_rho_kernel(3, paper_grid());
  ASSERT_EQ(k.coefficients.count(kHomodyneSetting), 1u);
  EXPECT_EQ(k.coefficients.at(kHomodyneSetting).size(), 1200u);
  EXPECT_DOUBLE_EQ(k.coefficient(kHomodyneSetting, 600), table20().values(3)[600]);
}
