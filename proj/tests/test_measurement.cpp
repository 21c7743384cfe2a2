#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "photostat/error.hpp"
#include "photostat/measurement.hpp"

using namespace photostat;

TEST(Bernoulli, UnitEfficiencyIsIdentity) {
  const auto rho = photon_distribution(StateSpec::coherent(4.0), 1e-14);
  const auto p = bernoulli_transform(rho, 1.0);
  for (int n = 0; n <= rho.cutoff; ++n) EXPECT_EQ(p.probs[static_cast<std::size_t>(n)], rho[n]);
}

TEST(Bernoulli, SinglePhotonThinning) {
  PhotonDistribution one{{0.0, 1.0}, 1, 0.0};
  const auto p = bernoulli_transform(one, 0.8, 1);
  EXPECT_NEAR(p.probs[0], 0.2, 1e-15);
  EXPECT_NEAR(p.probs[1], 0.8, 1e-15);
  EXPECT_NEAR(p.leftover, 0.0, 1e-15);
}

TEST(Bernoulli, ThermalStaysThermal) {
  const auto rho = photon_distribution(StateSpec::thermal(2.0), 1e-16);
  const auto p = bernoulli_transform(rho, 0.8);
  EXPECT_NEAR(p.probs[0], 1.0 / 2.6, 1e-14);
  for (int n = 0; n < 40; ++n)
    EXPECT_NEAR(p.probs[static_cast<std::size_t>(n)] / oracle::thermal(1.6, n), 1.0, 1e-11) << n;
}

TEST(Bernoulli, AgreesWithDirectSum) {
  for (const auto& spec : {StateSpec::coherent(2.0), StateSpec::squeezed_vacuum(1.0)}) {
    const auto rho = photon_distribution(spec, 1e-14);
    const auto p = bernoulli_transform(rho, 0.6, 30);
    const auto ref = oracle::bernoulli(rho.probs, 0.6, 30);
    for (int n = 0; n <= 30; ++n) EXPECT_NEAR(p.probs[static_cast<std::size_t>(n)], ref[static_cast<std::size_t>(n)], 1e-15);
  }
}

TEST(Bernoulli, MassMeanAndComposition) {
  for (const auto& spec : {StateSpec::coherent(4.0), StateSpec::thermal(2.0), StateSpec::squeezed_vacuum(1.0)}) {
    const auto rho = photon_distribution(spec, 1e-14);
    for (double eta : {0.3, 0.8, 1.0}) {
      const auto p = bernoulli_transform(rho, eta);
      EXPECT_NEAR(p.recorded_mass() + p.leftover, 1.0, 1e-10);
      EXPECT_NEAR(p.mean(), eta * spec.mean_photon_number, 1e-8);
    }
    const auto two_step = bernoulli_transform(
        PhotonDistribution{bernoulli_transform(rho, 0.9).probs, rho.cutoff, 0.0}, 0.7);
    const auto one_step = bernoulli_transform(rho, 0.63);
    for (int n = 0; n <= rho.cutoff; ++n)
      EXPECT_NEAR(two_step.probs[static_cast<std::size_t>(n)], one_step.probs[static_cast<std::size_t>(n)], 1e-10);
  }
}

TEST(Bernoulli, TruncatedOutcomeSetReportsLeftover) {
  const auto rho = photon_distribution(StateSpec::thermal(2.0), 1e-14);
  const auto p = bernoulli_transform(rho, 0.8, 3);
  EXPECT_EQ(p.probs.size(), 4u);
  EXPECT_NEAR(p.leftover, std::pow(1.6 / 2.6, 4), 1e-12);
}

TEST(Bernoulli, RejectsBadEfficiency) {
  const auto rho = photon_distribution(StateSpec::thermal(1.0), 1e-10);
  EXPECT_THROW(bernoulli_transform(rho, 0.0, 5), InvalidArgument);
  EXPECT_THROW(bernoulli_transform(rho, 1.2, 5), InvalidArgument);
  EXPECT_THROW(bernoulli_transform(rho, 0.5, -1), InvalidArgument);
}

TEST(BinGrid, HalfOpenBinsLastClosed) {
  BinGrid g{4, -2.0, 2.0};
  EXPECT_EQ(g.locate(-2.0), 0);
  EXPECT_EQ(g.locate(-1.0), 1);
  EXPECT_EQ(g.locate(1.999), 3);
  EXPECT_EQ(g.locate(2.0), 3);
  EXPECT_FALSE(g.locate(2.0001).has_value());
  EXPECT_FALSE(g.locate(-2.5).has_value());
  EXPECT_DOUBLE_EQ(g.center(0), -1.5);
}

TEST(Detector, Validation) {
  EXPECT_THROW(DetectorModel::photon_counting(0.0).validate(), InvalidArgument);
  EXPECT_THROW(DetectorModel::homodyne(1, -6, 6).validate(), InvalidArgument);
  EXPECT_THROW(DetectorModel::homodyne(10, 6, -6).validate(), InvalidArgument);
  EXPECT_NO_THROW(DetectorModel::homodyne(1200, -6, 6).validate());
  EXPECT_EQ(parse_detector_kind("homodyne"), DetectorKind::RandomPhaseHomodyne);
  EXPECT_EQ(parse_detector_kind("photon_counting"), DetectorKind::PhotonCounting);
}

TEST(Homodyne, VacuumTwoBins) {
  const auto density = phase_averaged_density(StateSpec::vacuum(), 0);
  const auto p = homodyne_bin_distribution(density, DetectorModel::homodyne(2, -6, 6));
  EXPECT_NEAR(p.probs[0], 0.5, 1e-9);
  EXPECT_NEAR(p.probs[1], 0.5, 1e-9);
}

TEST(Homodyne, VacuumFineBinsMatchErf) {
  const auto model = DetectorModel::homodyne(1200, -6, 6);
  const auto density = phase_averaged_density(StateSpec::vacuum(), 0);
  const auto p = homodyne_bin_distribution(density, model);
  ASSERT_EQ(p.probs.size(), 1200u);
  EXPECT_NEAR(p.recorded_mass(), 1.0, 1e-14);
  EXPECT_NEAR(p.recorded_mass() + p.leftover, 1.0, 1e-10);
  const BinGrid osc = model.oscillator_bins();
  for (int m = 0; m < 1200; m += 37) {
    const double exact = 0.5 * (std::erf(osc.edge(m + 1)) - std::erf(osc.edge(m)));
    EXPECT_NEAR(p.probs[static_cast<std::size_t>(m)], exact, 1e-12);
  }
}

TEST(Homodyne, RecordedVarianceFollowsModel) {
  // recorded vacuum variance 1/2 turns the recorded variable into oscillator units
  const auto wide = DetectorModel::homodyne(600, -6, 6, 0.5);
  EXPECT_DOUBLE_EQ(wide.recorded_to_oscillator(), 1.0);
  const auto narrow = DetectorModel::homodyne(600, -6, 6);
  EXPECT_NEAR(narrow.recorded_to_oscillator(), std::sqrt(2.0), 1e-15);
}

TEST(Homodyne, ThermalMatchesMidpointRule) {
  const auto model = DetectorModel::homodyne(1200, -6, 6);
  const auto density = phase_averaged_density(photon_distribution(StateSpec::thermal(2.0), 1e-16));
  const auto p = homodyne_bin_distribution(density, model);
  const BinGrid osc = model.oscillator_bins();
  const int sub = 64;
  for (int m = 0; m < 1200; m += 11) {
    const double w = osc.width() / sub;
    double s = 0.0;
    for (int j = 0; j < sub; ++j) s += density(osc.edge(m) + (j + 0.5) * w) * w;
    EXPECT_NEAR(p.probs[static_cast<std::size_t>(m)], s, 1e-6);
  }
  EXPECT_NEAR(p.recorded_mass() + p.leftover, 1.0, 1e-10);
  EXPECT_GT(p.leftover, 0.0);
}

TEST(Homodyne, RefinementPreservesCumulative) {
  const auto density = phase_averaged_density(photon_distribution(StateSpec::coherent(4.0), 1e-16));
  const auto coarse = homodyne_bin_distribution(density, DetectorModel::homodyne(300, -6, 6));
  const auto fine = homodyne_bin_distribution(density, DetectorModel::homodyne(600, -6, 6));
  double c = 0.0, f = 0.0;
  for (std::size_t m = 0; m < 300; ++m) {
    c += coarse.probs[m];
    f += fine.probs[2 * m] + fine.probs[2 * m + 1];
    EXPECT_NEAR(c, f, 1e-10);
  }
}

TEST(Homodyne, RequiresHomodyneModel) {
  const auto density = phase_averaged_density(StateSpec::vacuum(), 0);
  EXPECT_THROW(homodyne_bin_distribution(density, DetectorModel::photon_counting(0.8)), InvalidArgument);
}
