#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "photostat/cli/commands.hpp"
#include "photostat/cli/experiment.hpp"
#include "photostat/cli/result_table.hpp"
#include "photostat/error.hpp"

using namespace photostat;
using namespace photostat::cli;

namespace {

double num(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  ADD_FAILURE() << "expected a number, got " << std::get<std::string>(c);
  return std::nan("");
}

ExperimentConfig make(const std::string& json) { return parse_config(json); }

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "photostat_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

int run_tool(const std::string& args) {
  const std::string cmd = std::string(PHOTOSTAT_EXE) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kHomodyne = R"("detector": {"kind": "random_phase_homodyne"})";

}  // namespace

TEST(Config, DefaultsAreFilledIn) {
  const auto c = make(R"({"schema_version": 1, "task": "reconstruct_photon_dist",
                          "state": {"kind": "coherent", "mean_photon_number": 4}})");
  EXPECT_EQ(c.detector.kind, DetectorKind::PhotonCounting);
  EXPECT_DOUBLE_EQ(c.detector.efficiency, 0.8);
  EXPECT_EQ(c.n_runs, 4000u);
  EXPECT_EQ(c.nu_max, 20);
  const auto h = make(std::string(R"({"schema_version": 1, "task": "correlations",
                          "state": {"kind": "thermal", "mean_photon_number": 2},)") + kHomodyne + "}");
  EXPECT_EQ(h.n_runs, 40000u);
  EXPECT_EQ(h.detector.bins.count, 1200);
  EXPECT_DOUBLE_EQ(h.detector.bins.lo, -6.0);
  EXPECT_DOUBLE_EQ(h.detector.efficiency, 1.0);
}

TEST(Config, JsonRoundTrip) {
  const auto c = make(R"({"schema_version": 1, "task": "parity_vs_mean_photon", "seed": 18446744073709551615,
                          "state": {"kind": "squeezed_vacuum"}, "sweep": [0.1, 0.25], "parity_cutoff": 7})");
  const auto again = config_from_json(c.to_json());
  EXPECT_EQ(again.to_json().dump(), c.to_json().dump());
  EXPECT_EQ(again.seed, 18446744073709551615ULL);
}

TEST(Config, ErrorsCarryPointerAndLine) {
  const std::string text =
      "{\n"
      "  \"schema_version\": 1,\n"
      "  \"task\": \"reconstruct_photon_dist\",\n"
      "  \"state\": {\"kind\": \"thermal\", \"mean_photon_number\": 2},\n"
      "  \"detector\": {\n"
      "    \"kind\": \"photon_counting\",\n"
      "    \"efficiency\": 1.3\n"
      "  }\n"
      "}\n";
  try {
    parse_config(text, std::nullopt, "exp.json");
    FAIL() << "accepted an efficiency above 1";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("exp.json:7:"), std::string::npos) << msg;
    EXPECT_NE(msg.find("/detector/efficiency"), std::string::npos) << msg;
  }
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(make("{\"schema_version\": 1,\n \"task\": }"), ConfigError);
  EXPECT_THROW(make(R"({"task": "correlations", "state": {"kind": "thermal", "mean_photon_number": 1}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 2, "task": "correlations"})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations", "colour": "red",
                        "state": {"kind": "thermal", "mean_photon_number": 1}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations"})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations",
                        "state": {"kind": "thermal", "mean_photon_number": -1}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations", "state": {"kind": "cat", "mean_photon_number": 1}})"),
               ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations", "state": {"kind": "thermal", "mean_photon_number": 1},
                        "detector": {"kind": "random_phase_homodyne", "efficiency": 0.9}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "correlations", "state": {"kind": "thermal", "mean_photon_number": 1},
                        "detector": {"kind": "random_phase_homodyne", "range": [-2, 2]}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "truncated_parity_vs_k", "sweep": [1.5],
                        "state": {"kind": "thermal", "mean_photon_number": 1}})"), ConfigError);
  EXPECT_THROW(make(R"({"schema_version": 1, "task": "pattern_table_export", "detector": {"kind": "photon_counting"}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"schema_version": 1, "task": "simulate", "state": {"kind": "thermal", "mean_photon_number": 1}})",
                            Task::Correlations),
               ConfigError);
}

TEST(Reconstruct, CountingIsUnbiased) {
  const auto t = cmd_reconstruct(make(R"({"schema_version": 1, "task": "reconstruct_photon_dist",
                                           "state": {"kind": "coherent", "mean_photon_number": 4}})"));
  ASSERT_EQ(t.rows(), 21u);
  for (std::size_t r = 0; r < t.rows(); ++r)
    EXPECT_NEAR(num(t.column("expected").cells[r]), num(t.column("rho").cells[r]), 1e-12);
}

TEST(Reconstruct, ThermalCountingErrorsGrow) {
  const auto t = cmd_reconstruct(make(R"({"schema_version": 1, "task": "reconstruct_photon_dist",
                                           "state": {"kind": "thermal", "mean_photon_number": 2}})"));
  const auto& sd = t.column("std_dev").cells;
  for (std::size_t nu = 6; nu + 1 < sd.size(); ++nu) EXPECT_GT(num(sd[nu + 1]), num(sd[nu]));
}

TEST(Reconstruct, HomodyneFloor) {
  for (const char* state : {"coherent", "thermal", "squeezed_vacuum"}) {
    const auto t = cmd_reconstruct(make(std::string(R"({"schema_version": 1, "task": "reconstruct_photon_dist",
        "state": {"kind": ")") + state + R"(", "mean_photon_number": 2}, )" + kHomodyne + "}"));
    EXPECT_NEAR(num(t.column("std_dev").cells[12]) / std::sqrt(2.0 / 40000), 1.0, 0.15) << state;
  }
}

TEST(Reconstruct, TrialsAddEnsembleColumns) {
  const auto t = cmd_reconstruct(make(R"({"schema_version": 1, "task": "reconstruct_photon_dist", "n_trials": 5,
                                           "state": {"kind": "thermal", "mean_photon_number": 1}})"));
  EXPECT_NO_THROW(t.column("mc_mean"));
  EXPECT_NO_THROW(t.column("mc_std_dev"));
}

TEST(Correlations, ThermalCountingNearMinusOne) {
  const auto t = cmd_correlations(make(R"({"schema_version": 1, "task": "correlations", "nu_max": 30,
                                            "state": {"kind": "thermal", "mean_photon_number": 2}})"));
  for (std::size_t nu = 15; nu < t.rows(); ++nu) EXPECT_LT(num(t.column("corr").cells[nu]), -0.9) << nu;
}

TEST(Correlations, UnderflowIsFlaggedNotNaN) {
  const auto t = cmd_correlations(make(R"({"schema_version": 1, "task": "correlations", "tail_tolerance": 1e-6,
                                            "state": {"kind": "coherent", "mean_photon_number": 0.001}})"));
  EXPECT_EQ(std::get<std::string>(t.column("corr").cells.back()), kUndefined);
  EXPECT_EQ(t.to_csv().find("nan"), std::string::npos);
  EXPECT_EQ(t.to_json().find("nan"), std::string::npos);
}

TEST(Correlations, HomodyneVacuumAlwaysDefined) {
  const auto t = cmd_correlations(make(std::string(R"({"schema_version": 1, "task": "correlations", "nu_max": 21,
      "state": {"kind": "coherent", "mean_photon_number": 0}, )") + kHomodyne + "}"));
  ASSERT_EQ(t.rows(), 21u);
  for (const auto& c : t.column("corr").cells) EXPECT_TRUE(std::holds_alternative<double>(c));
}

TEST(ParityScan, ThermalVarianceDivergesAtOne) {
  const auto t = cmd_parity_scan(make(R"({"schema_version": 1, "task": "parity_vs_mean_photon",
      "state": {"kind": "thermal"}, "sweep": [0.5, 0.99, 0.999999, 1.0, 1.01, 2.4, 2.5, 3.0]})"));
  const std::vector<std::string> status{"finite", "finite", "finite", "variance_diverged",
                                        "variance_diverged", "variance_diverged", "diverged", "diverged"};
  for (std::size_t r = 0; r < status.size(); ++r) {
    EXPECT_EQ(std::get<std::string>(t.column("status").cells[r]), status[r]) << r;
    EXPECT_EQ(std::holds_alternative<std::string>(t.column("std_dev").cells[r]), r >= 3) << r;
  }
  EXPECT_NEAR(num(t.column("std_dev").cells[0]), std::sqrt(4.375e-4), 1e-12);
}

TEST(ParityScan, VacuumIsExact) {
  const auto t = cmd_parity_scan(make(R"({"schema_version": 1, "task": "parity_vs_mean_photon",
      "state": {"kind": "coherent"}, "sweep": [0]})"));
  EXPECT_DOUBLE_EQ(num(t.column("expected").cells[0]), 1.0);
  EXPECT_DOUBLE_EQ(num(t.column("std_dev").cells[0]), 0.0);
  EXPECT_DOUBLE_EQ(num(t.column("mc_estimate").cells[0]), 1.0);
}

TEST(ParityScan, HomodyneCutoffSweep) {
  const auto t = cmd_parity_scan(make(std::string(R"({"schema_version": 1, "task": "truncated_parity_vs_k",
      "state": {"kind": "coherent", "mean_photon_number": 4}, )") + kHomodyne + "}"));
  ASSERT_EQ(t.rows(), 21u);
  EXPECT_NEAR(num(t.column("expected").cells[20]), std::exp(-8.0), 1e-6);
  for (std::size_t k = 8; k < 20; ++k)
    EXPECT_GT(num(t.column("std_dev").cells[k + 1]), num(t.column("std_dev").cells[k]));
}

TEST(PatternTable, ExportsColumns) {
  const auto t = cmd_pattern_table(make(R"({"schema_version": 1, "task": "pattern_table_export", "nu_max": 4,
                                             "parity_cutoff": 6})"));
  EXPECT_EQ(t.rows(), 1200u);
  EXPECT_EQ(t.columns().size(), 2u + 5u + 1u);
  EXPECT_LT(t.metadata["diagnostics"]["orthogonality_error"].get<double>(), 1e-3);
}

TEST(PatternTable, CoarseGridIsNumericalFailure) {
  EXPECT_THROW(cmd_pattern_table(make(R"({"schema_version": 1, "task": "pattern_table_export",
                                          "detector": {"kind": "random_phase_homodyne", "bins": 40}})")),
               NumericalError);
}

TEST(Pipeline, SimulateThenEstimateMatchesReconstruct) {
  const std::string state = R"("state": {"kind": "thermal", "mean_photon_number": 2}, "seed": 99)";
  const auto sim = cmd_simulate(make(R"({"schema_version": 1, "task": "simulate", )" + state + "}"));
  const auto h = histogram_from_table(parse_csv_table(sim.to_csv()));
  EXPECT_EQ(h.n_runs, 4000u);
  auto est_config = make(R"({"schema_version": 1, "task": "estimate", )" + state + "}");
  const auto est = cmd_estimate(est_config, h);
  const auto rec = cmd_reconstruct(make(R"({"schema_version": 1, "task": "reconstruct_photon_dist", )" + state + "}"));
  for (std::size_t nu = 0; nu <= 20; ++nu)
    EXPECT_DOUBLE_EQ(num(est.column("estimate").cells[nu]), num(rec.column("mc_estimate").cells[nu]));
  EXPECT_EQ(std::get<std::string>(est.column("quantity").cells.back()), "parity_K79");
}

TEST(Replay, ByteIdenticalForEveryCommand) {
  const std::vector<std::string> configs{
      R"({"schema_version": 1, "task": "reconstruct_photon_dist", "n_trials": 3, "state": {"kind": "thermal", "mean_photon_number": 2}})",
      std::string(R"({"schema_version": 1, "task": "correlations", "n_trials": 4, "state": {"kind": "squeezed_vacuum", "mean_photon_number": 1}, )") + kHomodyne + "}",
      R"({"schema_version": 1, "task": "parity_vs_mean_photon", "state": {"kind": "coherent"}, "sweep": [0.5, 1, 2]})",
      std::string(R"({"schema_version": 1, "task": "truncated_parity_vs_k", "sweep": [2, 4, 8], "state": {"kind": "coherent", "mean_photon_number": 4}, )") + kHomodyne + "}",
      R"({"schema_version": 1, "task": "pattern_table_export", "nu_max": 3})",
      R"({"schema_version": 1, "task": "simulate", "state": {"kind": "coherent", "mean_photon_number": 1}})",
  };
  for (const auto& text : configs) {
    const auto first = run_task(make(text));
    const std::string csv = first.to_csv();
    const auto path = temp_path("replay.csv");
    write(path, csv);
    EXPECT_EQ(replay(read_metadata(path)).to_csv(), csv) << text;
    const auto jpath = temp_path("replay.json");
    write(jpath, first.to_json());
    EXPECT_EQ(replay(read_metadata(jpath)).to_json(), first.to_json()) << text;
    EXPECT_EQ(load_config(path).to_json().dump(), make(text).to_json().dump());
  }
}

TEST(Determinism, SeedsAndThreads) {
  const std::string base = R"({"schema_version": 1, "task": "reconstruct_photon_dist", "n_trials": 16,
                               "state": {"kind": "thermal", "mean_photon_number": 1}, "seed": )";
  const auto a = cmd_reconstruct(make(base + "5}"), RunOptions{1}).to_csv();
  const auto b = cmd_reconstruct(make(base + "5}"), RunOptions{7}).to_csv();
  const auto c = cmd_reconstruct(make(base + "6}")).to_csv();
  EXPECT_EQ(a, b);
  EXPECT_NE(a.substr(a.find("\nnu,")), c.substr(c.find("\nnu,")));
}

TEST(Tool, ExitCodes) {
  const auto good = temp_path("good.json");
  write(good, R"({"schema_version": 1, "task": "correlations", "state": {"kind": "thermal", "mean_photon_number": 2}})");
  const auto bad = temp_path("bad.json");
  write(bad, R"({"schema_version": 1, "state": {"kind": "thermal", "mean_photon_number": 2}, "detector": {"efficiency": 2}})");
  const auto coarse = temp_path("coarse.json");
  write(coarse, R"({"schema_version": 1, "detector": {"kind": "random_phase_homodyne", "bins": 40}})");
  const auto out = temp_path("out.csv");

  EXPECT_EQ(run_tool("correlations --config " + good.string()), 0);
  EXPECT_EQ(run_tool("correlations --config " + bad.string()), 2);
  EXPECT_EQ(run_tool("correlations --config /nonexistent/x.json"), 2);
  EXPECT_EQ(run_tool("reconstruct --config " + good.string()), 2);  // task belongs to another subcommand
  EXPECT_EQ(run_tool("pattern-table --config " + coarse.string()), 3);
  EXPECT_EQ(run_tool("frobnicate"), 2);
  EXPECT_EQ(run_tool("reconstruct --state thermal --mean 2 --seed 4 --json --out " + out.string()), 0);
  EXPECT_EQ(run_tool("replay " + out.string()), 0);
}
