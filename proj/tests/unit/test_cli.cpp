#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mfg_cli/cli.hpp"
#include "mfg_cli/manifest.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = mfg::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("mfg_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    mac = (dir / "mac.json").string();
    ASSERT_EQ(run({"mac", "--out", mac}).code, 0);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path dir;
  std::string mac;
};

TEST_F(Cli, ValidateAcceptsTheMacGame) {
  const Result r = run({"validate", mac, "--protocol", "imitative"});
  EXPECT_EQ(r.code, mfg::cli::kExitOk) << r.err;
  EXPECT_NE(r.out.find("rate_bound"), std::string::npos);
}

TEST_F(Cli, ValidateNamesABadKernelRow) {
  json g = json::parse(slurp(mac));
  g["subpops"][0]["kernel"]["F"]["L"]["F"] = 0.5;
  const auto bad = (dir / "bad.json").string();
  std::ofstream(bad) << g.dump();
  const Result r = run({"validate", bad});
  EXPECT_EQ(r.code, mfg::cli::kExitDomainFailure);
  EXPECT_NE(r.out.find("kernel_stochastic"), std::string::npos);
}

TEST_F(Cli, MalformedJsonIsAnInputError) {
  const auto bad = (dir / "broken.json").string();
  std::ofstream(bad) << "{\"beta\": ";
  EXPECT_EQ(run({"validate", bad}).code, mfg::cli::kExitInputError);
  EXPECT_EQ(run({"validate", (dir / "missing.json").string()}).code, mfg::cli::kExitInputError);
}

TEST_F(Cli, UnknownFlagIsAnInputErrorAndHelpSucceeds) {
  EXPECT_EQ(run({"validate", mac, "--frobnicate"}).code, mfg::cli::kExitInputError);
  EXPECT_EQ(run({"--help"}).code, mfg::cli::kExitOk);
}

TEST_F(Cli, InvalidMacParameterNamesTheConstraint) {
  const Result r = run({"mac", "--alpha", "0.5", "--gamma", "0.5"});
  EXPECT_EQ(r.code, mfg::cli::kExitInputError);
  EXPECT_NE(r.err.find("alpha*P_H + gamma <= 1"), std::string::npos);
}

TEST_F(Cli, SimulateMfWritesRowsThatKeepMass) {
  const auto out = (dir / "traj.csv").string();
  const Result r = run({"simulate-mf", mac, "--protocol", "imitative", "--t-end", "1", "--record-every", "10",
                        "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("rest_residual"), std::string::npos);
  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("t,mac.E.1", 0), 0u);
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    double mass = 0.0;
    while (std::getline(ss, cell, ',')) mass += std::stod(cell);
    EXPECT_NEAR(mass, 1.0, 1e-10);
    ++rows;
  }
  EXPECT_EQ(rows, 11u);
  EXPECT_TRUE(fs::exists(dir / "traj.meta.json"));
  const json manifest = json::parse(slurp(dir / "traj.manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate-mf");
  EXPECT_EQ(manifest["exit_code"], 0);
  EXPECT_EQ(manifest["tool_version"], mfg::cli::version());
  EXPECT_EQ(manifest["config_hash"].get<std::string>().size(), 16u);
}

TEST_F(Cli, OversizedStepIsANumericError) {
  const auto out = (dir / "traj.csv").string();
  const Result r = run({"simulate-mf", mac, "--protocol", "smith", "--t-end", "5", "--dt", "1", "--out", out});
  EXPECT_EQ(r.code, mfg::cli::kExitNumericError);
}

TEST_F(Cli, SimulatePopIsReproducible) {
  const auto a = (dir / "a.csv").string();
  const auto b = (dir / "b.csv").string();
  for (const auto& out : {a, b}) {
    ASSERT_EQ(run({"simulate-pop", mac, "--n", "200", "--seed", "4", "--t-end", "1", "--grid", "0.1",
                   "--out", out})
                  .code,
              0);
  }
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_FALSE(slurp(a).empty());
}

TEST_F(Cli, ConvergenceWithOneSizeHasNullSlope) {
  const auto out = (dir / "conv").string();
  const Result r = run({"convergence", mac, "--n-list", "50", "--seeds", "2", "--t-end", "0.5", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const json summary = json::parse(slurp(fs::path(out) / "summary.json"));
  EXPECT_TRUE(summary["slope"].is_null());
  EXPECT_EQ(slurp(fs::path(out) / "error_table.csv").rfind("N,seed,sup_l1_error\n", 0), 0u);
  EXPECT_TRUE(fs::exists(fs::path(out) / "manifest.json"));
}

TEST_F(Cli, FindAndCheckMsneAgree) {
  const auto report = (dir / "msne_report.json").string();
  const Result f = run({"find-msne", mac, "--out", report});
  ASSERT_EQ(f.code, 0) << f.err;
  const json rep = json::parse(slurp(report));
  EXPECT_TRUE(rep["converged"].get<bool>());
  EXPECT_NEAR(rep["policy_marginals"]["mac"][0].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(rep["strict"]["strict"].get<bool>());

  const Result c = run({"check-msne", mac, "--mu", report});
  EXPECT_EQ(c.code, 0) << c.err;
}

TEST_F(Cli, CheckMsneRejectsANonEquilibrium) {
  const auto mu = (dir / "mu.json").string();
  std::ofstream(mu) << R"({"mu": {"mac": [[0.25,0,0,0.25],[0,0,0,0.25],[0,0,0,0],[0,0,0,0.25]]}})";
  const Result r = run({"check-msne", mac, "--mu", mu});
  EXPECT_EQ(r.code, mfg::cli::kExitDomainFailure);
  EXPECT_NE(r.out.find("optimality"), std::string::npos);
}

TEST_F(Cli, DiagnosePoscorrFindsNoViolations) {
  const auto out = (dir / "poscorr.json").string();
  const Result r = run({"diagnose", mac, "poscorr", "--protocol", "smith", "--samples", "2000", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(slurp(out));
  EXPECT_EQ(rep["passed"], true);
}

TEST_F(Cli, DiagnoseGrowthNeedsImitation) {
  EXPECT_EQ(run({"diagnose", mac, "growth", "--protocol", "bnn"}).code, mfg::cli::kExitInputError);
  EXPECT_EQ(run({"diagnose", mac, "growth", "--protocol", "imitative"}).code, 0);
}

TEST_F(Cli, ManifestGoesToStderrWithoutAnOutputFile) {
  const Result r = run({"validate", mac});
  EXPECT_NE(r.err.find("manifest: {"), std::string::npos);
}

TEST(ManifestPath, FollowsThePrimaryOutput) {
  EXPECT_EQ(mfg::cli::manifest_path_for("out/traj.csv", false), fs::path("out/traj.manifest.json"));
  EXPECT_EQ(mfg::cli::manifest_path_for("out/conv", true), fs::path("out/conv/manifest.json"));
}

}  // namespace
