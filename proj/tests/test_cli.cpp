#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "rpovm/cli.hpp"

using namespace rpovm;

namespace {

std::string data(const char* name) { return std::string(RPOVM_DATA_DIR) + "/" + name; }

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("rpovm_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json report(std::vector<std::string> args, const std::string& name, int expected_code = 0) {
  const auto path = temp_path(name);
  args.push_back("--output");
  args.push_back(path);
  const auto r = run(args);
  EXPECT_EQ(r.code, expected_code) << r.err;
  return nlohmann::json::parse(slurp(path));
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kUsage);
  EXPECT_EQ(run({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(run({"fig1", "--alpha", "0.6"}).code, cli::kUsage);
  EXPECT_EQ(run({"remote-run", "--input", data("fixture_a_povm.json"), "--mode", "sampled"}).code, cli::kUsage);
  EXPECT_EQ(run({"fig1", "--alpha", "0.8", "--beta", "0.6"}).code, cli::kUsage);
}

TEST(Cli, InvalidInput) {
  EXPECT_EQ(run({"analyze", "--input", data("does_not_exist.json")}).code, cli::kInvalidInput);
  const auto bad = temp_path("bad.json");
  std::ofstream(bad) << R"({"n_qubits": 1, "operators": [[[1, 0], [0, 0.5]]]})";
  EXPECT_EQ(run({"analyze", "--input", bad}).code, cli::kInvalidInput);
  std::ofstream(bad) << R"({"n_qubits": 1, "operators": [[[1, 0, 0], [0, 1, 0], [0, 0, 1]]]})";
  EXPECT_EQ(run({"analyze", "--input", bad}).code, cli::kInvalidInput);
}

TEST(Cli, AnalyzeFixtureA) {
  const auto j = report({"analyze", "--input", data("fixture_a_povm.json")}, "analyze_a.json");
  EXPECT_EQ(j["command"], "analyze");
  EXPECT_TRUE(j["roots_oe"].get<bool>());
  EXPECT_NEAR(j["E_POVM"].get<double>(), 0.5435644432, 1e-9);
}

TEST(Cli, AnalyzeKrausFixture) {
  const auto j = report({"analyze", "--input", data("fixture_d_kraus.json")}, "analyze_d.json");
  EXPECT_FALSE(j["kraus_oe"].get<bool>());
  EXPECT_NEAR(j["kraus_max_offdiagonal"].get<double>(), 0.125, 1e-12);
}

TEST(Cli, RemoteRunExact) {
  const auto j = report({"remote-run", "--input", data("zz_measurement.json"), "--count", "3", "--seed", "4"},
                        "remote_zz.json");
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_EQ(j["runs"].size(), 3u);
  EXPECT_NEAR(j["E_POVM"].get<double>(), 2.0, 1e-12);
}

TEST(Cli, RemoteRunZeroCount) {
  const auto r = run({"remote-run", "--input", data("zz_measurement.json"), "--count", "0"});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
}

TEST(Cli, Fig1Report) {
  const auto j = report({"fig1", "--alpha", "0.6", "--beta", "0.8"}, "fig1.json");
  EXPECT_EQ(j["command"], "fig1");
  EXPECT_EQ(j["signs"].size(), 2u);
}

TEST(Cli, SameSeedSameBytes) {
  const std::vector<std::string> args{"fig1", "--alpha", "0.6", "--beta", "0.8", "--mode", "sampled",
                                      "--seed", "17",  "--shots", "500"};
  auto a = args, b = args;
  a.insert(a.end(), {"--output", temp_path("seed_a.json")});
  b.insert(b.end(), {"--output", temp_path("seed_b.json")});
  ASSERT_EQ(run(a).code, cli::kOk);
  ASSERT_EQ(run(b).code, cli::kOk);
  EXPECT_EQ(slurp(temp_path("seed_a.json")), slurp(temp_path("seed_b.json")));

  const std::vector<std::string> remote{"remote-run", "--input", data("fixture_a_povm.json"), "--mode",
                                        "sampled",    "--seed",  "3",                          "--shots", "300"};
  auto c = remote, d = remote;
  c.insert(c.end(), {"--output", temp_path("remote_a.json")});
  d.insert(d.end(), {"--output", temp_path("remote_b.json")});
  ASSERT_EQ(run(c).code, cli::kOk);
  ASSERT_EQ(run(d).code, cli::kOk);
  EXPECT_EQ(slurp(temp_path("remote_a.json")), slurp(temp_path("remote_b.json")));
}

TEST(Cli, CapabilityFixtureB) {
  const auto j = report({"capability", "--input", data("fixture_b_z_measurement.json"), "--count", "50"},
                        "cap_b.json");
  EXPECT_TRUE(j["ok"].get<bool>());
  EXPECT_NEAR(j["capability_epr"].get<double>(), 1.0, 1e-9);
}

TEST(Cli, RandomSuiteReportsPauliFrameFailures) {
  // Hermitian roots of generic qubit POVMs are not OE in the Pauli frame, so
  // the suite reports an invariant failure while the remote checks pass.
  const auto j = report({"random-suite", "--n", "1", "--count", "5", "--seed", "1"}, "suite.json",
                        cli::kInvariantFailure);
  EXPECT_FALSE(j["ok"].get<bool>());
  EXPECT_EQ(j["cases"].size(), 5u);
}
