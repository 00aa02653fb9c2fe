#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli_app.hpp"

using indexforge::cli::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out, err;
  json result() const { return json::parse(out); }
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = indexforge::cli::run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("indexforge_cli_" + name);
  std::ofstream(p) << text;
  return p.string();
}

json without_runtime(json j) {
  j.erase("runtime_ms");
  return j;
}

}  // namespace

TEST(Cli, ZetaDeterminantOfFreeOperator) {
  const auto r = run({"zeta-det", "--dtau", "1", "--omega", "0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NEAR(r.result()["closed"].get<double>(), 2.0, 1e-12);
  EXPECT_NE(r.err.find("formula:"), std::string::npos);
}

TEST(Cli, EulerCharacteristicOfSphere) {
  const auto r = run({"euler", "--chart", "sphere:1", "--res", "200"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.result()["chi_rounded"].get<int>(), 2);
}

TEST(Cli, LefschetzOfCatMap) {
  const auto r = run({"lefschetz", "--space", "torus", "--map", "linear:2,1,1,1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.result()["lambda"].get<int>(), -1);
}

TEST(Cli, WittenIndexOfQuartic) {
  const auto r = run({"witten", "--h", "preset:quartic"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.result()["index"].get<int>(), 1);
}

TEST(Cli, StationaryPhaseDefaultsToCsv) {
  const auto r = run({"stationary-phase", "--f", "quadratic", "--hbar", "0.1,0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("hbar,", 0), 0u) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 3);
}

TEST(Cli, CsvOutputHasHeaderAndRow) {
  const auto r = run({"--format", "csv", "zeta-det", "--dtau", "2", "--omega", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row;
  std::getline(lines, header);
  std::getline(lines, row);
  EXPECT_NE(header.find("closed"), std::string::npos);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"zeta-det", "--dtua", "1"}).code, 1);
  EXPECT_EQ(run({"zeta-det", "--dtau", "-1"}).code, 2);
  EXPECT_EQ(run({"euler", "--chart", "klein_bottle"}).code, 1);
  EXPECT_EQ(run({"lefschetz", "--space", "disk", "--map", "identity"}).code, 2);
  EXPECT_EQ(run({}).code, 1);
}

TEST(Cli, MalformedFlagWritesNoResult) {
  const auto r = run({"euler", "--chart", "sphere:1", "--res", "abc"});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, ConfigFileSuppliesOptions) {
  const auto path = write_temp("good.json", "{\n  \"command\": \"zeta-det\",\n  \"dtau\": 1.5,\n  \"omega\": 2\n}\n");
  const auto r = run({"--config", path});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_DOUBLE_EQ(r.result()["inputs"]["dtau"].get<double>(), 1.5);
  const auto overridden = run({"--config", path, "zeta-det", "--dtau", "0.5"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  EXPECT_DOUBLE_EQ(overridden.result()["inputs"]["dtau"].get<double>(), 0.5);
}

TEST(Cli, ConfigErrorsNameTheLine) {
  const auto unknown = write_temp("unknown.json", "{\n  \"command\": \"zeta-det\",\n  \"dtau\": 1,\n  \"omegga\": 2\n}\n");
  auto r = run({"--config", unknown});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown.json:4:"), std::string::npos) << r.err;

  const auto typed = write_temp("typed.json", "{\n  \"dtau\": \"one\"\n}\n");
  r = run({"--config", typed, "zeta-det"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("typed.json:2:"), std::string::npos) << r.err;

  const auto broken = write_temp("broken.json", "{\n  \"command\": \"zeta-det\",\n  \"dtau\": 1,\n}\n");
  r = run({"--config", broken});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("broken.json:4:"), std::string::npos) << r.err;
}

TEST(Cli, RepeatedRunsAgree) {
  const std::vector<std::string> args{"--seed", "7", "curvature", "--chart", "torus:3,1", "--at", "0.3,1.1"};
  const auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(without_runtime(a.result()), without_runtime(b.result()));
}

TEST(Cli, OutputFile) {
  const fs::path p = fs::temp_directory_path() / "indexforge_cli_out.json";
  fs::remove(p);
  const auto r = run({"--output", p.string(), "zeta-det", "--dtau", "1", "--omega", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(p);
  EXPECT_NEAR(json::parse(in)["closed"].get<double>(), 2.0 * std::sinh(1.0), 1e-12);
}
