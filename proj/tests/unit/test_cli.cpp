#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const std::string kCli = REVSPEC_CLI;
const fs::path kSource = REVSPEC_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("revspec_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = kCli + " " + args + " >" + (log / "stdout.txt").string() + " 2>" + (log / "stderr.txt").string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Everything except the "# run" provenance line.
std::string stable_part(const std::string& csv) {
  std::stringstream in(csv);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("# run ", 0) != 0) out += line + "\n";
  return out;
}

}  // namespace

TEST(Cli, SphereScanHasUnitRotationNumber) {
  const auto d = scratch("sphere");
  ASSERT_EQ(run("scan-classical --config " + (kSource / "configs/sphere-scan.json").string() + " --out " + d.string(), d),
            0)
      << slurp(d / "stderr.txt");
  const auto doc = json::parse(slurp(d / "scan.json"));
  ASSERT_FALSE(doc["data"]["rows"].empty());
  for (const auto& r : doc["data"]["rows"]) EXPECT_NEAR(r["omega"].get<double>(), 1.0, 1e-9);
  EXPECT_EQ(doc["provenance"]["subcommand"], "scan-classical");
  const auto csv = slurp(d / "scan.csv");
  EXPECT_EQ(csv.rfind("# revspec ", 0), 0u);
}

TEST(Cli, MalformedConfigExitsTwoAndNamesField) {
  const auto d = scratch("bad");
  std::ofstream(d / "bad.json") << R"({"h": [0.1], "lattice": {"E_lo": 1.0, "E_hi": 0.5}})";
  EXPECT_EQ(run("lattice --config " + (d / "bad.json").string() + " --out " + (d / "out").string(), d), 2);
  const auto rec = json::parse(slurp(d / "stderr.txt"));
  EXPECT_EQ(rec["error"], "ConfigError");
  EXPECT_EQ(rec["field"], "lattice.E_hi");
  EXPECT_EQ(json::parse(slurp(d / "out/error.json"))["field"], "lattice.E_hi");
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto d = scratch("usage");
  EXPECT_EQ(run("lattice", d), 2);
  EXPECT_EQ(run("no-such-command --config x.json", d), 2);
  EXPECT_EQ(run("lattice --config " + (d / "missing.json").string(), d), 2);
}

TEST(Cli, NumericalFailureExitsOne) {
  const auto d = scratch("numfail");
  // ppw 20 is unreachable for N = 40 at h = 0.05.
  std::ofstream(d / "c.json") << R"({"surface": {"family": "sphere", "params": []}, "h": [0.05],
    "observable": {"builtin": "constant", "c": 0.0},
    "spectrum": {"N": 40, "min_N": 10, "m_max": 2, "restrict_to_window": false}})";
  EXPECT_EQ(run("spectrum --config " + (d / "c.json").string() + " --out " + d.string(), d), 1);
  EXPECT_EQ(json::parse(slurp(d / "error.json"))["error"], "GridTooCoarse");
}

TEST(Cli, RepeatRunsAreByteIdenticalApartFromRunLine) {
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  const auto cfg = (kSource / "configs/sphere-scan.json").string();
  ASSERT_EQ(run("lattice --config " + cfg + " --out " + a.string() + " --seed 5", a), 0);
  ASSERT_EQ(run("lattice --config " + cfg + " --out " + b.string() + " --seed 5", b), 0);
  const auto x = slurp(a / "lattice.csv"), y = slurp(b / "lattice.csv");
  EXPECT_EQ(stable_part(x), stable_part(y));
  EXPECT_GT(stable_part(x).size(), 1000u);
}

TEST(Cli, MatchRejectsInputsFromDifferentSurfaces) {
  const auto d = scratch("hash");
  std::ofstream(d / "sphere.json") << R"({"surface": {"family": "sphere", "params": []}, "h": [0.1],
    "observable": {"builtin": "constant", "c": 0.5},
    "spectrum": {"N": 400, "m_max": 3, "E_top": 2.0, "restrict_to_window": false}})";
  std::ofstream(d / "beta.json") << R"({"surface": {"family": "deformed-sphere", "params": [0.2]}, "h": [0.1],
    "observable": {"builtin": "constant", "c": 0.5}})";
  ASSERT_EQ(run("spectrum --config " + (d / "sphere.json").string() + " --out " + (d / "s").string(), d), 0)
      << slurp(d / "stderr.txt");
  ASSERT_EQ(run("lattice --config " + (d / "beta.json").string() + " --out " + (d / "l").string(), d), 0);
  EXPECT_EQ(run("match --config " + (d / "sphere.json").string() + " --spectrum " + (d / "s/spectrum.json").string() +
                    " --lattice " + (d / "l/lattice.json").string() + " --out " + (d / "m").string(),
                d),
            2);
  EXPECT_EQ(json::parse(slurp(d / "stderr.txt"))["error"], "HashMismatch");
}

TEST(Cli, SyntheticCountsFollowSeed) {
  const auto d = scratch("seed");
  std::ofstream(d / "c.json") << R"({"count_scaling": {"synthetic": true}})";
  auto gamma = [&](int seed, const std::string& sub) {
    EXPECT_EQ(run("count-scaling --config " + (d / "c.json").string() + " --seed " + std::to_string(seed) +
                      " --out " + (d / sub).string(),
                  d),
              0);
    return json::parse(slurp(d / sub / "count_scaling.json"))["data"]["gamma"].get<double>();
  };
  const double g1 = gamma(1, "a"), g1b = gamma(1, "b"), g2 = gamma(2, "c");
  EXPECT_EQ(g1, g1b);
  EXPECT_NE(g1, g2);
  EXPECT_NEAR(g1, 1.5, 0.5);
}
