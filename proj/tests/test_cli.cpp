#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "blvos/imgbench.hpp"

using nlohmann::json;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CliRun cli(const std::string& args) {
  const auto err_path = std::filesystem::temp_directory_path() / "blvos_cli_stderr.txt";
  const std::string cmd = std::string(BLVOS_CLI) + " " + args + " 2>" + err_path.string();
  CliRun r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  for (std::size_t n; (n = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_path);
  return r;
}

std::string tmp(const char* name) { return (std::filesystem::temp_directory_path() / name).string(); }

}  // namespace

TEST(Cli, ExactConfigurationHasNoError) {
  const CliRun r = cli("characterize --n 8 --k 4 --structure blvos0 --vdd nominal --samples 2000");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  const json& m = j.at("result").at("metrics");
  EXPECT_EQ(m.at("er"), 0.0);
  EXPECT_EQ(m.at("med"), 0.0);
  EXPECT_EQ(m.at("mred"), 0.0);
  EXPECT_EQ(m.at("nmed"), 0.0);
  EXPECT_EQ(j.at("command"), "characterize");
  EXPECT_TRUE(j.contains("config_hash"));
  EXPECT_EQ(j.at("model_tables").at("provenance"), "default");
  EXPECT_FALSE(r.out.find("threads") != std::string::npos);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
  const std::string args = "characterize --n 8 --k 4 --structure blvos4 --vdd 0.4 --samples 10000 --seed 7";
  const CliRun a = cli(args + " --threads 1");
  const CliRun b = cli(args + " --threads 1");
  const CliRun c = cli(args + " --threads 3");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, c.out);
  EXPECT_EQ(json::parse(a.out).at("seed"), 7);
}

TEST(Cli, UsageErrorsExitTwo) {
  const CliRun r = cli("characterize --k 8 --n 8");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("0 < k < n"), std::string::npos);
  EXPECT_EQ(cli("characterize --structure blvos9").code, 2);
  EXPECT_EQ(cli("characterize --vdd 0.5").code, 2);
  EXPECT_EQ(cli("characterize --mode sometimes").code, 2);
  EXPECT_EQ(cli("characterize --bogus").code, 2);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("explore --k-set 0,4").code, 2);
}

TEST(Cli, HelpAndVersion) {
  EXPECT_EQ(cli("--help").code, 0);
  const CliRun v = cli("--version");
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(BLVOS_VERSION_STRING), std::string::npos);
}

TEST(Cli, ExploreDefaultAxes) {
  const std::string out = tmp("blvos_cli_explore");
  const CliRun r = cli("explore --n 8 --samples 300 --out " + out);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(out + ".csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);
  const json j = json::parse(slurp(out + ".json"));
  EXPECT_EQ(j.at("result").at("points").size(), 60u);
  EXPECT_FALSE(j.at("result").at("pareto").empty());
  EXPECT_TRUE(j.at("result").at("feasible").get<bool>());
}

TEST(Cli, ExploreInfeasibleIsNotAnError) {
  const CliRun r = cli("explore --n 8 --k-set 4 --voltages 0.4 --samples 200 --energy-budget 0");
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("result").at("selection"), "infeasible");
  EXPECT_FALSE(j.at("result").at("feasible").get<bool>());
}

TEST(Cli, ExploreZeroErrorSelection) {
  const CliRun r = cli("explore --n 8 --samples 500 --max-mred 0");
  ASSERT_EQ(r.code, 0) << r.err;
  const json sel = json::parse(r.out).at("result").at("selection");
  EXPECT_EQ(sel.at("metrics").at("mred"), 0.0);
}

TEST(Cli, AgeZeroYears) {
  const CliRun r = cli("age --structure blvos2 --vdd 0.55 --years 0 --samples 500");
  ASSERT_EQ(r.code, 0) << r.err;
  const json a = json::parse(r.out).at("result");
  EXPECT_EQ(a.at("aging").at("increment"), 0.0);
  EXPECT_EQ(a.at("mred_delta"), 0.0);
  EXPECT_EQ(a.at("delta_vth").at("approx").at("nmos"), 0.0);
  EXPECT_EQ(cli("age --years -1").code, 2);
}

TEST(Cli, PvZeroSigma) {
  const std::string log = tmp("blvos_cli_pv_trials.csv");
  const CliRun r = cli("pv --structure blvos4 --vdd 0.4 --sigma 0 --trials 100 --samples 200 --trial-log " + log);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out).at("result");
  for (const char* m : {"med", "mred", "nmed"}) {
    EXPECT_EQ(j.at(m).at("std"), 0.0);
    EXPECT_TRUE(j.at(m).at("mean_over_std").is_null());
  }
  const std::string csv = slurp(log);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 101);
}

TEST(Cli, ImageAccurate) {
  blvos::GrayImage img(32, 24);
  for (unsigned y = 0; y < 24; ++y)
    for (unsigned x = 0; x < 32; ++x) img.at(x, y) = static_cast<std::uint8_t>(x * 7 + y * 3);
  const std::string in = tmp("blvos_cli_in.pgm");
  const std::string out = tmp("blvos_cli_out.pgm");
  blvos::save_pgm(img, in);
  const CliRun r = cli("image --app sharpen --structure blvos3 --accurate --input " + in + " --output-image " + out);
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("result").at("mssim"), 1.0);
  EXPECT_EQ(blvos::load_pgm(out).width, 32u);
  EXPECT_EQ(cli("image --input " + tmp("blvos_no_such.pgm")).code, 1);
}

TEST(Cli, DumpNetlist) {
  const CliRun r = cli("dump-netlist --n 2 --k 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, slurp(BLVOS_TEST_DATA "/golden/netlist_n2_k1.txt"));
}

TEST(Cli, ConfigOverrideIsRecorded) {
  const std::string cfg = tmp("blvos_cli_cfg.json");
  std::ofstream(cfg) << R"({"delays": {"XOR2": 2.5}})";
  const CliRun r = cli("characterize --samples 200 --config " + cfg);
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j.at("model_tables").at("provenance"), cfg);
  EXPECT_EQ(j.at("model_tables").at("tables").at("delays").at("XOR2"), 2.5);
  std::ofstream(cfg) << R"({"delays": {"XOR9": 2.5}})";
  EXPECT_EQ(cli("characterize --samples 200 --config " + cfg).code, 2);
}

TEST(Cli, OutPrefixWritesJsonAndCsv) {
  const std::string out = tmp("blvos_cli_char");
  const CliRun r = cli("characterize --structure blvos1 --vdd 0.45 --samples 300 --out " + out);
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NO_THROW(json::parse(slurp(out + ".json")));
  EXPECT_EQ(slurp(out + ".csv").rfind("n,k,structure", 0), 0u);
}
