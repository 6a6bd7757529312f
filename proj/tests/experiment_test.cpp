// Drives the greedyvote binary end to end.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " GREEDYVOTE_CLI_PATH " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return {-1, ""};
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("greedyvote_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, TauWithoutArguments) {
  const auto r = run("tau");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("m_star,tau_star\n0.8156", 0), 0u) << r.out;
}

TEST_F(Cli, ExactGeometricCase) {
  const auto r = run("exact --weights 0.5,0.5 --k 2 --v-max 12");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("v,prob\n2,0.5\n3,0.25\n4,0.125\n", 0), 0u) << r.out;
}

TEST_F(Cli, ExactJointAndUTables) {
  auto r = run("exact --weights 0.5,0.3,0.2 --k 2 --v-max 4 --table joint --node 2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("ell,v,prob\n0,2,", 0), 0u) << r.out;
  r = run("exact --weights 0.5,0.5 --k 2 --table u");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "u,prob\n1,0.5\n2,0.5\n");
}

TEST_F(Cli, GainWritesCsvAndSidecar) {
  const auto out = path("gain.csv");
  const auto r = run("gain --generator zipf --s 1.1 --n 1000 --k 20 --node 1 --fractions 0.5,0.5 --n-runs 100000 --seed 7 "
                     "--output-path " + out);
  ASSERT_EQ(r.code, 0);
  std::istringstream csv(slurp(out));
  std::string header, row;
  std::getline(csv, header);
  std::getline(csv, row);
  EXPECT_EQ(header, "axis_value,mean,std_error,ci_low,ci_high,n_runs");
  const double mean = std::stod(row.substr(row.find(',') + 1));
  EXPECT_GT(mean, 0.0);

  const auto cfg = nlohmann::json::parse(slurp(out + ".config.json"));
  EXPECT_EQ(cfg["subcommand"], "gain");
  EXPECT_EQ(cfg["seed"], 7);
  EXPECT_EQ(cfg["n_runs"], 100000);
  EXPECT_EQ(cfg["node"], 1);
}

TEST_F(Cli, OutputsAreByteIdenticalAcrossRunsAndThreads) {
  const std::string args = "sweep --s 0.9 --k 5 --axis network_size --axis-values 50,100 --n-runs 30000 --seed 3";
  ASSERT_EQ(run(args + " --threads 1 --output-path " + path("a.csv")).code, 0);
  ASSERT_EQ(run(args + " --threads 4 --output-path " + path("b.csv")).code, 0);
  ASSERT_EQ(run(args + " --output-path " + path("c.csv"), "GREEDYVOTE_THREADS=2").code, 0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("c.csv")));
}

TEST_F(Cli, ConfigFileWithFlagOverride) {
  std::ofstream(path("cfg.json")) << R"({"subcommand": "gain", "n": 200, "k": 4, "n_runs": 5000, "seed": 9})";
  ASSERT_EQ(run("gain --config " + path("cfg.json") + " --seed 10 --output-path " + path("o.csv")).code, 0);
  const auto cfg = nlohmann::json::parse(slurp(path("o.csv.config.json")));
  EXPECT_EQ(cfg["n"], 200);
  EXPECT_EQ(cfg["k"], 4);
  EXPECT_EQ(cfg["seed"], 10);
  // Re-running from the sidecar reproduces the output.
  ASSERT_EQ(run("gain --config " + path("o.csv.config.json") + " --output-path " + path("p.csv")).code, 0);
  EXPECT_EQ(slurp(path("o.csv")), slurp(path("p.csv")));
}

TEST_F(Cli, ValidationErrorsExitTwo) {
  std::ofstream(path("bad.json")) << R"({"n": 200, "colour": "blue"})";
  EXPECT_EQ(run("gain --config " + path("bad.json")).code, 2);
  std::ofstream(path("typed.json")) << R"({"k": "twenty"})";
  EXPECT_EQ(run("gain --config " + path("typed.json")).code, 2);
  std::ofstream(path("other.json")) << R"({"subcommand": "fpc"})";
  EXPECT_EQ(run("gain --config " + path("other.json")).code, 2);
  EXPECT_EQ(run("gain --k 0").code, 2);
  EXPECT_EQ(run("gain --n-runs -5").code, 2);
  EXPECT_EQ(run("gain --no-such-flag 1").code, 2);
  EXPECT_EQ(run("gain --f one").code, 2);  // coupled needs identity sampling
  EXPECT_EQ(run("gain --weights 1,2 --s 1.1").code, 2);
  EXPECT_EQ(run("sweep --axis-values 100,50").code, 2);
  EXPECT_EQ(run("exact --k 2").code, 2);  // no weights
  EXPECT_EQ(run("fpc --beta 0.7").code, 2);
  EXPECT_EQ(run("tau --p 1.5").code, 2);
  EXPECT_EQ(run("tau", "GREEDYVOTE_THREADS=many").code, 2);
}

TEST_F(Cli, ResourceLimitExitsThree) {
  EXPECT_EQ(run("exact --weights 1,1,1,1,1,1,1,1,1,1,1,1,1,1,1 --k 2").code, 3);
  EXPECT_EQ(run("exact --weights 1,1,1 --k 2 --v-max 5000").code, 3);
  EXPECT_EQ(run("power --weights 1,1,1,1,1,1,1,1,1,1 --k 6 --method exact --epsilon 1e-15").code, 3);
}

TEST_F(Cli, RuntimeErrorsExitOne) {
  EXPECT_EQ(run("tau --output-path " + path("missing/dir/out.csv")).code, 1);
}

TEST_F(Cli, PowerMethods) {
  auto r = run("power --weights 0.75,0.25 --node 1 --method k2");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "node,value\n1,0.65094809698204581\n");
  r = run("power --weights 0.75,0.25 --node 1 --method exact");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("node,value,error_bound,v_max\n1,0.650948096982", 0), 0u) << r.out;
  r = run("power --weights 0.75,0.25 --n-runs 1000");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("node,mean,std_error,ci_low,ci_high,n_runs\n1,", 0), 0u) << r.out;
}

TEST_F(Cli, SampleRows) {
  const auto r = run("sample --weights 1,1,1 --k 3 --n-runs 4 --seed 2");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "run,v,node,count");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 12);  // three distinct nodes per run
}

TEST_F(Cli, KdeAndQq) {
  const auto kde = run("kde --n 100 --k 5 --n-runs 5000 --grid-points 64");
  ASSERT_EQ(kde.code, 0);
  EXPECT_EQ(kde.out.rfind("x,density\n", 0), 0u);
  EXPECT_EQ(std::count(kde.out.begin(), kde.out.end(), '\n'), 65);

  std::ofstream(path("s.csv")) << "gain\n1\n2\n3\n4\n";
  const auto qq = run("qq --samples-file " + path("s.csv"));
  ASSERT_EQ(qq.code, 0);
  EXPECT_EQ(qq.out.rfind("theoretical,sample\n", 0), 0u);
  EXPECT_EQ(std::count(qq.out.begin(), qq.out.end(), '\n'), 5);
}

TEST_F(Cli, FpcTraceAndSummary) {
  const auto out = path("fpc.csv");
  const auto r = run("fpc --n 50 --k 10 --initial-ones 1 --seed 3 --output-path " + out);
  ASSERT_EQ(r.code, 0);
  const auto csv = slurp(out);
  EXPECT_EQ(csv.rfind("round,u_t,ones_fraction\n0,,1\n1,,1\n2,0.", 0), 0u) << csv;
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  const auto summary = nlohmann::json::parse(slurp(out + ".summary.json"));
  EXPECT_EQ(summary["consensus_round"], 2);
  EXPECT_EQ(summary["final_agreement"], 1.0);
  EXPECT_TRUE(fs::exists(out + ".config.json"));
}
