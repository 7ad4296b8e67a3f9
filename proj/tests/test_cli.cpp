#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wle/wle.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("wle_cli_test_" + name);
  fs::remove_all(p);
  return p;
}

int run(const std::string& args, const fs::path& out) {
  const std::string cmd = std::string(WLE_CLI) + " " + args + " --out " + out.string() + " > " +
                          (out.string() + ".stdout") + " 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, AdversaryTournament) {
  auto out = scratch("adv");
  EXPECT_EQ(run("adversary --alg tournament --n 2,4,8,16", out), 0);
  const std::string csv = slurp(out / "adversary_tournament.csv");
  EXPECT_EQ(csv.rfind("# schema=wle-adversary/1 version=", 0), 0u);
  EXPECT_NE(csv.find("tournament:n=16,16,4,4,16,true"), std::string::npos) << csv;
  auto j = wle::json::parse(slurp(out / "adversary_tournament.json"));
  EXPECT_EQ(j["config"]["n"], wle::json({2, 4, 8, 16}));
  EXPECT_EQ(j["results"].size(), 4u);
}

TEST(Cli, AdversaryRejectsSplitterInSwmrMode) {
  auto out = scratch("adv_split");
  EXPECT_EQ(run("adversary --alg splitter --n 4", out), 2);
  EXPECT_EQ(run("adversary --alg splitter --n 4 --mode kappa", out), 0);
}

TEST(Cli, AdversaryBrokenFixtureWritesCounterexample) {
  auto out = scratch("adv_broken");
  EXPECT_EQ(run("adversary --alg broken-fixture --n 2", out), 1);
  auto j = wle::json::parse(slurp(out / "adversary_broken_n_2.counterexample.json"));
  EXPECT_EQ(j["winners"], wle::json({1, 2}));
}

TEST(Cli, AnalyzeOutputs) {
  auto out = scratch("analyze");
  EXPECT_EQ(run("analyze --alg tournament --n 4", out), 0);
  auto j = wle::json::parse(slurp(out / "analyze_tournament_n_4.bounds.json"));
  EXPECT_EQ(j["analysis"]["bounds"]["sum_rho"], "8/1");
  EXPECT_NEAR(j["analysis"]["bounds"]["n_ln_n"].get<double>(), 5.545177444479562, 1e-12);
  EXPECT_TRUE(fs::exists(out / "analyze_tournament_n_4.registers.csv"));
  EXPECT_TRUE(fs::exists(out / "analyze_tournament_n_4.lemmas.log"));
  EXPECT_EQ(run("analyze --alg rsr --n 2 --bias 1/2", out), 0);
  EXPECT_EQ(run("analyze --alg splitter --n 8", out), 0);
  auto s = wle::json::parse(slurp(out / "analyze_splitter_n_8.bounds.json"));
  EXPECT_EQ(s["analysis"]["bounds"]["swmr_bound_applicable"], false);
  EXPECT_EQ(s["analysis"]["bounds"]["kappa_bound_passed"], true);
  EXPECT_EQ(run("analyze --alg broken --n 2", out), 1);
}

TEST(Cli, CheckCommands) {
  auto out = scratch("check");
  EXPECT_EQ(run("check --alg splitter --n 3", out), 0);
  auto j = wle::json::parse(slurp(out / "check_splitter_n_3.json"));
  EXPECT_EQ(j["report"]["max_contention"]["X"], 3);
  EXPECT_EQ(run("check --alg tournament --n 3", out), 0);
  EXPECT_EQ(run("check --alg broken-fixture --n 2", out), 1);
  EXPECT_EQ(run("check --alg tournament --n 8", out), 2);
  EXPECT_EQ(run("check --alg splitter --n 4 --budget 10", out), 2);
}

TEST(Cli, UsageErrors) {
  auto out = scratch("usage");
  EXPECT_EQ(run("", out), 2);
  EXPECT_EQ(run("analyze", out), 2);
  EXPECT_EQ(run("analyze --alg nonsense --n 2", out), 2);
  EXPECT_EQ(run("adversary --alg tournament --n 4 --mode both", out), 2);
  EXPECT_EQ(run("adversary --alg rsr --n 2", out), 2);
}

TEST(Cli, RerunsAreByteIdentical) {
  auto a = scratch("rerun");
  EXPECT_EQ(run("analyze --alg kst:n=16,k=4", a), 0);
  EXPECT_EQ(run("bench --alg kst --n 16 --kappa 4", a), 0);
  const std::string first = slurp(a / "analyze_kst_n_16_k_4.bounds.json") + slurp(a / "bench.csv");
  EXPECT_EQ(run("analyze --alg kst:n=16,k=4", a), 0);
  EXPECT_EQ(run("bench --alg kst --n 16 --kappa 4", a), 0);
  EXPECT_EQ(first, slurp(a / "analyze_kst_n_16_k_4.bounds.json") + slurp(a / "bench.csv"));
  EXPECT_NE(slurp(a / "bench.csv").find("kst,16,4,8,8/1"), std::string::npos);
}
