#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "wle/wle.hpp"

using namespace wle;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Bench, DefaultGridMatchesGolden) {
  auto rows = run_bench(default_bench_grid());
  const std::string got = bench_csv_header() + bench_csv_rows(rows);
  EXPECT_EQ(got, slurp(WLE_GOLDEN_DIR "/bench_default.csv"));
}

TEST(Bench, KappaTradeOff) {
  // For fixed n, a wider fan-in shortens the solo path and raises contention.
  for (int n : {16, 64}) {
    std::vector<BenchRow> rows;
    for (int k : {2, 4, 8, 16}) {
      if (k > n) continue;
      rows.push_back(bench_row(AlgorithmId{"kst", n, k}));
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_LE(rows[i].solo_steps, rows[i - 1].solo_steps) << n;
      EXPECT_GE(rows[i].stalls, rows[i - 1].stalls) << n;
    }
  }
}

TEST(Bench, RandomizedRowReportsExpectation) {
  BenchRow r = bench_row(AlgorithmId{"rsr", 4, 2, Rational(1, 3)});
  EXPECT_EQ(r.solo_steps, 3 + 4);
  EXPECT_EQ(r.contention, 1);
  EXPECT_EQ(r.contention_source, "checker");
}
