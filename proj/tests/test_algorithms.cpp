#include <gtest/gtest.h>

#include <cmath>

#include "wle/wle.hpp"

using namespace wle;

namespace {

int ilog(int base, int n) {
  int k = 0;
  for (long long p = 1; p < n; p *= base) ++k;
  return k;
}

/// Solo run of pid from the initial configuration: (shared steps, decision).
std::pair<std::size_t, Decision> solo(const AlgorithmSpec& spec, Pid pid) {
  SoloTree t = run_solo(spec, initial_configuration(spec), pid, 1000);
  EXPECT_EQ(t.leaves.size(), 1u);
  return {t.leaves[0].execution.shared_steps(), t.leaves[0].decision.value()};
}

}  // namespace

TEST(Algorithms, CatalogIdsRoundTrip) {
  for (const char* id : {"flag_race", "tournament:n=4", "splitter:n=3", "kst:n=16,k=4", "rsr:n=2,bias=1/2", "broken:n=2"})
    EXPECT_EQ(make_algorithm(id)->id(), id);
  EXPECT_EQ(make_algorithm("broken-fixture:n=3")->id(), "broken:n=3");
  EXPECT_EQ(make_algorithm("random_scratch_race:n=4,bias=2/6")->id(), "rsr:n=4,bias=1/3");
  EXPECT_THROW(make_algorithm("nope:n=2"), Error);
  EXPECT_THROW(make_algorithm("tournament:n=x"), Error);
}

TEST(Algorithms, FlagRaceSolo) {
  auto spec = make_flag_race();
  EXPECT_EQ(spec->processors(), 2);
  Configuration c = initial_configuration(*spec);
  EXPECT_EQ(c.state(1).poised, Action::write(RegisterId("flag1"), Value::of(1)));
  EXPECT_EQ(c.state(2).poised, Action::write(RegisterId("flag2"), Value::of(1)));
  for (Pid p : {1, 2}) EXPECT_EQ(solo(*spec, p), std::make_pair(std::size_t{2}, Decision::Win));
}

TEST(Algorithms, FlagRaceBothCanLoseButNeverBothWin) {
  auto spec = make_flag_race();
  Execution e{{}, initial_configuration(*spec)};
  for (Pid p : {1, 2, 1, 2}) extend(*spec, e, p);
  EXPECT_EQ(e.final.state(1).poised, Action::ret(Decision::Lose));
  EXPECT_EQ(e.final.state(2).poised, Action::ret(Decision::Lose));
}

TEST(Algorithms, TournamentSoloStepsAreTwiceLogN) {
  for (int n : {2, 4, 8, 16, 32, 64}) {
    auto spec = make_tournament(n);
    for (Pid p = 1; p <= n; ++p)
      EXPECT_EQ(solo(*spec, p), std::make_pair(static_cast<std::size_t>(2 * ilog(2, n)), Decision::Win))
          << "n=" << n << " p=" << p;
  }
}

TEST(Algorithms, TournamentByesSkipEmptySubtrees) {
  auto spec = make_tournament(3);
  // Processor 3 has no opponent at level 0 and enters the final directly.
  EXPECT_EQ(solo(*spec, 3).first, 2u);
  EXPECT_EQ(solo(*spec, 1).first, 4u);
  Configuration c = initial_configuration(*spec);
  EXPECT_EQ(c.state(3).poised.reg.name(), "t1.0.1");
  EXPECT_EQ(c.state(1).poised.reg.name(), "t0.0.0");
  EXPECT_THROW(make_tournament(1), Error);
}

TEST(Algorithms, TournamentRegisterNaming) {
  auto spec = make_tournament(4);
  Execution e{{}, initial_configuration(*spec)};
  std::vector<std::string> names;
  while (!e.final.has_returned(4)) {
    if (e.final.state(4).poised.is_shared()) names.push_back(e.final.state(4).poised.reg.name());
    extend(*spec, e, 4);
  }
  EXPECT_EQ(names, (std::vector<std::string>{"t0.1.1", "t0.1.0", "t1.0.1", "t1.0.0"}));
}

TEST(Algorithms, SplitterIsFourStepsForEveryN) {
  for (int n : {1, 2, 3, 8, 64}) {
    auto spec = make_splitter(n);
    EXPECT_FALSE(spec->swmr());
    for (Pid p = 1; p <= n; p = p * 2 + 1)
      EXPECT_EQ(solo(*spec, p), std::make_pair(std::size_t{4}, Decision::Win)) << n;
  }
}

TEST(Algorithms, SplitterStepSequence) {
  auto spec = make_splitter(3);
  Execution e{{}, initial_configuration(*spec)};
  std::vector<Action> seen;
  while (!e.final.has_returned(2)) {
    seen.push_back(e.final.state(2).poised);
    extend(*spec, e, 2);
  }
  ASSERT_EQ(seen.size(), 5u);
  EXPECT_EQ(seen[0], Action::write(RegisterId("X"), Value::of(2)));
  EXPECT_EQ(seen[1], Action::read(RegisterId("Y")));
  EXPECT_EQ(seen[2].kind, Action::Kind::Write);
  EXPECT_EQ(seen[2].reg.name(), "Y");
  EXPECT_EQ(seen[3], Action::read(RegisterId("X")));
}

TEST(Algorithms, SplitterOvertakenProcessorLoses) {
  auto spec = make_splitter(2);
  Execution e{{}, initial_configuration(*spec)};
  for (Pid p : {1, 2, 1, 1, 1, 1}) extend(*spec, e, p);  // 1 reads X = 2, then returns
  EXPECT_EQ(e.final.decision(1), Decision::Lose);
}

TEST(Algorithms, KappaSplitterTreeSoloSteps) {
  for (auto [n, k] : std::vector<std::pair<int, int>>{{4, 2}, {4, 4}, {16, 2}, {16, 4}, {16, 16}, {64, 8}, {3, 2}, {10, 3}}) {
    auto spec = make_kappa_splitter_tree(n, k);
    const std::size_t expected = 4 * static_cast<std::size_t>(std::max(1, ilog(k, n)));
    for (Pid p = 1; p <= n; ++p)
      EXPECT_EQ(solo(*spec, p), std::make_pair(expected, Decision::Win)) << n << "," << k << " p=" << p;
  }
  EXPECT_THROW(make_kappa_splitter_tree(4, 1), Error);
}

TEST(Algorithms, KappaSplitterTreeRegisterNaming) {
  auto spec = make_kappa_splitter_tree(16, 4);
  Configuration c = initial_configuration(*spec);
  EXPECT_EQ(c.state(1).poised.reg.name(), "s0.0.X");
  EXPECT_EQ(c.state(5).poised.reg.name(), "s0.1.X");
  EXPECT_EQ(c.state(16).poised.reg.name(), "s0.3.X");
}

TEST(Algorithms, RandomScratchRaceBranches) {
  auto spec = make_random_scratch_race(4, Rational(1, 3));
  EXPECT_FALSE(spec->deterministic());
  EXPECT_TRUE(spec->swmr());
  SoloTree t = run_solo(*spec, initial_configuration(*spec), 2, 100);
  ASSERT_EQ(t.leaves.size(), 2u);
  EXPECT_EQ(t.leaves[0].execution.probability(), Rational(1, 3));
  EXPECT_EQ(t.leaves[1].execution.probability(), Rational(2, 3));
  for (const auto& leaf : t.leaves) {
    EXPECT_EQ(leaf.decision, Decision::Win);
    EXPECT_EQ(leaf.execution.shared_steps(), 3u + 4u);
  }
  EXPECT_EQ(t.leaves[0].execution.steps[1].step.action.reg.name(), "scratch2.0");
  EXPECT_EQ(t.leaves[1].execution.steps[1].step.action.reg.name(), "scratch2.1");
  EXPECT_THROW(make_random_scratch_race(2, Rational(1)), Error);
  EXPECT_THROW(make_random_scratch_race(2, Rational(0)), Error);
}

TEST(Algorithms, BrokenFixtureWinsWithoutSteps) {
  auto spec = make_broken_fixture(2);
  EXPECT_EQ(solo(*spec, 1), std::make_pair(std::size_t{0}, Decision::Win));
}
