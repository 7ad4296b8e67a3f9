// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failing criteria.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wle/wle.hpp"

using namespace wle;

namespace {

constexpr double kTol = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int ilog(int base, int n) {
  int k = 0;
  for (long long p = 1; p < n; p *= base) ++k;
  return k;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int max_contention(const CheckReport& r) {
  int m = 0;
  for (const auto& [reg, c] : r.max_contention) m = std::max(m, c);
  return m;
}

Outcome deterministic_lower_bound() {
  Outcome o;
  for (int n : {2, 4, 8, 16, 32}) {
    auto t0 = Clock::now();
    StrategyReport rep = run_strategy(*make_tournament(n), ModelParams{n, 1}, AdversaryMode::Swmr);
    const double secs = seconds_since(t0);
    const unsigned log2n = static_cast<unsigned>(ilog(2, n));
    o.require(rep.blame_final >= log2n, "n=" + std::to_string(n) + " blame " + std::to_string(rep.blame_final));
    o.require(pow2_at_least(rep.blame_final, BigInt(n)), "n=" + std::to_string(n) + " 2^blame < n");
    for (const auto& g : rep.gamma_trace) o.require(g >= BigInt(n), "n=" + std::to_string(n) + " gamma " + g.str());
    o.require(secs < 1.0, "n=" + std::to_string(n) + " took " + std::to_string(secs) + "s");
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + ":blame=" +
                std::to_string(rep.blame_final);
  }
  return o;
}

Outcome tightness() {
  Outcome o;
  for (int n : {2, 4, 8, 16, 32, 64}) {
    auto d = enumerate_solo_all(*make_tournament(n));
    for (const auto& dist : d)
      for (const auto& e : dist.executions) {
        o.require(e.shared_steps == static_cast<std::size_t>(2 * ilog(2, n)),
                  "n=" + std::to_string(n) + " p=" + std::to_string(dist.pid) + " steps " + std::to_string(e.shared_steps));
        o.require(e.read_steps == static_cast<std::size_t>(ilog(2, n)), "reads");
      }
  }
  if (o.ok) o.detail = "solo steps 2,4,6,8,10,12 for n=2..64; reads = log2 n";
  return o;
}

Outcome randomized_main_bound() {
  Outcome o;
  for (const std::string kind : {"tournament", "rsr"}) {
    for (int n : {2, 4, 8}) {
      auto t0 = Clock::now();
      auto spec = make_algorithm(AlgorithmId{kind, n});
      auto d = enumerate_solo_all(*spec);
      auto table = potentials(d);
      auto rep = check_main_bound(d, table, spec->swmr());
      const double secs = seconds_since(t0);
      const double ln_n = std::log(static_cast<double>(n));
      o.require(rep.applicable, spec->id() + " not single-writer");
      o.require(to_double(rep.sum_rho) >= n * ln_n - kTol, spec->id() + " sum_rho " + to_decimal_string(rep.sum_rho));
      o.require(to_double(rep.max_expected_reads) >= ln_n - kTol, spec->id() + " max E[reads]");
      o.require(secs < 5.0, spec->id() + " slow");
    }
  }
  if (o.ok) o.detail = "tournament and rsr(1/2) at n=2,4,8";
  return o;
}

std::vector<AlgorithmId> small_catalog() {
  std::vector<AlgorithmId> ids{AlgorithmId{"flag_race", 2}};
  for (int n = 2; n <= 8; ++n) ids.push_back(AlgorithmId{"tournament", n});
  for (int n = 1; n <= 8; ++n) ids.push_back(AlgorithmId{"splitter", n});
  for (int n = 2; n <= 8; ++n)
    for (int k = 2; k <= n; ++k) ids.push_back(AlgorithmId{"kst", n, k});
  for (int n = 2; n <= 8; ++n)
    for (Rational b : {Rational(1, 2), Rational(1, 3)}) ids.push_back(AlgorithmId{"rsr", n, 2, b});
  return ids;
}

Outcome exact_identities() {
  Outcome o;
  int count = 0;
  for (const auto& id : small_catalog()) {
    auto d = enumerate_solo_all(*make_algorithm(id));
    auto table = potentials(d);
    auto dc = check_double_count(d, table);
    o.require(dc.passed && dc.lhs == dc.rhs, id.str() + " double count");
    auto ts = check_trace_sum(d, table);
    o.require(ts.passed && ts.min_slack >= 0, id.str() + " trace slack " + to_fraction_string(ts.min_slack));
    ++count;
  }
  // The planted fixture satisfies the identity but not the trace bound.
  for (int n : {2, 3}) {
    auto d = enumerate_solo_all(*make_broken_fixture(n));
    auto table = potentials(d);
    o.require(check_double_count(d, table).passed, "broken double count");
    o.require(!check_trace_sum(d, table).passed, "broken fixture trace sum not flagged");
  }
  if (o.ok) o.detail = std::to_string(count) + " instances; broken fixture flagged by trace sum";
  return o;
}

Outcome harmonic() {
  Outcome o;
  auto a = harmonic_bound({Rational(1)});
  o.require(a.lhs == 1 && a.holds(kTol), "[1]");
  auto b = harmonic_bound({Rational(1), Rational(1), Rational(1)});
  o.require(b.lhs == Rational(11, 6) && b.holds(kTol), "[1,1,1]");
  auto c = harmonic_bound({Rational(1, 2), Rational(2)});
  o.require(c.lhs == Rational(11, 6) && c.holds(kTol), "[1/2,2]");
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(1, 20), den(1, 1000);
  for (int t = 0; t < 1000; ++t) {
    std::vector<Rational> xs;
    const int m = len(rng);
    for (int i = 0; i < m; ++i) {
      const int q = den(rng);
      xs.emplace_back(std::uniform_int_distribution<int>(1, 8 * q)(rng), q);
    }
    auto r = harmonic_bound(xs);
    o.require(to_double(r.lhs) >= r.rhs - kTol, "sample " + std::to_string(t));
  }
  if (o.ok) o.detail = "3 worked examples + 1000 random vectors";
  return o;
}

Outcome mwmr_bound() {
  Outcome o;
  auto t0 = Clock::now();
  auto d3 = enumerate_solo_all(*make_splitter(3));
  auto t3 = potentials(d3);
  auto k3 = check_kappa_bound(d3, t3);
  int poise_x = 0;
  for (const auto& pa : k3.registers) {
    if (pa.reg.name() == "X") poise_x = pa.max_poise;
    o.require(pa.total <= 9, "peel total " + pa.reg.name() + " = " + to_fraction_string(pa.total));
  }
  o.require(poise_x == 3, "max_poise(X) = " + std::to_string(poise_x));
  o.require(k3.kappa == 3, "kappa");
  o.require(k3.sum_rho == 6, "sum_rho " + to_fraction_string(k3.sum_rho));
  o.require(to_double(k3.sum_rho) >= 3 * std::log(3.0) / 9 - kTol, "splitter(3) bound");
  o.require(k3.passed(), "splitter(3) kappa report");

  auto d16 = enumerate_solo_all(*make_kappa_splitter_tree(16, 4));
  auto k16 = check_kappa_bound(d16, potentials(d16));
  o.require(k16.passed(), "kst(16,4) kappa^2 bound");
  const double secs = seconds_since(t0);
  o.require(secs < 30.0, "took " + std::to_string(secs) + "s");
  if (o.ok)
    o.detail = "splitter(3): max_poise(X)=3, sum_rho=6 >= " + to_decimal_string(k3.bound) + "; kst(16,4): kappa=" +
               std::to_string(k16.kappa) + " sum_rho=" + to_decimal_string(k16.sum_rho) + " >= " +
               to_decimal_string(k16.bound);
  return o;
}

Outcome swmr_necessity() {
  Outcome o;
  for (int n = 1; n <= 64; ++n) {
    auto d = enumerate_solo_all(*make_splitter(n));
    for (const auto& dist : d)
      for (const auto& e : dist.executions) o.require(e.shared_steps == 4, "splitter(" + std::to_string(n) + ")");
  }
  auto d8 = enumerate_solo_all(*make_splitter(8));
  auto tool = check_tool_inequality(d8, potentials(d8), true);
  o.require(!tool.tool_passed, "tool form unexpectedly holds for splitter(8)");
  if (o.ok) o.detail = "4 solo steps for n=1..64; tool form fails at n=8 as expected";
  return o;
}

Outcome safety() {
  Outcome o;
  const ExploreBudget depth12{12, 1'000'000, 16};
  const ExploreBudget full{64, 1'000'000, 16};
  std::string notes;
  for (const char* id : {"splitter:n=3", "tournament:n=3", "kst:n=3,k=2", "rsr:n=3,bias=1/2"}) {
    auto spec = make_algorithm(id);
    auto t0 = Clock::now();
    CheckReport rep = explore(*spec, ModelParams::unrestricted(3), depth12);
    const double secs = seconds_since(t0);
    o.require(rep.uniqueness_violations.empty() && rep.violating_states == 0, std::string(id) + " violation");
    o.require(rep.solo_output_ok, std::string(id) + " solo output");
    o.require(!rep.budget_exceeded, std::string(id) + " budget");
    o.require(secs < 60.0, std::string(id) + " slow");
    CheckReport whole = explore(*spec, ModelParams::unrestricted(3), full);
    o.require(whole.complete() && whole.safe(), std::string(id) + " full-depth run");
    notes += std::string(notes.empty() ? "" : ", ") + id + (rep.complete() ? " complete" : " frontier-truncated") +
             " at depth 12 (" + std::to_string(rep.states_explored) + " states)";
  }
  auto broken = make_broken_fixture(2);
  CheckReport br = explore(*broken, ModelParams::unrestricted(2), depth12);
  o.require(!br.uniqueness_violations.empty(), "broken fixture not caught");
  if (!br.uniqueness_violations.empty()) {
    Configuration c = replay(*broken, initial_configuration(*broken), br.uniqueness_violations.front().execution.steps);
    o.require(c.winners().size() == 2, "broken witness does not replay to two winners");
  }
  if (o.ok) o.detail = notes + "; all complete and safe at full depth; broken fixture witness replays";
  return o;
}

Outcome contention_tradeoff(const std::string& csv_out) {
  Outcome o;
  const ExploreBudget full{64, 1'000'000, 16};
  auto s3 = explore(*make_splitter(3), ModelParams::unrestricted(3), full);
  o.require(max_contention(s3) == 3 && s3.max_stalls() == 2, "splitter(3) contention");
  for (int n : {2, 3, 4}) {
    auto t = explore(*make_tournament(n), ModelParams::unrestricted(n), full);
    o.require(max_contention(t) == 1 && t.max_stalls() == 0, "tournament(" + std::to_string(n) + ")");
  }
  auto k4 = explore(*make_kappa_splitter_tree(4, 2), ModelParams::unrestricted(4), full);
  o.require(max_contention(k4) == 2 && k4.max_stalls() == 1, "kst(4,2) contention");

  auto rows = run_bench(default_bench_grid());
  const std::string table = bench_csv_header() + bench_csv_rows(rows);
  std::ofstream(csv_out, std::ios::binary) << table;
  o.require(table == slurp(WLE_GOLDEN_DIR "/bench_default.csv"), "bench table differs from golden");
  std::map<int, std::vector<const BenchRow*>> by_n;
  for (const auto& r : rows) {
    if (r.algorithm != "kst") continue;
    o.require(r.solo_steps == 4 * std::max(1, ilog(r.kappa, r.n)), "kst steps " + std::to_string(r.n));
    by_n[r.n].push_back(&r);
  }
  for (auto& [n, rs] : by_n) {
    std::sort(rs.begin(), rs.end(), [](auto* a, auto* b) { return a->kappa < b->kappa; });
    for (std::size_t i = 1; i < rs.size(); ++i) {
      o.require(rs[i]->solo_steps < rs[i - 1]->solo_steps, "kst steps not decreasing at n=" + std::to_string(n));
      o.require(rs[i]->stalls > rs[i - 1]->stalls, "kst stalls not increasing at n=" + std::to_string(n));
    }
  }
  if (o.ok) o.detail = "splitter(3)=3, tournament=1, kst(4,2)=2; bench table matches golden (" + csv_out + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string bench_out = argc > 1 ? argv[1] : "acceptance_bench.csv";
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"deterministic lower bound", deterministic_lower_bound},
      {"tournament tightness", tightness},
      {"randomized n ln n bound", randomized_main_bound},
      {"exact identities", exact_identities},
      {"harmonic inequality", harmonic},
      {"contention-weighted bound", mwmr_bound},
      {"single-writer necessity", swmr_necessity},
      {"leader uniqueness", safety},
      {"stall/contention trade-off", [&] { return contention_tradeoff(bench_out); }},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = seconds_since(t0);
    if (!o.ok) ++failures;
    std::printf("%s %zu %s (%.3fs): %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
  }
  return failures;
}
