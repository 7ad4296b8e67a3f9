#pragma once

// Solo step-complexity and contention table over an (algorithm, n, k) grid.

#include <sstream>
#include <string>
#include <vector>

#include "wle/algorithms.hpp"
#include "wle/analysis.hpp"
#include "wle/checker.hpp"

namespace wle {

struct BenchRow {
  std::string algorithm;
  int n = 0;
  int kappa = 0;           // tree fan-in for kst, 0 otherwise
  Rational solo_steps;     // worst expected shared steps over processors
  Rational solo_reads;     // worst expected register reads over processors
  int contention = 0;
  int stalls = 0;
  std::string contention_source;  // "checker" or "poise"
};

struct BenchOptions {
  int checker_max_n = 4;
  ExploreBudget explore;
  SearchBudget poise;
};

inline std::vector<AlgorithmId> default_bench_grid() {
  std::vector<AlgorithmId> g;
  for (int n = 2; n <= 64; n *= 2) g.push_back(AlgorithmId{"tournament", n});
  for (int n = 2; n <= 64; n *= 2) g.push_back(AlgorithmId{"splitter", n});
  for (auto [n, k] : std::vector<std::pair<int, int>>{{4, 2}, {4, 4}, {16, 2}, {16, 4}, {16, 16}, {64, 2}, {64, 4}, {64, 8}})
    g.push_back(AlgorithmId{"kst", n, k});
  return g;
}

/// Contention comes from the exhaustive checker for small n; otherwise the
/// largest poise set over all registers, which some execution realizes.
inline BenchRow bench_row(const AlgorithmId& id, const BenchOptions& opt = {}) {
  SpecPtr spec = make_algorithm(id);
  BenchRow row;
  row.algorithm = id.kind;
  row.n = id.n;
  row.kappa = id.kind == "kst" ? id.kappa : 0;

  SoloDistributions d = enumerate_solo_all(*spec);
  for (const auto& pe : solo_expectations(d)) {
    if (pe.expected_solo_steps > row.solo_steps) row.solo_steps = pe.expected_solo_steps;
    if (pe.expected_solo_reads > row.solo_reads) row.solo_reads = pe.expected_solo_reads;
  }

  if (id.n <= opt.checker_max_n) {
    CheckReport rep = explore(*spec, ModelParams::unrestricted(id.n), opt.explore);
    if (rep.budget_exceeded) throw Error(ErrorCode::SearchBudgetExceeded, "checker budget exhausted for " + id.str());
    for (const auto& [r, c] : rep.max_contention) row.contention = std::max(row.contention, c);
    row.contention_source = "checker";
  } else {
    PotentialTable table = potentials(d);
    for (const auto& [r, pot] : table.registers) {
      if (static_cast<int>(pot.writers.size()) <= row.contention) continue;
      row.contention = std::max(row.contention, max_poise_set(d, r, pot.writers, opt.poise).size);
    }
    row.contention_source = "poise";
  }
  row.stalls = std::max(0, row.contention - 1);
  return row;
}

inline std::vector<BenchRow> run_bench(const std::vector<AlgorithmId>& grid, const BenchOptions& opt = {}) {
  std::vector<BenchRow> rows;
  for (const auto& id : grid) rows.push_back(bench_row(id, opt));
  return rows;
}

inline constexpr const char* kBenchCsvSchema = "wle-bench/1";

inline std::string bench_csv_header() {
  return "algorithm,n,kappa,solo_steps,solo_steps_exact,solo_reads,solo_reads_exact,contention,stalls,contention_source\n";
}

inline std::string bench_csv_rows(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  for (const auto& r : rows) {
    os << r.algorithm << ',' << r.n << ',' << r.kappa << ',' << to_decimal_string(r.solo_steps) << ','
       << to_fraction_string(r.solo_steps) << ',' << to_decimal_string(r.solo_reads) << ','
       << to_fraction_string(r.solo_reads) << ',' << r.contention << ',' << r.stalls << ',' << r.contention_source
       << '\n';
  }
  return os.str();
}

}  // namespace wle
