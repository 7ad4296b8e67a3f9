#pragma once

// End-to-end analysis of one algorithm instance and its report formats.

#include <sstream>
#include <string>
#include <vector>

#include "wle/analyzer.hpp"
#include "wle/poise.hpp"

namespace wle {

struct AnalysisOptions {
  std::size_t depth_limit = 0;  // 0 selects default_depth_limit(n)
  SearchBudget budget;
  bool poise = true;            // run the peeling / kappa^2 bound
  bool force_tool_form = false; // check the single-writer form on any spec
};

struct AnalysisResult {
  std::string algorithm;
  int n = 0;
  bool swmr = false;
  SoloDistributions distributions;
  PotentialTable table;
  TraceSumReport trace_sum;
  DoubleCountReport double_count;
  ToolReport tool;
  MainBoundReport main_bound;
  std::optional<KappaBoundReport> kappa_bound;
  std::vector<std::string> log;

  bool passed() const {
    return trace_sum.passed && double_count.passed && tool.passed() && main_bound.passed() &&
           (!kappa_bound || kappa_bound->passed());
  }
};

inline AnalysisResult run_analysis(const AlgorithmSpec& spec, const AnalysisOptions& opt = {}) {
  AnalysisResult res;
  res.algorithm = spec.id();
  res.n = spec.processors();
  res.swmr = spec.swmr();
  const std::size_t depth = opt.depth_limit ? opt.depth_limit : default_depth_limit(res.n);
  res.distributions = enumerate_solo_all(spec, ModelParams::unrestricted(res.n), depth);
  res.table = potentials(res.distributions);

  auto note = [&](bool ok, const std::string& what) { res.log.push_back(std::string(ok ? "PASS " : "FAIL ") + what); };

  res.trace_sum = check_trace_sum(res.distributions, res.table);
  note(res.trace_sum.passed, "trace_sum min_slack=" + to_fraction_string(res.trace_sum.min_slack) +
                                 (res.trace_sum.violation ? " witness: " + res.trace_sum.violation->detail : ""));

  res.double_count = check_double_count(res.distributions, res.table);
  note(res.double_count.passed, "double_count lhs=" + to_fraction_string(res.double_count.lhs) +
                                    " rhs=" + to_fraction_string(res.double_count.rhs));

  res.tool = check_tool_inequality(res.distributions, res.table, res.swmr || opt.force_tool_form);
  note(res.tool.claim_passed, "claim_form (all executions >= ln n)");
  if (res.tool.tool_form_checked) {
    note(res.tool.tool_passed && res.tool.ubound_passed,
         "tool_form (single-writer normalization)" +
             (res.tool.tool_violation ? " witness: pid " + std::to_string(res.tool.tool_violation->pid) + " " +
                                            res.tool.tool_violation->detail
                                      : std::string()));
  } else {
    res.log.push_back("SKIP tool_form (multi-writer spec)");
  }

  res.main_bound = check_main_bound(res.distributions, res.table, res.swmr);
  const std::string main_detail = "main_bound sum_rho=" + to_decimal_string(res.main_bound.sum_rho) +
                                  " n_ln_n=" + to_decimal_string(res.main_bound.n_ln_n) +
                                  " max_expected_reads=" + to_decimal_string(res.main_bound.max_expected_reads);
  if (res.main_bound.applicable)
    note(res.main_bound.sum_ok && res.main_bound.max_ok, main_detail);
  else
    res.log.push_back("INAPPLICABLE " + main_detail + (res.main_bound.sum_ok ? " (holds)" : " (does not hold)"));

  if (opt.poise) {
    res.kappa_bound = check_kappa_bound(res.distributions, res.table, opt.budget);
    const auto& kb = *res.kappa_bound;
    note(kb.regrouping_ok, "kappa regrouping identity exact");
    note(kb.grouped_ok, "grouped sum " + to_decimal_string(kb.grouped_sum) + " >= n ln n");
    note(kb.layers_ok, "peel layers within bounds");
    note(kb.sum_ok && kb.max_ok, "kappa^2 bound kappa=" + std::to_string(kb.kappa) + " sum_rho=" +
                                     to_decimal_string(kb.sum_rho) + " bound=" + to_decimal_string(kb.bound));
  }
  return res;
}

inline json to_json(const AnalysisResult& a) {
  std::map<RegisterId, const PoiseAnalysis*> poise;
  if (a.kappa_bound)
    for (const auto& pa : a.kappa_bound->registers) poise[pa.reg] = &pa;

  json regs = json::array();
  for (const auto& [r, pot] : a.table.registers) {
    json j{{"name", r.name()},
           {"rho", to_fraction_string(pot.rho)},
           {"gamma", to_fraction_string(pot.gamma)},
           {"readers", pot.readers.size()},
           {"writers", pot.writers.size()}};
    if (auto it = poise.find(r); it != poise.end()) {
      j["max_poise"] = it->second->max_poise;
      j["peel_total"] = to_fraction_string(it->second->total);
      j["peel_layers"] = it->second->layers.size();
    }
    regs.push_back(std::move(j));
  }

  json procs = json::array();
  for (const auto& pe : a.main_bound.per_processor) {
    procs.push_back(json{{"pid", pe.pid},
                         {"solo_executions", a.distributions.at(static_cast<std::size_t>(pe.pid - 1)).executions.size()},
                         {"expected_solo_reads", to_fraction_string(pe.expected_solo_reads)},
                         {"expected_solo_steps", to_fraction_string(pe.expected_solo_steps)},
                         {"expected_distinct_reads", to_fraction_string(pe.expected_distinct_reads)}});
  }

  json bounds{{"n_ln_n", a.main_bound.n_ln_n},
              {"ln_n", a.main_bound.ln_n},
              {"sum_rho", to_fraction_string(a.main_bound.sum_rho)},
              {"max_expected_solo_reads", to_fraction_string(a.main_bound.max_expected_reads)},
              {"swmr_bound_applicable", a.main_bound.applicable},
              {"swmr_bound_holds", a.main_bound.sum_ok && a.main_bound.max_ok},
              {"trace_sum_min_slack", to_fraction_string(a.trace_sum.min_slack)},
              {"trace_sum_passed", a.trace_sum.passed},
              {"double_count_lhs", to_fraction_string(a.double_count.lhs)},
              {"double_count_passed", a.double_count.passed},
              {"claim_form_passed", a.tool.claim_passed},
              {"tool_form_checked", a.tool.tool_form_checked},
              {"tool_form_passed", a.tool.tool_form_checked ? json(a.tool.tool_passed && a.tool.ubound_passed) : json()},
              {"passed", a.passed()}};
  if (a.kappa_bound) {
    const auto& kb = *a.kappa_bound;
    bounds["kappa"] = kb.kappa;
    bounds["kappa_bound"] = kb.bound;
    bounds["kappa_bound_passed"] = kb.passed();
    bounds["kappa_grouped_sum"] = to_fraction_string(kb.grouped_sum);
    bounds["kappa_per_processor_bound"] = kb.per_processor_bound;
  }
  json unwritten = json::array();
  for (const auto& r : a.table.unwritten_reads) unwritten.push_back(r.name());

  return json{{"algorithm", a.algorithm},
              {"n", a.n},
              {"swmr", a.swmr},
              {"registers", regs},
              {"unwritten_reads", unwritten},
              {"per_processor", procs},
              {"bounds", bounds},
              {"log", a.log}};
}

inline constexpr const char* kRegisterCsvSchema = "wle-registers/1";

inline std::string register_table_csv_header() {
  return "algorithm,n,register,rho,rho_exact,gamma,gamma_exact,readers,writers,max_poise,peel_total,peel_total_exact\n";
}

/// Rows only; callers prepend the schema/config comment and the header.
inline std::string register_table_csv_rows(const AnalysisResult& a) {
  std::map<RegisterId, const PoiseAnalysis*> poise;
  if (a.kappa_bound)
    for (const auto& pa : a.kappa_bound->registers) poise[pa.reg] = &pa;
  std::ostringstream os;
  for (const auto& [r, pot] : a.table.registers) {
    os << a.algorithm << ',' << a.n << ',' << r.name() << ',' << to_decimal_string(pot.rho) << ','
       << to_fraction_string(pot.rho) << ',' << to_decimal_string(pot.gamma) << ',' << to_fraction_string(pot.gamma)
       << ',' << pot.readers.size() << ',' << pot.writers.size() << ',';
    if (auto it = poise.find(r); it != poise.end())
      os << it->second->max_poise << ',' << to_decimal_string(it->second->total) << ','
         << to_fraction_string(it->second->total);
    else
      os << ",,";
    os << '\n';
  }
  return os.str();
}

}  // namespace wle
