#pragma once

// Solo-execution distributions and the exact read/write potential
// bookkeeping over them, plus the inequality checks built on top.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wle/core.hpp"

namespace wle {

struct SoloExecution {
  Pid pid = 0;
  std::vector<ExecutionStep> steps;
  Rational prob;
  std::set<RegisterId> read_set;
  std::set<RegisterId> write_set;
  std::vector<RegisterId> trace;  // first-write order, no duplicates
  std::size_t read_steps = 0;     // reads of real registers
  std::size_t shared_steps = 0;   // every read and write, NULL included

  /// 1-based index of r in the trace.
  std::optional<std::size_t> xi(const RegisterId& r) const {
    auto it = std::find(trace.begin(), trace.end(), r);
    if (it == trace.end()) return std::nullopt;
    return static_cast<std::size_t>(it - trace.begin()) + 1;
  }
};

struct SoloDistribution {
  Pid pid = 0;
  std::vector<SoloExecution> executions;

  Rational total() const {
    Rational t = 0;
    for (const auto& e : executions) t += e.prob;
    return t;
  }
};

using SoloDistributions = std::vector<SoloDistribution>;  // index pid - 1

struct ExecRef {
  Pid pid = 0;
  std::size_t index = 0;

  auto operator<=>(const ExecRef&) const = default;
};

inline const SoloExecution& lookup(const SoloDistributions& d, const ExecRef& ref) {
  return d.at(static_cast<std::size_t>(ref.pid - 1)).executions.at(ref.index);
}

inline SoloExecution summarize_solo(Pid pid, const Execution& e) {
  SoloExecution s;
  s.pid = pid;
  s.steps = e.steps;
  s.prob = e.probability();
  for (const auto& st : e.steps) {
    const Action& a = st.step.action;
    if (a.is_shared()) ++s.shared_steps;
    if (a.reg.is_null() || !a.is_shared()) continue;
    if (a.is_read()) {
      ++s.read_steps;
      s.read_set.insert(a.reg);
    } else if (s.write_set.insert(a.reg).second) {
      s.trace.push_back(a.reg);
    }
  }
  return s;
}

/// Complete S(p) for every processor from the initial configuration.
inline SoloDistributions enumerate_solo_all(const AlgorithmSpec& spec, const ModelParams& params,
                                            std::size_t depth_limit) {
  Configuration init = initial_configuration(spec, params);
  SoloDistributions out;
  for (Pid p = 1; p <= params.n; ++p) {
    SoloTree tree = run_solo(spec, init, p, depth_limit);
    SoloDistribution dist;
    dist.pid = p;
    for (const auto& leaf : tree.leaves) {
      if (leaf.depth_exhausted) {
        throw Error(ErrorCode::DepthExhausted, spec.id() + ": processor " + std::to_string(p) +
                                                   " exceeds " + std::to_string(depth_limit) +
                                                   " solo steps; branch prefix " +
                                                   to_json(leaf.execution.steps).dump());
      }
      if (leaf.decision != Decision::Win)
        throw Error(ErrorCode::SoloOutputViolated,
                    spec.id() + ": processor " + std::to_string(p) + " loses a solo execution");
      dist.executions.push_back(summarize_solo(p, leaf.execution));
    }
    out.push_back(std::move(dist));
  }
  return out;
}

inline SoloDistributions enumerate_solo_all(const AlgorithmSpec& spec) {
  return enumerate_solo_all(spec, ModelParams::unrestricted(spec.processors()),
                            default_depth_limit(spec.processors()));
}

struct RegisterPotential {
  Rational rho = 0;
  Rational gamma = 0;
  std::vector<ExecRef> readers;  // A(r)
  std::vector<ExecRef> writers;  // B(r)
};

struct PotentialTable {
  std::map<RegisterId, RegisterPotential> registers;
  /// Read solo but never written solo; dropped from the table.
  std::set<RegisterId> unwritten_reads;

  Rational rho(const RegisterId& r) const {
    auto it = registers.find(r);
    return it == registers.end() ? Rational(0) : it->second.rho;
  }
  Rational gamma(const RegisterId& r) const {
    auto it = registers.find(r);
    return it == registers.end() ? Rational(0) : it->second.gamma;
  }
  Rational sum_rho() const {
    Rational s = 0;
    for (const auto& [r, p] : registers) s += p.rho;
    return s;
  }
};

inline PotentialTable potentials(const SoloDistributions& d) {
  PotentialTable t;
  for (const auto& dist : d) {
    for (std::size_t i = 0; i < dist.executions.size(); ++i) {
      const SoloExecution& e = dist.executions[i];
      const ExecRef ref{dist.pid, i};
      for (const auto& r : e.read_set) {
        auto& slot = t.registers[r];
        slot.rho += e.prob;
        slot.readers.push_back(ref);
      }
      for (const auto& r : e.write_set) {
        auto& slot = t.registers[r];
        slot.gamma += e.prob;
        slot.writers.push_back(ref);
      }
    }
  }
  for (auto it = t.registers.begin(); it != t.registers.end();) {
    if (it->second.gamma == 0) {
      t.unwritten_reads.insert(it->first);
      it = t.registers.erase(it);
    } else {
      ++it;
    }
  }
  return t;
}

/// Sum of rho over the first `count` registers of e's trace.
inline Rational prefix_rho(const PotentialTable& table, const SoloExecution& e, std::size_t count) {
  Rational s = 0;
  for (std::size_t j = 0; j < count && j < e.trace.size(); ++j) s += table.rho(e.trace[j]);
  return s;
}

/// Sum over the trace of rho(u_i) / (1 + sum_{j<i} rho(u_j)).
inline Rational normalized_trace_sum(const PotentialTable& table, const SoloExecution& e) {
  Rational lhs = 0, running = 0;
  for (const auto& u : e.trace) {
    const Rational r = table.rho(u);
    lhs += r / (1 + running);
    running += r;
  }
  return lhs;
}

/// Write mass on r from processors other than p.
inline Rational foreign_write_mass(const SoloDistributions& d, const PotentialTable& table, const RegisterId& r,
                                   Pid p) {
  Rational own = 0;
  auto it = table.registers.find(r);
  if (it == table.registers.end()) return 0;
  for (const auto& ref : it->second.writers)
    if (ref.pid == p) own += lookup(d, ref).prob;
  return it->second.gamma - own;
}

struct LemmaWitness {
  Pid pid = 0;
  std::size_t execution = 0;
  std::string detail;
};

inline json to_json(const LemmaWitness& w) {
  return json{{"pid", w.pid}, {"execution", w.execution}, {"detail", w.detail}};
}

// ---------------------------------------------------------------------------
// Trace-sum lemma: every trace's read potential covers the other n-1 processors.

struct TraceSumReport {
  bool passed = true;
  Rational min_slack;
  std::optional<LemmaWitness> violation;
};

inline TraceSumReport check_trace_sum(const SoloDistributions& d, const PotentialTable& table) {
  TraceSumReport rep;
  const Rational need = static_cast<int>(d.size()) - 1;
  bool first = true;
  for (const auto& dist : d) {
    for (std::size_t i = 0; i < dist.executions.size(); ++i) {
      const SoloExecution& e = dist.executions[i];
      const Rational slack = prefix_rho(table, e, e.trace.size()) - need;
      if (first || slack < rep.min_slack) rep.min_slack = slack;
      first = false;
      if (slack < 0 && rep.passed) {
        rep.passed = false;
        rep.violation = LemmaWitness{dist.pid, i, "trace read potential " + to_fraction_string(slack + need) +
                                                      " < n-1 = " + to_fraction_string(need)};
      }
    }
  }
  if (first) rep.min_slack = 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Double counting: sum_p sum_e Pr[e] sum_{r in trace} rho/gamma == sum_r rho.

struct DoubleCountReport {
  Rational lhs;
  Rational rhs;
  bool passed = false;
};

inline DoubleCountReport check_double_count(const SoloDistributions& d, const PotentialTable& table) {
  DoubleCountReport rep;
  rep.lhs = 0;
  for (const auto& dist : d)
    for (const auto& e : dist.executions) {
      Rational inner = 0;
      for (const auto& r : e.trace) inner += table.rho(r) / table.gamma(r);
      rep.lhs += e.prob * inner;
    }
  rep.rhs = table.sum_rho();
  rep.passed = rep.lhs == rep.rhs;
  return rep;
}

// ---------------------------------------------------------------------------
// Harmonic inequality: sum x_i / (1 + sum_{j<i} x_j) >= ln(1 + sum x_i).

struct HarmonicResult {
  Rational lhs;
  double rhs = 0.0;

  bool holds(double tol = kLnTolerance) const { return to_double(lhs) >= rhs - tol; }
};

inline HarmonicResult harmonic_bound(const std::vector<Rational>& xs) {
  HarmonicResult res;
  res.lhs = 0;
  Rational running = 0;
  for (const auto& x : xs) {
    if (x <= 0) throw Error(ErrorCode::NonPositiveInput, "harmonic_bound needs positive inputs");
    res.lhs += x / (1 + running);
    running += x;
  }
  res.rhs = std::log1p(to_double(running));
  return res;
}

// ---------------------------------------------------------------------------
// Normalized read-potential inequalities, per solo execution.

struct ToolEntry {
  Pid pid = 0;
  std::size_t execution = 0;
  Rational claim_lhs;
  std::optional<Rational> tool_lhs;
  bool claim_ok = false;
  bool tool_ok = true;
  bool ubound_ok = true;  // prefix read potential covers foreign write mass
};

struct ToolReport {
  double ln_n = 0.0;
  bool tool_form_checked = false;
  bool claim_passed = true;
  bool tool_passed = true;
  bool ubound_passed = true;
  std::vector<ToolEntry> entries;
  std::optional<LemmaWitness> claim_violation;
  std::optional<LemmaWitness> tool_violation;

  bool passed() const { return claim_passed && (!tool_form_checked || (tool_passed && ubound_passed)); }
};

/// The claim form runs for every spec; the foreign-write-normalized form
/// (and the prefix covering check it rests on) only when `tool_form` is set,
/// which is sound for single-writer specs only.
inline ToolReport check_tool_inequality(const SoloDistributions& d, const PotentialTable& table, bool tool_form) {
  ToolReport rep;
  const int n = static_cast<int>(d.size());
  rep.ln_n = std::log(static_cast<double>(n));
  rep.tool_form_checked = tool_form;
  for (const auto& dist : d) {
    for (std::size_t i = 0; i < dist.executions.size(); ++i) {
      const SoloExecution& e = dist.executions[i];
      ToolEntry ent;
      ent.pid = dist.pid;
      ent.execution = i;
      ent.claim_lhs = normalized_trace_sum(table, e);
      ent.claim_ok = to_double(ent.claim_lhs) >= rep.ln_n - kLnTolerance;
      if (!ent.claim_ok && rep.claim_passed) {
        rep.claim_passed = false;
        rep.claim_violation = LemmaWitness{dist.pid, i, "claim lhs " + to_decimal_string(ent.claim_lhs) + " < ln n"};
      }
      if (tool_form) {
        Rational lhs = 0, running = 0;
        for (const auto& u : e.trace) {
          const Rational foreign = foreign_write_mass(d, table, u, dist.pid);
          lhs += table.rho(u) / (1 + foreign);
          if (running < foreign) ent.ubound_ok = false;
          running += table.rho(u);
        }
        ent.tool_lhs = lhs;
        ent.tool_ok = to_double(lhs) >= rep.ln_n - kLnTolerance;
        if ((!ent.tool_ok || !ent.ubound_ok) && rep.tool_passed && rep.ubound_passed) {
          rep.tool_violation = LemmaWitness{
              dist.pid, i,
              !ent.tool_ok ? "tool lhs " + to_decimal_string(lhs) + " < ln n"
                           : "prefix read potential below foreign write mass"};
        }
        rep.tool_passed = rep.tool_passed && ent.tool_ok;
        rep.ubound_passed = rep.ubound_passed && ent.ubound_ok;
      }
      rep.entries.push_back(std::move(ent));
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Expected solo cost and the n ln n bound on total read potential.

struct ProcessorExpectation {
  Pid pid = 0;
  Rational expected_solo_reads;     // read steps on real registers
  Rational expected_solo_steps;     // all shared steps
  Rational expected_distinct_reads; // |read set|
};

inline std::vector<ProcessorExpectation> solo_expectations(const SoloDistributions& d) {
  std::vector<ProcessorExpectation> out;
  for (const auto& dist : d) {
    ProcessorExpectation pe;
    pe.pid = dist.pid;
    pe.expected_solo_reads = 0;
    pe.expected_solo_steps = 0;
    pe.expected_distinct_reads = 0;
    for (const auto& e : dist.executions) {
      pe.expected_solo_reads += e.prob * static_cast<long long>(e.read_steps);
      pe.expected_solo_steps += e.prob * static_cast<long long>(e.shared_steps);
      pe.expected_distinct_reads += e.prob * static_cast<long long>(e.read_set.size());
    }
    out.push_back(std::move(pe));
  }
  return out;
}

struct MainBoundReport {
  bool applicable = false;  // single-writer specs only
  Rational sum_rho;
  double ln_n = 0.0;
  double n_ln_n = 0.0;
  std::vector<ProcessorExpectation> per_processor;
  Rational max_expected_reads;
  bool sum_ok = false;
  bool max_ok = false;

  /// Inapplicable bounds are reported but never fail.
  bool passed() const { return !applicable || (sum_ok && max_ok); }
};

inline MainBoundReport check_main_bound(const SoloDistributions& d, const PotentialTable& table, bool swmr) {
  MainBoundReport rep;
  const int n = static_cast<int>(d.size());
  rep.applicable = swmr;
  rep.sum_rho = table.sum_rho();
  rep.ln_n = std::log(static_cast<double>(n));
  rep.n_ln_n = n * rep.ln_n;
  rep.per_processor = solo_expectations(d);
  rep.max_expected_reads = 0;
  for (const auto& pe : rep.per_processor)
    rep.max_expected_reads = std::max(rep.max_expected_reads, pe.expected_solo_reads);
  rep.sum_ok = to_double(rep.sum_rho) >= rep.n_ln_n - kLnTolerance;
  rep.max_ok = to_double(rep.max_expected_reads) >= rep.ln_n - kLnTolerance;
  return rep;
}

}  // namespace wle
