#pragma once

// Poise sets: groups of distinct-processor solo executions that can all be
// driven, in one combined execution, up to and including their first write
// to a register while each still sees only its own solo view. Maximum poise
// sets, the layer peeling over B(r), and the contention-weighted bound.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "wle/analyzer.hpp"

namespace wle {

struct SearchBudget {
  std::size_t max_nodes = 1'000'000;
};

namespace detail {

/// Decides whether a set of solo prefixes can be interleaved so that no
/// processor reads a register last written by another member. The final
/// write to the target is dropped from each prefix and appended at the end,
/// which loses no generality: moving those writes later only removes
/// foreign values from other members' reads.
class InterleavingSearch {
 public:
  struct Op {
    bool is_read = false;
    int reg = -1;  // -1 for NULL steps, which constrain nothing
  };

  InterleavingSearch(std::vector<std::vector<Op>> seqs, int num_regs, std::size_t& nodes, std::size_t max_nodes)
      : seqs_(std::move(seqs)), num_regs_(num_regs), nodes_(nodes), max_nodes_(max_nodes) {}

  /// On success `schedule` lists (member, op index) pairs in order.
  bool run(std::vector<std::pair<int, int>>& schedule) {
    State s;
    s.pos.assign(seqs_.size(), 0);
    s.last_writer.assign(static_cast<std::size_t>(num_regs_), -1);
    schedule.clear();
    visited_.clear();
    return dfs(s, schedule);
  }

 private:
  struct State {
    std::vector<int> pos;
    std::vector<int> last_writer;
  };

  bool done(const State& s, std::size_t i) const { return s.pos[i] >= static_cast<int>(seqs_[i].size()); }

  bool foreign_access_pending(const State& s, std::size_t i, int reg) const {
    for (std::size_t j = 0; j < seqs_.size(); ++j) {
      if (j == i) continue;
      for (int a = s.pos[j]; a < static_cast<int>(seqs_[j].size()); ++a)
        if (seqs_[j][static_cast<std::size_t>(a)].reg == reg) return true;
    }
    return false;
  }

  void apply(State& s, std::size_t i, std::vector<std::pair<int, int>>& schedule) const {
    const Op& op = seqs_[i][static_cast<std::size_t>(s.pos[i])];
    if (!op.is_read && op.reg >= 0) s.last_writer[static_cast<std::size_t>(op.reg)] = static_cast<int>(i);
    schedule.emplace_back(static_cast<int>(i), s.pos[i]);
    ++s.pos[i];
  }

  /// Takes steps that can never hurt: valid reads, NULL steps, and writes to
  /// registers no other member will touch again. Returns false on a dead
  /// state (some member's next read sees a foreign value, forever).
  bool close(State& s, std::vector<std::pair<int, int>>& schedule) const {
    bool progress = true;
    while (progress) {
      progress = false;
      for (std::size_t i = 0; i < seqs_.size(); ++i) {
        while (!done(s, i)) {
          const Op& op = seqs_[i][static_cast<std::size_t>(s.pos[i])];
          if (op.reg < 0) {
            apply(s, i, schedule);
          } else if (op.is_read) {
            const int w = s.last_writer[static_cast<std::size_t>(op.reg)];
            if (w != -1 && w != static_cast<int>(i)) return false;
            apply(s, i, schedule);
          } else if (!foreign_access_pending(s, i, op.reg)) {
            apply(s, i, schedule);
          } else {
            break;
          }
          progress = true;
        }
      }
    }
    return true;
  }

  static std::string key(const State& s) {
    std::string k;
    for (int p : s.pos) k += std::to_string(p) + ',';
    k += '|';
    for (int w : s.last_writer) k += std::to_string(w) + ',';
    return k;
  }

  bool dfs(State s, std::vector<std::pair<int, int>>& schedule) {
    const std::size_t mark = schedule.size();
    if (++nodes_ > max_nodes_)
      throw Error(ErrorCode::SearchBudgetExceeded, "poise search exceeded " + std::to_string(max_nodes_) + " nodes");
    if (!close(s, schedule)) {
      schedule.resize(mark);
      return false;
    }
    bool all_done = true;
    for (std::size_t i = 0; i < seqs_.size(); ++i) all_done = all_done && done(s, i);
    if (all_done) return true;
    if (!visited_.insert(key(s)).second) {
      schedule.resize(mark);
      return false;
    }
    // Only writes remain as choices: valid reads were taken eagerly.
    for (std::size_t i = 0; i < seqs_.size(); ++i) {
      if (done(s, i)) continue;
      const std::size_t inner = schedule.size();
      State t = s;
      apply(t, i, schedule);
      if (dfs(std::move(t), schedule)) return true;
      schedule.resize(inner);
    }
    schedule.resize(mark);
    return false;
  }

  std::vector<std::vector<Op>> seqs_;
  int num_regs_;
  std::size_t& nodes_;
  std::size_t max_nodes_;
  std::unordered_set<std::string> visited_;
};

/// Index of the first write to r in e's steps.
inline std::size_t first_write_index(const SoloExecution& e, const RegisterId& r) {
  for (std::size_t i = 0; i < e.steps.size(); ++i) {
    const Action& a = e.steps[i].step.action;
    if (a.is_write() && a.reg == r) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "execution never writes " + r.name());
}

class PoiseOracle {
 public:
  PoiseOracle(const SoloDistributions& d, const RegisterId& r, std::vector<ExecRef> execs, SearchBudget budget)
      : d_(d), r_(r), execs_(std::move(execs)), budget_(budget) {
    std::map<RegisterId, int> ids;
    for (const auto& ref : execs_) {
      const SoloExecution& e = lookup(d_, ref);
      const std::size_t stop = first_write_index(e, r_);
      std::vector<InterleavingSearch::Op> ops;
      for (std::size_t i = 0; i < stop; ++i) {
        const Action& a = e.steps[i].step.action;
        if (!a.is_shared()) continue;
        int reg = -1;
        if (!a.reg.is_null()) reg = ids.emplace(a.reg, static_cast<int>(ids.size())).first->second;
        ops.push_back({a.is_read(), reg});
      }
      ops_.push_back(std::move(ops));
      ends_.push_back(stop);
    }
    num_regs_ = static_cast<int>(ids.size());
  }

  std::size_t size() const noexcept { return execs_.size(); }
  const ExecRef& ref(std::size_t i) const { return execs_[i]; }
  std::size_t nodes() const noexcept { return nodes_; }

  /// Feasibility of the members at these indices; fills an interleaving of
  /// their prefixes (without the final writes) as (member index, step index).
  bool feasible(const std::vector<std::size_t>& members, std::vector<std::pair<std::size_t, std::size_t>>* witness) {
    std::set<Pid> pids;
    for (auto m : members)
      if (!pids.insert(execs_[m].pid).second) return false;
    std::vector<std::vector<InterleavingSearch::Op>> seqs;
    for (auto m : members) seqs.push_back(ops_[m]);
    InterleavingSearch search(std::move(seqs), num_regs_, nodes_, budget_.max_nodes);
    std::vector<std::pair<int, int>> sched;
    if (!search.run(sched)) return false;
    if (witness) {
      witness->clear();
      for (auto [who, op] : sched) witness->emplace_back(members[static_cast<std::size_t>(who)], static_cast<std::size_t>(op));
    }
    return true;
  }

  /// Maps an op index of member i back to its step index in the execution.
  std::size_t step_index(std::size_t member, std::size_t op) const {
    const SoloExecution& e = lookup(d_, execs_[member]);
    std::size_t seen = 0;
    for (std::size_t i = 0; i < e.steps.size(); ++i) {
      if (!e.steps[i].step.action.is_shared()) continue;
      if (seen++ == op) return i;
    }
    return e.steps.size();
  }

  std::size_t final_write_index(std::size_t member) const { return ends_[member]; }

  void tick() {
    if (++nodes_ > budget_.max_nodes)
      throw Error(ErrorCode::SearchBudgetExceeded, "poise search exceeded " + std::to_string(budget_.max_nodes) + " nodes");
  }

 private:
  const SoloDistributions& d_;
  RegisterId r_;
  std::vector<ExecRef> execs_;
  SearchBudget budget_;
  std::vector<std::vector<InterleavingSearch::Op>> ops_;
  std::vector<std::size_t> ends_;
  int num_regs_ = 0;
  std::size_t nodes_ = 0;
};

}  // namespace detail

struct PoiseResult {
  int size = 0;
  std::vector<ExecRef> members;
  /// Combined execution: member prefixes interleaved, then every member's
  /// first write to the register.
  std::vector<ExecutionStep> witness;
  std::size_t nodes = 0;
};

/// Maximum poise set among `candidates` (all of which must write r), by
/// branch-and-bound maximum-clique search over pairwise-feasible executions
/// with a full interleaving check on every extension. Poise sets are closed
/// under subsets, so the search never needs to revisit a rejected extension.
inline PoiseResult max_poise_set(const SoloDistributions& d, const RegisterId& r,
                                 const std::vector<ExecRef>& candidates, SearchBudget budget = {}) {
  PoiseResult res;
  if (candidates.empty()) return res;
  detail::PoiseOracle oracle(d, r, candidates, budget);
  const std::size_t m = oracle.size();

  std::vector<std::vector<bool>> compat(m, std::vector<bool>(m, false));
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b)
      compat[a][b] = compat[b][a] = oracle.feasible({a, b}, nullptr);

  std::vector<std::size_t> best{0};
  std::vector<std::size_t> current;

  // Greedy colouring of the candidate pool; colour classes are independent
  // in the compatibility graph, so |current| + colours bounds any extension.
  auto colour = [&](const std::vector<std::size_t>& pool) {
    std::vector<std::pair<std::size_t, int>> order;
    std::vector<std::vector<std::size_t>> classes;
    for (std::size_t v : pool) {
      std::size_t c = 0;
      for (; c < classes.size(); ++c) {
        bool clash = false;
        for (std::size_t u : classes[c])
          if (compat[u][v]) {
            clash = true;
            break;
          }
        if (!clash) break;
      }
      if (c == classes.size()) classes.emplace_back();
      classes[c].push_back(v);
    }
    for (std::size_t c = 0; c < classes.size(); ++c)
      for (std::size_t v : classes[c]) order.emplace_back(v, static_cast<int>(c) + 1);
    return order;
  };

  auto expand = [&](auto&& self, std::vector<std::size_t> pool) -> void {
    auto order = colour(pool);
    for (std::size_t i = order.size(); i-- > 0;) {
      const auto [v, bound] = order[i];
      if (current.size() + static_cast<std::size_t>(bound) <= best.size()) return;
      oracle.tick();
      current.push_back(v);
      if (current.size() == 1 || oracle.feasible(current, nullptr)) {
        if (current.size() > best.size()) best = current;
        std::vector<std::size_t> next;
        for (std::size_t k = 0; k < i; ++k)
          if (compat[v][order[k].first]) next.push_back(order[k].first);
        self(self, std::move(next));
      }
      current.pop_back();
    }
  };
  std::vector<std::size_t> all(m);
  for (std::size_t i = 0; i < m; ++i) all[i] = i;
  expand(expand, all);
  std::sort(best.begin(), best.end());

  std::vector<std::pair<std::size_t, std::size_t>> sched;
  if (best.size() == 1) {
    for (std::size_t op = 0;; ++op) {
      std::size_t idx = oracle.step_index(best[0], op);
      if (idx >= oracle.final_write_index(best[0])) break;
      sched.emplace_back(best[0], op);
    }
  } else {
    oracle.feasible(best, &sched);
  }

  res.size = static_cast<int>(best.size());
  for (auto b : best) res.members.push_back(oracle.ref(b));
  for (auto [member, op] : sched) {
    const SoloExecution& e = lookup(d, oracle.ref(member));
    res.witness.push_back(e.steps[oracle.step_index(member, op)]);
  }
  for (auto b : best) {
    const SoloExecution& e = lookup(d, oracle.ref(b));
    res.witness.push_back(e.steps[oracle.final_write_index(b)]);
  }
  res.nodes = oracle.nodes();
  return res;
}

/// Replays a poise witness through the algorithm and confirms every read
/// observes what the reader saw in its solo execution.
inline bool replay_poise_witness(const AlgorithmSpec& spec, const PoiseResult& res) {
  Configuration c = initial_configuration(spec);
  for (const auto& s : res.witness) {
    if (c.has_returned(s.step.pid)) return false;
    if (!(c.state(s.step.pid).poised == s.step.action)) return false;
    auto ts = apply_step(spec, c, s.step.pid);
    if (s.branch >= ts.size()) return false;
    if (ts[s.branch].observed != s.observed) return false;
    c = std::move(ts[s.branch].config);
  }
  return true;
}

/// Mass of E left after excluding the k processors holding the most mass.
inline Rational exclusion_mass(const SoloDistributions& d, const std::vector<ExecRef>& execs, int k) {
  std::map<Pid, Rational> mass;
  Rational total = 0;
  for (const auto& ref : execs) {
    const Rational& p = lookup(d, ref).prob;
    mass[ref.pid] += p;
    total += p;
  }
  std::vector<Rational> masses;
  for (auto& [pid, m] : mass) masses.push_back(m);
  std::sort(masses.begin(), masses.end(), [](const Rational& a, const Rational& b) { return a > b; });
  for (std::size_t i = 0; i < masses.size() && i < static_cast<std::size_t>(std::max(k, 0)); ++i) total -= masses[i];
  return total;
}

struct PeelLayer {
  std::vector<ExecRef> executions;
  Rational exclusion_mass;
  int k = 0;
  Rational mass;  // sum Pr[e] / (1 + prefix read potential before r)
  bool within_bound = false;
};

struct PoiseAnalysis {
  RegisterId reg;
  int max_poise = 0;
  PoiseResult max_set;
  std::vector<PeelLayer> layers;
  std::map<ExecRef, std::size_t> xi;
  Rational total = 0;
  bool passed = true;
  std::optional<std::string> violation;
};

/// Normalized write weight of one execution on r.
inline Rational poise_weight(const PotentialTable& table, const SoloExecution& e, const RegisterId& r) {
  const std::size_t xi = e.xi(r).value();
  return e.prob / (1 + prefix_rho(table, e, xi - 1));
}

/// Repeatedly strips from B(r) the executions whose pre-r read potential
/// reaches exclusion_mass / k, until the maximum poise set size drops to 0.
inline PoiseAnalysis peel_layers(const SoloDistributions& d, const PotentialTable& table, const RegisterId& r,
                                 SearchBudget budget = {}) {
  PoiseAnalysis pa;
  pa.reg = r;
  auto it = table.registers.find(r);
  std::vector<ExecRef> remaining = it == table.registers.end() ? std::vector<ExecRef>{} : it->second.writers;
  for (const auto& ref : remaining) pa.xi[ref] = lookup(d, ref).xi(r).value();

  PoiseResult top = max_poise_set(d, r, remaining, budget);
  pa.max_poise = top.size;
  pa.max_set = top;
  int k = top.size;
  while (k > 0) {
    PeelLayer layer;
    layer.k = k;
    layer.exclusion_mass = exclusion_mass(d, remaining, k);
    layer.mass = 0;
    const Rational threshold = layer.exclusion_mass / k;
    std::vector<ExecRef> rest;
    for (const auto& ref : remaining) {
      const SoloExecution& e = lookup(d, ref);
      if (prefix_rho(table, e, pa.xi[ref] - 1) >= threshold) {
        layer.executions.push_back(ref);
        layer.mass += poise_weight(table, e, r);
      } else {
        rest.push_back(ref);
      }
    }
    layer.within_bound = layer.mass <= k;
    if (!layer.within_bound && pa.passed) {
      pa.passed = false;
      pa.violation = "layer mass " + to_fraction_string(layer.mass) + " exceeds k = " + std::to_string(k);
    }
    pa.total += layer.mass;
    pa.layers.push_back(std::move(layer));
    remaining = std::move(rest);
    const int next_k = max_poise_set(d, r, remaining, budget).size;
    if (next_k >= k) {
      pa.passed = false;
      pa.violation = "poise size did not drop after peeling (k = " + std::to_string(k) + ")";
      break;
    }
    k = next_k;
  }
  if (pa.total > Rational(pa.max_poise) * pa.max_poise) {
    pa.passed = false;
    if (!pa.violation) pa.violation = "peel total exceeds max_poise^2";
  }
  return pa;
}

struct KappaBoundReport {
  int kappa = 0;  // max over registers of max_poise
  int n = 0;
  Rational sum_rho;
  double ln_n = 0.0;
  double bound = 0.0;  // n ln n / kappa^2
  /// sum_r rho(r) * sum_{e in B(r)} Pr[e] / (1 + pre-r read potential)
  Rational grouped_sum;
  /// sum_p sum_e Pr[e] * normalized trace sum (the same quantity grouped by execution)
  Rational execution_sum;
  bool regrouping_ok = false;
  bool grouped_ok = false;  // grouped_sum >= n ln n
  bool sum_ok = false;
  bool layers_ok = true;
  Rational max_expected_reads;
  double per_processor_bound = 0.0;
  bool max_ok = false;
  std::vector<PoiseAnalysis> registers;

  bool passed() const { return regrouping_ok && grouped_ok && sum_ok && layers_ok && max_ok; }
};

inline KappaBoundReport check_kappa_bound(const SoloDistributions& d, const PotentialTable& table,
                                          SearchBudget budget = {}) {
  KappaBoundReport rep;
  rep.n = static_cast<int>(d.size());
  rep.sum_rho = table.sum_rho();
  rep.ln_n = std::log(static_cast<double>(rep.n));
  rep.grouped_sum = 0;
  rep.execution_sum = 0;

  for (const auto& [r, pot] : table.registers) {
    PoiseAnalysis pa = peel_layers(d, table, r, budget);
    rep.kappa = std::max(rep.kappa, pa.max_poise);
    rep.layers_ok = rep.layers_ok && pa.passed;
    Rational weight = 0;
    for (const auto& ref : pot.writers) weight += poise_weight(table, lookup(d, ref), r);
    rep.grouped_sum += pot.rho * weight;
    rep.registers.push_back(std::move(pa));
  }
  for (const auto& dist : d)
    for (const auto& e : dist.executions) rep.execution_sum += e.prob * normalized_trace_sum(table, e);

  const double k2 = static_cast<double>(rep.kappa) * rep.kappa;
  rep.bound = rep.kappa == 0 ? 0.0 : rep.n * rep.ln_n / k2;
  rep.regrouping_ok = rep.grouped_sum == rep.execution_sum;
  rep.grouped_ok = to_double(rep.grouped_sum) >= rep.n * rep.ln_n - kLnTolerance;
  rep.sum_ok = rep.kappa > 0 ? to_double(rep.sum_rho) >= rep.bound - kLnTolerance : rep.n <= 1;

  rep.max_expected_reads = 0;
  for (const auto& pe : solo_expectations(d)) rep.max_expected_reads = std::max(rep.max_expected_reads, pe.expected_solo_reads);
  rep.per_processor_bound = rep.kappa == 0 ? 0.0 : rep.ln_n / k2;
  rep.max_ok = to_double(rep.max_expected_reads) >= rep.per_processor_bound - kLnTolerance;
  return rep;
}

}  // namespace wle
