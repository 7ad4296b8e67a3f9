#pragma once

// Bounded exhaustive exploration of every schedule and coin branch.

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "wle/core.hpp"

namespace wle {

struct ExploreBudget {
  std::size_t max_depth = 12;  // shared steps along one path
  std::size_t max_states = 1'000'000;
  std::size_t max_witnesses = 16;
};

struct UniquenessViolation {
  Execution execution;
  std::vector<Pid> winners;
};

struct CheckReport {
  std::string algorithm;
  int n = 0;
  ExploreBudget budget;
  std::size_t states_explored = 0;
  std::size_t depth_truncated = 0;  // states left unexpanded at max_depth
  bool budget_exceeded = false;
  std::vector<UniquenessViolation> uniqueness_violations;
  std::size_t violating_states = 0;
  bool solo_output_ok = true;
  bool obstruction_free_ok = true;  // within max_depth
  bool alternation_ok = true;
  bool swmr_ok = true;              // only meaningful for single-writer specs
  std::map<RegisterId, int> max_contention;

  /// Every reachable configuration was expanded.
  bool complete() const noexcept { return !budget_exceeded && depth_truncated == 0; }

  int max_stalls() const {
    int s = 0;
    for (const auto& [r, c] : max_contention) s = std::max(s, c - 1);
    return s;
  }

  bool safe() const noexcept {
    return uniqueness_violations.empty() && solo_output_ok && obstruction_free_ok && alternation_ok && swmr_ok;
  }
};

namespace detail {

/// True when every solo branch of pid from `c` returns within `limit` shared steps.
inline bool solo_terminates(const AlgorithmSpec& spec, const Configuration& c, Pid pid, std::size_t limit) {
  if (c.has_returned(pid)) return true;
  const Action& a = c.state(pid).poised;
  if (a.is_return()) return true;
  if (limit == 0) return false;
  for (auto& t : apply_step(spec, c, pid))
    if (!solo_terminates(spec, t.config, pid, limit - 1)) return false;
  return true;
}

class Explorer {
 public:
  Explorer(const AlgorithmSpec& spec, const ExploreBudget& budget, CheckReport& report)
      : spec_(spec), budget_(budget), rep_(report) {}

  void run(const Configuration& init) {
    path_.clear();
    std::map<RegisterId, std::set<Pid>> writers;
    visit(init, writers, 0);
  }

 private:
  std::string key(const Configuration& c, const std::map<RegisterId, std::set<Pid>>& writers) const {
    std::string k = canonical_key(c);
    if (spec_.swmr()) {
      k += '#';
      for (const auto& [r, ws] : writers) {
        k += r.name();
        for (Pid p : ws) k += ":" + std::to_string(p);
        k += ';';
      }
    }
    return k;
  }

  void inspect(const Configuration& c, const std::map<RegisterId, std::set<Pid>>& writers) {
    std::map<RegisterId, int> poised;
    for (Pid p = 1; p <= c.processors(); ++p) {
      if (c.has_returned(p)) continue;
      const Action& a = c.state(p).poised;
      if (a.is_write() && !a.reg.is_null()) poised[a.reg] += 1;
    }
    for (const auto& [r, k] : poised) {
      int& slot = rep_.max_contention[r];
      slot = std::max(slot, k);
    }
    if (spec_.swmr()) {
      for (Pid p = 1; p <= c.processors(); ++p) {
        if (c.has_returned(p)) continue;
        const Action& a = c.state(p).poised;
        if (!a.is_write() || a.reg.is_null()) continue;
        std::set<Pid> all = poised_writers(c, a.reg);
        if (auto it = writers.find(a.reg); it != writers.end()) all.insert(it->second.begin(), it->second.end());
        if (all.size() > 1) rep_.swmr_ok = false;
      }
    }

    auto winners = c.winners();
    if (winners.size() >= 2) {
      ++rep_.violating_states;
      if (rep_.uniqueness_violations.size() < budget_.max_witnesses)
        rep_.uniqueness_violations.push_back(UniquenessViolation{Execution{path_, c}, winners});
    }

    for (Pid p = 1; p <= c.processors(); ++p)
      if (!solo_terminates(spec_, c, p, budget_.max_depth)) rep_.obstruction_free_ok = false;
  }

  void visit(const Configuration& c, std::map<RegisterId, std::set<Pid>>& writers, std::size_t depth) {
    // A state first reached deep in the search is expanded again when a
    // shallower path reaches it, so the depth bound never hides successors.
    auto [it, fresh] = seen_.try_emplace(key(c, writers), depth);
    if (!fresh) {
      if (it->second <= depth) return;
      it->second = depth;
    } else {
      if (seen_.size() > budget_.max_states) {
        rep_.budget_exceeded = true;
        return;
      }
      ++rep_.states_explored;
      inspect(c, writers);
    }

    for (Pid p = 1; p <= c.processors(); ++p) {
      if (rep_.budget_exceeded) return;
      if (c.has_returned(p)) continue;
      const Action a = c.state(p).poised;
      if (a.is_shared() && depth >= budget_.max_depth) {
        ++rep_.depth_truncated;
        continue;
      }
      auto ts = apply_step(spec_, c, p);
      for (std::size_t b = 0; b < ts.size(); ++b) {
        const Transition& t = ts[b];
        if (a.is_shared()) {
          const Action& succ = t.config.state(p).poised;
          if (succ.is_shared() && succ.kind == a.kind) rep_.alternation_ok = false;
        }
        bool added = false;
        if (a.is_write() && !a.reg.is_null()) added = writers[a.reg].insert(p).second;
        path_.push_back(ExecutionStep{Step{p, a}, b, t.prob, t.observed});
        visit(t.config, writers, depth + (a.is_shared() ? 1 : 0));
        path_.pop_back();
        if (added) {
          writers[a.reg].erase(p);
          if (writers[a.reg].empty()) writers.erase(a.reg);
        }
      }
    }
  }

  const AlgorithmSpec& spec_;
  ExploreBudget budget_;
  CheckReport& rep_;
  std::vector<ExecutionStep> path_;
  std::unordered_map<std::string, std::size_t> seen_;
};

}  // namespace detail

/// Depth-first search over all schedules and coin branches from the initial
/// configuration, deduplicating configurations. Checks leader uniqueness in
/// every visited configuration, solo termination from every visited
/// configuration, solo output from the initial one, and records the largest
/// number of processors simultaneously poised to write each register.
inline CheckReport explore(const AlgorithmSpec& spec, const ModelParams& params, const ExploreBudget& budget) {
  if (budget.max_depth < 1 || budget.max_states < 1)
    throw Error(ErrorCode::InvalidArgument, "explore budget must be positive");
  Configuration init = initial_configuration(spec, params);

  CheckReport rep;
  rep.algorithm = spec.id();
  rep.n = params.n;
  rep.budget = budget;

  const std::size_t solo_limit = std::max(budget.max_depth, default_depth_limit(params.n));
  for (Pid p = 1; p <= params.n; ++p) {
    SoloTree t = run_solo(spec, init, p, solo_limit);
    for (const auto& leaf : t.leaves)
      if (leaf.decision != Decision::Win) rep.solo_output_ok = false;
  }

  detail::Explorer(spec, budget, rep).run(init);

  std::sort(rep.uniqueness_violations.begin(), rep.uniqueness_violations.end(),
            [](const UniquenessViolation& a, const UniquenessViolation& b) {
              if (a.execution.steps.size() != b.execution.steps.size())
                return a.execution.steps.size() < b.execution.steps.size();
              return to_json(a.execution.steps).dump() < to_json(b.execution.steps).dump();
            });
  return rep;
}

/// Per register: the largest number of simultaneously poised writers minus one.
inline std::map<RegisterId, int> measure_stalls(const AlgorithmSpec& spec, const ModelParams& params,
                                                const ExploreBudget& budget) {
  CheckReport rep = explore(spec, params, budget);
  if (rep.budget_exceeded)
    throw Error(ErrorCode::SearchBudgetExceeded, "state budget exhausted after " +
                                                     std::to_string(rep.states_explored) + " states");
  std::map<RegisterId, int> out;
  for (const auto& [r, c] : rep.max_contention) out[r] = std::max(0, c - 1);
  return out;
}

inline json to_json(const CheckReport& r) {
  json contention = json::object();
  json stalls = json::object();
  for (const auto& [reg, c] : r.max_contention) {
    contention[reg.name()] = c;
    stalls[reg.name()] = std::max(0, c - 1);
  }
  json violations = json::array();
  for (const auto& v : r.uniqueness_violations)
    violations.push_back(json{{"winners", v.winners}, {"execution", to_json(v.execution)}});
  return json{{"algorithm", r.algorithm},
              {"n", r.n},
              {"max_depth", r.budget.max_depth},
              {"max_states", r.budget.max_states},
              {"states_explored", r.states_explored},
              {"depth_truncated", r.depth_truncated},
              {"complete", r.complete()},
              {"budget_exceeded", r.budget_exceeded},
              {"violating_states", r.violating_states},
              {"uniqueness_violations", violations},
              {"solo_output_ok", r.solo_output_ok},
              {"obstruction_free_ok", r.obstruction_free_ok},
              {"alternation_ok", r.alternation_ok},
              {"swmr_ok", r.swmr_ok},
              {"max_contention", contention},
              {"stalls", stalls},
              {"max_stalls", r.max_stalls()},
              {"passed", r.safe() && !r.budget_exceeded}};
}

}  // namespace wle
