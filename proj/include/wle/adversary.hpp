#pragma once

// Iterative freezing adversary against deterministic algorithms: repeatedly
// runs the least-blamed available processor solo and freezes it right before
// its first write that some other available processor reads solo.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wle/core.hpp"

namespace wle {

enum class AdversaryMode { Swmr, Kappa };

inline const char* to_string(AdversaryMode m) { return m == AdversaryMode::Swmr ? "swmr" : "kappa"; }

struct FreezeRecord {
  Pid pid = 0;
  std::vector<ExecutionStep> alpha;  // solo steps appended to the prefix
  Step withheld;                     // the write w_j, never executed
  RegisterId target;
  std::set<Pid> blamed;
};

struct AdversaryState {
  int t = 0;
  std::set<Pid> available;
  std::map<Pid, FreezeRecord> frozen;
  std::map<Pid, unsigned> blame;  // available processors only
  Execution prefix;
  std::vector<BigInt> potential_log;
  /// Solo read sets from the initial configuration, computed once.
  std::map<Pid, std::set<RegisterId>> solo_reads;
  /// Registers whose freezes blamed each processor, in order.
  std::map<Pid, std::vector<RegisterId>> blame_registers;

  BigInt potential() const {
    BigInt g = 0;
    for (Pid p : available) g += BigInt(1) << blame.at(p);
    return g;
  }
};

/// Raised when no freeze point exists. Carries the two-WIN interleaving:
/// the victim runs solo to completion, then another available processor.
class NoFreezePointError : public Error {
 public:
  NoFreezePointError(const std::string& what, Execution counterexample, Pid victim, Pid other)
      : Error(ErrorCode::NoFreezePoint, what),
        counterexample_(std::move(counterexample)),
        victim_(victim),
        other_(other) {}

  const Execution& counterexample() const noexcept { return counterexample_; }
  Pid victim() const noexcept { return victim_; }
  Pid other() const noexcept { return other_; }

 private:
  Execution counterexample_;
  Pid victim_;
  Pid other_;
};

namespace detail {

/// Runs pid solo from exec.final until `stop` holds for its poised action or
/// it returns. Returns true when stopped by `stop`.
template <typename Stop>
bool run_deterministic_until(const AlgorithmSpec& spec, Execution& exec, Pid pid, std::size_t limit,
                             Stop&& stop) {
  std::size_t taken = 0;
  while (!exec.final.has_returned(pid)) {
    const Action& a = exec.final.state(pid).poised;
    if (stop(a)) return true;
    if (a.is_shared() && taken++ >= limit)
      throw Error(ErrorCode::DepthExhausted, spec.id() + ": processor " + std::to_string(pid) +
                                                 " did not return within " + std::to_string(limit) + " solo steps");
    auto ts = apply_step(spec, exec.final, pid);
    if (ts.size() != 1)
      throw Error(ErrorCode::NondeterministicSpec, spec.id() + ": processor " + std::to_string(pid) + " branches");
    exec.steps.push_back(ExecutionStep{Step{pid, a}, 0, ts[0].prob, ts[0].observed});
    exec.final = std::move(ts[0].config);
  }
  return false;
}

}  // namespace detail

/// Registers read in pid's unique solo execution from the initial configuration.
inline std::set<RegisterId> solo_read_set(const AlgorithmSpec& spec, Pid pid) {
  Execution e{{}, initial_configuration(spec)};
  detail::run_deterministic_until(spec, e, pid, default_depth_limit(spec.processors()),
                                  [](const Action&) { return false; });
  std::set<RegisterId> out;
  for (const auto& s : e.steps)
    if (s.step.action.is_read() && !s.step.action.reg.is_null()) out.insert(s.step.action.reg);
  return out;
}

inline AdversaryState initial_adversary_state(const AlgorithmSpec& spec) {
  AdversaryState st;
  st.prefix = Execution{{}, initial_configuration(spec)};
  for (Pid p = 1; p <= spec.processors(); ++p) {
    st.available.insert(p);
    st.blame[p] = 0;
    st.solo_reads[p] = solo_read_set(spec, p);
  }
  st.potential_log.push_back(st.potential());
  return st;
}

/// Available processor with minimal blame; ties go to the lowest pid.
inline Pid choose_victim(const AdversaryState& state) {
  if (state.available.empty()) throw Error(ErrorCode::InvalidArgument, "no available processor");
  Pid best = *state.available.begin();
  for (Pid p : state.available)
    if (state.blame.at(p) < state.blame.at(best)) best = p;
  return best;
}

inline FreezeRecord find_freeze_point(const AdversaryState& state, const AlgorithmSpec& spec, Pid j) {
  if (!state.available.count(j)) throw Error(ErrorCode::InvalidArgument, "victim is not available");
  if (state.available.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two available processors");

  std::set<RegisterId> watched;
  for (Pid k : state.available)
    if (k != j) watched.insert(state.solo_reads.at(k).begin(), state.solo_reads.at(k).end());

  const std::size_t limit = default_depth_limit(spec.processors());
  Execution run{{}, state.prefix.final};
  bool frozen = detail::run_deterministic_until(
      spec, run, j, limit, [&](const Action& a) { return a.is_write() && watched.count(a.reg) > 0; });

  if (!frozen) {
    // j returned without writing anything another available processor reads:
    // let the first such processor run solo afterwards as well.
    Pid other = 0;
    for (Pid k : state.available)
      if (k != j) {
        other = k;
        break;
      }
    Execution cex = state.prefix;
    for (const auto& s : run.steps) cex.steps.push_back(s);
    cex.final = run.final;
    detail::run_deterministic_until(spec, cex, other, limit, [](const Action&) { return false; });
    throw NoFreezePointError(spec.id() + ": processor " + std::to_string(j) +
                                 " completes solo without writing a register read by processor " +
                                 std::to_string(other),
                             std::move(cex), j, other);
  }

  FreezeRecord rec;
  rec.pid = j;
  rec.alpha = std::move(run.steps);
  rec.withheld = Step{j, run.final.state(j).poised};
  rec.target = rec.withheld.action.reg;
  for (Pid k : state.available)
    if (k != j && state.solo_reads.at(k).count(rec.target)) rec.blamed.insert(k);
  return rec;
}

/// Every available processor is in its initial state and every register in
/// their solo read sets still holds BOTTOM at the end of the prefix.
inline bool verify_prefix_invariants(const AdversaryState& state, const AlgorithmSpec& spec) {
  const Configuration& c = state.prefix.final;
  for (Pid p : state.available) {
    if (c.has_returned(p)) return false;
    if (c.state(p).payload != spec.initial(p)) return false;
    for (const auto& r : state.solo_reads.at(p))
      if (!c.read(r).is_bottom()) return false;
  }
  return true;
}

/// Performs one strategy step in place and returns the freeze it made.
inline FreezeRecord advance_strategy(AdversaryState& state, const AlgorithmSpec& spec) {
  const Pid j = choose_victim(state);
  FreezeRecord rec = find_freeze_point(state, spec, j);

  Configuration c = state.prefix.final;
  for (const auto& s : rec.alpha) {
    auto ts = apply_step(spec, c, s.step.pid);
    c = std::move(ts.at(s.branch).config);
    state.prefix.steps.push_back(s);
  }
  state.prefix.final = std::move(c);

  state.available.erase(j);
  state.blame.erase(j);
  for (Pid k : rec.blamed) {
    state.blame[k] += 1;
    state.blame_registers[k].push_back(rec.target);
  }
  state.frozen[j] = rec;
  ++state.t;

  BigInt g = state.potential();
  if (g < state.potential_log.back())
    throw Error(ErrorCode::PotentialDrop, "potential dropped at step " + std::to_string(state.t));
  state.potential_log.push_back(g);
  return rec;
}

struct StrategyReport {
  std::string algorithm;
  int n = 0;
  AdversaryMode mode = AdversaryMode::Swmr;
  int kappa = 1;
  Pid survivor = 0;
  unsigned blame_final = 0;
  std::vector<BigInt> gamma_trace;
  Execution prefix;
  std::vector<FreezeRecord> freezes;
  std::vector<RegisterId> survivor_blame_registers;
  int distinct_solo_reads = 0;
  double bound_log2n = 0.0;
  bool potential_ok = false;   // Gamma_t >= n at every step
  bool invariants_ok = false;  // prefix invariants held after every step
  bool blame_bound_ok = false; // 2^blame >= n
  bool reads_ok = false;       // mode-specific read accounting
  bool passed = false;
};

inline StrategyReport run_strategy(const AlgorithmSpec& spec, const ModelParams& params, AdversaryMode mode) {
  params.validate();
  if (spec.processors() != params.n) throw Error(ErrorCode::SpecArityMismatch, spec.id());
  if (!spec.deterministic()) throw Error(ErrorCode::NondeterministicSpec, spec.id() + " is randomized");
  if (mode == AdversaryMode::Swmr && !spec.swmr())
    throw Error(ErrorCode::SwmrRequired, spec.id() + " is not single-writer; use kappa mode");

  StrategyReport rep;
  rep.algorithm = spec.id();
  rep.n = params.n;
  rep.mode = mode;
  rep.kappa = mode == AdversaryMode::Swmr ? 1 : params.kappa;
  rep.bound_log2n = std::log2(static_cast<double>(params.n));

  AdversaryState st = initial_adversary_state(spec);
  const BigInt n = params.n;
  bool invariants = verify_prefix_invariants(st, spec);
  while (st.available.size() > 1) {
    rep.freezes.push_back(advance_strategy(st, spec));
    invariants = invariants && verify_prefix_invariants(st, spec);
  }

  rep.survivor = *st.available.begin();
  rep.blame_final = st.blame.at(rep.survivor);
  rep.gamma_trace = st.potential_log;
  rep.prefix = st.prefix;
  rep.survivor_blame_registers = st.blame_registers[rep.survivor];
  rep.distinct_solo_reads = static_cast<int>(st.solo_reads.at(rep.survivor).size());

  rep.potential_ok = std::all_of(st.potential_log.begin(), st.potential_log.end(),
                                 [&](const BigInt& g) { return g >= n; });
  rep.invariants_ok = invariants;
  rep.blame_bound_ok = pow2_at_least(rep.blame_final, n);

  // Each blame unit of the survivor comes from a register it reads solo.
  const std::set<RegisterId>& reads = st.solo_reads.at(rep.survivor);
  std::map<RegisterId, int> units;
  for (const auto& r : rep.survivor_blame_registers) units[r] += 1;
  bool attributed = std::all_of(units.begin(), units.end(), [&](const auto& kv) { return reads.count(kv.first) > 0; });
  if (mode == AdversaryMode::Swmr) {
    bool unique = std::all_of(units.begin(), units.end(), [](const auto& kv) { return kv.second == 1; });
    rep.reads_ok = attributed && unique && rep.distinct_solo_reads >= static_cast<int>(rep.blame_final);
  } else {
    bool dedup = std::all_of(units.begin(), units.end(), [&](const auto& kv) { return kv.second <= rep.kappa; });
    rep.reads_ok = attributed && dedup &&
                   static_cast<long long>(rep.distinct_solo_reads) * rep.kappa >= static_cast<long long>(rep.blame_final);
  }
  rep.passed = rep.potential_ok && rep.invariants_ok && rep.blame_bound_ok && rep.reads_ok;
  return rep;
}

inline json to_json(const FreezeRecord& f) {
  std::vector<int> blamed(f.blamed.begin(), f.blamed.end());
  return json{{"pid", f.pid},
              {"alpha", to_json(f.alpha)},
              {"withheld", to_json(f.withheld)},
              {"target", f.target.name()},
              {"blamed", blamed}};
}

inline json to_json(const StrategyReport& r) {
  json gammas = json::array();
  for (const auto& g : r.gamma_trace) gammas.push_back(g.str());
  json freezes = json::array();
  for (const auto& f : r.freezes) freezes.push_back(to_json(f));
  json blame_regs = json::array();
  for (const auto& reg : r.survivor_blame_registers) blame_regs.push_back(reg.name());
  return json{{"algorithm", r.algorithm},
              {"n", r.n},
              {"mode", to_string(r.mode)},
              {"kappa", r.kappa},
              {"survivor", r.survivor},
              {"blame_final", r.blame_final},
              {"gamma_trace", gammas},
              {"prefix_steps", to_json(r.prefix.steps)},
              {"freezes", freezes},
              {"survivor_blame_registers", blame_regs},
              {"distinct_solo_reads", r.distinct_solo_reads},
              {"bound_log2n", r.bound_log2n},
              {"potential_ok", r.potential_ok},
              {"invariants_ok", r.invariants_ok},
              {"passed", r.passed}};
}

}  // namespace wle
