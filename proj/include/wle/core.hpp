#pragma once

// Asynchronous shared-memory model: registers, processor transition systems,
// configurations, executions and the solo-execution enumerator.

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "wle/error.hpp"
#include "wle/rational.hpp"

namespace wle {

using Pid = int;  // 1-based
using json = nlohmann::json;

struct ModelParams {
  int n = 1;
  int kappa = 1;  // kappa == n means unrestricted

  void validate() const {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    if (kappa < 1 || kappa > n)
      throw Error(ErrorCode::InvalidArgument, "kappa must satisfy 1 <= kappa <= n");
  }

  static ModelParams unrestricted(int n) { return ModelParams{n, n}; }
};

class RegisterId {
 public:
  RegisterId() = default;
  explicit RegisterId(std::string name) : name_(std::move(name)) {}

  /// Dummy register used to pad the read/write alternation. Never stored,
  /// never counted in read sets, traces or contention.
  static RegisterId null() { return RegisterId("NULL"); }

  const std::string& name() const noexcept { return name_; }
  bool is_null() const noexcept { return name_ == "NULL"; }

  auto operator<=>(const RegisterId&) const = default;

 private:
  std::string name_;
};

class Value {
 public:
  Value() = default;  // BOTTOM
  static Value bottom() { return Value(); }
  static Value of(std::int64_t v) {
    Value out;
    out.payload_ = v;
    return out;
  }

  bool is_bottom() const noexcept { return !payload_.has_value(); }
  std::int64_t payload() const { return payload_.value(); }
  std::string str() const { return is_bottom() ? "BOTTOM" : std::to_string(*payload_); }

  auto operator<=>(const Value&) const = default;

 private:
  std::optional<std::int64_t> payload_;
};

enum class Decision { Win, Lose };

inline const char* to_string(Decision d) { return d == Decision::Win ? "WIN" : "LOSE"; }

/// The unique next step a processor is poised to take.
struct Action {
  enum class Kind { Read, Write, Return };

  Kind kind = Kind::Return;
  RegisterId reg;
  Value value;
  Decision decision = Decision::Lose;

  static Action read(RegisterId r) { return Action{Kind::Read, std::move(r), Value(), Decision::Lose}; }
  static Action write(RegisterId r, Value v) { return Action{Kind::Write, std::move(r), v, Decision::Lose}; }
  static Action ret(Decision d) { return Action{Kind::Return, RegisterId(), Value(), d}; }

  bool is_read() const noexcept { return kind == Kind::Read; }
  bool is_write() const noexcept { return kind == Kind::Write; }
  bool is_return() const noexcept { return kind == Kind::Return; }
  bool is_shared() const noexcept { return kind != Kind::Return; }

  bool operator==(const Action&) const = default;
};

struct Step {
  Pid pid = 0;
  Action action;

  bool operator==(const Step&) const = default;
};

using Payload = std::vector<std::int64_t>;

struct Branch {
  Rational prob;
  Payload next;
};

/// A processor-indexed transition system. Local states are plain data so the
/// adversary and analyzer can introspect poised steps and enumerate every
/// coin branch; implementations must be pure.
class AlgorithmSpec {
 public:
  virtual ~AlgorithmSpec() = default;

  /// Catalog identifier, e.g. "tournament:n=4".
  virtual std::string id() const = 0;
  virtual int processors() const = 0;
  virtual bool swmr() const = 0;
  virtual bool deterministic() const = 0;

  virtual Payload initial(Pid pid) const = 0;
  /// Must be a function of (pid, payload) only.
  virtual Action poised(Pid pid, const Payload& payload) const = 0;
  /// Successor distribution once the poised shared step resolves. For a
  /// read, `response` is the value read; for a write it is BOTTOM.
  /// Probabilities must be positive and sum to exactly 1.
  virtual std::vector<Branch> next(Pid pid, const Payload& payload, const Value& response) const = 0;
};

using SpecPtr = std::shared_ptr<const AlgorithmSpec>;

struct LocalState {
  Pid pid = 0;
  Payload payload;
  Action poised;

  bool operator==(const LocalState& o) const { return pid == o.pid && payload == o.payload; }
};

inline LocalState make_local_state(const AlgorithmSpec& spec, Pid pid, Payload payload) {
  Action a = spec.poised(pid, payload);
  return LocalState{pid, std::move(payload), std::move(a)};
}

struct Configuration {
  std::map<RegisterId, Value> registers;
  std::vector<LocalState> states;               // index pid - 1
  std::vector<std::optional<Decision>> returned;  // index pid - 1

  int processors() const noexcept { return static_cast<int>(states.size()); }

  Value read(const RegisterId& r) const {
    auto it = registers.find(r);
    return it == registers.end() ? Value::bottom() : it->second;
  }

  const LocalState& state(Pid pid) const { return states.at(static_cast<std::size_t>(pid - 1)); }
  const std::optional<Decision>& decision(Pid pid) const { return returned.at(static_cast<std::size_t>(pid - 1)); }
  bool has_returned(Pid pid) const { return decision(pid).has_value(); }

  std::vector<Pid> winners() const {
    std::vector<Pid> out;
    for (Pid p = 1; p <= processors(); ++p)
      if (decision(p) == Decision::Win) out.push_back(p);
    return out;
  }

  bool operator==(const Configuration& o) const {
    return registers == o.registers && states == o.states && returned == o.returned;
  }
};

struct ExecutionStep {
  Step step;
  std::size_t branch = 0;
  Rational prob = 1;
  std::optional<Value> observed;  // value returned by a read
};

struct Execution {
  std::vector<ExecutionStep> steps;
  Configuration final;

  Rational probability() const {
    Rational p = 1;
    for (const auto& s : steps) p *= s.prob;
    return p;
  }

  std::size_t shared_steps() const {
    std::size_t k = 0;
    for (const auto& s : steps)
      if (s.step.action.is_shared()) ++k;
    return k;
  }
};

struct Transition {
  Rational prob;
  Configuration config;
  std::optional<Value> observed;
};

// ---------------------------------------------------------------------------
// Operations

inline Configuration initial_configuration(const AlgorithmSpec& spec, const ModelParams& params) {
  params.validate();
  if (spec.processors() != params.n)
    throw Error(ErrorCode::SpecArityMismatch, spec.id() + " has " + std::to_string(spec.processors()) +
                                                  " processors, params.n = " + std::to_string(params.n));
  Configuration c;
  c.states.reserve(static_cast<std::size_t>(params.n));
  for (Pid p = 1; p <= params.n; ++p) c.states.push_back(make_local_state(spec, p, spec.initial(p)));
  c.returned.assign(static_cast<std::size_t>(params.n), std::nullopt);
  return c;
}

inline Configuration initial_configuration(const AlgorithmSpec& spec) {
  return initial_configuration(spec, ModelParams::unrestricted(spec.processors()));
}

/// Every coin branch of pid's poised step with its exact probability.
inline std::vector<Transition> apply_step(const AlgorithmSpec& spec, const Configuration& config, Pid pid) {
  if (pid < 1 || pid > config.processors())
    throw Error(ErrorCode::InvalidArgument, "no processor " + std::to_string(pid));
  if (config.has_returned(pid))
    throw Error(ErrorCode::AlreadyReturned, "processor " + std::to_string(pid) + " has returned");

  const LocalState& ls = config.state(pid);
  const Action& a = ls.poised;
  const auto idx = static_cast<std::size_t>(pid - 1);

  if (a.is_return()) {
    Configuration c = config;
    c.returned[idx] = a.decision;
    return {Transition{Rational(1), std::move(c), std::nullopt}};
  }

  Value response;
  std::optional<Value> observed;
  if (a.is_read()) {
    response = a.reg.is_null() ? Value::bottom() : config.read(a.reg);
    observed = response;
  }

  std::vector<Branch> branches = spec.next(pid, ls.payload, response);
  if (branches.empty()) throw Error(ErrorCode::InvalidArgument, spec.id() + ": empty branch table");
  Rational total = 0;
  for (const auto& b : branches) {
    if (b.prob <= 0) throw Error(ErrorCode::InvalidArgument, spec.id() + ": non-positive branch probability");
    total += b.prob;
  }
  if (total != 1) throw Error(ErrorCode::InvalidArgument, spec.id() + ": branch probabilities do not sum to 1");

  std::vector<Transition> out;
  out.reserve(branches.size());
  for (auto& b : branches) {
    Configuration c = config;
    if (a.is_write() && !a.reg.is_null()) c.registers[a.reg] = a.value;
    c.states[idx] = make_local_state(spec, pid, std::move(b.next));
    out.push_back(Transition{b.prob, std::move(c), observed});
  }
  return out;
}

/// Appends pid's step along the given branch to an execution.
inline void extend(const AlgorithmSpec& spec, Execution& exec, Pid pid, std::size_t branch = 0) {
  Step step{pid, exec.final.state(pid).poised};
  auto ts = apply_step(spec, exec.final, pid);
  if (branch >= ts.size()) throw Error(ErrorCode::InvalidArgument, "branch index out of range");
  exec.steps.push_back(ExecutionStep{step, branch, ts[branch].prob, ts[branch].observed});
  exec.final = std::move(ts[branch].config);
}

/// Replays recorded (pid, branch) choices from `start`.
inline Configuration replay(const AlgorithmSpec& spec, const Configuration& start,
                            const std::vector<ExecutionStep>& steps) {
  Execution e{{}, start};
  for (const auto& s : steps) extend(spec, e, s.step.pid, s.branch);
  return e.final;
}

inline std::set<Pid> poised_writers(const Configuration& config, const RegisterId& reg) {
  std::set<Pid> out;
  if (reg.is_null()) return out;
  for (Pid p = 1; p <= config.processors(); ++p) {
    if (config.has_returned(p)) continue;
    const Action& a = config.state(p).poised;
    if (a.is_write() && a.reg == reg) out.insert(p);
  }
  return out;
}

/// 4 * n * ceil(log2 n + 1) shared steps.
inline std::size_t default_depth_limit(int n) {
  int lg = 0;
  while ((1 << lg) < n) ++lg;
  return static_cast<std::size_t>(4 * n * (lg + 1));
}

struct SoloLeaf {
  Execution execution;  // relative to the tree's root configuration
  std::optional<Decision> decision;
  bool depth_exhausted = false;

  Rational probability() const { return execution.probability(); }
};

struct SoloTree {
  Pid pid = 0;
  Configuration root;
  std::vector<SoloLeaf> leaves;
  bool any_exhausted = false;

  bool complete() const noexcept { return !any_exhausted; }
  Rational total_probability() const {
    Rational t = 0;
    for (const auto& l : leaves) t += l.probability();
    return t;
  }
};

/// Breadth-complete tree of pid's solo branches from `config`. Branches that
/// reach `depth_limit` shared steps without returning are kept and flagged.
inline SoloTree run_solo(const AlgorithmSpec& spec, const Configuration& config, Pid pid,
                         std::size_t depth_limit) {
  if (depth_limit < 1) throw Error(ErrorCode::InvalidArgument, "depth_limit must be >= 1");
  if (config.has_returned(pid))
    throw Error(ErrorCode::AlreadyReturned, "processor " + std::to_string(pid) + " has returned");

  SoloTree tree;
  tree.pid = pid;
  tree.root = config;

  std::vector<Execution> frontier{Execution{{}, config}};
  while (!frontier.empty()) {
    Execution e = std::move(frontier.back());
    frontier.pop_back();
    const Action& a = e.final.state(pid).poised;
    if (a.is_return()) {
      extend(spec, e, pid, 0);
      tree.leaves.push_back(SoloLeaf{std::move(e), a.decision, false});
      continue;
    }
    if (e.shared_steps() >= depth_limit) {
      tree.any_exhausted = true;
      tree.leaves.push_back(SoloLeaf{std::move(e), std::nullopt, true});
      continue;
    }
    auto ts = apply_step(spec, e.final, pid);
    // Push in reverse so branch 0 is explored first; leaves come out in branch order.
    for (std::size_t b = ts.size(); b-- > 0;) {
      Execution child = e;
      child.steps.push_back(ExecutionStep{Step{pid, a}, b, ts[b].prob, ts[b].observed});
      child.final = std::move(ts[b].config);
      frontier.push_back(std::move(child));
    }
  }
  return tree;
}

/// Checks the read/write alternation normal form along every solo path from
/// the initial configuration. The first shared step may be either kind.
inline bool solo_paths_alternate(const AlgorithmSpec& spec, std::size_t depth_limit) {
  Configuration init = initial_configuration(spec);
  for (Pid p = 1; p <= spec.processors(); ++p) {
    SoloTree t = run_solo(spec, init, p, depth_limit);
    for (const auto& leaf : t.leaves) {
      std::optional<Action::Kind> last;
      for (const auto& s : leaf.execution.steps) {
        if (!s.step.action.is_shared()) continue;
        if (last && *last == s.step.action.kind) return false;
        last = s.step.action.kind;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Canonical JSON (std::map-backed objects, so keys come out sorted)

inline json value_to_json(const Value& v) {
  if (v.is_bottom()) return "BOTTOM";
  return v.payload();
}

inline json to_json(const Step& s) {
  json j;
  j["pid"] = s.pid;
  switch (s.action.kind) {
    case Action::Kind::Read:
      j["op"] = "read";
      j["reg"] = s.action.reg.name();
      break;
    case Action::Kind::Write:
      j["op"] = "write";
      j["reg"] = s.action.reg.name();
      j["value"] = value_to_json(s.action.value);
      break;
    case Action::Kind::Return:
      j["op"] = "return";
      j["decision"] = to_string(s.action.decision);
      break;
  }
  return j;
}

inline json to_json(const Configuration& c) {
  json regs = json::object();
  for (const auto& [r, v] : c.registers) regs[r.name()] = value_to_json(v);
  json procs = json::array();
  for (Pid p = 1; p <= c.processors(); ++p) {
    json pj;
    pj["pid"] = p;
    pj["payload"] = c.state(p).payload;
    if (c.has_returned(p))
      pj["returned"] = to_string(*c.decision(p));
    else
      pj["poised"] = to_json(Step{p, c.state(p).poised});
    procs.push_back(std::move(pj));
  }
  return json{{"registers", regs}, {"processors", procs}};
}

inline json to_json(const std::vector<ExecutionStep>& steps) {
  json arr = json::array();
  for (const auto& s : steps) {
    json j = to_json(s.step);
    j["branch"] = s.branch;
    j["prob"] = to_fraction_string(s.prob);
    if (s.observed) j["observed"] = value_to_json(*s.observed);
    arr.push_back(std::move(j));
  }
  return arr;
}

inline json to_json(const Execution& e) {
  return json{{"steps", to_json(e.steps)},
              {"final", to_json(e.final)},
              {"probability", to_fraction_string(e.probability())}};
}

/// Compact canonical key for state deduplication.
inline std::string canonical_key(const Configuration& c) {
  std::string k;
  for (const auto& [r, v] : c.registers) {
    k += r.name();
    k += '=';
    k += v.str();
    k += ';';
  }
  k += '|';
  for (Pid p = 1; p <= c.processors(); ++p) {
    if (c.has_returned(p)) {
      k += c.decision(p) == Decision::Win ? 'W' : 'L';
    } else {
      for (auto x : c.state(p).payload) {
        k += std::to_string(x);
        k += ',';
      }
    }
    k += '/';
  }
  return k;
}

}  // namespace wle
