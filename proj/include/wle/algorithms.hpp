#pragma once

// Built-in weak leader election algorithms.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wle/core.hpp"

namespace wle {

namespace detail {

inline int ceil_log(int base, int n) {
  int depth = 0;
  long long reach = 1;
  while (reach < n) {
    reach *= base;
    ++depth;
  }
  return depth;
}

inline long long ipow(long long base, int e) {
  long long r = 1;
  while (e-- > 0) r *= base;
  return r;
}

}  // namespace detail

/// Tournament of one-shot flag races over a complete binary tree. A processor
/// writes its side's flag at a node, reads the opposite flag and advances iff
/// it read BOTTOM. Non-power-of-two n is padded with phantom leaves; a node
/// whose opposite subtree is all phantoms is skipped without any step.
///
/// Payload: [level, phase], phase 0 = write, 1 = read, 2 = won, 3 = lost.
class Tournament final : public AlgorithmSpec {
 public:
  explicit Tournament(int n, bool flag_race_names = false) : n_(n), flag_race_names_(flag_race_names) {
    if (n < 2) throw Error(ErrorCode::BadArity, "tournament needs n >= 2, got " + std::to_string(n));
    depth_ = detail::ceil_log(2, n);
  }

  std::string id() const override { return flag_race_names_ ? "flag_race" : "tournament:n=" + std::to_string(n_); }
  int processors() const override { return n_; }
  bool swmr() const override { return true; }
  bool deterministic() const override { return true; }
  int depth() const noexcept { return depth_; }

  Payload initial(Pid pid) const override {
    int level = next_level(pid, 0);
    return {level, level == depth_ ? kWon : kWrite};
  }

  Action poised(Pid pid, const Payload& s) const override {
    const int level = static_cast<int>(s.at(0));
    switch (s.at(1)) {
      case kWrite: return Action::write(flag(pid, level, false), Value::of(1));
      case kRead: return Action::read(flag(pid, level, true));
      case kWon: return Action::ret(Decision::Win);
      default: return Action::ret(Decision::Lose);
    }
  }

  std::vector<Branch> next(Pid pid, const Payload& s, const Value& response) const override {
    const int level = static_cast<int>(s.at(0));
    switch (s.at(1)) {
      case kWrite: return {{1, {level, kRead}}};
      case kRead: {
        if (!response.is_bottom()) return {{1, {level, kLost}}};
        int up = next_level(pid, level + 1);
        return {{1, {up, up == depth_ ? kWon : kWrite}}};
      }
      default: throw Error(ErrorCode::AlreadyReturned, "tournament: no step after return");
    }
  }

  /// Flag written by pid at `level` (opposite = the flag it reads there).
  RegisterId flag(Pid pid, int level, bool opposite) const {
    const int leaf = pid - 1;
    const int node = leaf >> (level + 1);
    int side = (leaf >> level) & 1;
    if (opposite) side ^= 1;
    if (flag_race_names_) return RegisterId("flag" + std::to_string(side + 1));
    return RegisterId("t" + std::to_string(level) + "." + std::to_string(node) + "." + std::to_string(side));
  }

 private:
  static constexpr std::int64_t kWrite = 0, kRead = 1, kWon = 2, kLost = 3;

  bool bye(Pid pid, int level) const {
    const int leaf = pid - 1;
    const int sibling_first_leaf = ((leaf >> level) ^ 1) << level;
    return sibling_first_leaf >= n_;
  }

  int next_level(Pid pid, int level) const {
    while (level < depth_ && bye(pid, level)) ++level;
    return level;
  }

  int n_;
  bool flag_race_names_;
  int depth_ = 0;
};

/// Complete kappa-ary tree of Lamport splitters. Each splitter runs
///   X := pid; if Y return LOSE; Y := true; if X != pid return LOSE;
/// and its winner (stop) climbs to the parent. Every LOSE is terminal.
/// With a single node the registers are named plainly X and Y.
///
/// Payload: [level, phase], phase 0..3 = the four splitter steps, 4 = won, 5 = lost.
class SplitterTree final : public AlgorithmSpec {
 public:
  SplitterTree(int n, int kappa, bool plain_names) : n_(n), kappa_(kappa), plain_names_(plain_names) {
    if (n < 1) throw Error(ErrorCode::BadArity, "splitter tree needs n >= 1");
    if (kappa < 2) throw Error(ErrorCode::BadArity, "kappa-splitter tree needs kappa >= 2");
    depth_ = std::max(1, detail::ceil_log(kappa, n));
  }

  std::string id() const override {
    if (plain_names_) return "splitter:n=" + std::to_string(n_);
    return "kst:n=" + std::to_string(n_) + ",k=" + std::to_string(kappa_);
  }
  int processors() const override { return n_; }
  bool swmr() const override { return false; }
  bool deterministic() const override { return true; }
  int depth() const noexcept { return depth_; }
  int fanout() const noexcept { return kappa_; }

  Payload initial(Pid) const override { return {0, 0}; }

  Action poised(Pid pid, const Payload& s) const override {
    const int level = static_cast<int>(s.at(0));
    switch (s.at(1)) {
      case 0: return Action::write(reg(pid, level, 'X'), Value::of(pid));
      case 1: return Action::read(reg(pid, level, 'Y'));
      case 2: return Action::write(reg(pid, level, 'Y'), Value::of(1));
      case 3: return Action::read(reg(pid, level, 'X'));
      case 4: return Action::ret(Decision::Win);
      default: return Action::ret(Decision::Lose);
    }
  }

  std::vector<Branch> next(Pid pid, const Payload& s, const Value& response) const override {
    const std::int64_t level = s.at(0);
    switch (s.at(1)) {
      case 0: return {{1, {level, 1}}};
      case 1: return {{1, {level, response.is_bottom() ? 2 : 5}}};
      case 2: return {{1, {level, 3}}};
      case 3:
        if (response.is_bottom() || response.payload() != pid) return {{1, {level, 5}}};
        if (level + 1 == depth_) return {{1, {level, 4}}};
        return {{1, {level + 1, 0}}};
      default: throw Error(ErrorCode::AlreadyReturned, "splitter: no step after return");
    }
  }

  RegisterId reg(Pid pid, int level, char which) const {
    if (plain_names_) return RegisterId(std::string(1, which));
    const long long node = (pid - 1) / detail::ipow(kappa_, level + 1);
    return RegisterId("s" + std::to_string(level) + "." + std::to_string(node) + "." + which);
  }

 private:
  int n_;
  int kappa_;
  bool plain_names_;
  int depth_ = 1;
};

/// Randomized SWMR fixture: a dummy read of NULL resolves a coin that picks
/// one of two private scratch registers; the processor writes it, reads it
/// back and then runs the tournament.
///
/// Payload: [stage, choice, tournament level, tournament phase].
class RandomScratchRace final : public AlgorithmSpec {
 public:
  RandomScratchRace(int n, Rational bias) : tournament_(n), bias_(std::move(bias)) {
    if (bias_ <= 0 || bias_ >= 1) throw Error(ErrorCode::InvalidArgument, "bias must lie in (0,1)");
  }

  std::string id() const override {
    return "rsr:n=" + std::to_string(tournament_.processors()) + ",bias=" + to_fraction_string(bias_);
  }
  int processors() const override { return tournament_.processors(); }
  bool swmr() const override { return true; }
  bool deterministic() const override { return false; }
  const Tournament& inner() const noexcept { return tournament_; }

  Payload initial(Pid pid) const override {
    Payload t = tournament_.initial(pid);
    return {0, 0, t[0], t[1]};
  }

  Action poised(Pid pid, const Payload& s) const override {
    switch (s.at(0)) {
      case 0: return Action::read(RegisterId::null());
      case 1: return Action::write(scratch(pid, s.at(1)), Value::of(1));
      case 2: return Action::read(scratch(pid, s.at(1)));
      default: return tournament_.poised(pid, {s.at(2), s.at(3)});
    }
  }

  std::vector<Branch> next(Pid pid, const Payload& s, const Value& response) const override {
    switch (s.at(0)) {
      case 0: return {{bias_, {1, 0, s[2], s[3]}}, {1 - bias_, {1, 1, s[2], s[3]}}};
      case 1: return {{1, {2, s[1], s[2], s[3]}}};
      case 2: return {{1, {3, s[1], s[2], s[3]}}};
      default: {
        auto inner = tournament_.next(pid, {s.at(2), s.at(3)}, response);
        std::vector<Branch> out;
        for (auto& b : inner) out.push_back({b.prob, {3, s[1], b.next[0], b.next[1]}});
        return out;
      }
    }
  }

  static RegisterId scratch(Pid pid, std::int64_t choice) {
    return RegisterId("scratch" + std::to_string(pid) + "." + std::to_string(choice));
  }

 private:
  Tournament tournament_;
  Rational bias_;
};

/// Negative control: every processor returns WIN without touching memory.
class AlwaysWin final : public AlgorithmSpec {
 public:
  explicit AlwaysWin(int n) : n_(n) {
    if (n < 1) throw Error(ErrorCode::BadArity, "broken fixture needs n >= 1");
  }

  std::string id() const override { return "broken:n=" + std::to_string(n_); }
  int processors() const override { return n_; }
  bool swmr() const override { return true; }
  bool deterministic() const override { return true; }
  Payload initial(Pid) const override { return {}; }
  Action poised(Pid, const Payload&) const override { return Action::ret(Decision::Win); }
  std::vector<Branch> next(Pid, const Payload&, const Value&) const override {
    throw Error(ErrorCode::AlreadyReturned, "broken fixture: no step after return");
  }

 private:
  int n_;
};

// ---------------------------------------------------------------------------
// Catalog

inline SpecPtr make_flag_race() { return std::make_shared<Tournament>(2, true); }

inline SpecPtr make_tournament(int n) { return std::make_shared<Tournament>(n); }

inline SpecPtr make_splitter(int n) { return std::make_shared<SplitterTree>(n, std::max(n, 2), true); }

inline SpecPtr make_kappa_splitter_tree(int n, int kappa) {
  return std::make_shared<SplitterTree>(n, kappa, false);
}

inline SpecPtr make_random_scratch_race(int n, const Rational& bias) {
  return std::make_shared<RandomScratchRace>(n, bias);
}

inline SpecPtr make_broken_fixture(int n) { return std::make_shared<AlwaysWin>(n); }

struct AlgorithmId {
  std::string kind;  // flag_race | tournament | splitter | kst | rsr | broken
  int n = 2;
  int kappa = 2;
  Rational bias = Rational(1, 2);

  std::string str() const {
    if (kind == "flag_race") return kind;
    std::string s = kind + ":n=" + std::to_string(n);
    if (kind == "kst") s += ",k=" + std::to_string(kappa);
    if (kind == "rsr") s += ",bias=" + to_fraction_string(bias);
    return s;
  }
};

inline std::string canonical_algorithm_name(std::string_view name) {
  if (name == "flag_race" || name == "flag-race" || name == "flagrace") return "flag_race";
  if (name == "tournament") return "tournament";
  if (name == "splitter") return "splitter";
  if (name == "kst" || name == "kappa_splitter_tree" || name == "kappa-splitter-tree") return "kst";
  if (name == "rsr" || name == "random_scratch_race" || name == "random-scratch-race") return "rsr";
  if (name == "broken" || name == "broken-fixture" || name == "broken_fixture") return "broken";
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm: " + std::string(name));
}

/// Parses "name[:key=value,...]", e.g. "kst:n=16,k=4" or "rsr:n=2,bias=1/2".
inline AlgorithmId parse_algorithm_id(std::string_view text) {
  AlgorithmId id;
  auto colon = text.find(':');
  id.kind = canonical_algorithm_name(text.substr(0, colon));
  if (colon == std::string_view::npos) return id;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    auto comma = rest.find(',');
    std::string_view kv = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) throw Error(ErrorCode::InvalidArgument, "expected key=value in " + std::string(text));
    std::string key(kv.substr(0, eq));
    std::string value(kv.substr(eq + 1));
    try {
      if (key == "n") id.n = std::stoi(value);
      else if (key == "k" || key == "kappa") id.kappa = std::stoi(value);
      else if (key == "bias") id.bias = parse_rational(value);
      else throw Error(ErrorCode::InvalidArgument, "unknown parameter " + key);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidArgument, "bad value for " + key + ": " + value);
    }
  }
  return id;
}

inline SpecPtr make_algorithm(const AlgorithmId& id) {
  if (id.kind == "flag_race") return make_flag_race();
  if (id.kind == "tournament") return make_tournament(id.n);
  if (id.kind == "splitter") return make_splitter(id.n);
  if (id.kind == "kst") return make_kappa_splitter_tree(id.n, id.kappa);
  if (id.kind == "rsr") return make_random_scratch_race(id.n, id.bias);
  if (id.kind == "broken") return make_broken_fixture(id.n);
  throw Error(ErrorCode::InvalidArgument, "unknown algorithm: " + id.kind);
}

inline SpecPtr make_algorithm(std::string_view text) { return make_algorithm(parse_algorithm_id(text)); }

}  // namespace wle
