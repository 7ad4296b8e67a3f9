// Command-line runner for the adversary, analyzer, checker and bench.
//
// Exit codes: 0 all checks passed, 1 a bound or safety property failed,
// 2 usage or budget error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wle/wle.hpp"

namespace fs = std::filesystem;
using wle::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitUsage = 2;

struct Config {
  std::string command;
  std::string alg;
  std::vector<int> ns;
  std::optional<int> kappa;
  std::string bias = "1/2";
  std::optional<std::size_t> depth;
  std::optional<std::size_t> budget;
  std::string out = "wle-out";
  std::string mode = "swmr";
  bool force = false;
  std::uint64_t seed = 0;

  json to_json() const {
    json j{{"command", command}, {"alg", alg},       {"n", ns},         {"bias", bias},
           {"out", out},         {"mode", mode},     {"force", force},  {"seed", seed}};
    j["kappa"] = kappa ? json(*kappa) : json();
    j["depth"] = depth ? json(*depth) : json();
    j["budget"] = budget ? json(*budget) : json();
    return j;
  }
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string file_stem(const std::string& id) {
  std::string s = id;
  for (char& c : s)
    if (c == ':' || c == ',' || c == '=' || c == '/') c = '_';
  return s;
}

std::string csv_preamble(const char* schema, const Config& cfg) {
  return std::string("# schema=") + schema + " version=" + wle::kVersion + " config=" + cfg.to_json().dump() + "\n";
}

json envelope(const Config& cfg) { return json{{"tool", "wle"}, {"version", wle::kVersion}, {"config", cfg.to_json()}}; }

void write_file(const Config& cfg, const std::string& name, const std::string& body) {
  fs::create_directories(cfg.out);
  std::ofstream os(fs::path(cfg.out) / name, std::ios::binary);
  if (!os) throw UsageError("cannot write " + (fs::path(cfg.out) / name).string());
  os << body;
}

void write_json(const Config& cfg, const std::string& name, const json& j) { write_file(cfg, name, j.dump(2) + "\n"); }

/// One algorithm id per requested n, with --kappa and --bias applied.
std::vector<wle::AlgorithmId> resolve_ids(const Config& cfg) {
  if (cfg.alg.empty()) throw UsageError("--alg is required");
  wle::AlgorithmId base = wle::parse_algorithm_id(cfg.alg);
  if (cfg.kappa && base.kind == "kst") base.kappa = *cfg.kappa;
  if (base.kind == "rsr" && cfg.alg.find("bias=") == std::string::npos) base.bias = wle::parse_rational(cfg.bias);
  std::vector<wle::AlgorithmId> ids;
  if (cfg.ns.empty() || base.kind == "flag_race") {
    ids.push_back(base);
  } else {
    for (int n : cfg.ns) {
      wle::AlgorithmId id = base;
      id.n = n;
      ids.push_back(id);
    }
  }
  return ids;
}

int cmd_adversary(const Config& cfg) {
  wle::AdversaryMode mode;
  if (cfg.mode == "swmr")
    mode = wle::AdversaryMode::Swmr;
  else if (cfg.mode == "kappa")
    mode = wle::AdversaryMode::Kappa;
  else
    throw UsageError("--mode must be swmr or kappa");

  auto ids = resolve_ids(cfg);
  json doc = envelope(cfg);
  doc["results"] = json::array();
  std::ostringstream csv;
  csv << csv_preamble("wle-adversary/1", cfg) << "algorithm,n,blame_final,log2n,gamma_min,passed\n";
  int rc = kExitOk;

  for (const auto& id : ids) {
    wle::SpecPtr spec = wle::make_algorithm(id);
    const int n = spec->processors();
    wle::ModelParams params{n, 1};
    if (mode == wle::AdversaryMode::Kappa)
      params.kappa = std::min(n, cfg.kappa ? *cfg.kappa : (id.kind == "kst" ? id.kappa : n));
    const std::string log2n = wle::to_decimal_string(std::log2(static_cast<double>(n)));
    try {
      wle::StrategyReport rep = wle::run_strategy(*spec, params, mode);
      wle::BigInt gmin = rep.gamma_trace.empty() ? wle::BigInt(0) : rep.gamma_trace.front();
      for (const auto& g : rep.gamma_trace) gmin = std::min(gmin, g);
      doc["results"].push_back(wle::to_json(rep));
      csv << id.str() << ',' << n << ',' << rep.blame_final << ',' << log2n << ',' << gmin.str() << ','
          << (rep.passed ? "true" : "false") << '\n';
      std::cout << id.str() << ": survivor " << rep.survivor << " blame " << rep.blame_final << " log2n " << log2n
                << (rep.passed ? " PASS" : " FAIL") << '\n';
      if (!rep.passed) rc = kExitFailed;
    } catch (const wle::NoFreezePointError& e) {
      json ce = envelope(cfg);
      ce["algorithm"] = id.str();
      ce["error"] = wle::to_string(e.code());
      ce["message"] = e.what();
      ce["victim"] = e.victim();
      ce["other"] = e.other();
      ce["counterexample"] = wle::to_json(e.counterexample());
      ce["winners"] = e.counterexample().final.winners();
      const std::string name = "adversary_" + file_stem(id.str()) + ".counterexample.json";
      write_json(cfg, name, ce);
      doc["results"].push_back(json{{"algorithm", id.str()}, {"n", n}, {"error", "NoFreezePoint"}, {"passed", false}});
      csv << id.str() << ',' << n << ",,," << ",false\n";
      std::cout << id.str() << ": no freeze point, counterexample written to " << name << " FAIL\n";
      rc = kExitFailed;
    } catch (const wle::Error& e) {
      if (e.code() != wle::ErrorCode::PotentialDrop) throw;
      doc["results"].push_back(json{{"algorithm", id.str()}, {"n", n}, {"error", e.what()}, {"passed", false}});
      csv << id.str() << ',' << n << ",,,,false\n";
      std::cout << id.str() << ": " << e.what() << " FAIL\n";
      rc = kExitFailed;
    }
  }
  const std::string stem = "adversary_" + file_stem(ids.front().kind);
  write_json(cfg, stem + ".json", doc);
  write_file(cfg, stem + ".csv", csv.str());
  return rc;
}

int cmd_analyze(const Config& cfg) {
  int rc = kExitOk;
  for (const auto& id : resolve_ids(cfg)) {
    wle::SpecPtr spec = wle::make_algorithm(id);
    wle::AnalysisOptions opt;
    if (cfg.depth) opt.depth_limit = *cfg.depth;
    if (cfg.budget) opt.budget.max_nodes = *cfg.budget;
    wle::AnalysisResult res = wle::run_analysis(*spec, opt);

    const std::string stem = "analyze_" + file_stem(id.str());
    json doc = envelope(cfg);
    doc["analysis"] = wle::to_json(res);
    write_json(cfg, stem + ".bounds.json", doc);
    write_file(cfg, stem + ".registers.csv",
               csv_preamble(wle::kRegisterCsvSchema, cfg) + wle::register_table_csv_header() +
                   wle::register_table_csv_rows(res));
    std::ostringstream log;
    log << "# wle " << wle::kVersion << " config=" << cfg.to_json().dump() << '\n';
    log << "# " << id.str() << '\n';
    for (const auto& line : res.log) log << line << '\n';
    write_file(cfg, stem + ".lemmas.log", log.str());

    std::cout << id.str() << ": sum_rho=" << wle::to_decimal_string(res.main_bound.sum_rho)
              << " n_ln_n=" << wle::to_decimal_string(res.main_bound.n_ln_n)
              << (res.main_bound.applicable ? "" : " swmr-bound=inapplicable");
    if (res.kappa_bound)
      std::cout << " kappa=" << res.kappa_bound->kappa << " kappa-bound=" << (res.kappa_bound->passed() ? "pass" : "fail");
    std::cout << (res.passed() ? " PASS" : " FAIL") << '\n';
    if (!res.passed()) rc = kExitFailed;
  }
  return rc;
}

int cmd_check(const Config& cfg) {
  int rc = kExitOk;
  for (const auto& id : resolve_ids(cfg)) {
    wle::SpecPtr spec = wle::make_algorithm(id);
    const int n = spec->processors();
    if (n > 4 && !cfg.force) throw UsageError("check is limited to n <= 4; pass --force to override");
    wle::ExploreBudget budget;
    if (cfg.depth) budget.max_depth = *cfg.depth;
    if (cfg.budget) budget.max_states = *cfg.budget;
    wle::CheckReport rep = wle::explore(*spec, wle::ModelParams::unrestricted(n), budget);

    json doc = envelope(cfg);
    doc["report"] = wle::to_json(rep);
    const std::string name = "check_" + file_stem(id.str()) + ".json";
    write_json(cfg, name, doc);

    int contention = 0;
    for (const auto& [r, c] : rep.max_contention) contention = std::max(contention, c);
    std::cout << id.str() << ": states " << rep.states_explored << (rep.complete() ? " (complete)" : " (truncated)")
              << " contention " << contention << " stalls " << rep.max_stalls()
              << " violations " << rep.violating_states;
    if (!rep.safe()) {
      std::cout << " FAIL\n";
      rc = kExitFailed;
    } else if (rep.budget_exceeded) {
      std::cout << " BUDGET\n";
      if (rc == kExitOk) rc = kExitUsage;
    } else {
      std::cout << " PASS\n";
    }
  }
  return rc;
}

int cmd_bench(const Config& cfg) {
  std::vector<wle::AlgorithmId> grid = cfg.alg.empty() ? wle::default_bench_grid() : resolve_ids(cfg);
  wle::BenchOptions opt;
  if (cfg.depth) opt.explore.max_depth = *cfg.depth;
  else opt.explore.max_depth = 64;
  if (cfg.budget) {
    opt.explore.max_states = *cfg.budget;
    opt.poise.max_nodes = *cfg.budget;
  }
  auto rows = wle::run_bench(grid, opt);
  const std::string body = csv_preamble(wle::kBenchCsvSchema, cfg) + wle::bench_csv_header() + wle::bench_csv_rows(rows);
  write_file(cfg, "bench.csv", body);
  std::cout << wle::bench_csv_header() << wle::bench_csv_rows(rows);
  return kExitOk;
}

void add_common(CLI::App* sub, Config& cfg) {
  sub->add_option("--alg", cfg.alg, "algorithm id, e.g. tournament, kst:n=16,k=4, rsr:n=2,bias=1/2");
  sub->add_option("--n", cfg.ns, "processor counts")->delimiter(',');
  sub->add_option("--kappa", cfg.kappa, "kst fan-in; adversary kappa in kappa mode")->check(CLI::PositiveNumber);
  sub->add_option("--bias", cfg.bias, "rsr coin bias as p/q");
  sub->add_option("--depth", cfg.depth, "checker depth or solo depth limit")->check(CLI::PositiveNumber);
  sub->add_option("--budget", cfg.budget, "state / search node budget")->check(CLI::PositiveNumber);
  sub->add_option("--out", cfg.out, "output directory");
  sub->add_option("--mode", cfg.mode, "adversary mode")->check(CLI::IsMember({"swmr", "kappa"}));
  sub->add_flag("--force", cfg.force, "lift the checker n <= 4 guard");
  sub->add_option("--seed", cfg.seed, "recorded in outputs; runs are exhaustive");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weak leader election lower-bound toolkit"};
  app.set_version_flag("--version", wle::kVersion);
  app.require_subcommand(1);
  Config cfg;
  std::vector<std::pair<CLI::App*, int (*)(const Config&)>> commands;
  for (auto [name, help, fn] : {std::tuple{"adversary", "deterministic freezing adversary", &cmd_adversary},
                                std::tuple{"analyze", "solo-execution potential analysis", &cmd_analyze},
                                std::tuple{"check", "exhaustive safety check", &cmd_check},
                                std::tuple{"bench", "solo step and contention table", &cmd_bench}}) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, cfg);
    commands.emplace_back(sub, fn);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto [sub, fn] : commands) {
      if (!sub->parsed()) continue;
      cfg.command = sub->get_name();
      return fn(cfg);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const wle::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case wle::ErrorCode::NoFreezePoint:
      case wle::ErrorCode::PotentialDrop:
      case wle::ErrorCode::SoloOutputViolated:
        return kExitFailed;
      default:
        return kExitUsage;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
