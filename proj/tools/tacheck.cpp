#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "tacheck/enumerative.hpp"
#include "tacheck/oracle.hpp"
#include "tacheck/symbolic.hpp"

using namespace tacheck;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunReport {
  Verdict verdict = Verdict::inconclusive;
  std::optional<SymbolicTrace> trace;
  json stats = json::object();
  size_t refinements = 0;
  std::string reason;
  double time_ms = 0;
};

struct CheckArgs {
  std::string engine = "enum";
  std::string domain_mode = "per-location";
  std::string search = "dfs";
  size_t max_nodes = 2'000'000;
  size_t max_refinements = 200'000;
  double time_limit = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> render_trace(const TimedAutomaton& ta, const SymbolicTrace& t) {
  std::vector<std::string> out;
  for (size_t e : t.edges) {
    const Edge& ed = ta.edges.at(e);
    std::string s = ta.locations[ed.src].name + " -> " + ta.locations[ed.dst].name;
    if (!ed.guard.empty()) s += " guard " + format_guard(ta, ed.guard);
    if (!ed.resets.empty()) {
      s += " reset";
      for (ClockIndex x : ed.resets) s += " " + ta.clock_name(x);
    }
    out.push_back(s);
  }
  return out;
}

RunReport run(const TimedAutomaton& ta, const CheckArgs& a) {
  RunReport r;
  const auto t0 = std::chrono::steady_clock::now();
  if (a.engine == "enum") {
    EnumOptions opt;
    auto mode = parse_domain_mode(a.domain_mode);
    if (!mode) throw CLI::ValidationError("--domain-mode", "unknown mode " + a.domain_mode);
    opt.mode = *mode;
    opt.order = a.search == "bfs" ? SearchOrder::bfs : SearchOrder::dfs;
    opt.max_nodes = a.max_nodes;
    opt.max_refinements = a.max_refinements;
    opt.time_limit_s = a.time_limit;
    auto res = check_enumerative(ta, opt);
    r.verdict = res.verdict;
    r.trace = res.trace;
    r.reason = res.reason;
    r.refinements = res.stats.refinements;
    const auto& s = res.stats;
    r.stats = {{"nodes_created", s.nodes_created}, {"nodes_expanded", s.nodes_expanded},
               {"nodes_covered", s.nodes_covered}, {"nodes_deleted", s.nodes_deleted},
               {"abs_reach_calls", s.abs_reach_calls}, {"refinements", s.refinements},
               {"interpolant_refinements", s.interpolant_refinements}, {"zone_refinements", s.zone_refinements},
               {"cuts", s.cuts}, {"uncovered", s.uncovered}, {"peak_wait", s.peak_wait},
               {"domain_constraints", s.domain_constraints}};
  } else if (a.engine == "sym") {
    SymOptions opt;
    opt.max_refinements = a.max_refinements;
    opt.time_limit_s = a.time_limit;
    auto res = check_symbolic(ta, opt);
    r.verdict = res.verdict;
    r.trace = res.trace;
    r.reason = res.reason;
    r.refinements = res.stats.refinements;
    const auto& s = res.stats;
    r.stats = {{"iterations", s.iterations}, {"refinements", s.refinements},
               {"case_empty", s.case_empty}, {"case_pre", s.case_pre}, {"case_up", s.case_up},
               {"case_reset", s.case_reset}, {"case_fallback", s.case_fallback},
               {"repeat_refinements", s.repeat_refinements}, {"predicates", s.predicates},
               {"max_predicates_per_pair", s.max_predicates_per_pair}, {"layers", s.layers},
               {"peak_nodes", s.peak_nodes}};
  } else if (a.engine == "oracle") {
    auto res = oracle::zone_reach_baseline(ta, a.max_nodes);
    if (res) r.verdict = *res ? Verdict::reachable : Verdict::not_reachable;
    else r.reason = "zone graph exceeded --max-nodes";
  } else {
    throw CLI::ValidationError("--engine", "expected enum, sym or oracle");
  }
  r.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (r.trace && !trace_feasible(ta, *r.trace)) throw std::logic_error("witness failed re-validation");
  return r;
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::not_reachable: return 0;
    case Verdict::reachable: return 1;
    case Verdict::inconclusive: return 2;
  }
  return 2;
}

int cmd_check(const std::string& path, const CheckArgs& a, bool as_json, bool show_trace, bool show_stats) {
  const auto ta = parse_model(path == "-" ? std::string(std::istreambuf_iterator<char>(std::cin), {}) : read_file(path));
  const auto r = run(ta, a);
  if (as_json) {
    json j = {{"verdict", to_string(r.verdict)}, {"stats", r.stats}, {"time_ms", r.time_ms}};
    j["trace"] = r.trace ? json(render_trace(ta, *r.trace)) : json(nullptr);
    if (!r.reason.empty()) j["reason"] = r.reason;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << to_string(r.verdict);
    if (!r.reason.empty()) std::cout << " (" << r.reason << ")";
    std::cout << "\n";
    if (show_trace && r.trace)
      for (const auto& s : render_trace(ta, *r.trace)) std::cout << "  " << s << "\n";
    if (show_stats) {
      for (const auto& [k, v] : r.stats.items()) std::cout << k << " " << v << "\n";
      std::cout << "time_ms " << r.time_ms << "\n";
    }
  }
  return exit_code(r.verdict);
}

int cmd_bench(const std::string& dir, CheckArgs a, const std::vector<std::string>& engines) {
  std::vector<fs::path> models;
  for (const auto& ent : fs::directory_iterator(dir))
    if (ent.is_regular_file() && ent.path().extension() == ".ta") models.push_back(ent.path());
  std::sort(models.begin(), models.end());
  std::cout << "# tacheck bench v1\n";
  std::cout << "model,engine,verdict,time_ms,refinements\n";
  for (const auto& p : models) {
    const auto ta = parse_model(read_file(p.string()));
    for (const auto& e : engines) {
      a.engine = e;
      const auto r = run(ta, a);
      std::cout << p.filename().string() << "," << e << "," << to_string(r.verdict) << "," << r.time_ms << ","
                << r.refinements << "\n";
    }
  }
  return 0;
}

void add_check_flags(CLI::App* c, CheckArgs& a) {
  c->add_option("--domain-mode", a.domain_mode, "global, per-node or per-location (enum only)")
      ->check(CLI::IsMember({"global", "per-node", "per-location"}));
  c->add_option("--search", a.search, "dfs or bfs (enum only)")->check(CLI::IsMember({"dfs", "bfs"}));
  c->add_option("--max-nodes", a.max_nodes, "node budget (enum, oracle)");
  c->add_option("--max-refinements", a.max_refinements, "refinement budget");
  c->add_option("--time-limit", a.time_limit, "seconds, 0 for none (enum, sym)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reachability checker for timed automata"};
  app.require_subcommand(1);

  CheckArgs ca;
  std::string model;
  bool as_json = false, show_trace = false, show_stats = false;
  auto* check = app.add_subcommand("check", "decide whether the target location is reachable");
  check->add_option("model", model, "model file, - for stdin")->required();
  check->add_option("--engine", ca.engine, "enum, sym or oracle")->check(CLI::IsMember({"enum", "sym", "oracle"}));
  add_check_flags(check, ca);
  check->add_flag("--json", as_json, "machine-readable report");
  check->add_flag("--trace", show_trace, "print the witness");
  check->add_flag("--stats", show_stats, "print engine counters");

  oracle::GeneratorConfig gc;
  auto* gen = app.add_subcommand("gen", "emit a random model");
  gen->add_option("--seed", gc.seed);
  gen->add_option("--clocks", gc.max_clocks, "at most this many clocks")->check(CLI::Range(1u, 8u));
  gen->add_option("--locations", gc.max_locations, "at most this many locations")->check(CLI::Range(1u, 64u));
  gen->add_option("--edges", gc.max_edges);
  gen->add_option("--max-constant", gc.max_constant);

  CheckArgs ba;
  ba.time_limit = 10;
  std::string dir;
  std::vector<std::string> engines{"enum", "sym", "oracle"};
  auto* bench = app.add_subcommand("bench", "run every .ta file of a directory under each engine, CSV on stdout");
  bench->add_option("dir", dir)->required()->check(CLI::ExistingDirectory);
  bench->add_option("--engines", engines)->check(CLI::IsMember({"enum", "sym", "oracle"}));
  add_check_flags(bench, ba);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    if (*check) return cmd_check(model, ca, as_json, show_trace, show_stats);
    if (*gen) {
      std::cout << emit_model(oracle::generate_model(gc));
      return 0;
    }
    if (*bench) return cmd_bench(dir, ba, engines);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
