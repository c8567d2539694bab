// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "bdd_oracle.hpp"
#include "interp_support.hpp"
#include "support.hpp"
#include "tacheck/enumerative.hpp"
#include "tacheck/interpolation.hpp"
#include "tacheck/oracle.hpp"
#include "tacheck/symbolic.hpp"

using namespace tacheck;
namespace ts = testsupport;
namespace orc = tacheck::oracle;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Bound W(int64_t k) { return Bound::weak(k); }
Bound S(int64_t k) { return Bound::strict(k); }

TimedAutomaton clocks_only(const std::string& names) {
  return parse_model("clocks " + names + "\nlocation l0 initial\ntarget l0\n");
}

AbstractDomain dom(size_t dim, const Guard& g) { return AbstractDomain(dim).refined(g); }

bool implies(SymbolicEngine& e, Bdd a, Bdd b) { return e.mgr().and_(a, e.mgr().not_(b)) == e.mgr().mk_false(); }

Bdd alpha_union(SymbolicEngine& e, const std::vector<Dbm>& zs) {
  Bdd r = e.mgr().mk_false();
  for (const auto& z : zs) r = e.mgr().or_(r, e.alpha_zone(z));
  return r;
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// ---------------------------------------------------------------- 1

Outcome dbm_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  size_t mismatches = 0, points = 0, bool_checks = 0;
  const int zones = 10'000;
  for (int i = 0; i < zones; ++i) {
    const size_t dim = static_cast<size_t>(ts::uni(rng, 2, 5));
    const auto a = ts::random_zone(rng, dim, 8);
    const auto b = ts::random_zone(rng, dim, 8);
    const auto x = static_cast<ClockIndex>(ts::uni(rng, 1, static_cast<int64_t>(dim) - 1));
    const auto r = ts::random_resets(rng, dim);
    const Guard g = ts::random_guard(rng, dim, 8, 0, 3);
    const Guard inv = ts::random_invariant(rng, dim, 8);
    Guard ab = a.cs;
    ab.insert(ab.end(), b.cs.begin(), b.cs.end());
    Dbm raw = Dbm::universe(dim);
    raw.constrain(a.cs);
    const Dbm canon = canonical(raw), in = intersect(a.zone, b.zone), u = up(a.zone), d = down(a.zone),
              rs = reset(a.zone, r), fr = free(a.zone, x), po = post_edge(a.zone, g, r, inv),
              pr = pre_edge(a.zone, g, r, inv);
    // Bigger boxes for fewer clocks; constants stay <= 8 so a box of 9 sees every edge.
    const unsigned box = dim == 5 ? 9 : 10;
    orc::for_each_box_point(dim, box, [&](const orc::Point& p) {
      ++points;
      const bool in_a = orc::satisfies(a.cs, p);
      mismatches += orc::contains(canon, p) != in_a;
      mismatches += orc::contains(in, p) != (in_a && orc::satisfies(b.cs, p));
      mismatches += orc::contains(u, p) != orc::in_up(a.cs, p);
      mismatches += orc::contains(d, p) != orc::in_down(a.cs, p);
      mismatches += orc::contains(rs, p) != orc::in_reset(a.cs, r, p);
      mismatches += orc::contains(fr, p) != orc::in_free(a.cs, x, p);
      mismatches += orc::contains(po, p) != orc::in_post(a.cs, g, r, inv, p);
      mismatches += orc::contains(pr, p) != orc::in_pre(a.cs, g, r, inv, p);
    });
    mismatches += includes(a.zone, b.zone) != orc::subset(dim, b.cs, a.cs);
    mismatches += includes(b.zone, a.zone) != orc::subset(dim, a.cs, b.cs);
    mismatches += intersects(a.zone, b.zone) != orc::feasible(dim, ab);
    mismatches += in.is_empty() == orc::feasible(dim, ab);
    bool_checks += 4;
  }
  // Bound addition against integer arithmetic on (value, strictness).
  for (int i = 0; i < 10'000; ++i) {
    const int64_t k1 = ts::uni(rng, -8, 8), k2 = ts::uni(rng, -8, 8);
    const bool s1 = ts::uni(rng, 0, 1), s2 = ts::uni(rng, 0, 1);
    const Bound sum = Bound::make(k1, s1) + Bound::make(k2, s2);
    mismatches += sum.value() != k1 + k2 || sum.is_strict() != (s1 || s2);
    mismatches += !(Bound::make(k1, s1) + Bound::top()).is_inf();
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {mismatches == 0 && s < 60,
          fmt("%d zones, %zu point checks x8 ops, %zu inclusion/emptiness checks, %zu mismatches, %.1f s", zones,
              points, bool_checks, mismatches, s)};
}

// ---------------------------------------------------------------- 2

Outcome no_simple_interpolant() {
  const Dbm a = ts::dense_a(), b = ts::dense_b();
  bool ok = intersect(a, b).is_empty();
  bool pairwise = true;
  for (ClockIndex x = 0; x < 4; ++x)
    for (ClockIndex y = 0; y < 4; ++y) pairwise &= a.at(x, y) + b.at(y, x) >= Bound::zero();
  const size_t ex = ts::exhaustive_min_density(a, b);
  const auto mi = minimal_interpolant(a, b);
  ok = ok && pairwise && ex == 2 && !mi.intersecting && mi.k == 2 && ts::separates(a, b, mi.interpolant) &&
       mi.interpolant.density() == 2;
  return {ok, fmt("disjoint, pairwise sums >= (0,<=): %s, exhaustive minimum %zu, k=%u, interpolant verified: %s",
                  pairwise ? "yes" : "no", ex, mi.k, ts::separates(a, b, mi.interpolant) ? "yes" : "no")};
}

// ---------------------------------------------------------------- 3

Outcome interpolant_properties() {
  std::mt19937_64 rng(3003);
  size_t pairs = 0, valid = 0, bounded = 0, exact = 0, tries = 0;
  while (pairs < 1000) {
    ++tries;
    const size_t dim = static_cast<size_t>(ts::uni(rng, 2, 4));
    const auto a = ts::random_zone(rng, dim, 5).zone;
    const auto b = ts::random_zone(rng, dim, 5).zone;
    if (!intersect(a, b).is_empty()) continue;
    ++pairs;
    const auto mi = minimal_interpolant(a, b);
    valid += !mi.intersecting && ts::separates(a, b, mi.interpolant) && mi.interpolant.density() == mi.k;
    bounded += mi.k <= (dim + 1) / 2;
    exact += mi.k == ts::exhaustive_min_density(a, b);
  }
  return {valid == pairs && bounded == pairs && exact == pairs,
          fmt("%zu disjoint pairs (of %zu drawn), valid %zu, k <= ceil(|C0|/2) %zu, k = exhaustive minimum %zu",
              pairs, tries, valid, bounded, exact)};
}

// ---------------------------------------------------------------- 4, 5, 9

struct CorpusResult {
  size_t models = 0, disagreements = 0, over_budget = 0, reachable = 0;
  size_t checkpoints = 0, closure = 0, monotonicity = 0, enum_refinements = 0;
  size_t enum_spurious = 0, enum_recurrences = 0;
  size_t sym_spurious = 0, sym_recurrences = 0, sym_refinements = 0, sym_repeat = 0, sym_step_violations = 0;
  double worst_enum_ms = 0, worst_sym_ms = 0;
  std::string first_problem;
};

CorpusResult run_corpus() {
  CorpusResult c;
  const double budget_s = 10;
  auto note = [&](const std::string& s) {
    if (c.first_problem.empty()) c.first_problem = s;
  };
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    orc::GeneratorConfig cfg;
    cfg.seed = seed;
    const auto ta = orc::generate_model(cfg);
    ++c.models;
    const auto base = orc::zone_reach_baseline(ta);
    if (!base) {
      ++c.over_budget;
      note(fmt("seed %llu: baseline ran out of nodes", static_cast<unsigned long long>(seed)));
      continue;
    }
    c.reachable += *base;
    auto judge = [&](Verdict v, double ms, const char* who) {
      if (v == Verdict::inconclusive || ms > budget_s * 1000) {
        ++c.over_budget;
        note(fmt("seed %llu: %s inconclusive or over budget", static_cast<unsigned long long>(seed), who));
      } else if ((v == Verdict::reachable) != *base) {
        ++c.disagreements;
        note(fmt("seed %llu: %s disagrees with the oracle", static_cast<unsigned long long>(seed), who));
      }
    };
    for (DomainMode m : {DomainMode::global, DomainMode::per_node, DomainMode::per_location})
      for (bool seeded : {true, false}) {
        EnumOptions opt;
        opt.mode = m;
        opt.syntactic_seed = seeded;
        opt.checkpoints = true;
        opt.record_traces = true;
        opt.time_limit_s = budget_s;
        const auto r = check_enumerative(ta, opt);
        judge(r.verdict, r.stats.time_ms, "enumerative");
        if (r.trace && !trace_feasible(ta, *r.trace)) {
          ++c.disagreements;
          note("enumerative witness fails replay");
        }
        c.worst_enum_ms = std::max(c.worst_enum_ms, r.stats.time_ms);
        c.checkpoints += r.stats.checkpoints;
        c.closure += r.stats.closure_violations;
        c.monotonicity += r.stats.monotonicity_violations;
        c.enum_refinements += r.stats.refinements;
        for (size_t i = 1; i < r.stats.trace_hashes.size(); ++i)
          if (r.stats.trace_spurious[i - 1]) {
            ++c.enum_spurious;
            c.enum_recurrences += r.stats.trace_hashes[i] == r.stats.trace_hashes[i - 1];
          }
      }
    SymOptions so;
    so.time_limit_s = budget_s;
    so.verify_traces = true;
    so.record_traces = true;
    const auto r = check_symbolic(ta, so);
    judge(r.verdict, r.stats.time_ms, "symbolic");
    if (r.trace && !trace_feasible(ta, *r.trace)) {
      ++c.disagreements;
      note("symbolic witness fails replay");
    }
    c.worst_sym_ms = std::max(c.worst_sym_ms, r.stats.time_ms);
    // every iteration but a final realizable or absent one saw a spurious trace
    c.sym_spurious += r.stats.iterations - 1;
    c.sym_recurrences += r.stats.trace_recurrences;
    c.sym_refinements += r.stats.refinements;
    c.sym_repeat += r.stats.repeat_refinements;
    c.sym_step_violations += r.stats.step_violations;
  }
  return c;
}

// ---------------------------------------------------------------- 6

Outcome reduce_examples() {
  std::vector<std::string> notes;
  bool all = true;
  auto sub = [&](const char* name, bool ok) {
    notes.push_back(std::string(name) + (ok ? " ok" : " FAILED"));
    all &= ok;
  };
  {
    auto ta = clocks_only("x y z");
    SymbolicEngine e(ta, dom(4, {{1, 2, W(1)}, {2, 3, W(1)}, {1, 3, W(2)}}));
    auto& m = e.mgr();
    Bdd v = m.and_(m.and_(e.lit(1, 2, W(1)), e.lit(2, 3, W(1))), m.not_(e.lit(1, 3, W(2))));
    sub("3-predicate unsat minterm excluded", m.and_(v, e.reduce2()) == m.mk_false());
  }
  {
    auto ta = clocks_only("x y z w");
    SymbolicEngine e(ta, dom(5, {{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}, {1, 4, W(5)}}));
    auto& m = e.mgr();
    Bdd phi = e.alpha_guard({{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}});
    // 2-reduced: phi keeps a minterm falsifying x-w<=5, which full reduction would drop
    Bdd odd = m.and_(m.and_(phi, m.not_(e.lit(1, 4, W(5)))), e.reduce2());
    bool ok = m.and_(phi, e.reduce2()) != m.mk_false() && odd != m.mk_false();
    for (const auto& v : e.minterms(odd, false)) ok &= e.zone(v.preds).is_empty();
    sub("4-predicate phi survives as 2-reduced", ok);
  }
  auto survivor = [&](const char* name, const char* clocks, size_t dim, const Guard& cs) {
    auto ta = clocks_only(clocks);
    SymbolicEngine e(ta, dom(dim, cs));
    auto& m = e.mgr();
    const auto v = e.pick(m.and_(m.and_(e.alpha_guard(cs), e.reduce2()), e.enc(0)));
    if (!v) {
      sub((std::string(name) + ": all-true minterm survives reduce2").c_str(), false);
      return;
    }
    sub((std::string(name) + ": all-true minterm survives reduce2 and is empty").c_str(),
        e.zone(v->preds).is_empty());
    const auto init = e.pick(m.and_(e.initial(), e.reduce2()));
    SymTrace t;
    t.states = {*init, *v};
    t.steps = {TraceStep{StepKind::up}};
    const auto ref = e.refine_spurious(t);
    e.set_domain(e.domain().refined(ref.constraints));
    sub((std::string(name) + ": excluded after empty-state refinement").c_str(),
        ref.which == RefineCase::empty && m.and_(e.cube(v->preds), e.reduce2()) == m.mk_false());
  };
  survivor("{x-y<=1, y-z<=1, x-z<=4, z-x<=-3}", "x y z", 4, {{1, 2, W(1)}, {2, 3, W(1)}, {1, 3, W(4)}, {3, 1, W(-3)}});
  survivor("{x-y<=1, y-z<=1, z-w<=3, w-x<=-6}", "x y z w", 5, {{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}, {4, 1, W(-6)}});
  std::string d;
  for (const auto& n : notes) d += (d.empty() ? "" : "; ") + n;
  if (!all)
    d += ". z-x<=-3 is stored as the negation of x-z<3 and the path x,y,z forces x-z<3, so that minterm never "
         "survives here; the four-clock cycle is the closest survivor";
  return {all, d};
}

// ---------------------------------------------------------------- 7

Outcome operator_soundness() {
  std::mt19937_64 rng(7007);
  size_t up_bad = 0, reset_bad = 0, inter_bad = 0, minterms = 0;
  const int formulas = 500;
  for (int round = 0; round < formulas; ++round) {
    const size_t dim = static_cast<size_t>(ts::uni(rng, 3, 4));
    auto ta = clocks_only(dim == 3 ? "x y" : "x y z");
    SymbolicEngine e(ta, dom(dim, ts::random_guard(rng, dim, 4, 2, 7)));
    auto& m = e.mgr();
    std::vector<Dbm> za, zb;
    for (auto i = ts::uni(rng, 1, 3); i > 0; --i) za.push_back(ts::random_zone(rng, dim, 4).zone);
    for (auto i = ts::uni(rng, 1, 3); i > 0; --i) zb.push_back(ts::random_zone(rng, dim, 4).zone);
    // alpha of a zone union is reduced: all of its cells are satisfiable
    const Bdd a = alpha_union(e, za), b = alpha_union(e, zb);
    const auto z = static_cast<ClockIndex>(ts::uni(rng, 1, static_cast<int64_t>(dim) - 1));
    std::vector<Dbm> ups, resets, meets, cells_b;
    for (const auto& v : e.minterms(b, false)) cells_b.push_back(e.zone(v.preds));
    for (const auto& v : e.minterms(a, false)) {
      ++minterms;
      const Dbm c = e.zone(v.preds);
      ups.push_back(up(c));
      resets.push_back(reset(c, z));
      for (const auto& cb : cells_b) meets.push_back(intersect(c, cb));
    }
    up_bad += !implies(e, alpha_union(e, ups), e.up_op(a));
    reset_bad += !implies(e, alpha_union(e, resets), e.reset_op(a, z));
    inter_bad += m.and_(a, b) != alpha_union(e, meets);
  }
  return {up_bad == 0 && reset_bad == 0 && inter_bad == 0,
          fmt("%d formulas (%zu minterms): Up violations %zu, Reset violations %zu, intersection mismatches %zu",
              formulas, minterms, up_bad, reset_bad, inter_bad)};
}

// ---------------------------------------------------------------- 8

Outcome refinement_fixtures() {
  bool up_ok = false, reset_ok = false;
  std::string up_itp, reset_itp;
  {
    auto ta = clocks_only("x y");
    SymbolicEngine e(ta, dom(3, {{2, 0, S(1)}, {1, 0, W(2)}, {1, 0, W(3)}, {2, 1, W(0)}, {1, 2, S(4)}}));
    auto& m = e.mgr();
    const Dbm gray = Dbm::from_guard(3, {{2, 0, W(1)}, {1, 0, W(2)}, {2, 1, W(0)}});
    const Dbm near = Dbm::from_guard(3, {{0, 1, S(-3)}, {1, 0, S(4)}, {2, 0, S(1)}, {0, 2, S(0)}});
    const auto a2 = e.pick(m.and_(m.and_(e.alpha_zone(near), e.reduce2()), e.enc(0)));
    const Dbm z2 = e.zone(a2->preds);
    const bool spurious_before =
        !intersects(up(gray), z2) && m.and_(e.up_op(e.alpha_zone(gray)), e.cube(a2->preds)) != m.mk_false();
    const auto mi = minimal_interpolant(up(gray), down(z2));
    bool diag = false;
    for (const auto& c : mi.interpolant.constraints) diag |= c.x == 1 && c.y == 2 && c.bound <= W(2);
    up_itp = format_guard(ta, mi.interpolant.constraints);
    e.set_domain(e.domain().refined(mi.interpolant.constraints));
    bool gone = true;
    for (const auto& v : e.minterms(m.and_(e.up_op(e.alpha_zone(gray)), e.reduce2()), false))
      gone &= !intersects(e.zone(v.preds), z2);
    up_ok = spurious_before && !mi.intersecting && diag && gone;
  }
  {
    auto ta = clocks_only("x y");
    SymbolicEngine e(ta, dom(3, {{1, 2, S(-1)}, {2, 0, W(3)}, {2, 0, W(1)}, {1, 0, W(4)}, {1, 2, S(2)}}));
    auto& m = e.mgr();
    const Dbm gray = Dbm::from_guard(3, {{1, 2, S(-1)}, {2, 0, W(3)}});
    const Dbm a2 = Dbm::from_guard(3, {{2, 1, W(-2)}, {1, 0, W(4)}, {2, 0, W(1)}});
    const bool spurious_before =
        !intersects(reset(gray, 2), a2) && m.and_(e.reset_op(e.alpha_zone(gray), 2), e.alpha_zone(a2)) != m.mk_false();
    const auto mi = minimal_interpolant(free(gray, 2), free(a2, 2));
    reset_itp = format_guard(ta, mi.interpolant.constraints);
    e.set_domain(e.domain().refined(mi.interpolant.constraints));
    const bool gone = m.and_(e.reset_op(e.alpha_zone(gray), 2), e.alpha_zone(a2)) == m.mk_false();
    reset_ok = spurious_before && !mi.intersecting && mi.interpolant.constraints == Guard{{1, 0, S(2)}} && gone;
  }
  return {up_ok && reset_ok, fmt("up step: interpolant %s, successor eliminated: %s; reset step: interpolant %s, "
                                 "successor eliminated: %s",
                                 up_itp.c_str(), up_ok ? "yes" : "no", reset_itp.c_str(), reset_ok ? "yes" : "no")};
}

// ---------------------------------------------------------------- 10

Outcome bdd_truth_tables() {
  namespace bo = bddoracle;
  BddManager m(bo::kVars);
  std::mt19937_64 rng(10010);
  std::vector<VarId> all(bo::kVars);
  for (VarId v = 0; v < bo::kVars; ++v) all[v] = v;
  size_t bad = 0, noncanon = 0;
  const int exprs = 10'000;
  for (int i = 0; i < exprs; ++i) {
    const auto p = bo::random_expr(m, rng, 5);
    for (unsigned a = 0; a < 256; ++a) bad += m.eval(p.f, bo::bits(a)) != p.t[a];
    bad += m.count(p.f, all) != static_cast<double>(p.t.count());
    noncanon += !(bo::from_table(m, p.t) == p.f);
    if (i % 1000 == 999) m.gc(std::vector<Bdd>{p.f});
  }
  return {bad == 0 && noncanon == 0,
          fmt("%d random expressions over 8 variables: %zu table mismatches, %zu non-canonical handles", exprs, bad,
              noncanon)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](int n, const Outcome& o, double s) {
    std::printf("criterion %d %s: %s (%.1f s)\n", n, o.pass ? "PASS" : "FAIL", o.detail.c_str(), s);
    std::fflush(stdout);
    failed += !o.pass;
  };
  auto timed = [&](int n, const std::function<Outcome()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const Outcome o = f();
    report(n, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  };
  timed(1, dbm_oracle);
  timed(2, no_simple_interpolant);
  timed(3, interpolant_properties);

  const auto t0 = std::chrono::steady_clock::now();
  const CorpusResult c = run_corpus();
  const double corpus_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  report(4,
         {c.disagreements == 0 && c.over_budget == 0 && c.models == 1000,
          fmt("%zu models (%zu reachable), oracle vs enumerative x3 modes x2 seedings vs symbolic: %zu "
              "disagreements, %zu inconclusive/over 10 s; worst enumerative %.1f ms, worst symbolic %.1f ms%s%s",
              c.models, c.reachable, c.disagreements, c.over_budget, c.worst_enum_ms, c.worst_sym_ms,
              c.first_problem.empty() ? "" : "; first: ", c.first_problem.c_str())},
         corpus_s);
  report(5,
         {c.closure == 0 && c.monotonicity == 0 && c.checkpoints > 0,
          fmt("%zu tree-wide checkpoints over %zu enumerative refinements: %zu successor-closure violations, %zu zone "
              "monotonicity violations",
              c.checkpoints, c.enum_refinements, c.closure, c.monotonicity)},
         0);
  timed(6, reduce_examples);
  timed(7, operator_soundness);
  timed(8, refinement_fixtures);
  report(9,
         {c.enum_recurrences == 0 && c.sym_recurrences == 0 && c.sym_step_violations == 0 && c.enum_spurious > 0 &&
              c.sym_spurious > 0,
          fmt("enumerative: %zu spurious counterexamples, %zu repeated next; symbolic: %zu spurious counterexamples "
              "(%zu refinements, %zu spent re-refining a surviving one), %zu repeated next, %zu bad steps",
              c.enum_spurious, c.enum_recurrences, c.sym_spurious, c.sym_refinements, c.sym_repeat, c.sym_recurrences,
              c.sym_step_violations)},
         0);
  timed(10, bdd_truth_tables);
  std::printf("%d of 10 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
