#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support.hpp"
#include "tacheck/interpolation.hpp"
#include "tacheck/oracle.hpp"
#include "tacheck/symbolic.hpp"

using namespace tacheck;
namespace ts = testsupport;

namespace {

Bound W(int64_t k) { return Bound::weak(k); }
Bound S(int64_t k) { return Bound::strict(k); }

TimedAutomaton load(const std::string& name) {
  std::ifstream in(std::string(TACHECK_FIXTURE_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

// One location, no edges; only the clocks matter.
TimedAutomaton clocks_only(const std::string& names) {
  return parse_model("clocks " + names + "\nlocation l0 initial\ntarget l0\n");
}

AbstractDomain dom(size_t dim, const Guard& g) { return AbstractDomain(dim).refined(g); }

Bdd conj(SymbolicEngine& e, const Guard& g) { return e.alpha_guard(g); }

// Disjunction of the cells of every D-cell meeting one of the zones.
Bdd alpha_union(SymbolicEngine& e, const std::vector<Dbm>& zs) {
  Bdd r = e.mgr().mk_false();
  for (const auto& z : zs) r = e.mgr().or_(r, e.alpha_zone(z));
  return r;
}

bool implies(SymbolicEngine& e, Bdd a, Bdd b) { return e.mgr().and_(a, e.mgr().not_(b)) == e.mgr().mk_false(); }

}  // namespace

TEST_CASE("symbolic fixtures") {
  SymOptions opt;
  opt.verify_traces = true;
  auto r = check_symbolic(load("trivial_reach.ta"), opt);
  CHECK(r.verdict == Verdict::reachable);
  REQUIRE(r.trace.has_value());
  CHECK(r.trace->edges == std::vector<size_t>{0});
  CHECK(check_symbolic(load("trivial_unreach.ta"), opt).verdict == Verdict::not_reachable);
  auto s = check_symbolic(load("spurious_diag.ta"), opt);
  CHECK(s.verdict == Verdict::not_reachable);
  CHECK(s.stats.step_violations == 0);
}

TEST_CASE("symbolic: target is the initial location") {
  auto r = check_symbolic(clocks_only("x"));
  CHECK(r.verdict == Verdict::reachable);
  REQUIRE(r.abstract_trace.has_value());
  CHECK(r.abstract_trace->steps.empty());
  CHECK(r.trace->edges.empty());
}

TEST_CASE("predicate table materializes one side of each pair") {
  auto ta = clocks_only("x y");
  SymbolicEngine e(ta, dom(3, {{2, 1, W(-1)}, {1, 0, S(3)}}));
  const auto& t = e.table();
  CHECK(t.size() == 2);
  auto l = t.literal(2, 1, W(-1));  // y - x <= -1 is not (x - y < 1)
  REQUIRE(l.has_value());
  CHECK_FALSE(l->positive);
  CHECK(t[l->pred].x == 1);
  CHECK(t[l->pred].y == 2);
  CHECK(t[l->pred].bound == S(1));
  CHECK(t.bounds(1, 2) == std::vector<Bound>{S(1)});
  CHECK(t.bounds(2, 1) == std::vector<Bound>{W(-1)});
  CHECK_FALSE(t.literal(1, 0, W(3)).has_value());
  CHECK(e.lit(2, 1, W(-1)) == e.mgr().not_(e.lit(1, 2, S(1))));
  // growing the domain keeps old indices
  const auto before = t[0];
  e.set_domain(e.domain().refined(Guard{{1, 2, W(0)}}));
  CHECK(e.table().size() == 3);
  CHECK(e.table()[0].bound == before.bound);
}

TEST_CASE("alpha of a guard") {
  auto ta = clocks_only("x y");
  SymbolicEngine e(ta, dom(3, {{1, 0, W(2)}, {1, 0, W(4)}, {1, 2, S(1)}}));
  auto& m = e.mgr();
  CHECK(e.alpha_guard({{1, 0, W(2)}}) == e.lit(1, 0, W(2)));
  CHECK_THROWS(e.alpha_guard({{0, 1, W(-3)}}));  // not a domain constraint
  CHECK(e.alpha_guard({}) == m.mk_true());
  CHECK(e.alpha_guard({{1, 1, W(-1)}}) == m.mk_false());
  // x <= 2 and x - y < 1, against cells
  Bdd g = e.alpha_guard({{1, 0, W(2)}, {1, 2, S(1)}});
  CHECK(g == m.and_(e.lit(1, 0, W(2)), e.lit(1, 2, S(1))));
  for (const auto& v : e.minterms(m.and_(g, e.reduce2()), false)) {
    const Dbm z = e.zone(v.preds);
    if (!z.is_empty()) CHECK(includes(Dbm::from_guard(3, {{1, 0, W(2)}, {1, 2, S(1)}}), z));
  }
}

TEST_CASE("reduce2: the three-predicate example") {
  auto ta = clocks_only("x y z");
  SymbolicEngine e(ta, dom(4, {{1, 2, W(1)}, {2, 3, W(1)}, {1, 3, W(2)}}));
  auto& m = e.mgr();
  Bdd f = m.and_(e.lit(1, 2, W(1)), e.lit(2, 3, W(1)));
  CHECK(m.and_(m.and_(f, m.not_(e.lit(1, 3, W(2)))), e.reduce2()) == m.mk_false());
  CHECK(m.and_(f, e.reduce2()) != m.mk_false());

  // Without x - z <= 2 the same formula has no such minterm to exclude.
  SymbolicEngine e2(ta, dom(4, {{1, 2, W(1)}, {2, 3, W(1)}}));
  Bdd f2 = e2.mgr().and_(e2.lit(1, 2, W(1)), e2.lit(2, 3, W(1)));
  for (const auto& v : e2.minterms(e2.mgr().and_(f2, e2.reduce2()), false)) CHECK_FALSE(e2.zone(v.preds).is_empty());
}

TEST_CASE("reduce2: phi is 2-reduced but not reduced") {
  auto ta = clocks_only("x y z w");
  SymbolicEngine e(ta, dom(5, {{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}, {1, 4, W(5)}}));
  auto& m = e.mgr();
  Bdd phi = conj(e, {{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}});
  Bdd odd = m.and_(m.and_(phi, m.not_(e.lit(1, 4, W(5)))), e.reduce2());
  REQUIRE(odd != m.mk_false());
  for (const auto& v : e.minterms(odd, false)) CHECK(e.zone(v.preds).is_empty());
}

TEST_CASE("reduce2: reflected bounds close short cycles") {
  // Predicates x-y<=1, y-z<=1, x-z<=4, z-x<=-3. With z-x<=-3 stored as the
  // negation of x-z<3, the two-step path x,y,z already forces x-z<3, so the
  // all-true assignment does not survive.
  auto ta = clocks_only("x y z");
  SymbolicEngine e(ta, dom(4, {{1, 2, W(1)}, {2, 3, W(1)}, {1, 3, W(4)}, {3, 1, W(-3)}}));
  auto& m = e.mgr();
  Bdd all = conj(e, {{1, 2, W(1)}, {2, 3, W(1)}, {1, 3, W(4)}, {3, 1, W(-3)}});
  CHECK(m.and_(all, e.reduce2()) == m.mk_false());
}

TEST_CASE("reduce2: an empty survivor is removed by refinement") {
  // x-y<=1, y-z<=1, z-w<=3, w-x<=-6: the only contradiction is a cycle of
  // length four, out of reach of two-step paths.
  auto ta = clocks_only("x y z w");
  const Guard cs{{1, 2, W(1)}, {2, 3, W(1)}, {3, 4, W(3)}, {4, 1, W(-6)}};
  SymbolicEngine e(ta, dom(5, cs));
  auto& m = e.mgr();
  Bdd all = m.and_(m.and_(conj(e, cs), e.reduce2()), e.enc(0));
  auto v = e.pick(all);
  REQUIRE(v.has_value());
  CHECK(e.zone(v->preds).is_empty());

  auto init = e.pick(m.and_(e.initial(), e.reduce2()));
  REQUIRE(init.has_value());
  SymTrace t;
  t.states = {*init, *v};
  t.steps = {TraceStep{StepKind::up}};
  auto ref = e.refine_spurious(t);
  CHECK(ref.which == RefineCase::empty);
  CHECK(ref.index == 0);
  e.set_domain(e.domain().refined(ref.constraints));
  CHECK(m.and_(e.cube(v->preds), e.reduce2()) == m.mk_false());
}

TEST_CASE("post and pre under identity and empty relations") {
  auto ta = clocks_only("x y");
  SymbolicEngine e(ta, dom(3, {{1, 0, W(2)}, {1, 2, S(0)}, {0, 2, W(-1)}}));
  auto& m = e.mgr();
  Bdd id = m.mk_true();
  for (unsigned i = 0; i < e.table().size(); ++i)
    id = m.and_(id, m.iff(m.mk_var(m.unprimed(i)), m.mk_var(m.primed(i))));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i) {
    Bdd a = e.alpha_zone(ts::random_zone(rng, 3, 3).zone);
    CHECK(e.post_rel(a, id) == a);
    CHECK(e.pre_rel(a, id) == a);
    CHECK(e.post_rel(a, m.mk_false()) == m.mk_false());
    CHECK(e.pre_rel(a, m.mk_false()) == m.mk_false());
  }
}

TEST_CASE("concretize and alpha_zone agree on points") {
  auto ta = clocks_only("x y");
  std::mt19937_64 rng(9);
  for (int round = 0; round < 20; ++round) {
    SymbolicEngine e(ta, dom(3, ts::random_guard(rng, 3, 3, 2, 5)));
    auto& m = e.mgr();
    const Dbm z = ts::random_zone(rng, 3, 3).zone;
    const Bdd a = e.alpha_zone(z);
    for (const auto& v : e.minterms(m.and_(a, e.reduce2()), false)) {
      const Dbm c = e.zone(v.preds);
      CHECK_FALSE(c.is_empty());
      CHECK(intersects(c, z));
    }
    // every integer point of z lands in a cell of a
    for (const auto& p : oracle::integer_points(z, 5)) {
      Guard g;
      for (ClockIndex x = 1; x < 3; ++x) {
        g.push_back({x, 0, W(p[x])});
        g.push_back({0, x, W(-p[x])});
      }
      CHECK(implies(e, e.alpha_zone(Dbm::from_guard(3, g)), a));
    }
  }
}

TEST_CASE("Up over-approximates without a diagonal") {
  // From x<=1 and y>=1 nothing reaches (5,1) in time, but with no diagonal
  // predicate the abstract Up cannot tell.
  auto ta = clocks_only("x y");
  const Guard gray{{1, 0, W(1)}, {0, 2, W(-1)}};
  SymbolicEngine e(ta, dom(3, gray));
  auto& m = e.mgr();
  const Dbm pt = Dbm::from_guard(3, {{1, 0, W(5)}, {0, 1, W(-5)}, {2, 0, W(1)}, {0, 2, W(-1)}});
  CHECK_FALSE(intersects(up(Dbm::from_guard(3, gray)), pt));
  Bdd a = e.alpha_zone(Dbm::from_guard(3, gray));
  CHECK(m.and_(e.up_op(a), e.alpha_zone(pt)) != m.mk_false());
  e.set_domain(e.domain().refined(Guard{{1, 2, W(0)}}));
  a = e.alpha_zone(Dbm::from_guard(3, gray));
  CHECK(m.and_(e.up_op(a), e.alpha_zone(pt)) == m.mk_false());
}

TEST_CASE("Up and Reset contain the abstraction of the exact successors") {
  std::mt19937_64 rng(77);
  size_t up_bad = 0, reset_bad = 0, inter_bad = 0, checked = 0;
  for (int round = 0; round < 120; ++round) {
    const size_t dim = 2 + static_cast<size_t>(ts::uni(rng, 1, 2));
    auto ta = clocks_only(dim == 3 ? "x y" : "x y z");
    SymbolicEngine e(ta, dom(dim, ts::random_guard(rng, dim, 4, 2, 7)));
    auto& m = e.mgr();
    std::vector<Dbm> za, zb;
    for (int i = ts::uni(rng, 1, 3); i > 0; --i) za.push_back(ts::random_zone(rng, dim, 4).zone);
    for (int i = ts::uni(rng, 1, 3); i > 0; --i) zb.push_back(ts::random_zone(rng, dim, 4).zone);
    const Bdd a = alpha_union(e, za), b = alpha_union(e, zb);
    std::vector<Dbm> cells_a;
    for (const auto& v : e.minterms(a, false)) cells_a.push_back(e.zone(v.preds));
    std::vector<Dbm> ups, resets, meets;
    for (const auto& c : cells_a) ups.push_back(up(c));
    const auto z = static_cast<ClockIndex>(ts::uni(rng, 1, static_cast<int64_t>(dim) - 1));
    for (const auto& c : cells_a) resets.push_back(reset(c, z));
    for (const auto& v : e.minterms(b, false))
      for (const auto& c : cells_a) meets.push_back(intersect(c, e.zone(v.preds)));
    up_bad += !implies(e, alpha_union(e, ups), e.up_op(a));
    reset_bad += !implies(e, alpha_union(e, resets), e.reset_op(a, z));
    inter_bad += m.and_(a, b) != alpha_union(e, meets);
    ++checked;
  }
  CHECK(checked == 120);
  CHECK(up_bad == 0);
  CHECK(reset_bad == 0);
  CHECK(inter_bad == 0);
}

TEST_CASE("refinement of an up step") {
  // Domain y<1, x<=2, x<=3, x>=y, x-y<4. The gray zone y<=1, x<=2, x>=y
  // delays into x-y<=2, yet the cell of (3.5, 0.5) is an abstract successor.
  auto ta = clocks_only("x y");
  SymbolicEngine e(ta, dom(3, {{2, 0, S(1)}, {1, 0, W(2)}, {1, 0, W(3)}, {2, 1, W(0)}, {1, 2, S(4)}}));
  auto& m = e.mgr();
  const Dbm gray = Dbm::from_guard(3, {{2, 0, W(1)}, {1, 0, W(2)}, {2, 1, W(0)}});
  const Dbm pt = Dbm::from_guard(3, {{0, 1, S(-3)}, {1, 0, S(4)}, {2, 0, S(1)}, {0, 2, S(0)}});  // around (3.5, 0.5)
  CHECK_FALSE(intersects(up(gray), pt));
  const Bdd a1 = e.alpha_zone(gray);
  const auto a2 = e.pick(m.and_(m.and_(e.alpha_zone(pt), e.reduce2()), e.enc(0)));
  REQUIRE(a2.has_value());
  const Dbm z2 = e.zone(a2->preds);
  CHECK(m.and_(e.up_op(a1), e.cube(a2->preds)) != m.mk_false());

  const auto mi = minimal_interpolant(up(gray), down(z2));
  REQUIRE_FALSE(mi.intersecting);
  bool diag = false;
  for (const auto& c : mi.interpolant.constraints) diag |= c.x == 1 && c.y == 2 && c.bound <= W(2);
  CHECK(diag);
  CHECK(includes(mi.interpolant.zone(3), up(gray)));

  e.set_domain(e.domain().refined(mi.interpolant.constraints));
  const Bdd succ = e.up_op(e.alpha_zone(gray));
  for (const auto& v : e.minterms(m.and_(succ, e.reduce2()), false)) CHECK_FALSE(intersects(e.zone(v.preds), z2));
}

TEST_CASE("refinement of a reset step") {
  // Domain x-y<-1, y<=3, y<=1, x<=4, x-y<2. Resetting y in the gray zone
  // y-x>1, y<=3 gives x<2, but the cell x-y>=2, x<=4, y<=1 is reachable
  // abstractly.
  auto ta = clocks_only("x y");
  SymbolicEngine e(ta, dom(3, {{1, 2, S(-1)}, {2, 0, W(3)}, {2, 0, W(1)}, {1, 0, W(4)}, {1, 2, S(2)}}));
  auto& m = e.mgr();
  const Dbm gray = Dbm::from_guard(3, {{1, 2, S(-1)}, {2, 0, W(3)}});
  const Dbm a2 = Dbm::from_guard(3, {{2, 1, W(-2)}, {1, 0, W(4)}, {2, 0, W(1)}});
  CHECK_FALSE(intersects(reset(gray, 2), a2));
  const Bdd a1 = e.alpha_zone(gray);
  CHECK(m.and_(e.reset_op(a1, 2), e.alpha_zone(a2)) != m.mk_false());

  const auto mi = minimal_interpolant(free(gray, 2), free(a2, 2));
  REQUIRE_FALSE(mi.intersecting);
  CHECK(mi.k == 1);
  CHECK(mi.interpolant.constraints == Guard{{1, 0, S(2)}});

  e.set_domain(e.domain().refined(mi.interpolant.constraints));
  CHECK(m.and_(e.reset_op(e.alpha_zone(gray), 2), e.alpha_zone(a2)) == m.mk_false());
}

TEST_CASE("symbolic engine agrees with the zone-graph baseline") {
  size_t refinements = 0, recurrences = 0, violations = 0;
  for (uint64_t seed = 0; seed < 150; ++seed) {
    oracle::GeneratorConfig cfg;
    cfg.seed = seed;
    auto ta = oracle::generate_model(cfg);
    auto base = oracle::zone_reach_baseline(ta);
    REQUIRE(base.has_value());
    SymOptions opt;
    opt.verify_traces = true;
    opt.time_limit_s = 10;
    auto r = check_symbolic(ta, opt);
    INFO("seed " << seed);
    REQUIRE(r.verdict != Verdict::inconclusive);
    CHECK((r.verdict == Verdict::reachable) == *base);
    if (r.trace) CHECK(trace_feasible(ta, *r.trace).has_value());
    refinements += r.stats.refinements;
    recurrences += r.stats.trace_recurrences;
    violations += r.stats.step_violations;
  }
  CHECK(refinements > 0);
  CHECK(recurrences == 0);
  CHECK(violations == 0);
}
