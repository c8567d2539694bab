#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tacheck/automaton.hpp"
#include "tacheck/bdd.hpp"
#include "tacheck/domain.hpp"
#include "tacheck/verdict.hpp"

namespace tacheck {

// One Boolean variable per domain constraint on a pair x < y (clock 0 first).
// A constraint on x > y is the negation of its reflection. Predicates are
// only ever appended, so an index keeps its meaning across refinements.
class PredicateTable {
 public:
  struct Pred {
    ClockIndex x = 0, y = 0;  // x < y
    Bound bound;
  };
  struct Literal {
    unsigned pred = 0;
    bool positive = true;
  };

  PredicateTable() = default;
  explicit PredicateTable(size_t dim) : dim_(dim), pairs_(dim * dim) {}

  size_t dim() const { return dim_; }
  unsigned size() const { return static_cast<unsigned>(preds_.size()); }
  const Pred& operator[](unsigned i) const { return preds_[i]; }

  // Appends predicates for constraints of d not yet present; returns how many.
  unsigned sync(const AbstractDomain& d);
  std::optional<Literal> literal(ClockIndex x, ClockIndex y, Bound b) const;
  // Bounds available on the ordered pair (x, y), ascending.
  std::vector<Bound> bounds(ClockIndex x, ClockIndex y) const;
  size_t max_per_pair() const;

 private:
  size_t dim_ = 0;
  std::vector<Pred> preds_;
  // For x < y, (bound, index) pairs sorted by bound.
  std::vector<std::vector<std::pair<Bound, unsigned>>> pairs_;
};

struct AbstractMinterm {
  LocIndex loc = 0;
  std::vector<bool> preds;
  friend bool operator==(const AbstractMinterm&, const AbstractMinterm&) = default;
};

enum class StepKind { up, r_empty, reset };

// Edge steps carry their edge. An edge with resets r1..rk becomes k reset
// steps; the first one also applies the guard and the last one moves to the
// target location and applies its invariant. Without resets it is one r_empty
// step doing both.
struct TraceStep {
  StepKind kind = StepKind::up;
  ClockIndex clock = 0;
  size_t edge = SIZE_MAX;
  bool first = false;
  bool last = false;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct SymTrace {
  std::vector<AbstractMinterm> states;  // states.size() == steps.size() + 1
  std::vector<TraceStep> steps;
  SymbolicTrace edges() const;
};

std::string to_string(const TraceStep& s);

struct SymOptions {
  size_t max_refinements = 20'000;
  size_t max_bdd_nodes = size_t{1} << 24;
  double time_limit_s = 0;  // 0: unlimited
  // Re-check every extracted step against its relation.
  bool verify_traces = false;
  bool record_traces = false;
};

struct SymStats {
  size_t iterations = 0;
  size_t refinements = 0;
  size_t case_empty = 0;     // unsatisfiable abstract state
  size_t case_pre = 0;       // predecessors exist but none reachable
  size_t case_up = 0;
  size_t case_reset = 0;
  size_t case_fallback = 0;  // up/reset sets overlapped; separated post from the state
  size_t predicates = 0;
  size_t max_predicates_per_pair = 0;
  size_t layers = 0;  // of the last reachability run
  size_t peak_nodes = 0;
  double time_ms = 0;
  std::vector<uint64_t> trace_hashes;  // one per abstract counterexample (record_traces)
  // Spurious counterexamples whose projection onto the previous iteration's
  // predicates equals the previous counterexample.
  size_t trace_recurrences = 0;
  // Extra refinements spent on a counterexample that survived its first one.
  size_t repeat_refinements = 0;
  size_t steps_verified = 0;
  size_t step_violations = 0;
};

struct SymResult {
  Verdict verdict = Verdict::inconclusive;
  std::optional<SymbolicTrace> trace;
  std::optional<SymTrace> abstract_trace;
  SymStats stats;
  std::string reason;
};

struct SymTimeout {};

enum class RefineCase { empty, pre, up, reset, fallback };

struct SymRefinement {
  RefineCase which = RefineCase::empty;
  size_t index = 0;  // i0: last state with a non-empty concrete set
  Guard constraints;
};

// Boolean encoding of one automaton under one abstract domain. Formulas built
// before set_domain() are invalidated.
class SymbolicEngine {
 public:
  SymbolicEngine(const TimedAutomaton& ta, AbstractDomain d, SymOptions opt = {});

  const TimedAutomaton& automaton() const { return ta_; }
  const AbstractDomain& domain() const { return domain_; }
  void set_domain(AbstractDomain d);
  const PredicateTable& table() const { return table_; }
  BddManager& mgr() { return mgr_; }

  Bdd lit(ClockIndex x, ClockIndex y, Bound b, bool primed = false);
  Bdd alpha_guard(const Guard& g);
  Bdd enc(LocIndex l);
  Bdd invariants();  // OR over l of enc(l) and alpha(inv(l))
  Bdd initial();     // enc(l0), the point 0 and inv(l0)

  Bdd reduce2();
  Bdd s_up();
  Bdd s_reset(ClockIndex z);
  Bdd post_rel(Bdd s, Bdd r);
  Bdd pre_rel(Bdd s, Bdd r);
  Bdd up_op(Bdd a);
  Bdd reset_op(Bdd a, ClockIndex z);
  // Successors by edge e of a formula over B and P, target invariant included.
  Bdd edge_image(Bdd a, size_t e);
  Bdd apply_edges(Bdd a);

  // nullopt: target not reachable in the abstraction.
  std::optional<SymTrace> sym_reach();

  Bdd cube(const AbstractMinterm& v, bool with_loc = true);
  Bdd cube(const std::vector<bool>& preds) { return cube({0, preds}, false); }
  std::optional<AbstractMinterm> pick(Bdd f, bool with_loc = true);
  std::vector<AbstractMinterm> minterms(Bdd f, bool with_loc = true);
  // Raw matrix of the literals of v; canonicalize for the zone.
  Dbm raw_zone(const std::vector<bool>& preds) const;
  Dbm zone(const std::vector<bool>& preds) const;
  std::pair<LocIndex, Dbm> concretize(const AbstractMinterm& v) const;
  // alpha_D(z) as a formula over P: every minterm whose cell meets z.
  Bdd alpha_zone(const Dbm& z);

  // Concrete forward sets B_0..B_n along the trace, each cut by its state.
  std::vector<Dbm> concrete_chain(const SymTrace& t) const;
  Dbm concrete_post(const TraceStep& s, LocIndex src, const Dbm& z) const;
  Dbm concrete_pre(const TraceStep& s, LocIndex src, const Dbm& z) const;
  SymRefinement refine_spurious(const SymTrace& t) const;
  // An abstract path of the current abstraction whose states extend those of
  // t (t may predate the last refinements); nullopt if there is none.
  std::optional<SymTrace> abstract_path(const SymTrace& t);
  // Every step is in its relation and every state sits in its layer formula.
  bool verify_step(const SymTrace& t, size_t i);

  size_t layers_built() const { return layers_; }
  // Stop sym_reach with SymTimeout once this passes.
  void set_deadline(std::chrono::steady_clock::time_point t) { deadline_ = t; }

 private:
  void maybe_gc(std::vector<Bdd> roots);
  std::vector<VarId> unprimed_vars() const;
  std::vector<VarId> primed_vars() const;
  std::vector<VarId> loc_vars() const;
  std::optional<SymTrace> extract_trace(const std::vector<Bdd>& layers);
  LocIndex decode_loc(const std::vector<bool>& bits) const;

  const TimedAutomaton& ta_;
  AbstractDomain domain_;
  SymOptions opt_;
  unsigned loc_bits_ = 0;
  PredicateTable table_;
  BddManager mgr_;
  // Cached per domain; cleared by set_domain.
  std::optional<Bdd> reduce2_, s_up_, inv_;
  std::vector<std::optional<Bdd>> s_reset_;
  std::optional<Bdd> cube_unprimed_, cube_primed_, cube_loc_;
  size_t layers_ = 0;
  std::optional<std::chrono::steady_clock::time_point> deadline_;
};

SymResult check_symbolic(const TimedAutomaton& ta, SymOptions opt = {});

}  // namespace tacheck
