#include "tacheck/symbolic.hpp"

#include <algorithm>
#include <stdexcept>

#include "tacheck/interpolation.hpp"

namespace tacheck {

namespace {

Guard is_zero(ClockIndex x) { return {{x, 0, Bound::zero()}, {0, x, Bound::zero()}}; }

uint64_t fnv(uint64_t h, uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xff;
    h *= 1099511628211ULL;
  }
  return h;
}

uint64_t trace_hash(const SymTrace& t) {
  uint64_t h = 1469598103934665603ULL;
  for (const auto& s : t.steps) h = fnv(fnv(fnv(h, static_cast<uint64_t>(s.kind)), s.clock), s.edge);
  for (const auto& v : t.states) {
    h = fnv(h, v.loc);
    for (bool b : v.preds) h = fnv(h, b);
  }
  return h;
}

// Same steps and same states once the newer trace forgets predicates >= n.
bool same_projection(const SymTrace& old_t, const SymTrace& new_t, unsigned n) {
  if (old_t.steps != new_t.steps || old_t.states.size() != new_t.states.size()) return false;
  for (size_t i = 0; i < old_t.states.size(); ++i) {
    const auto& a = old_t.states[i];
    const auto& b = new_t.states[i];
    if (a.loc != b.loc || b.preds.size() < n) return false;
    if (!std::equal(a.preds.begin(), a.preds.begin() + n, b.preds.begin())) return false;
  }
  return true;
}

}  // namespace

// ---------------------------------------------------------------- table

unsigned PredicateTable::sync(const AbstractDomain& d) {
  if (d.dim() != dim_) throw std::invalid_argument("predicate table: dimension mismatch");
  unsigned added = 0;
  for (ClockIndex x = 0; x < dim_; ++x)
    for (ClockIndex y = x + 1; y < dim_; ++y) {
      auto& row = pairs_[x * dim_ + y];
      for (Bound b : d.at(x, y)) {
        if (b.is_inf()) continue;
        auto it = std::lower_bound(row.begin(), row.end(), b,
                                   [](const auto& e, Bound v) { return e.first < v; });
        if (it != row.end() && it->first == b) continue;
        row.insert(it, {b, size()});
        preds_.push_back({x, y, b});
        ++added;
      }
    }
  return added;
}

std::optional<PredicateTable::Literal> PredicateTable::literal(ClockIndex x, ClockIndex y, Bound b) const {
  if (x == y || x >= dim_ || y >= dim_) return std::nullopt;
  const bool direct = x < y;
  const Bound key = direct ? b : b.reflect();
  const auto& row = direct ? pairs_[x * dim_ + y] : pairs_[y * dim_ + x];
  auto it = std::lower_bound(row.begin(), row.end(), key, [](const auto& e, Bound v) { return e.first < v; });
  if (it == row.end() || !(it->first == key)) return std::nullopt;
  return Literal{it->second, direct};
}

std::vector<Bound> PredicateTable::bounds(ClockIndex x, ClockIndex y) const {
  std::vector<Bound> out;
  if (x == y) return out;
  if (x < y) {
    for (const auto& e : pairs_[x * dim_ + y]) out.push_back(e.first);
  } else {
    const auto& row = pairs_[y * dim_ + x];
    for (auto it = row.rbegin(); it != row.rend(); ++it) out.push_back(it->first.reflect());
  }
  return out;
}

size_t PredicateTable::max_per_pair() const {
  size_t m = 0;
  for (const auto& r : pairs_) m = std::max(m, r.size());
  return m;
}

// ---------------------------------------------------------------- traces

SymbolicTrace SymTrace::edges() const {
  SymbolicTrace t;
  for (const auto& s : steps)
    if (s.kind != StepKind::up && s.last) t.edges.push_back(s.edge);
  return t;
}

std::string to_string(const TraceStep& s) {
  switch (s.kind) {
    case StepKind::up: return "up";
    case StepKind::r_empty: return "r_empty(e" + std::to_string(s.edge) + ")";
    case StepKind::reset: return "r(" + std::to_string(s.clock) + ", e" + std::to_string(s.edge) + ")";
  }
  return "?";
}

// ---------------------------------------------------------------- engine

namespace {
unsigned bits_for(size_t n) {
  unsigned b = 0;
  while ((size_t{1} << b) < n) ++b;
  return b;
}
}  // namespace

SymbolicEngine::SymbolicEngine(const TimedAutomaton& ta, AbstractDomain d, SymOptions opt)
    : ta_(ta),
      opt_(opt),
      loc_bits_(bits_for(ta.locations.size())),
      table_(ta.dim()),
      mgr_(loc_bits_, 0, opt.max_bdd_nodes) {
  set_domain(std::move(d));
}

void SymbolicEngine::set_domain(AbstractDomain d) {
  domain_ = std::move(d);
  mgr_.add_predicates(table_.sync(domain_));
  reduce2_.reset();
  s_up_.reset();
  inv_.reset();
  s_reset_.assign(ta_.dim(), std::nullopt);
  cube_unprimed_.reset();
  cube_primed_.reset();
  cube_loc_.reset();
  mgr_.gc({});
}

void SymbolicEngine::maybe_gc(std::vector<Bdd> roots) {
  if (mgr_.live_nodes() < (size_t{1} << 20)) return;
  for (const auto* c : {&reduce2_, &s_up_, &inv_, &cube_unprimed_, &cube_primed_, &cube_loc_})
    if (*c) roots.push_back(**c);
  for (const auto& c : s_reset_)
    if (c) roots.push_back(*c);
  mgr_.gc(roots);
}

std::vector<VarId> SymbolicEngine::unprimed_vars() const {
  std::vector<VarId> v;
  for (unsigned i = 0; i < table_.size(); ++i) v.push_back(mgr_.unprimed(i));
  return v;
}

std::vector<VarId> SymbolicEngine::primed_vars() const {
  std::vector<VarId> v;
  for (unsigned i = 0; i < table_.size(); ++i) v.push_back(mgr_.primed(i));
  return v;
}

std::vector<VarId> SymbolicEngine::loc_vars() const {
  std::vector<VarId> v;
  for (unsigned i = 0; i < loc_bits_; ++i) v.push_back(i);
  return v;
}

Bdd SymbolicEngine::lit(ClockIndex x, ClockIndex y, Bound b, bool primed) {
  auto l = table_.literal(x, y, b);
  if (!l) throw std::invalid_argument("constraint " + std::to_string(x) + "-" + std::to_string(y) + " " + b.str() +
                                      " is not in the abstract domain");
  const VarId v = primed ? mgr_.primed(l->pred) : mgr_.unprimed(l->pred);
  return l->positive ? mgr_.mk_var(v) : mgr_.mk_nvar(v);
}

Bdd SymbolicEngine::alpha_guard(const Guard& g) {
  Bdd r = mgr_.mk_true();
  for (const auto& a : g) {
    if (a.bound.is_inf()) continue;
    if (a.x == a.y) {
      if (a.bound < Bound::zero()) return mgr_.mk_false();
      continue;
    }
    r = mgr_.and_(r, lit(a.x, a.y, a.bound));
  }
  return r;
}

Bdd SymbolicEngine::enc(LocIndex l) {
  Bdd r = mgr_.mk_true();
  for (unsigned i = 0; i < loc_bits_; ++i) r = mgr_.and_(r, (l >> i) & 1 ? mgr_.mk_var(i) : mgr_.mk_nvar(i));
  return r;
}

LocIndex SymbolicEngine::decode_loc(const std::vector<bool>& bits) const {
  LocIndex l = 0;
  for (unsigned i = 0; i < loc_bits_; ++i)
    if (bits[i]) l |= LocIndex{1} << i;
  if (l >= ta_.locations.size()) throw std::logic_error("invalid location code");
  return l;
}

Bdd SymbolicEngine::invariants() {
  if (!inv_) {
    Bdd r = mgr_.mk_false();
    for (LocIndex l = 0; l < ta_.locations.size(); ++l)
      r = mgr_.or_(r, mgr_.and_(enc(l), alpha_guard(ta_.locations[l].invariant)));
    inv_ = r;
  }
  return *inv_;
}

Bdd SymbolicEngine::initial() {
  // The single valuation 0 satisfies x - y ≺ k iff (0,<=) <= (k,≺).
  Bdd r = mgr_.and_(enc(ta_.initial), alpha_guard(ta_.locations[ta_.initial].invariant));
  for (unsigned i = 0; i < table_.size(); ++i) {
    const VarId v = mgr_.unprimed(i);
    r = mgr_.and_(r, Bound::zero() <= table_[i].bound ? mgr_.mk_var(v) : mgr_.mk_nvar(v));
  }
  return r;
}

Bdd SymbolicEngine::reduce2() {
  if (reduce2_) return *reduce2_;
  const auto dim = static_cast<ClockIndex>(ta_.dim());
  Bdd r = mgr_.mk_true();
  // Valuations are non-negative: 0 - y ≺ k holds outright when k >= (0,<=).
  for (ClockIndex y = 1; y < dim; ++y)
    for (Bound b : table_.bounds(0, y))
      if (Bound::zero() <= b) r = mgr_.and_(r, lit(0, y, b));
  for (ClockIndex x = 0; x < dim; ++x)
    for (ClockIndex y = 0; y < dim; ++y) {
      if (x == y) continue;
      const auto bs = table_.bounds(x, y);
      for (Bound b : bs) {
        Bdd ante = mgr_.mk_false();
        for (Bound b1 : bs) {
          if (!(b1 < b)) break;
          ante = mgr_.or_(ante, lit(x, y, b1));
        }
        for (ClockIndex z = 0; z < dim; ++z) {
          if (z == x || z == y) continue;
          const auto bzy = table_.bounds(z, y);
          for (Bound b1 : table_.bounds(x, z)) {
            Bdd inner = mgr_.mk_false();
            for (Bound b2 : bzy) {
              if (!(b1 + b2 <= b)) break;
              inner = mgr_.or_(inner, lit(z, y, b2));
            }
            if (inner == mgr_.mk_false()) continue;
            ante = mgr_.or_(ante, mgr_.and_(lit(x, z, b1), inner));
          }
        }
        r = mgr_.and_(r, mgr_.implies(ante, lit(x, y, b)));
      }
    }
  reduce2_ = r;
  return r;
}

Bdd SymbolicEngine::s_up() {
  if (s_up_) return *s_up_;
  const auto dim = static_cast<ClockIndex>(ta_.dim());
  Bdd r = mgr_.mk_true();
  // A violated upper bound stays violated.
  for (ClockIndex x = 1; x < dim; ++x)
    for (Bound b : table_.bounds(x, 0))
      r = mgr_.and_(r, mgr_.implies(mgr_.not_(lit(x, 0, b)), mgr_.not_(lit(x, 0, b, true))));
  // Diagonals are untouched by delay.
  for (unsigned i = 0; i < table_.size(); ++i)
    if (table_[i].x != 0)
      r = mgr_.and_(r, mgr_.iff(mgr_.mk_var(mgr_.unprimed(i)), mgr_.mk_var(mgr_.primed(i))));
  s_up_ = r;
  return r;
}

Bdd SymbolicEngine::s_reset(ClockIndex z) {
  if (z == 0 || z >= ta_.dim()) throw std::invalid_argument("s_reset: bad clock");
  if (s_reset_[z]) return *s_reset_[z];
  const auto dim = static_cast<ClockIndex>(ta_.dim());
  const Bdd T = mgr_.mk_true(), F = mgr_.mk_false();
  Bdd r = T;
  for (Bound b : table_.bounds(z, 0))
    if (Bound::zero() <= b) r = mgr_.and_(r, lit(z, 0, b, true));
  // x - z after the reset is x - 0; for x = 0 the antecedent is the constant 0 ≺ k.
  for (ClockIndex x = 0; x < dim; ++x) {
    if (x == z) continue;
    for (Bound b : table_.bounds(x, z)) {
      Bdd ante = F;
      if (x == 0) {
        ante = Bound::zero() <= b ? T : F;
      } else {
        for (Bound l : table_.bounds(x, 0)) {
          if (!(l <= b)) break;
          ante = mgr_.or_(ante, lit(x, 0, l));
        }
      }
      r = mgr_.and_(r, mgr_.implies(ante, lit(x, z, b, true)));
    }
  }
  for (ClockIndex y = 0; y < dim; ++y) {
    if (y == z) continue;
    for (Bound b : table_.bounds(z, y)) {
      Bdd ante = F;
      if (y == 0) {
        ante = Bound::zero() <= b ? T : F;
      } else {
        for (Bound l : table_.bounds(0, y)) {
          if (!(l <= b)) break;
          ante = mgr_.or_(ante, lit(0, y, l));
        }
      }
      r = mgr_.and_(r, mgr_.implies(ante, lit(z, y, b, true)));
      if (Bound::zero() <= b) r = mgr_.and_(r, lit(z, y, b, true));
    }
  }
  for (unsigned i = 0; i < table_.size(); ++i)
    if (table_[i].x != z && table_[i].y != z)
      r = mgr_.and_(r, mgr_.iff(mgr_.mk_var(mgr_.unprimed(i)), mgr_.mk_var(mgr_.primed(i))));
  s_reset_[z] = r;
  return r;
}

Bdd SymbolicEngine::post_rel(Bdd s, Bdd r) {
  if (!cube_unprimed_) cube_unprimed_ = mgr_.cube(unprimed_vars());
  return mgr_.rename_unprime(mgr_.and_exists(s, r, *cube_unprimed_));
}

Bdd SymbolicEngine::pre_rel(Bdd s, Bdd r) {
  if (!cube_primed_) cube_primed_ = mgr_.cube(primed_vars());
  return mgr_.and_exists(mgr_.rename_prime(s), r, *cube_primed_);
}

Bdd SymbolicEngine::up_op(Bdd a) { return mgr_.and_(post_rel(a, s_up()), reduce2()); }

Bdd SymbolicEngine::reset_op(Bdd a, ClockIndex z) { return mgr_.and_(post_rel(a, s_reset(z)), reduce2()); }

Bdd SymbolicEngine::edge_image(Bdd a, size_t e) {
  const Edge& ed = ta_.edges.at(e);
  if (!cube_loc_) cube_loc_ = mgr_.cube(loc_vars());
  Bdd f = mgr_.and_exists(a, enc(ed.src), *cube_loc_);
  f = mgr_.and_(f, alpha_guard(ed.guard));
  for (ClockIndex x : ed.resets) {
    if (f == mgr_.mk_false()) break;
    f = reset_op(f, x);
  }
  f = mgr_.and_(f, alpha_guard(ta_.locations[ed.dst].invariant));
  return mgr_.and_(f, enc(ed.dst));
}

Bdd SymbolicEngine::apply_edges(Bdd a) {
  Bdd r = mgr_.mk_false();
  for (size_t e = 0; e < ta_.edges.size(); ++e) r = mgr_.or_(r, edge_image(a, e));
  return r;
}

std::optional<SymTrace> SymbolicEngine::sym_reach() {
  const Bdd target = enc(ta_.target);
  std::vector<Bdd> layers{initial()};
  layers_ = 1;
  if (mgr_.and_(layers[0], target) != mgr_.mk_false()) return extract_trace(layers);
  Bdd reach = mgr_.mk_false();
  Bdd nexts = layers[0];
  while (mgr_.and_(nexts, mgr_.not_(reach)) != mgr_.mk_false()) {
    if (deadline_ && std::chrono::steady_clock::now() > *deadline_) throw SymTimeout{};
    reach = mgr_.or_(reach, nexts);
    nexts = mgr_.and_(apply_edges(mgr_.and_(up_op(nexts), invariants())), mgr_.not_(reach));
    layers.push_back(nexts);
    layers_ = layers.size();
    if (mgr_.and_(nexts, target) != mgr_.mk_false()) return extract_trace(layers);
    std::vector<Bdd> roots = layers;
    roots.push_back(reach);
    roots.push_back(target);
    maybe_gc(std::move(roots));
  }
  return std::nullopt;
}

// Backwards from a target minterm of the last layer. Per layer: the edges into
// the current location in declaration order, the first minterm (lexicographic)
// at each choice.
std::optional<SymTrace> SymbolicEngine::extract_trace(const std::vector<Bdd>& layers) {
  auto cur = pick(mgr_.and_(layers.back(), enc(ta_.target)));
  if (!cur) throw std::logic_error("extract_trace: empty last layer");
  std::vector<AbstractMinterm> states{*cur};  // reversed
  std::vector<TraceStep> steps;               // reversed
  if (!cube_loc_) cube_loc_ = mgr_.cube(loc_vars());
  for (size_t j = layers.size() - 1; j > 0; --j) {
    const Bdd prev = layers[j - 1];
    const Bdd delayed = mgr_.and_(up_op(prev), invariants());
    bool found = false;
    for (size_t e = 0; e < ta_.edges.size() && !found; ++e) {
      const Edge& ed = ta_.edges[e];
      if (ed.dst != cur->loc) continue;
      std::vector<Bdd> fwd{mgr_.and_(mgr_.and_exists(delayed, enc(ed.src), *cube_loc_), alpha_guard(ed.guard))};
      for (ClockIndex x : ed.resets) fwd.push_back(reset_op(fwd.back(), x));
      const Bdd landing = mgr_.and_(fwd.back(), alpha_guard(ta_.locations[ed.dst].invariant));
      std::vector<bool> c = cur->preds;
      if (mgr_.and_(landing, cube(c)) == mgr_.mk_false()) continue;
      found = true;
      const size_t k = ed.resets.size();
      if (k == 0) {
        steps.push_back({StepKind::r_empty, 0, e, true, true});
        states.push_back({ed.src, c});
      }
      for (size_t t = k; t-- > 0;) {
        auto p = pick(mgr_.and_(pre_rel(cube(c), s_reset(ed.resets[t])), fwd[t]), false);
        if (!p) throw std::logic_error("extract_trace: no reset predecessor");
        c = p->preds;
        steps.push_back({StepKind::reset, ed.resets[t], e, t == 0, t + 1 == k});
        states.push_back({ed.src, c});
      }
      auto p = pick(mgr_.and_(pre_rel(cube({ed.src, c}), s_up()), prev));
      if (!p) throw std::logic_error("extract_trace: no delay predecessor");
      steps.push_back({StepKind::up, 0, SIZE_MAX, false, false});
      states.push_back(*p);
      cur = *p;
    }
    if (!found) throw std::logic_error("extract_trace: no edge explains the layer");
  }
  std::reverse(states.begin(), states.end());
  std::reverse(steps.begin(), steps.end());
  return SymTrace{std::move(states), std::move(steps)};
}

Bdd SymbolicEngine::cube(const AbstractMinterm& v, bool with_loc) {
  Bdd r = with_loc ? enc(v.loc) : mgr_.mk_true();
  for (unsigned i = 0; i < v.preds.size(); ++i) {
    const VarId x = mgr_.unprimed(i);
    r = mgr_.and_(r, v.preds[i] ? mgr_.mk_var(x) : mgr_.mk_nvar(x));
  }
  return r;
}

std::optional<AbstractMinterm> SymbolicEngine::pick(Bdd f, bool with_loc) {
  std::vector<VarId> support = with_loc ? loc_vars() : std::vector<VarId>{};
  for (VarId v : unprimed_vars()) support.push_back(v);
  std::optional<AbstractMinterm> out;
  mgr_.for_each_minterm(f, support, [&](const std::vector<bool>& m) {
    const size_t lb = with_loc ? loc_bits_ : 0;
    AbstractMinterm v;
    v.loc = with_loc ? decode_loc(m) : 0;
    v.preds.assign(m.begin() + static_cast<std::ptrdiff_t>(lb), m.end());
    out = std::move(v);
    return false;
  });
  return out;
}

std::vector<AbstractMinterm> SymbolicEngine::minterms(Bdd f, bool with_loc) {
  std::vector<VarId> support = with_loc ? loc_vars() : std::vector<VarId>{};
  for (VarId v : unprimed_vars()) support.push_back(v);
  std::vector<AbstractMinterm> out;
  mgr_.for_each_minterm(f, support, [&](const std::vector<bool>& m) {
    const size_t lb = with_loc ? loc_bits_ : 0;
    AbstractMinterm v;
    v.loc = with_loc ? decode_loc(m) : 0;
    v.preds.assign(m.begin() + static_cast<std::ptrdiff_t>(lb), m.end());
    out.push_back(std::move(v));
    return true;
  });
  return out;
}

Dbm SymbolicEngine::raw_zone(const std::vector<bool>& preds) const {
  Dbm d(ta_.dim());
  for (unsigned i = 0; i < preds.size() && i < table_.size(); ++i) {
    const auto& p = table_[i];
    if (preds[i])
      d.constrain(p.x, p.y, p.bound);
    else
      d.constrain(p.y, p.x, p.bound.reflect());
  }
  return d;
}

Dbm SymbolicEngine::zone(const std::vector<bool>& preds) const { return canonical(raw_zone(preds)); }

std::pair<LocIndex, Dbm> SymbolicEngine::concretize(const AbstractMinterm& v) const {
  if (v.loc >= ta_.locations.size()) throw std::invalid_argument("concretize: invalid location");
  return {v.loc, zone(v.preds)};
}

Bdd SymbolicEngine::alpha_zone(const Dbm& z) {
  const unsigned n = table_.size();
  auto rec = [&](auto&& self, unsigned i, const Dbm& cur) -> Bdd {
    if (cur.is_empty()) return mgr_.mk_false();
    if (i == n) return mgr_.mk_true();
    const auto& p = table_[i];
    const Bdd hi = self(self, i + 1, intersect(cur, Guard{{p.x, p.y, p.bound}}));
    const Bdd lo = self(self, i + 1, intersect(cur, Guard{{p.y, p.x, p.bound.reflect()}}));
    return mgr_.ite(mgr_.mk_var(mgr_.unprimed(i)), hi, lo);
  };
  return rec(rec, 0, canonical(z));
}

// ---------------------------------------------------------------- concrete replay

Dbm SymbolicEngine::concrete_post(const TraceStep& s, LocIndex src, const Dbm& z) const {
  if (s.kind == StepKind::up) return intersect(up(z), ta_.locations[src].invariant);
  const Edge& ed = ta_.edges.at(s.edge);
  Dbm w = z;
  if (s.first) w = intersect(w, ed.guard);
  if (s.kind == StepKind::reset) w = reset(w, s.clock);
  if (s.last) w = intersect(w, ta_.locations[ed.dst].invariant);
  return w;
}

Dbm SymbolicEngine::concrete_pre(const TraceStep& s, LocIndex src, const Dbm& z) const {
  if (s.kind == StepKind::up) return down(intersect(z, ta_.locations[src].invariant));
  const Edge& ed = ta_.edges.at(s.edge);
  Dbm w = z;
  if (s.last) w = intersect(w, ta_.locations[ed.dst].invariant);
  if (s.kind == StepKind::reset) w = free(intersect(w, is_zero(s.clock)), s.clock);
  if (s.first) w = intersect(w, ed.guard);
  return w;
}

std::vector<Dbm> SymbolicEngine::concrete_chain(const SymTrace& t) const {
  const size_t dim = ta_.dim();
  std::vector<Dbm> b;
  b.push_back(intersect(intersect(Dbm::zero(dim), ta_.locations[ta_.initial].invariant), zone(t.states[0].preds)));
  for (size_t i = 0; i < t.steps.size(); ++i) {
    if (b.back().is_empty()) {
      b.push_back(Dbm::empty(dim));
      continue;
    }
    b.push_back(intersect(concrete_post(t.steps[i], t.states[i].loc, b.back()), zone(t.states[i + 1].preds)));
  }
  return b;
}

SymRefinement SymbolicEngine::refine_spurious(const SymTrace& t) const {
  const auto chain = concrete_chain(t);
  size_t i0 = chain.size();
  while (i0 > 0 && chain[i0 - 1].is_empty()) --i0;
  if (i0 == chain.size()) throw std::logic_error("refine_spurious: trace is realizable");
  if (i0 == 0) throw std::logic_error("refine_spurious: empty initial set");
  --i0;
  const size_t j = i0 + 1;
  const TraceStep& step = t.steps[i0];
  const LocIndex src = t.states[i0].loc;
  SymRefinement out;
  out.index = i0;

  const Dbm raw = raw_zone(t.states[j].preds);
  const Dbm aj = canonical(raw);
  if (aj.is_empty()) {
    // Every step of a negative cycle and every prefix sum from its first clock,
    // so that paths of length two rebuild the contradiction.
    out.which = RefineCase::empty;
    const auto cyc = negative_cycle(raw);
    if (cyc.empty()) throw std::logic_error("refine_spurious: empty zone without negative cycle");
    const size_t m = cyc.size();
    Bound sum = Bound::zero();
    for (size_t i = 0; i < m; ++i) {
      const ClockIndex a = cyc[i], b = cyc[(i + 1) % m];
      const Bound w = raw.at(a, b);
      out.constraints.push_back({a, b, w});
      if (i + 1 < m) {
        sum = i == 0 ? w : sum + w;
        if (i > 0) out.constraints.push_back({cyc[0], b, sum});
      }
    }
    return out;
  }

  const Dbm ai = zone(t.states[i0].preds);
  const Dbm pre_aj = concrete_pre(step, src, aj);
  auto take = [&](const Dbm& a, const Dbm& b) -> bool {
    if (a.is_empty()) return false;
    const auto mi = minimal_interpolant(a, b);
    if (mi.intersecting) return false;
    out.constraints = mi.interpolant.constraints;
    bool changed = false;
    (void)domain_.refined(out.constraints, &changed);
    return changed;
  };
  if (intersects(pre_aj, ai)) {
    out.which = RefineCase::pre;
    if (!take(pre_aj, chain[i0])) throw std::logic_error("refine_spurious: predecessor interpolant made no progress");
    return out;
  }
  switch (step.kind) {
    case StepKind::r_empty:
      throw std::logic_error("refine_spurious: spurious identity step");
    case StepKind::up:
      out.which = RefineCase::up;
      if (take(up(ai), down(aj))) return out;
      break;
    case StepKind::reset:
      out.which = RefineCase::reset;
      if (take(free(ai, step.clock), free(aj, step.clock))) return out;
      break;
  }
  // The abstract state reached is not closed under the step, so the two
  // sets overlap. Separate the exact successors from the state instead.
  out.which = RefineCase::fallback;
  if (take(concrete_post(step, src, ai), aj)) return out;
  if (step.kind != StepKind::reset) throw std::logic_error("refine_spurious: no progress on a delay step");
  // Last resort: give every diagonal through the reset clock the matching
  // bound on the other clock, which makes the reset relation a function.
  out.constraints.clear();
  const auto dim = static_cast<ClockIndex>(ta_.dim());
  const ClockIndex z = step.clock;
  for (ClockIndex x = 1; x < dim; ++x) {
    if (x == z) continue;
    for (Bound b : table_.bounds(x, z)) out.constraints.push_back({x, 0, b});
    for (Bound b : table_.bounds(z, x)) out.constraints.push_back({0, x, b});
  }
  bool changed = false;
  (void)domain_.refined(out.constraints, &changed);
  if (!changed) throw std::logic_error("refine_spurious: reset relation already exact");
  return out;
}

std::optional<SymTrace> SymbolicEngine::abstract_path(const SymTrace& t) {
  if (!cube_loc_) cube_loc_ = mgr_.cube(loc_vars());
  auto proj = [&](const AbstractMinterm& v) {
    Bdd r = enc(v.loc);
    for (unsigned i = 0; i < v.preds.size() && i < table_.size(); ++i) {
      const VarId x = mgr_.unprimed(i);
      r = mgr_.and_(r, v.preds[i] ? mgr_.mk_var(x) : mgr_.mk_nvar(x));
    }
    return r;
  };
  const Bdd F = mgr_.mk_false();
  std::vector<Bdd> s{mgr_.and_(initial(), proj(t.states[0]))};
  for (size_t i = 0; i < t.steps.size(); ++i) {
    if (s.back() == F) return std::nullopt;
    const auto& st = t.steps[i];
    const LocIndex src = t.states[i].loc;
    Bdd nx;
    if (st.kind == StepKind::up) {
      nx = mgr_.and_(up_op(s.back()), invariants());
    } else {
      const Edge& ed = ta_.edges.at(st.edge);
      Bdd f = s.back();
      if (st.first) f = mgr_.and_(f, alpha_guard(ed.guard));
      f = mgr_.exists(f, *cube_loc_);
      if (st.kind == StepKind::reset) f = reset_op(f, st.clock);
      nx = st.last ? mgr_.and_(mgr_.and_(f, alpha_guard(ta_.locations[ed.dst].invariant)), enc(ed.dst))
                   : mgr_.and_(f, enc(src));
    }
    s.push_back(mgr_.and_(nx, proj(t.states[i + 1])));
  }
  auto last = pick(s.back());
  if (!last) return std::nullopt;
  SymTrace w;
  w.steps = t.steps;
  w.states.resize(t.states.size());
  w.states.back() = *last;
  for (size_t i = t.steps.size(); i-- > 0;) {
    const auto& st = t.steps[i];
    const auto& nxt = w.states[i + 1];
    Bdd cand;
    if (st.kind == StepKind::up)
      cand = pre_rel(cube(nxt), s_up());
    else if (st.kind == StepKind::reset)
      cand = pre_rel(cube(nxt.preds), s_reset(st.clock));
    else
      cand = cube(nxt.preds);
    auto p = pick(mgr_.and_(cand, s[i]));
    if (!p) throw std::logic_error("abstract_path: lost the witness");
    w.states[i] = *p;
  }
  return w;
}

bool SymbolicEngine::verify_step(const SymTrace& t, size_t i) {
  const auto& a = t.states[i];
  const auto& b = t.states[i + 1];
  const auto& s = t.steps[i];
  const Bdd ca = cube(a), cb = cube(b);
  auto in = [&](Bdd x, Bdd f) { return mgr_.and_(x, mgr_.not_(f)) == mgr_.mk_false(); };
  if (!in(cb, reduce2())) return false;
  if (s.kind == StepKind::up) {
    if (a.loc != b.loc) return false;
    return in(cb, invariants()) && mgr_.and_(mgr_.and_(ca, mgr_.rename_prime(cube(b.preds))), s_up()) != mgr_.mk_false();
  }
  const Edge& ed = ta_.edges.at(s.edge);
  if (a.loc != ed.src) return false;
  if (s.first && !in(cube(a.preds), alpha_guard(ed.guard))) return false;
  if (s.last) {
    if (b.loc != ed.dst || !in(cube(b.preds), alpha_guard(ta_.locations[ed.dst].invariant))) return false;
  } else if (b.loc != ed.src) {
    return false;
  }
  if (s.kind == StepKind::r_empty) return a.preds == b.preds;
  return mgr_.and_(mgr_.and_(cube(a.preds), mgr_.rename_prime(cube(b.preds))), s_reset(s.clock)) != mgr_.mk_false();
}

// ---------------------------------------------------------------- CEGAR loop

SymResult check_symbolic(const TimedAutomaton& ta, SymOptions opt) {
  const auto t0 = std::chrono::steady_clock::now();
  SymResult res;
  auto& st = res.stats;
  SymbolicEngine eng(ta, initial_domain(ta), opt);
  if (opt.time_limit_s > 0)
    eng.set_deadline(t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(opt.time_limit_s)));
  std::optional<SymTrace> prev;
  unsigned prev_preds = 0;
  auto finish = [&](Verdict v, std::string why = {}) {
    res.verdict = v;
    res.reason = std::move(why);
    st.predicates = eng.table().size();
    st.max_predicates_per_pair = eng.table().max_per_pair();
    st.time_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  try {
    for (;;) {
      ++st.iterations;
      auto tr = eng.sym_reach();
      st.layers = eng.layers_built();
      st.peak_nodes = std::max(st.peak_nodes, eng.mgr().live_nodes());
      if (!tr) return finish(Verdict::not_reachable);
      if (opt.verify_traces)
        for (size_t i = 0; i < tr->steps.size(); ++i) {
          ++st.steps_verified;
          if (!eng.verify_step(*tr, i)) ++st.step_violations;
        }
      if (opt.record_traces) st.trace_hashes.push_back(trace_hash(*tr));
      const auto chain = eng.concrete_chain(*tr);
      if (!chain.back().is_empty()) {
        res.trace = tr->edges();
        if (!trace_feasible(ta, *res.trace)) throw std::logic_error("realizable abstract trace fails concrete replay");
        res.abstract_trace = std::move(tr);
        return finish(Verdict::reachable);
      }
      if (prev && same_projection(*prev, *tr, prev_preds)) ++st.trace_recurrences;
      prev_preds = eng.table().size();
      // Refine until the counterexample is no longer a path of the abstraction.
      std::optional<SymTrace> w = tr;
      for (bool again = false; w; again = true) {
        if (st.refinements >= opt.max_refinements) return finish(Verdict::inconclusive, "refinement budget exhausted");
        const auto ref = eng.refine_spurious(*w);
        switch (ref.which) {
          case RefineCase::empty: ++st.case_empty; break;
          case RefineCase::pre: ++st.case_pre; break;
          case RefineCase::up: ++st.case_up; break;
          case RefineCase::reset: ++st.case_reset; break;
          case RefineCase::fallback: ++st.case_fallback; break;
        }
        eng.set_domain(eng.domain().refined(ref.constraints));
        ++st.refinements;
        st.repeat_refinements += again;
        w = eng.abstract_path(*tr);
      }
      prev = std::move(tr);
    }
  } catch (const BddBudgetExceeded&) {
    return finish(Verdict::inconclusive, "BDD node budget exhausted");
  } catch (const SymTimeout&) {
    return finish(Verdict::inconclusive, "time limit");
  }
}

}  // namespace tacheck
