#include "tacheck/oracle.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace tacheck::oracle {

namespace {

// Weight k - e*eps with eps infinitesimal: strict bounds carry e = 1.
struct W {
  int64_t k;
  int64_t e;
  friend bool operator<(W a, W b) { return a.k != b.k ? a.k < b.k : a.e > b.e; }
  friend W operator+(W a, W b) { return {a.k + b.k, a.e + b.e}; }
};

W weight(int64_t k, bool strict) { return {k, strict ? 1 : 0}; }

struct Coord {
  size_t node;  // 0 is the constant-zero node
  int64_t off;
};

class System {
 public:
  explicit System(size_t nodes) : n_(nodes) {}

  // val(a) - val(b) ≺ k
  void add(size_t a, size_t b, int64_t k, bool strict) {
    if (a == b) {
      if (!(0 < k || (k == 0 && !strict))) ok_ = false;
      return;
    }
    edges_.push_back({b, a, weight(k, strict)});
  }

  void add_clock_constraints(const Guard& cs, const std::vector<Coord>& coord) {
    for (const auto& c : cs) {
      const Coord& cx = coord[c.x];
      const Coord& cy = coord[c.y];
      add(cx.node, cy.node, c.bound.value() - cx.off + cy.off, c.bound.is_strict());
    }
    for (size_t x = 1; x < coord.size(); ++x) add(0, coord[x].node, coord[x].off, false);
  }

  // Bellman-Ford from a virtual source; a relaxation in round n means a negative cycle.
  bool feasible() const {
    if (!ok_) return false;
    std::vector<W> d(n_, W{0, 0});
    for (size_t round = 0; round <= n_; ++round) {
      bool changed = false;
      for (const auto& e : edges_) {
        W cand = d[e.from] + e.w;
        if (cand < d[e.to]) {
          d[e.to] = cand;
          changed = true;
        }
      }
      if (!changed) return true;
    }
    return false;
  }

 private:
  struct E {
    size_t from, to;
    W w;
  };
  size_t n_;
  bool ok_ = true;
  std::vector<E> edges_;
};

bool holds(int64_t diff, Bound b) {
  if (b.is_inf()) return true;
  return b.is_strict() ? diff < b.value() : diff <= b.value();
}

std::vector<Coord> fixed_coords(const Point& p) {
  std::vector<Coord> c(p.size());
  for (size_t i = 0; i < p.size(); ++i) c[i] = {0, p[i]};
  return c;
}

size_t dim_of(const Point& p) { return p.size(); }

}  // namespace

bool contains(const Dbm& z, const Point& p, int64_t den) {
  if (z.is_empty()) return false;
  const size_t n = z.dim();
  for (size_t x = 0; x < n; ++x) {
    for (size_t y = 0; y < n; ++y) {
      Bound b = z.at(x, y);
      if (b.is_inf()) continue;
      const int64_t lhs = p[x] - p[y];
      const int64_t rhs = b.value() * den;
      if (b.is_strict() ? !(lhs < rhs) : !(lhs <= rhs)) return false;
    }
  }
  return true;
}

std::vector<Point> integer_points(const Dbm& z, unsigned box_max) {
  if (z.dim() > 5) throw std::invalid_argument("integer_points supports at most 4 clocks");
  std::vector<Point> out;
  for_each_box_point(z.dim(), box_max, [&](const Point& p) {
    if (contains(z, p)) out.push_back(p);
  });
  return out;
}

bool satisfies(const Guard& cs, const Point& p) {
  for (const auto& c : cs)
    if (!holds(p[c.x] - p[c.y], c.bound)) return false;
  return true;
}

bool feasible(size_t dim, const Guard& cs) {
  std::vector<Coord> coord(dim);
  for (size_t i = 0; i < dim; ++i) coord[i] = {i, 0};
  System s(dim);
  s.add_clock_constraints(cs, coord);
  return s.feasible();
}

bool subset(size_t dim, const Guard& b, const Guard& a) {
  if (!feasible(dim, b)) return true;
  for (const auto& c : a) {
    Guard t = b;
    // not (x - y ≺ k)  is  y - x ≺' -k with the strictness flipped
    t.push_back({c.y, c.x, Bound::make(-c.bound.value(), !c.bound.is_strict())});
    if (feasible(dim, t)) return false;
  }
  return true;
}

bool in_up(const Guard& z, const Point& p) {
  // p - d with d >= 0; unknown t = -d
  std::vector<Coord> coord(dim_of(p));
  coord[0] = {0, 0};
  for (size_t x = 1; x < p.size(); ++x) coord[x] = {1, p[x]};
  System s(2);
  s.add_clock_constraints(z, coord);
  s.add(1, 0, 0, false);
  return s.feasible();
}

bool in_down(const Guard& z, const Point& p) {
  std::vector<Coord> coord(dim_of(p));
  coord[0] = {0, 0};
  for (size_t x = 1; x < p.size(); ++x) coord[x] = {1, p[x]};
  System s(2);
  s.add_clock_constraints(z, coord);
  s.add(0, 1, 0, false);
  return s.feasible();
}

bool in_free(const Guard& z, ClockIndex x, const Point& p) {
  auto coord = fixed_coords(p);
  coord[x] = {1, 0};
  System s(2);
  s.add_clock_constraints(z, coord);
  return s.feasible();
}

bool in_reset(const Guard& z, std::span<const ClockIndex> r, const Point& p) {
  auto coord = fixed_coords(p);
  size_t next = 1;
  for (ClockIndex x : r) {
    if (p[x] != 0) return false;
    if (coord[x].node == 0) coord[x] = {next++, 0};
  }
  System s(next);
  s.add_clock_constraints(z, coord);
  return s.feasible();
}

bool in_post(const Guard& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv,
             const Point& p) {
  if (!satisfies(inv, p)) return false;
  Guard zg = z;
  zg.insert(zg.end(), g.begin(), g.end());
  if (r.empty()) return in_up(zg, p);
  // after a reset every clock in r shares the elapsed delay
  const int64_t d = p[r[0]];
  for (ClockIndex x : r)
    if (p[x] != d) return false;
  Point q = p;
  for (size_t x = 1; x < q.size(); ++x) {
    q[x] -= d;
    if (q[x] < 0) return false;
  }
  return in_reset(zg, r, q);
}

bool in_pre(const Guard& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv,
            const Point& p) {
  if (!satisfies(g, p)) return false;
  std::vector<Coord> coord(dim_of(p));
  coord[0] = {0, 0};
  for (size_t x = 1; x < p.size(); ++x) coord[x] = {1, p[x]};
  for (ClockIndex x : r) coord[x] = {1, 0};
  Guard zi = z;
  zi.insert(zi.end(), inv.begin(), inv.end());
  System s(2);
  s.add_clock_constraints(zi, coord);
  s.add(0, 1, 0, false);
  return s.feasible();
}

Guard constraints_of(const Dbm& d) {
  Guard out;
  for (ClockIndex x = 0; x < d.dim(); ++x)
    for (ClockIndex y = 0; y < d.dim(); ++y)
      if (x != y && !d.at(x, y).is_inf()) out.push_back({x, y, d.at(x, y)});
  return out;
}

std::optional<bool> zone_reach_baseline(const TimedAutomaton& ta, size_t max_nodes) {
  struct State {
    LocIndex loc;
    Dbm zone;
  };
  std::vector<std::vector<Dbm>> passed(ta.locations.size());
  std::vector<State> wait{{ta.initial, initial_zone(ta)}};
  std::vector<std::vector<size_t>> out(ta.locations.size());
  for (LocIndex l = 0; l < ta.locations.size(); ++l) out[l] = ta.out_edges(l);
  size_t nodes = 0;
  while (!wait.empty()) {
    State s = std::move(wait.back());
    wait.pop_back();
    if (s.zone.is_empty()) continue;
    if (s.loc == ta.target) return true;
    auto& here = passed[s.loc];
    if (std::any_of(here.begin(), here.end(), [&](const Dbm& p) { return includes(p, s.zone); }))
      continue;
    std::erase_if(here, [&](const Dbm& p) { return includes(s.zone, p); });
    here.push_back(s.zone);
    if (++nodes > max_nodes) return std::nullopt;
    for (size_t e : out[s.loc]) {
      Dbm z = post(ta, s.zone, e);
      if (!z.is_empty()) wait.push_back({ta.edges[e].dst, std::move(z)});
    }
  }
  return false;
}

TimedAutomaton generate_model(const GeneratorConfig& cfg) {
  if (cfg.max_locations < 1 || cfg.max_clocks < 1 || cfg.max_edges < 1 || cfg.max_constant < 1)
    throw std::invalid_argument("generator bounds must be at least 1");
  std::mt19937_64 rng(cfg.seed);
  auto uni = [&](int64_t lo, int64_t hi) { return std::uniform_int_distribution<int64_t>(lo, hi)(rng); };
  auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
  const int64_t K = cfg.max_constant;

  TimedAutomaton ta;
  const auto nclocks = static_cast<size_t>(uni(1, cfg.max_clocks));
  static const char* kNames[] = {"x", "y", "z", "w"};
  for (size_t i = 0; i < nclocks; ++i)
    ta.clocks.push_back(i < 4 ? kNames[i] : "c" + std::to_string(i));
  const auto nlocs = static_cast<size_t>(uni(std::min<int64_t>(2, cfg.max_locations), cfg.max_locations));
  for (size_t l = 0; l < nlocs; ++l) {
    Location loc{"l" + std::to_string(l), {}};
    for (ClockIndex x = 1; x <= nclocks; ++x)
      loc.invariant.push_back({x, 0, Bound::make(uni(1, K), coin(0.3))});
    ta.locations.push_back(std::move(loc));
  }
  ta.initial = 0;
  ta.target = static_cast<LocIndex>(nlocs > 1 ? uni(1, static_cast<int64_t>(nlocs) - 1) : 0);

  auto atom = [&]() -> AtomicGuard {
    const bool strict = coin(0.5);
    if (nclocks >= 2 && coin(cfg.diagonal_density)) {
      auto x = static_cast<ClockIndex>(uni(1, static_cast<int64_t>(nclocks)));
      auto y = static_cast<ClockIndex>(uni(1, static_cast<int64_t>(nclocks) - 1));
      if (y >= x) ++y;
      return {x, y, Bound::make(uni(-K, K), strict)};
    }
    auto x = static_cast<ClockIndex>(uni(1, static_cast<int64_t>(nclocks)));
    const int64_t k = uni(0, K);
    if (coin(0.5)) return {x, 0, Bound::make(k, strict)};
    return {0, x, Bound::make(-k, strict)};
  };

  const auto nedges = static_cast<size_t>(uni(1, cfg.max_edges));
  for (size_t i = 0; i < nedges; ++i) {
    Edge e;
    e.src = static_cast<LocIndex>(uni(0, static_cast<int64_t>(nlocs) - 1));
    e.dst = static_cast<LocIndex>(uni(0, static_cast<int64_t>(nlocs) - 1));
    for (int a = 0; a < 2; ++a)
      if (coin(cfg.guard_density)) e.guard.push_back(atom());
    for (ClockIndex x = 1; x <= nclocks; ++x)
      if (coin(cfg.reset_density)) e.resets.push_back(x);
    ta.edges.push_back(std::move(e));
  }
  return ta;
}

}  // namespace tacheck::oracle
