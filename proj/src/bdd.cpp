#include "tacheck/bdd.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

namespace tacheck {

namespace {
constexpr uint32_t kFreed = UINT32_MAX - 1;

inline size_t mix(uint64_t a, uint64_t b, uint64_t c, uint64_t d = 0) {
  uint64_t h = a * 0x9E3779B97F4A7C15ull;
  h ^= b + 0x7F4A7C159E3779B9ull + (h << 6) + (h >> 2);
  h ^= c * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
  h ^= d * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
  return static_cast<size_t>(h ^ (h >> 31));
}
}  // namespace

BddManager::BddManager(unsigned loc_bits, unsigned predicates, size_t max_nodes, unsigned cache_bits)
    : loc_bits_(loc_bits), predicates_(predicates), max_nodes_(max_nodes) {
  nodes_.push_back({kTermVar, 0, 0, kNil});
  nodes_.push_back({kTermVar, 1, 1, kNil});
  table_.assign(size_t{1} << 12, kNil);
  cache_.resize(size_t{1} << cache_bits);
}

size_t BddManager::bucket(uint32_t var, uint32_t lo, uint32_t hi) const {
  return mix(var, lo, hi) & (table_.size() - 1);
}

void BddManager::grow_table() {
  table_.assign(table_.size() * 2, kNil);
  for (uint32_t i = 2; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.var == kFreed) continue;
    const size_t b = bucket(n.var, n.lo, n.hi);
    n.next = table_[b];
    table_[b] = i;
  }
}

uint32_t BddManager::make(uint32_t var, uint32_t lo, uint32_t hi) {
  if (lo == hi) return lo;
  size_t b = bucket(var, lo, hi);
  for (uint32_t i = table_[b]; i != kNil; i = nodes_[i].next) {
    const auto& n = nodes_[i];
    if (n.var == var && n.lo == lo && n.hi == hi) return i;
  }
  if (live_ >= max_nodes_) throw BddBudgetExceeded();
  uint32_t id;
  if (free_ != kNil) {
    id = free_;
    free_ = nodes_[id].next;
    nodes_[id] = {var, lo, hi, kNil};
  } else {
    id = static_cast<uint32_t>(nodes_.size());
    nodes_.push_back({var, lo, hi, kNil});
  }
  ++live_;
  if (live_ > table_.size()) {
    grow_table();
  } else {
    nodes_[id].next = table_[b];
    table_[b] = id;
  }
  return id;
}

bool BddManager::cache_get(uint32_t op, uint32_t a, uint32_t b, uint32_t c, uint32_t& r) const {
  const auto& e = cache_[mix(op, a, b, c) & (cache_.size() - 1)];
  if (e.valid && e.op == op && e.a == a && e.b == b && e.c == c) {
    r = e.r;
    return true;
  }
  return false;
}

void BddManager::cache_put(uint32_t op, uint32_t a, uint32_t b, uint32_t c, uint32_t r) {
  cache_[mix(op, a, b, c) & (cache_.size() - 1)] = {op, a, b, c, r, true};
}

Bdd BddManager::mk_var(VarId v) {
  if (v >= num_vars()) throw std::out_of_range("mk_var: unknown variable");
  return {make(v, 0, 1)};
}

Bdd BddManager::mk_nvar(VarId v) {
  if (v >= num_vars()) throw std::out_of_range("mk_nvar: unknown variable");
  return {make(v, 1, 0)};
}

uint32_t BddManager::apply(Op op, uint32_t f, uint32_t g) {
  switch (op) {
    case kAnd:
      if (f == 0 || g == 0) return 0;
      if (f == 1) return g;
      if (g == 1 || f == g) return f;
      break;
    case kOr:
      if (f == 1 || g == 1) return 1;
      if (f == 0) return g;
      if (g == 0 || f == g) return f;
      break;
    case kXor:
      if (f == 0) return g;
      if (g == 0) return f;
      if (f == g) return 0;
      if (f == 1 && g == 1) return 0;
      break;
    default:
      break;
  }
  if (f > g) std::swap(f, g);
  uint32_t r;
  if (cache_get(op, f, g, 0, r)) return r;
  const uint32_t vf = var_of(f), vg = var_of(g);
  const uint32_t v = std::min(vf, vg);
  const uint32_t f0 = vf == v ? nodes_[f].lo : f, f1 = vf == v ? nodes_[f].hi : f;
  const uint32_t g0 = vg == v ? nodes_[g].lo : g, g1 = vg == v ? nodes_[g].hi : g;
  const uint32_t lo = apply(op, f0, g0);
  const uint32_t hi = apply(op, f1, g1);
  r = make(v, lo, hi);
  cache_put(op, f, g, 0, r);
  return r;
}

Bdd BddManager::not_(Bdd f) { return {apply(kXor, f.id, 1)}; }
Bdd BddManager::and_(Bdd f, Bdd g) { return {apply(kAnd, f.id, g.id)}; }
Bdd BddManager::or_(Bdd f, Bdd g) { return {apply(kOr, f.id, g.id)}; }
Bdd BddManager::xor_(Bdd f, Bdd g) { return {apply(kXor, f.id, g.id)}; }

uint32_t BddManager::ite_rec(uint32_t f, uint32_t g, uint32_t h) {
  if (f == 1) return g;
  if (f == 0) return h;
  if (g == h) return g;
  if (g == 1 && h == 0) return f;
  if (g == 0 && h == 1) return apply(kXor, f, 1);
  if (g == 1) return apply(kOr, f, h);
  if (h == 0) return apply(kAnd, f, g);
  uint32_t r;
  if (cache_get(kIte, f, g, h, r)) return r;
  const uint32_t v = std::min({var_of(f), var_of(g), var_of(h)});
  auto co = [&](uint32_t x, bool hi) { return var_of(x) == v ? (hi ? nodes_[x].hi : nodes_[x].lo) : x; };
  const uint32_t f0 = co(f, false), f1 = co(f, true), g0 = co(g, false), g1 = co(g, true);
  const uint32_t h0 = co(h, false), h1 = co(h, true);
  const uint32_t lo = ite_rec(f0, g0, h0);
  const uint32_t hi = ite_rec(f1, g1, h1);
  r = make(v, lo, hi);
  cache_put(kIte, f, g, h, r);
  return r;
}

Bdd BddManager::ite(Bdd f, Bdd g, Bdd h) { return {ite_rec(f.id, g.id, h.id)}; }

Bdd BddManager::cube(std::span<const VarId> vars) {
  std::vector<VarId> vs(vars.begin(), vars.end());
  std::sort(vs.begin(), vs.end(), std::greater<>());
  uint32_t r = 1;
  for (VarId v : vs) {
    if (v >= num_vars()) throw std::out_of_range("cube: unknown variable");
    r = make(v, 0, r);
  }
  return {r};
}

uint32_t BddManager::exists_rec(uint32_t f, uint32_t c) {
  if (f < 2) return f;
  while (c != 1 && var_of(c) < var_of(f)) c = nodes_[c].hi;
  if (c == 1) return f;
  uint32_t r;
  if (cache_get(kExists, f, c, 0, r)) return r;
  const uint32_t v = var_of(f), lo = nodes_[f].lo, hi = nodes_[f].hi;
  if (var_of(c) == v) {
    const uint32_t rest = nodes_[c].hi;
    const uint32_t r0 = exists_rec(lo, rest);
    r = r0 == 1 ? 1 : apply(kOr, r0, exists_rec(hi, rest));
  } else {
    const uint32_t r0 = exists_rec(lo, c);
    const uint32_t r1 = exists_rec(hi, c);
    r = make(v, r0, r1);
  }
  cache_put(kExists, f, c, 0, r);
  return r;
}

Bdd BddManager::exists(Bdd f, Bdd c) { return {exists_rec(f.id, c.id)}; }

uint32_t BddManager::and_exists_rec(uint32_t f, uint32_t g, uint32_t c) {
  if (f == 0 || g == 0) return 0;
  if (f == 1 && g == 1) return 1;
  if (f == 1) return exists_rec(g, c);
  if (g == 1 || f == g) return exists_rec(f, c);
  if (f > g) std::swap(f, g);
  const uint32_t v = std::min(var_of(f), var_of(g));
  while (c != 1 && var_of(c) < v) c = nodes_[c].hi;
  if (c == 1) return apply(kAnd, f, g);
  uint32_t r;
  if (cache_get(kAndExists, f, g, c, r)) return r;
  const uint32_t f0 = var_of(f) == v ? nodes_[f].lo : f, f1 = var_of(f) == v ? nodes_[f].hi : f;
  const uint32_t g0 = var_of(g) == v ? nodes_[g].lo : g, g1 = var_of(g) == v ? nodes_[g].hi : g;
  if (var_of(c) == v) {
    const uint32_t rest = nodes_[c].hi;
    const uint32_t r0 = and_exists_rec(f0, g0, rest);
    r = r0 == 1 ? 1 : apply(kOr, r0, and_exists_rec(f1, g1, rest));
  } else {
    const uint32_t r0 = and_exists_rec(f0, g0, c);
    const uint32_t r1 = and_exists_rec(f1, g1, c);
    r = make(v, r0, r1);
  }
  cache_put(kAndExists, f, g, c, r);
  return r;
}

Bdd BddManager::and_exists(Bdd f, Bdd g, Bdd c) { return {and_exists_rec(f.id, g.id, c.id)}; }

Bdd BddManager::rename(Bdd f, const std::vector<VarId>& map) {
  std::unordered_map<uint32_t, uint32_t> memo;
  auto target = [&](VarId v) { return v < map.size() ? map[v] : v; };
  auto rec = [&](auto&& self, uint32_t x) -> uint32_t {
    if (x < 2) return x;
    if (auto it = memo.find(x); it != memo.end()) return it->second;
    const uint32_t v = var_of(x), lo0 = nodes_[x].lo, hi0 = nodes_[x].hi;
    const uint32_t lo = self(self, lo0);
    const uint32_t hi = self(self, hi0);
    const VarId t = target(v);
    if (t >= num_vars()) throw std::out_of_range("rename: unknown variable");
    uint32_t r;
    if (t < var_of(lo) && t < var_of(hi))
      r = make(t, lo, hi);
    else
      r = ite_rec(make(t, 0, 1), hi, lo);
    memo.emplace(x, r);
    return r;
  };
  return {rec(rec, f.id)};
}

Bdd BddManager::rename_prime(Bdd f) {
  std::vector<VarId> map(num_vars());
  for (VarId v = 0; v < num_vars(); ++v) map[v] = v;
  for (VarId v : support(f)) {
    if (v < loc_bits_) continue;
    if (is_primed(v)) throw std::invalid_argument("rename_prime: formula mentions a primed variable");
    map[v] = v + 1;
  }
  return rename(f, map);
}

Bdd BddManager::rename_unprime(Bdd f) {
  std::vector<VarId> map(num_vars());
  for (VarId v = 0; v < num_vars(); ++v) map[v] = v;
  for (VarId v : support(f)) {
    if (v < loc_bits_) continue;
    if (!is_primed(v)) throw std::invalid_argument("rename_unprime: formula mentions an unprimed variable");
    map[v] = v - 1;
  }
  return rename(f, map);
}

Bdd BddManager::cofactor(Bdd f, VarId v, bool value) {
  const VarId vs[] = {v};
  return exists(and_(f, value ? mk_var(v) : mk_nvar(v)), vs);
}

bool BddManager::eval(Bdd f, const std::vector<bool>& a) const {
  uint32_t x = f.id;
  while (x >= 2) x = a.at(var_of(x)) ? nodes_[x].hi : nodes_[x].lo;
  return x == 1;
}

std::vector<VarId> BddManager::support(Bdd f) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<char> vars(num_vars(), 0);
  std::vector<uint32_t> stack{f.id};
  while (!stack.empty()) {
    const uint32_t x = stack.back();
    stack.pop_back();
    if (x < 2 || seen[x]) continue;
    seen[x] = 1;
    vars[var_of(x)] = 1;
    stack.push_back(nodes_[x].lo);
    stack.push_back(nodes_[x].hi);
  }
  std::vector<VarId> out;
  for (VarId v = 0; v < vars.size(); ++v)
    if (vars[v]) out.push_back(v);
  return out;
}

void BddManager::for_each_minterm(Bdd f, std::span<const VarId> support,
                                  const std::function<bool(const std::vector<bool>&)>& cb) const {
  std::vector<bool> cur(support.size(), false);
  auto rec = [&](auto&& self, uint32_t x, size_t i) -> bool {
    if (x == 0) return true;
    if (i == support.size()) {
      if (x != 1) throw std::invalid_argument("for_each_minterm: support does not cover the formula");
      return cb(cur);
    }
    if (x >= 2 && var_of(x) < support[i])
      throw std::invalid_argument("for_each_minterm: support does not cover the formula");
    const bool here = x >= 2 && var_of(x) == support[i];
    cur[i] = false;
    if (!self(self, here ? nodes_[x].lo : x, i + 1)) return false;
    cur[i] = true;
    return self(self, here ? nodes_[x].hi : x, i + 1);
  };
  rec(rec, f.id, 0);
}

std::vector<std::vector<bool>> BddManager::minterms(Bdd f, std::span<const VarId> support) const {
  std::vector<std::vector<bool>> out;
  for_each_minterm(f, support, [&](const std::vector<bool>& m) {
    out.push_back(m);
    return true;
  });
  return out;
}

double BddManager::count(Bdd f, std::span<const VarId> support) const {
  std::map<std::pair<uint32_t, size_t>, double> memo;
  auto rec = [&](auto&& self, uint32_t x, size_t i) -> double {
    if (x == 0) return 0;
    if (i == support.size()) return x == 1 ? 1 : 0;
    auto key = std::make_pair(x, i);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    double r;
    if (x >= 2 && var_of(x) == support[i])
      r = self(self, nodes_[x].lo, i + 1) + self(self, nodes_[x].hi, i + 1);
    else
      r = 2 * self(self, x, i + 1);
    memo.emplace(key, r);
    return r;
  };
  return rec(rec, f.id, 0);
}

size_t BddManager::dag_size(Bdd f) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<uint32_t> stack{f.id};
  size_t n = 0;
  while (!stack.empty()) {
    const uint32_t x = stack.back();
    stack.pop_back();
    if (seen[x]) continue;
    seen[x] = 1;
    ++n;
    if (x >= 2) {
      stack.push_back(nodes_[x].lo);
      stack.push_back(nodes_[x].hi);
    }
  }
  return n;
}

std::string BddManager::dot(Bdd f, const std::function<std::string(VarId)>& name) const {
  std::ostringstream os;
  os << "digraph bdd {\n  n0 [shape=box,label=\"0\"];\n  n1 [shape=box,label=\"1\"];\n";
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<uint32_t> stack{f.id};
  while (!stack.empty()) {
    const uint32_t x = stack.back();
    stack.pop_back();
    if (x < 2 || seen[x]) continue;
    seen[x] = 1;
    const auto& n = nodes_[x];
    os << "  n" << x << " [label=\"" << (name ? name(n.var) : "v" + std::to_string(n.var)) << "\"];\n";
    os << "  n" << x << " -> n" << n.lo << " [style=dashed];\n";
    os << "  n" << x << " -> n" << n.hi << ";\n";
    stack.push_back(n.lo);
    stack.push_back(n.hi);
  }
  os << "}\n";
  return os.str();
}

void BddManager::gc(std::span<const Bdd> roots) {
  std::vector<char> mark(nodes_.size(), 0);
  mark[0] = mark[1] = 1;
  std::vector<uint32_t> stack;
  for (Bdd r : roots) stack.push_back(r.id);
  while (!stack.empty()) {
    const uint32_t x = stack.back();
    stack.pop_back();
    if (mark[x]) continue;
    mark[x] = 1;
    stack.push_back(nodes_[x].lo);
    stack.push_back(nodes_[x].hi);
  }
  free_ = kNil;
  live_ = 0;
  std::fill(table_.begin(), table_.end(), kNil);
  for (uint32_t i = static_cast<uint32_t>(nodes_.size()); i-- > 2;) {
    auto& n = nodes_[i];
    if (!mark[i]) {
      n = {kFreed, 0, 0, free_};
      free_ = i;
      continue;
    }
    ++live_;
    const size_t b = bucket(n.var, n.lo, n.hi);
    n.next = table_[b];
    table_[b] = i;
  }
  for (auto& e : cache_) e.valid = false;
}

}  // namespace tacheck
