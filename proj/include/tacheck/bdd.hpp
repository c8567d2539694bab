#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tacheck {

using VarId = uint32_t;

// Handle into a BddManager. Equal handles denote equal functions.
struct Bdd {
  uint32_t id = 0;
  friend bool operator==(Bdd a, Bdd b) { return a.id == b.id; }
  friend bool operator<(Bdd a, Bdd b) { return a.id < b.id; }
};

struct BddBudgetExceeded : std::runtime_error {
  BddBudgetExceeded() : std::runtime_error("BDD node budget exhausted") {}
};

// Variable order is the index order. The first loc_bits variables are plain;
// after them predicate i owns the pair (base + 2i, base + 2i + 1), unprimed
// then primed. Predicates can be appended later without disturbing existing
// diagrams since they sit at the bottom of the order.
class BddManager {
 public:
  explicit BddManager(unsigned loc_bits = 0, unsigned predicates = 0, size_t max_nodes = size_t{1} << 24,
                      unsigned cache_bits = 18);

  unsigned num_vars() const { return loc_bits_ + 2 * predicates_; }
  unsigned loc_bits() const { return loc_bits_; }
  unsigned predicates() const { return predicates_; }
  void add_predicates(unsigned n) { predicates_ += n; }
  VarId unprimed(unsigned pred) const { return loc_bits_ + 2 * pred; }
  VarId primed(unsigned pred) const { return loc_bits_ + 2 * pred + 1; }
  bool is_primed(VarId v) const { return v >= loc_bits_ && (v - loc_bits_) % 2 == 1; }

  Bdd mk_true() const { return {1}; }
  Bdd mk_false() const { return {0}; }
  Bdd mk_var(VarId v);
  Bdd mk_nvar(VarId v);

  Bdd not_(Bdd f);
  Bdd and_(Bdd f, Bdd g);
  Bdd or_(Bdd f, Bdd g);
  Bdd xor_(Bdd f, Bdd g);
  Bdd implies(Bdd f, Bdd g) { return or_(not_(f), g); }
  Bdd iff(Bdd f, Bdd g) { return not_(xor_(f, g)); }
  Bdd ite(Bdd f, Bdd g, Bdd h);

  Bdd cube(std::span<const VarId> vars);
  Bdd exists(Bdd f, std::span<const VarId> vars) { return exists(f, cube(vars)); }
  Bdd exists(Bdd f, Bdd cube);
  Bdd forall(Bdd f, std::span<const VarId> vars) { return not_(exists(not_(f), vars)); }
  // exists cube. f and g, without building the conjunction.
  Bdd and_exists(Bdd f, Bdd g, Bdd cube);

  // Substitute map[v] for every v in the support (identity where map[v] == v).
  Bdd rename(Bdd f, const std::vector<VarId>& map);
  // p -> p' on predicate variables; throws std::invalid_argument when f
  // mentions a primed variable (resp. unprimed one for rename_unprime).
  Bdd rename_prime(Bdd f);
  Bdd rename_unprime(Bdd f);

  Bdd cofactor(Bdd f, VarId v, bool value);
  bool eval(Bdd f, const std::vector<bool>& assignment) const;
  std::vector<VarId> support(Bdd f) const;

  // Satisfying assignments over `support` (sorted ascending, covering f's
  // support), in lexicographic order with false before true. The callback
  // returns false to stop early.
  void for_each_minterm(Bdd f, std::span<const VarId> support,
                        const std::function<bool(const std::vector<bool>&)>& cb) const;
  std::vector<std::vector<bool>> minterms(Bdd f, std::span<const VarId> support) const;
  double count(Bdd f, std::span<const VarId> support) const;

  bool is_const(Bdd f) const { return f.id < 2; }
  VarId top_var(Bdd f) const { return nodes_[f.id].var; }
  Bdd low(Bdd f) const { return {nodes_[f.id].lo}; }
  Bdd high(Bdd f) const { return {nodes_[f.id].hi}; }

  size_t live_nodes() const { return live_; }
  size_t dag_size(Bdd f) const;
  std::string dot(Bdd f, const std::function<std::string(VarId)>& name = {}) const;

  // Mark-and-sweep; handles not reachable from roots become invalid.
  void gc(std::span<const Bdd> roots);

 private:
  static constexpr uint32_t kTermVar = UINT32_MAX;
  static constexpr uint32_t kNil = UINT32_MAX;
  struct Node {
    uint32_t var, lo, hi, next;
  };
  struct CacheEntry {
    uint32_t op = 0, a = 0, b = 0, c = 0, r = 0;
    bool valid = false;
  };
  enum Op : uint32_t { kAnd = 1, kOr, kXor, kIte, kExists, kAndExists };

  uint32_t make(uint32_t var, uint32_t lo, uint32_t hi);
  uint32_t apply(Op op, uint32_t f, uint32_t g);
  uint32_t ite_rec(uint32_t f, uint32_t g, uint32_t h);
  uint32_t exists_rec(uint32_t f, uint32_t cube);
  uint32_t and_exists_rec(uint32_t f, uint32_t g, uint32_t cube);
  bool cache_get(uint32_t op, uint32_t a, uint32_t b, uint32_t c, uint32_t& r) const;
  void cache_put(uint32_t op, uint32_t a, uint32_t b, uint32_t c, uint32_t r);
  void grow_table();
  size_t bucket(uint32_t var, uint32_t lo, uint32_t hi) const;
  uint32_t var_of(uint32_t f) const { return nodes_[f].var; }

  unsigned loc_bits_, predicates_;
  size_t max_nodes_;
  std::vector<Node> nodes_;
  std::vector<uint32_t> table_;
  std::vector<CacheEntry> cache_;
  uint32_t free_ = kNil;
  size_t live_ = 0;
};

}  // namespace tacheck
