#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tacheck/bound.hpp"

namespace tacheck {

using ClockIndex = uint32_t;  // 0 is the reference clock

// x - y < k or x - y <= k. Lower bounds and > / >= are normalized by the parser.
struct AtomicGuard {
  ClockIndex x = 0;
  ClockIndex y = 0;
  Bound bound;
  friend bool operator==(const AtomicGuard&, const AtomicGuard&) = default;
};
using Guard = std::vector<AtomicGuard>;

enum class DbmStatus { raw, canonical, empty };

// Entry (x, y) bounds x - y. Valuations are non-negative, so every constructor
// starts from the universe zone which carries 0 - x <= 0.
class Dbm {
 public:
  Dbm() = default;
  explicit Dbm(size_t dim);  // universe, canonical

  static Dbm universe(size_t dim) { return Dbm(dim); }
  static Dbm zero(size_t dim);  // the single valuation 0
  static Dbm empty(size_t dim);
  static Dbm from_guard(size_t dim, const Guard& g);  // canonical

  size_t dim() const { return dim_; }
  DbmStatus status() const { return status_; }
  bool is_empty() const { return status_ == DbmStatus::empty; }
  bool is_canonical() const { return status_ == DbmStatus::canonical; }

  Bound at(size_t x, size_t y) const { return m_[x * dim_ + y]; }
  void set(size_t x, size_t y, Bound b);
  // Tighten (x, y) to min(old, b); leaves the matrix raw.
  void constrain(size_t x, size_t y, Bound b);
  void constrain(const Guard& g);

  Dbm& canonicalize();

  // Debug form: rows separated by newlines, tokens (k,<) (k,<=) inf.
  std::string str() const;

  friend bool operator==(const Dbm& a, const Dbm& b);

 private:
  size_t dim_ = 0;
  DbmStatus status_ = DbmStatus::empty;
  std::vector<Bound> m_;
};

Dbm canonical(Dbm d);
Dbm intersect(const Dbm& a, const Dbm& b);
Dbm intersect(const Dbm& a, const Guard& g);
Dbm up(const Dbm& d);
Dbm down(const Dbm& d);
Dbm reset(const Dbm& d, ClockIndex x);
Dbm reset(const Dbm& d, std::span<const ClockIndex> r);
Dbm free(const Dbm& d, ClockIndex x);
// true iff [[b]] is a subset of [[a]]
bool includes(const Dbm& a, const Dbm& b);
bool intersects(const Dbm& a, const Dbm& b);

// inv_dst ∩ up(reset_R(z ∩ g))
Dbm post_edge(const Dbm& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv_dst);
// Exact predecessors of post_edge: g ∩ free_R(down(inv_dst ∩ z) ∩ R=0).
Dbm pre_edge(const Dbm& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv_dst);

// A negative cycle of a raw matrix as clock sequence s1..sm (edges s_i -> s_{i+1},
// closing sm -> s1). Empty if none.
std::vector<ClockIndex> negative_cycle(const Dbm& raw);

}  // namespace tacheck
