#pragma once

#include <optional>

#include "tacheck/dbm.hpp"

namespace tacheck {

// A zone given by a list of atomic constraints. For a pair (a, b) it contains
// a and is disjoint from b.
struct Interpolant {
  Guard constraints;

  Dbm zone(size_t dim) const { return Dbm::from_guard(dim, constraints); }
  // Distinct constrained pairs.
  size_t density() const;
};

// Non-top off-diagonal entries of the matrix as stored.
size_t density(const Dbm& d);

// Built from a negative cycle of min(a, b) shortened until it alternates
// between a-entries and b-entries. nullopt iff a and b intersect.
std::optional<Interpolant> interpolant_simple(const Dbm& a, const Dbm& b);

struct MinInterpolant {
  bool intersecting = true;
  unsigned k = 0;  // number of constraints of the smallest interpolant
  Interpolant interpolant;
};

// Layered shortest paths counting a-edges, O(|C|^4).
MinInterpolant minimal_interpolant(const Dbm& a, const Dbm& b);

}  // namespace tacheck
