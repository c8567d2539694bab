#pragma once

#include <algorithm>
#include <random>

#include "tacheck/dbm.hpp"

namespace testsupport {

using tacheck::AtomicGuard;
using tacheck::Bound;
using tacheck::ClockIndex;
using tacheck::Dbm;
using tacheck::Guard;

inline int64_t uni(std::mt19937_64& rng, int64_t lo, int64_t hi) {
  return std::uniform_int_distribution<int64_t>(lo, hi)(rng);
}

// One random difference constraint with |constant| <= maxc.
inline AtomicGuard random_atom(std::mt19937_64& rng, size_t dim, int64_t maxc) {
  const bool strict = uni(rng, 0, 1) == 1;
  const auto x = static_cast<ClockIndex>(uni(rng, 1, static_cast<int64_t>(dim) - 1));
  switch (uni(rng, 0, dim > 2 ? 2 : 1)) {
    case 0:
      return {x, 0, Bound::make(uni(rng, 0, maxc), strict)};
    case 1:
      return {0, x, Bound::make(-uni(rng, 0, maxc), strict)};
    default: {
      auto y = static_cast<ClockIndex>(uni(rng, 1, static_cast<int64_t>(dim) - 2));
      if (y >= x) ++y;
      return {x, y, Bound::make(uni(rng, -maxc, maxc), strict)};
    }
  }
}

inline Guard random_guard(std::mt19937_64& rng, size_t dim, int64_t maxc, size_t lo, size_t hi) {
  Guard g;
  const auto n = static_cast<size_t>(uni(rng, static_cast<int64_t>(lo), static_cast<int64_t>(hi)));
  for (size_t i = 0; i < n; ++i) g.push_back(random_atom(rng, dim, maxc));
  return g;
}

// Upper bounds only, as allowed for invariants.
inline Guard random_invariant(std::mt19937_64& rng, size_t dim, int64_t maxc) {
  Guard g;
  for (ClockIndex x = 1; x < dim; ++x)
    if (uni(rng, 0, 2) == 0) g.push_back({x, 0, Bound::make(uni(rng, 0, maxc), uni(rng, 0, 1) == 1)});
  return g;
}

inline std::vector<ClockIndex> random_resets(std::mt19937_64& rng, size_t dim) {
  std::vector<ClockIndex> r;
  for (ClockIndex x = 1; x < dim; ++x)
    if (uni(rng, 0, 2) == 0) r.push_back(x);
  return r;
}

// A non-empty canonical zone and the constraint list it came from.
struct RandomZone {
  Guard cs;
  Dbm zone;
};

inline RandomZone random_zone(std::mt19937_64& rng, size_t dim, int64_t maxc) {
  for (;;) {
    Guard g = random_guard(rng, dim, maxc, 1, dim + 2);
    Dbm z = Dbm::from_guard(dim, g);
    if (!z.is_empty()) return {g, z};
  }
}

inline int64_t max_abs_constant(const Guard& g) {
  int64_t m = 0;
  for (const auto& a : g) m = std::max(m, a.bound.value() < 0 ? -a.bound.value() : a.bound.value());
  return m;
}

}  // namespace testsupport
