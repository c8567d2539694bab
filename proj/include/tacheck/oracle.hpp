#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tacheck/automaton.hpp"
#include "tacheck/dbm.hpp"

// Ground truth for differential tests. Nothing here calls the DBM operations
// except where a Dbm is the object under inspection.
namespace tacheck::oracle {

// p[0] is the reference clock and always 0; coordinates are numerators over den.
using Point = std::vector<int64_t>;

bool contains(const Dbm& z, const Point& p, int64_t den = 1);
// Integer valuations of [[z]] inside [0, box_max]^|Clocks|; at most 4 clocks.
std::vector<Point> integer_points(const Dbm& z, unsigned box_max);

template <class F>
void for_each_box_point(size_t dim, unsigned box_max, F&& f) {
  Point p(dim, 0);
  for (;;) {
    f(static_cast<const Point&>(p));
    size_t i = 1;
    while (i < dim && p[i] == static_cast<int64_t>(box_max)) p[i++] = 0;
    if (i >= dim) return;
    ++p[i];
  }
}

// Set semantics over conjunctions of difference constraints, evaluated at
// integer points. Existentials are decided by a small negative-cycle search
// over the unknowns.
bool satisfies(const Guard& cs, const Point& p);
bool feasible(size_t dim, const Guard& cs);
bool subset(size_t dim, const Guard& b, const Guard& a);  // [[b]] ⊆ [[a]]
bool in_up(const Guard& z, const Point& p);
bool in_down(const Guard& z, const Point& p);
bool in_free(const Guard& z, ClockIndex x, const Point& p);
bool in_reset(const Guard& z, std::span<const ClockIndex> r, const Point& p);
bool in_post(const Guard& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv,
             const Point& p);
bool in_pre(const Guard& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv,
            const Point& p);

// Finite off-diagonal entries of a non-empty matrix as a constraint list.
Guard constraints_of(const Dbm& d);

// Forward zone graph with inclusion covering and no abstraction; nullopt when
// the node budget runs out.
std::optional<bool> zone_reach_baseline(const TimedAutomaton& ta, size_t max_nodes = 200000);

struct GeneratorConfig {
  unsigned max_locations = 5;
  unsigned max_clocks = 3;
  unsigned max_edges = 8;
  unsigned max_constant = 5;
  double guard_density = 0.6;   // chance of each extra guard atom
  double reset_density = 0.4;   // chance of resetting each clock on an edge
  double diagonal_density = 0.2;
  uint64_t seed = 0;
};

// Every location bounds every clock from above, which keeps the plain zone
// graph finite.
TimedAutomaton generate_model(const GeneratorConfig& cfg);

}  // namespace tacheck::oracle
