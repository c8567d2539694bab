#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tacheck/dbm.hpp"

namespace tacheck {

using LocIndex = uint32_t;

struct Edge {
  LocIndex src = 0;
  LocIndex dst = 0;
  Guard guard;
  std::vector<ClockIndex> resets;
};

struct Location {
  std::string name;
  Guard invariant;
};

struct TimedAutomaton {
  std::vector<std::string> clocks;  // clock i+1 is clocks[i]
  std::vector<Location> locations;
  std::vector<Edge> edges;
  LocIndex initial = 0;
  LocIndex target = 0;

  size_t dim() const { return clocks.size() + 1; }
  std::string clock_name(ClockIndex c) const { return c == 0 ? "0" : clocks.at(c - 1); }
  // Edge indices leaving l, in declaration order.
  std::vector<size_t> out_edges(LocIndex l) const;
  int max_constant() const;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(size_t line, size_t column, const std::string& msg);
  size_t line() const { return line_; }
  size_t column() const { return column_; }

 private:
  size_t line_, column_;
};

TimedAutomaton parse_model(std::string_view text);
std::string emit_model(const TimedAutomaton& ta);
std::string format_guard(const TimedAutomaton& ta, const Guard& g);
std::string format_constraint(const TimedAutomaton& ta, const AtomicGuard& a);

// A path of edges starting at the initial location; delays are folded into post.
struct SymbolicTrace {
  std::vector<size_t> edges;
};

Dbm initial_zone(const TimedAutomaton& ta);  // 0↑ ∩ I(l0)
Dbm post(const TimedAutomaton& ta, const Dbm& z, size_t edge);
Dbm pre(const TimedAutomaton& ta, const Dbm& z, size_t edge);
bool well_formed(const TimedAutomaton& ta, const SymbolicTrace& t);

// Backward pre chain from the last location intersected with the initial zone;
// nullopt when the trace is spurious.
std::optional<Dbm> trace_feasible(const TimedAutomaton& ta, const SymbolicTrace& t);
// Forward zones C_0..C_n along the trace (C_0 is the initial zone).
std::vector<Dbm> forward_chain(const TimedAutomaton& ta, const SymbolicTrace& t);

}  // namespace tacheck
