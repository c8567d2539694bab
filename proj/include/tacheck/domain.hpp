#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tacheck/automaton.hpp"
#include "tacheck/dbm.hpp"

namespace tacheck {

enum class DomainMode { global, per_node, per_location };

std::string to_string(DomainMode m);
std::optional<DomainMode> parse_domain_mode(std::string_view s);

// Per ordered clock pair, a sorted set of allowed bounds. Adding x - y ≺ k also
// adds its reflection to (y, x), so D(y,x) always mirrors D(x,y). Pairs with
// x < y in declaration order (clock 0 first) are the materialized side.
// Values are persistent: refinement returns a new domain sharing untouched rows.
class AbstractDomain {
 public:
  AbstractDomain() = default;
  explicit AbstractDomain(size_t dim);

  size_t dim() const { return dim_; }
  const std::vector<Bound>& at(ClockIndex x, ClockIndex y) const;
  bool contains(ClockIndex x, ClockIndex y, Bound b) const;
  // Number of constraints on the materialized side.
  size_t size() const;

  AbstractDomain refined(std::span<const AtomicGuard> cs, bool* changed = nullptr) const;

  // One line per materialized pair: "x-y: (k,<=) (m,<)".
  std::string dump(const std::vector<std::string>& clocks) const;

  friend bool operator==(const AbstractDomain& a, const AbstractDomain& b);

 private:
  using Row = std::shared_ptr<const std::vector<Bound>>;
  size_t dim_ = 0;
  std::vector<Row> table_;
};

// Smallest D-definable zone containing z.
Dbm alpha(const AbstractDomain& d, const Dbm& z);

// All guard and invariant constraints of ta.
AbstractDomain initial_domain(const TimedAutomaton& ta);

}  // namespace tacheck
