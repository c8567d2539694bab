#include "tacheck/domain.hpp"

#include <algorithm>
#include <sstream>

namespace tacheck {

std::string to_string(DomainMode m) {
  switch (m) {
    case DomainMode::global: return "global";
    case DomainMode::per_node: return "per-node";
    case DomainMode::per_location: return "per-location";
  }
  return "?";
}

std::optional<DomainMode> parse_domain_mode(std::string_view s) {
  if (s == "global") return DomainMode::global;
  if (s == "per-node" || s == "per_node") return DomainMode::per_node;
  if (s == "per-location" || s == "per_location") return DomainMode::per_location;
  return std::nullopt;
}

namespace {
const std::vector<Bound> kNone;
}

AbstractDomain::AbstractDomain(size_t dim) : dim_(dim), table_(dim * dim) {}

const std::vector<Bound>& AbstractDomain::at(ClockIndex x, ClockIndex y) const {
  const auto& r = table_[x * dim_ + y];
  return r ? *r : kNone;
}

bool AbstractDomain::contains(ClockIndex x, ClockIndex y, Bound b) const {
  const auto& v = at(x, y);
  return std::binary_search(v.begin(), v.end(), b);
}

size_t AbstractDomain::size() const {
  size_t n = 0;
  for (ClockIndex x = 0; x < dim_; ++x)
    for (ClockIndex y = x + 1; y < dim_; ++y) n += at(x, y).size();
  return n;
}

AbstractDomain AbstractDomain::refined(std::span<const AtomicGuard> cs, bool* changed) const {
  AbstractDomain out = *this;
  bool any = false;
  auto insert = [&](ClockIndex x, ClockIndex y, Bound b) {
    const auto& cur = out.at(x, y);
    auto it = std::lower_bound(cur.begin(), cur.end(), b);
    if (it != cur.end() && *it == b) return;
    auto row = std::make_shared<std::vector<Bound>>(cur);
    row->insert(row->begin() + (it - cur.begin()), b);
    out.table_[x * dim_ + y] = std::move(row);
    any = true;
  };
  for (const auto& c : cs) {
    if (c.x == c.y || c.bound.is_inf()) continue;
    insert(c.x, c.y, c.bound);
    insert(c.y, c.x, c.bound.reflect());
  }
  if (changed) *changed = any;
  return out;
}

std::string AbstractDomain::dump(const std::vector<std::string>& clocks) const {
  auto name = [&](ClockIndex c) { return c == 0 ? std::string("0") : clocks.at(c - 1); };
  std::ostringstream os;
  for (ClockIndex x = 0; x < dim_; ++x) {
    for (ClockIndex y = x + 1; y < dim_; ++y) {
      const auto& v = at(x, y);
      if (v.empty()) continue;
      os << name(x) << "-" << name(y) << ":";
      for (Bound b : v) os << " " << b.str();
      os << "\n";
    }
  }
  return os.str();
}

bool operator==(const AbstractDomain& a, const AbstractDomain& b) {
  if (a.dim_ != b.dim_) return false;
  for (ClockIndex x = 0; x < a.dim_; ++x)
    for (ClockIndex y = 0; y < a.dim_; ++y)
      if (a.at(x, y) != b.at(x, y)) return false;
  return true;
}

Dbm alpha(const AbstractDomain& d, const Dbm& z) {
  if (z.is_empty()) return z;
  Dbm c = canonical(z);
  if (c.is_empty()) return c;
  const size_t n = c.dim();
  Dbm r(n);
  for (ClockIndex x = 0; x < n; ++x) {
    for (ClockIndex y = 0; y < n; ++y) {
      if (x == y) continue;
      const auto& v = d.at(x, y);
      auto it = std::lower_bound(v.begin(), v.end(), c.at(x, y));
      Bound b = it == v.end() ? Bound::top() : *it;
      if (x == 0) b = min(b, Bound::zero());  // clocks stay non-negative
      r.set(x, y, b);
    }
  }
  return r.canonicalize();
}

AbstractDomain initial_domain(const TimedAutomaton& ta) {
  Guard all;
  for (const auto& l : ta.locations) all.insert(all.end(), l.invariant.begin(), l.invariant.end());
  for (const auto& e : ta.edges) all.insert(all.end(), e.guard.begin(), e.guard.end());
  return AbstractDomain(ta.dim()).refined(all);
}

}  // namespace tacheck
