#include "tacheck/interpolation.hpp"

#include <algorithm>
#include <cassert>
#include <set>
#include <stdexcept>
#include <utility>

namespace tacheck {

size_t Interpolant::density() const {
  std::set<std::pair<ClockIndex, ClockIndex>> pairs;
  for (const auto& c : constraints)
    if (c.x != c.y && !c.bound.is_inf()) pairs.insert({c.x, c.y});
  return pairs.size();
}

size_t density(const Dbm& d) {
  if (d.is_empty()) return 0;
  size_t n = 0;
  for (ClockIndex x = 0; x < d.dim(); ++x)
    for (ClockIndex y = 0; y < d.dim(); ++y)
      if (x != y && !d.at(x, y).is_inf()) ++n;
  return n;
}

namespace {

struct Step {
  ClockIndex from, to;
  bool from_a;  // weight taken from a, otherwise from b
};

void check_inputs(const Dbm& a, const Dbm& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("interpolant: dimension mismatch");
  if (a.is_empty()) throw std::invalid_argument("interpolant: first zone is empty");
}

Interpolant from_steps(const Dbm& a, const std::vector<Step>& cycle) {
  Interpolant it;
  std::set<std::pair<ClockIndex, ClockIndex>> seen;
  for (const auto& s : cycle)
    if (s.from_a && seen.insert({s.from, s.to}).second) it.constraints.push_back({s.from, s.to, a.at(s.from, s.to)});
  return it;
}

}  // namespace

std::optional<Interpolant> interpolant_simple(const Dbm& a0, const Dbm& b0) {
  check_inputs(a0, b0);
  if (b0.is_empty()) return Interpolant{};
  const Dbm a = canonical(a0), b = canonical(b0);
  const size_t n = a.dim();
  Dbm m(n);
  for (ClockIndex x = 0; x < n; ++x)
    for (ClockIndex y = 0; y < n; ++y) m.set(x, y, min(a.at(x, y), b.at(x, y)));
  const auto cyc = negative_cycle(m);
  if (cyc.empty()) return std::nullopt;

  std::vector<Step> steps;
  for (size_t i = 0; i < cyc.size(); ++i) {
    const ClockIndex x = cyc[i], y = cyc[(i + 1) % cyc.size()];
    steps.push_back({x, y, a.at(x, y) < b.at(x, y)});
  }
  // Two consecutive steps from the same matrix collapse into one by canonicity.
  for (bool merged = true; merged && steps.size() > 2;) {
    merged = false;
    for (size_t i = 0; i < steps.size(); ++i) {
      const size_t j = (i + 1) % steps.size();
      if (steps[i].from_a != steps[j].from_a) continue;
      steps[i].to = steps[j].to;
      steps.erase(steps.begin() + static_cast<std::ptrdiff_t>(j));
      merged = true;
      break;
    }
  }
  for (size_t i = 0; i < steps.size(); ++i)
    assert(steps[i].from_a != steps[(i + 1) % steps.size()].from_a);
  return from_steps(a, steps);
}

MinInterpolant minimal_interpolant(const Dbm& a0, const Dbm& b0) {
  check_inputs(a0, b0);
  MinInterpolant res;
  if (b0.is_empty()) {
    res.intersecting = false;
    return res;
  }
  if (!intersect(a0, b0).is_empty()) return res;
  const Dbm a = canonical(a0), b = canonical(b0);
  const size_t n = a.dim();
  constexpr size_t kDirect = SIZE_MAX;
  auto idx = [n](size_t x, size_t y) { return x * n + y; };
  auto w = [&](bool from_a, size_t x, size_t y) { return from_a ? a.at(x, y) : b.at(x, y); };

  // Layer 0: paths made only of b-steps where b is at least as tight as a.
  std::vector<Bound> n0(n * n, Bound::top());
  std::vector<size_t> via0(n * n, kDirect);
  for (size_t x = 0; x < n; ++x)
    for (size_t y = 0; y < n; ++y)
      if (b.at(x, y) <= a.at(x, y)) n0[idx(x, y)] = b.at(x, y);
  for (size_t k = 0; k < n; ++k)
    for (size_t x = 0; x < n; ++x)
      for (size_t y = 0; y < n; ++y) {
        const Bound s = n0[idx(x, k)] + n0[idx(k, y)];
        if (s < n0[idx(x, y)]) {
          n0[idx(x, y)] = s;
          via0[idx(x, y)] = k;
        }
      }

  // Layer i: one more a-step (strictly tighter than b), then one b-step.
  std::vector<std::vector<Bound>> N{n0}, M{{}};
  std::vector<std::vector<size_t>> mtag{{}}, ntag{{}};
  unsigned found = 0;
  size_t at = 0;
  for (unsigned i = 1; i <= n && !found; ++i) {
    const auto& prev = N[i - 1];
    std::vector<Bound> mi(prev);
    std::vector<size_t> mt(n * n, kDirect);
    for (size_t x = 0; x < n; ++x)
      for (size_t y = 0; y < n; ++y)
        for (size_t z = 0; z < n; ++z) {
          if (!(a.at(z, y) < b.at(z, y))) continue;
          const Bound s = prev[idx(x, z)] + a.at(z, y);
          if (s < mi[idx(x, y)]) {
            mi[idx(x, y)] = s;
            mt[idx(x, y)] = z;
          }
        }
    std::vector<Bound> ni(mi);
    std::vector<size_t> nt(n * n, kDirect);
    for (size_t x = 0; x < n; ++x)
      for (size_t y = 0; y < n; ++y)
        for (size_t z = 0; z < n; ++z) {
          if (z == y || !(b.at(z, y) <= a.at(z, y))) continue;
          const Bound s = mi[idx(x, z)] + b.at(z, y);
          if (s < ni[idx(x, y)]) {
            ni[idx(x, y)] = s;
            nt[idx(x, y)] = z;
          }
        }
    M.push_back(std::move(mi));
    mtag.push_back(std::move(mt));
    N.push_back(std::move(ni));
    ntag.push_back(std::move(nt));
    for (size_t x = 0; x < n && !found; ++x)
      if (N[i][idx(x, x)] < Bound::zero()) {
        found = i;
        at = x;
      }
  }
  if (!found) throw std::logic_error("minimal_interpolant: disjoint zones without a negative cycle");

  std::vector<Step> cycle;
  auto path0 = [&](auto&& self, size_t x, size_t y) -> void {
    const size_t k = via0[idx(x, y)];
    if (k == kDirect) {
      if (x != y) cycle.push_back({static_cast<ClockIndex>(x), static_cast<ClockIndex>(y), false});
      return;
    }
    self(self, x, k);
    self(self, k, y);
  };
  auto pathN = [&](auto&& self, unsigned i, size_t x, size_t y) -> void {
    if (i == 0) return path0(path0, x, y);
    const size_t zn = ntag[i][idx(x, y)];
    const size_t end = zn == kDirect ? y : zn;
    const size_t zm = mtag[i][idx(x, end)];
    if (zm == kDirect) {
      self(self, i - 1, x, end);
    } else {
      self(self, i - 1, x, zm);
      cycle.push_back({static_cast<ClockIndex>(zm), static_cast<ClockIndex>(end), true});
    }
    if (zn != kDirect) cycle.push_back({static_cast<ClockIndex>(zn), static_cast<ClockIndex>(y), false});
  };
  pathN(pathN, found, at, at);

  Bound total = Bound::zero();
  for (const auto& s : cycle) total = total + w(s.from_a, s.from, s.to);
  assert(total < Bound::zero());
  (void)total;

  res.intersecting = false;
  res.k = found;
  res.interpolant = from_steps(a, cycle);
  assert(res.interpolant.density() == found);
  return res;
}

}  // namespace tacheck
