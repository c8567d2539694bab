#include "tacheck/dbm.hpp"

#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace tacheck {

namespace {

void require_same_dim(const Dbm& a, const Dbm& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dbm dimension mismatch");
}

Bound path_weight(const Dbm& d, const std::vector<ClockIndex>& cyc) {
  Bound w = Bound::zero();
  for (size_t i = 0; i < cyc.size(); ++i) w = w + d.at(cyc[i], cyc[(i + 1) % cyc.size()]);
  return w;
}

// Split a closed walk at repeated vertices until it is simple, keeping a negative part.
std::vector<ClockIndex> simple_negative(const Dbm& d, std::vector<ClockIndex> walk) {
  for (;;) {
    bool split = false;
    for (size_t i = 0; i < walk.size() && !split; ++i) {
      for (size_t j = i + 1; j < walk.size(); ++j) {
        if (walk[i] != walk[j]) continue;
        std::vector<ClockIndex> first(walk.begin() + i, walk.begin() + j);
        std::vector<ClockIndex> rest(walk.begin(), walk.begin() + i);
        rest.insert(rest.end(), walk.begin() + j, walk.end());
        walk = path_weight(d, first) < Bound::zero() ? first : rest;
        split = true;
        break;
      }
    }
    if (!split) return walk;
  }
}

}  // namespace

Dbm::Dbm(size_t dim) : dim_(dim), status_(DbmStatus::canonical), m_(dim * dim, Bound::top()) {
  for (size_t i = 0; i < dim; ++i) {
    m_[i * dim + i] = Bound::zero();
    m_[i] = Bound::zero();  // 0 - x <= 0
  }
}

Dbm Dbm::zero(size_t dim) {
  Dbm d(dim);
  for (auto& b : d.m_) b = Bound::zero();
  return d;
}

Dbm Dbm::empty(size_t dim) {
  Dbm d(dim);
  d.status_ = DbmStatus::empty;
  return d;
}

Dbm Dbm::from_guard(size_t dim, const Guard& g) {
  Dbm d(dim);
  d.constrain(g);
  d.canonicalize();
  return d;
}

void Dbm::set(size_t x, size_t y, Bound b) {
  m_[x * dim_ + y] = b;
  if (status_ == DbmStatus::canonical) status_ = DbmStatus::raw;
}

void Dbm::constrain(size_t x, size_t y, Bound b) {
  if (status_ == DbmStatus::empty) return;
  Bound& e = m_[x * dim_ + y];
  if (b < e) {
    e = b;
    status_ = DbmStatus::raw;
  }
}

void Dbm::constrain(const Guard& g) {
  for (const auto& a : g) {
    if (a.x >= dim_ || a.y >= dim_) throw std::out_of_range("guard clock out of range");
    constrain(a.x, a.y, a.bound);
  }
}

Dbm& Dbm::canonicalize() {
  if (status_ != DbmStatus::raw) return *this;
  const size_t n = dim_;
  Bound* m = m_.data();
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      const Bound ik = m[i * n + k];
      if (ik.is_inf()) continue;
      for (size_t j = 0; j < n; ++j) {
        const Bound s = ik + m[k * n + j];
        if (s < m[i * n + j]) m[i * n + j] = s;
      }
    }
    for (size_t i = 0; i < n; ++i) {
      if (m[i * n + i] < Bound::zero()) {
        status_ = DbmStatus::empty;
        return *this;
      }
    }
  }
  status_ = DbmStatus::canonical;
  return *this;
}

std::string Dbm::str() const {
  if (status_ == DbmStatus::empty) return "empty\n";
  std::ostringstream os;
  for (size_t i = 0; i < dim_; ++i) {
    for (size_t j = 0; j < dim_; ++j) os << (j ? " " : "") << at(i, j).str();
    os << "\n";
  }
  return os.str();
}

bool operator==(const Dbm& a, const Dbm& b) {
  if (a.dim_ != b.dim_) return false;
  if (a.is_empty() || b.is_empty()) return a.is_empty() && b.is_empty();
  return a.m_ == b.m_;
}

Dbm canonical(Dbm d) {
  d.canonicalize();
  return d;
}

Dbm intersect(const Dbm& a, const Dbm& b) {
  require_same_dim(a, b);
  if (a.is_empty()) return a;
  if (b.is_empty()) return b;
  Dbm r = a;
  for (size_t i = 0; i < a.dim(); ++i)
    for (size_t j = 0; j < a.dim(); ++j) r.constrain(i, j, b.at(i, j));
  return r.canonicalize();
}

Dbm intersect(const Dbm& a, const Guard& g) {
  if (a.is_empty()) return a;
  Dbm r = a;
  r.constrain(g);
  return r.canonicalize();
}

Dbm up(const Dbm& d) {
  if (d.is_empty()) return d;
  Dbm r = canonical(d);
  for (size_t x = 1; x < r.dim(); ++x) r.set(x, 0, Bound::top());
  return r.canonicalize();
}

Dbm down(const Dbm& d) {
  if (d.is_empty()) return d;
  Dbm r = canonical(d);
  for (size_t x = 1; x < r.dim(); ++x) {
    Bound b = Bound::zero();
    for (size_t y = 1; y < r.dim(); ++y) b = min(b, r.at(y, x));
    r.set(0, x, b);
  }
  return r.canonicalize();
}

Dbm reset(const Dbm& d, ClockIndex x) {
  if (x == 0) throw std::invalid_argument("cannot reset the reference clock");
  if (d.is_empty()) return d;
  Dbm r = canonical(d);
  if (r.is_empty()) return r;
  for (size_t y = 0; y < r.dim(); ++y) {
    if (y == x) continue;
    r.set(x, y, r.at(0, y));
    r.set(y, x, r.at(y, 0));
  }
  return r.canonicalize();
}

Dbm reset(const Dbm& d, std::span<const ClockIndex> rs) {
  Dbm r = d;
  for (ClockIndex x : rs) r = reset(r, x);
  return canonical(r);
}

Dbm free(const Dbm& d, ClockIndex x) {
  if (x == 0) throw std::invalid_argument("cannot free the reference clock");
  if (d.is_empty()) return d;
  Dbm r = canonical(d);
  if (r.is_empty()) return r;
  for (size_t y = 0; y < r.dim(); ++y) {
    if (y == x) continue;
    r.set(x, y, Bound::top());
    r.set(y, x, r.at(y, 0));
  }
  return r.canonicalize();
}

bool includes(const Dbm& a, const Dbm& b) {
  require_same_dim(a, b);
  if (b.is_empty()) return true;
  if (a.is_empty()) return false;
  const Dbm ca = canonical(a), cb = canonical(b);
  if (cb.is_empty()) return true;
  if (ca.is_empty()) return false;
  for (size_t i = 0; i < a.dim(); ++i)
    for (size_t j = 0; j < a.dim(); ++j)
      if (ca.at(i, j) < cb.at(i, j)) return false;
  return true;
}

bool intersects(const Dbm& a, const Dbm& b) { return !intersect(a, b).is_empty(); }

Dbm post_edge(const Dbm& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv_dst) {
  Dbm w = intersect(z, g);
  if (w.is_empty()) return w;
  w = up(reset(w, r));
  return intersect(w, inv_dst);
}

Dbm pre_edge(const Dbm& z, const Guard& g, std::span<const ClockIndex> r, const Guard& inv_dst) {
  Dbm w = down(intersect(z, inv_dst));
  if (w.is_empty()) return w;
  for (ClockIndex x : r) w.constrain(x, 0, Bound::zero());
  w.canonicalize();
  for (ClockIndex x : r) w = free(w, x);
  return intersect(w, g);
}

std::vector<ClockIndex> negative_cycle(const Dbm& raw) {
  const size_t n = raw.dim();
  constexpr size_t kNone = SIZE_MAX;
  Dbm d = raw;
  std::vector<size_t> via(n * n, kNone);
  std::function<void(size_t, size_t, std::vector<ClockIndex>&)> walk =
      [&](size_t i, size_t j, std::vector<ClockIndex>& out) {
        size_t k = via[i * n + j];
        if (k == kNone) {
          out.push_back(static_cast<ClockIndex>(i));
          return;
        }
        walk(i, k, out);
        walk(k, j, out);
      };
  for (size_t i = 0; i < n; ++i) {
    if (d.at(i, i) < Bound::zero()) return {static_cast<ClockIndex>(i)};
  }
  for (size_t k = 0; k < n; ++k) {
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < n; ++j) {
        const Bound s = d.at(i, k) + d.at(k, j);
        if (s < d.at(i, j)) {
          d.set(i, j, s);
          via[i * n + j] = k;
          if (i == j && s < Bound::zero()) {
            std::vector<ClockIndex> cyc;
            walk(i, k, cyc);
            walk(k, i, cyc);
            return simple_negative(raw, cyc);
          }
        }
      }
    }
  }
  return {};
}

}  // namespace tacheck
