#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace tacheck {

// A DBM entry (k, <) or (k, <=), or the top element (inf, <).
// Stored as 2k for strict and 2k+1 for weak so that integer order is bound order.
class Bound {
 public:
  static constexpr int64_t kTopRaw = INT64_MAX;
  // Keeps 2k+1 and sums of two encodings clear of the sentinel.
  static constexpr int64_t kMaxValue = (int64_t{1} << 60);

  constexpr Bound() : raw_(kTopRaw) {}

  static constexpr Bound top() { return Bound(); }
  static Bound weak(int64_t k) { return Bound(encode(k, false)); }
  static Bound strict(int64_t k) { return Bound(encode(k, true)); }
  static Bound make(int64_t k, bool is_strict) { return Bound(encode(k, is_strict)); }
  static constexpr Bound zero() { return from_raw(1); }  // (0, <=)
  static constexpr Bound from_raw(int64_t r) {
    Bound b;
    b.raw_ = r;
    return b;
  }

  constexpr bool is_inf() const { return raw_ == kTopRaw; }
  constexpr int64_t raw() const { return raw_; }
  // Floor division keeps negative odd encodings right.
  constexpr int64_t value() const { return raw_ >> 1; }
  constexpr bool is_strict() const { return (raw_ & 1) == 0; }

  // x - y < k  <->  not (y - x <= -k); the bound of the complementary half-space.
  Bound reflect() const;

  std::string str() const;

  friend constexpr auto operator<=>(Bound a, Bound b) { return a.raw_ <=> b.raw_; }
  friend constexpr bool operator==(Bound a, Bound b) { return a.raw_ == b.raw_; }
  friend Bound operator+(Bound a, Bound b);

 private:
  explicit constexpr Bound(int64_t r) : raw_(r) {}
  static int64_t encode(int64_t k, bool is_strict);

  int64_t raw_;
};

inline Bound min(Bound a, Bound b) { return a < b ? a : b; }
inline Bound max(Bound a, Bound b) { return a < b ? b : a; }

// Abort with a diagnostic on arithmetic that leaves the supported range.
[[noreturn]] void bound_overflow(const char* what, int64_t a, int64_t b);

inline Bound operator+(Bound a, Bound b) {
  if (a.is_inf() || b.is_inf()) return Bound::top();
  int64_t s;
  if (__builtin_add_overflow(a.raw_, b.raw_, &s)) bound_overflow("add", a.raw_, b.raw_);
  s -= (a.raw_ | b.raw_) & 1;
  if (s > 2 * Bound::kMaxValue + 1 || s < -2 * Bound::kMaxValue) bound_overflow("add", a.raw_, b.raw_);
  return Bound(s);
}

}  // namespace tacheck
