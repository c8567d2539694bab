#include "tacheck/bound.hpp"

#include <cstdio>
#include <cstdlib>

namespace tacheck {

void bound_overflow(const char* what, int64_t a, int64_t b) {
  std::fprintf(stderr, "tacheck: bound overflow in %s (raw %lld, %lld)\n", what,
               static_cast<long long>(a), static_cast<long long>(b));
  std::abort();
}

int64_t Bound::encode(int64_t k, bool is_strict) {
  if (k > kMaxValue || k < -kMaxValue) bound_overflow("encode", k, 0);
  return 2 * k + (is_strict ? 0 : 1);
}

Bound Bound::reflect() const {
  if (is_inf()) bound_overflow("reflect of top", raw_, 0);
  return Bound(1 - raw_);
}

std::string Bound::str() const {
  if (is_inf()) return "inf";
  return "(" + std::to_string(value()) + (is_strict() ? ",<)" : ",<=)");
}

}  // namespace tacheck
