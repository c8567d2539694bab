#pragma once

#include <string>

namespace tacheck {

enum class Verdict { reachable, not_reachable, inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::reachable: return "reachable";
    case Verdict::not_reachable: return "not_reachable";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "?";
}

}  // namespace tacheck
