#include "tacheck/automaton.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <set>
#include <sstream>

namespace tacheck {

ParseError::ParseError(size_t line, size_t column, const std::string& msg)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": " + msg),
      line_(line),
      column_(column) {}

std::vector<size_t> TimedAutomaton::out_edges(LocIndex l) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < edges.size(); ++i)
    if (edges[i].src == l) out.push_back(i);
  return out;
}

int TimedAutomaton::max_constant() const {
  int64_t m = 0;
  auto scan = [&](const Guard& g) {
    for (const auto& a : g) m = std::max(m, a.bound.value() < 0 ? -a.bound.value() : a.bound.value());
  };
  for (const auto& l : locations) scan(l.invariant);
  for (const auto& e : edges) scan(e.guard);
  return static_cast<int>(m);
}

namespace {

struct Token {
  std::string text;
  size_t col;
};

struct Line {
  size_t no;
  std::vector<Token> toks;
};

const std::set<std::string> kKeywords = {"clocks", "location", "edge", "target", "initial",
                                         "invariant", "guard", "reset", "and", "->"};

bool is_ident(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.')) return false;
  return true;
}

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> lines;
  size_t no = 0, pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    ++no;
    if (auto h = raw.find('#'); h != std::string_view::npos) raw = raw.substr(0, h);
    Line line{no, {}};
    size_t i = 0;
    while (i < raw.size()) {
      if (std::isspace(static_cast<unsigned char>(raw[i]))) {
        ++i;
        continue;
      }
      size_t j = i;
      while (j < raw.size() && !std::isspace(static_cast<unsigned char>(raw[j]))) ++j;
      line.toks.push_back({std::string(raw.substr(i, j - i)), i + 1});
      i = j;
    }
    if (!line.toks.empty()) lines.push_back(std::move(line));
    if (end == text.size()) break;
    pos = end + 1;
  }
  return lines;
}

class Parser {
 public:
  TimedAutomaton run(std::string_view text) {
    auto lines = tokenize(text);
    for (const auto& l : lines) declare(l);
    if (!initial_) throw ParseError(last_line_ + 1, 1, "no initial location");
    ta_.initial = *initial_;
    for (const auto& l : lines) resolve(l);
    if (!target_) throw ParseError(last_line_ + 1, 1, "missing target");
    ta_.target = *target_;
    Dbm z = Dbm::from_guard(ta_.dim(), ta_.locations[ta_.initial].invariant);
    Dbm origin = intersect(Dbm::zero(ta_.dim()), z);
    if (origin.is_empty())
      throw ParseError(initial_line_, 1, "invariant of the initial location excludes the zero valuation");
    return ta_;
  }

 private:
  [[noreturn]] void fail(const Line& l, const Token& t, const std::string& msg) {
    throw ParseError(l.no, t.col, msg);
  }
  [[noreturn]] void fail_end(const Line& l, const std::string& msg) {
    const Token& t = l.toks.back();
    throw ParseError(l.no, t.col + t.text.size(), msg);
  }

  void declare(const Line& l) {
    last_line_ = l.no;
    const std::string& kw = l.toks[0].text;
    if (kw == "clocks") {
      for (size_t i = 1; i < l.toks.size(); ++i) {
        const Token& t = l.toks[i];
        if (!is_ident(t.text) || kKeywords.count(t.text)) fail(l, t, "expected clock name, got '" + t.text + "'");
        if (clock_ids_.count(t.text)) fail(l, t, "duplicate declaration of clock '" + t.text + "'");
        ta_.clocks.push_back(t.text);
        clock_ids_[t.text] = static_cast<ClockIndex>(ta_.clocks.size());
      }
    } else if (kw == "location") {
      if (l.toks.size() < 2) fail_end(l, "expected location name");
      const Token& t = l.toks[1];
      if (!is_ident(t.text) || kKeywords.count(t.text)) fail(l, t, "expected location name, got '" + t.text + "'");
      if (loc_ids_.count(t.text)) fail(l, t, "duplicate declaration of location '" + t.text + "'");
      loc_ids_[t.text] = static_cast<LocIndex>(ta_.locations.size());
      ta_.locations.push_back({t.text, {}});
      if (l.toks.size() > 2 && l.toks[2].text == "initial") {
        if (initial_) fail(l, l.toks[2], "duplicate declaration of initial location");
        initial_ = loc_ids_[t.text];
        initial_line_ = l.no;
      }
    } else if (kw != "edge" && kw != "target") {
      fail(l, l.toks[0], "unknown declaration '" + kw + "'");
    }
  }

  void resolve(const Line& l) {
    const std::string& kw = l.toks[0].text;
    if (kw == "location") {
      size_t i = 2;
      LocIndex id = loc_ids_.at(l.toks[1].text);
      if (i < l.toks.size() && l.toks[i].text == "initial") ++i;
      if (i < l.toks.size()) {
        if (l.toks[i].text != "invariant") fail(l, l.toks[i], "expected 'invariant', got '" + l.toks[i].text + "'");
        ++i;
        Guard g = parse_guard(l, i, l.toks.size());
        for (size_t k = 0; k < g.size(); ++k) {
          if (g[k].x == 0 && g[k].bound < Bound::zero())
            fail(l, l.toks[guard_cols_[k]], "invariant must not impose a lower bound");
        }
        ta_.locations[id].invariant = std::move(g);
      }
    } else if (kw == "edge") {
      if (l.toks.size() < 4) fail_end(l, "expected 'edge <src> -> <dst>'");
      Edge e;
      e.src = location(l, l.toks[1]);
      if (l.toks[2].text != "->") fail(l, l.toks[2], "expected '->'");
      e.dst = location(l, l.toks[3]);
      size_t i = 4;
      if (i < l.toks.size() && l.toks[i].text == "guard") {
        ++i;
        size_t end = i;
        while (end < l.toks.size() && l.toks[end].text != "reset") ++end;
        e.guard = parse_guard(l, i, end);
        i = end;
      }
      if (i < l.toks.size()) {
        if (l.toks[i].text != "reset") fail(l, l.toks[i], "expected 'guard' or 'reset', got '" + l.toks[i].text + "'");
        if (i + 1 == l.toks.size()) fail_end(l, "expected clock after 'reset'");
        for (++i; i < l.toks.size(); ++i) {
          ClockIndex c = clock(l, l.toks[i]);
          if (std::find(e.resets.begin(), e.resets.end(), c) != e.resets.end())
            fail(l, l.toks[i], "clock '" + l.toks[i].text + "' reset twice");
          e.resets.push_back(c);
        }
      }
      ta_.edges.push_back(std::move(e));
    } else if (kw == "target") {
      if (l.toks.size() != 2) fail(l, l.toks[0], "expected 'target <location>'");
      if (target_) fail(l, l.toks[0], "duplicate declaration of target");
      target_ = location(l, l.toks[1]);
    }
  }

  LocIndex location(const Line& l, const Token& t) {
    auto it = loc_ids_.find(t.text);
    if (it == loc_ids_.end()) fail(l, t, "undeclared location '" + t.text + "'");
    return it->second;
  }

  ClockIndex clock(const Line& l, const Token& t) {
    auto it = clock_ids_.find(t.text);
    if (it == clock_ids_.end()) fail(l, t, "undeclared clock '" + t.text + "'");
    return it->second;
  }

  // atom (and atom)* over tokens [i, end)
  Guard parse_guard(const Line& l, size_t i, size_t end) {
    Guard g;
    guard_cols_.clear();
    if (i >= end) fail_end(l, "expected guard");
    for (;;) {
      guard_cols_.push_back(i);
      g.push_back(parse_atom(l, l.toks[i]));
      ++i;
      if (i >= end) break;
      if (l.toks[i].text != "and") fail(l, l.toks[i], "expected 'and', got '" + l.toks[i].text + "'");
      if (++i >= end) fail_end(l, "expected constraint after 'and'");
    }
    return g;
  }

  AtomicGuard parse_atom(const Line& l, const Token& t) {
    const std::string& s = t.text;
    size_t op = s.find_first_of("<>");
    if (op == std::string::npos || op == 0) fail(l, t, "malformed constraint '" + s + "'");
    std::string lhs = s.substr(0, op);
    bool ge = s[op] == '>';
    size_t p = op + 1;
    bool weak = p < s.size() && s[p] == '=';
    if (weak) ++p;
    std::string rhs = s.substr(p);
    int64_t k = 0;
    auto [ptr, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), k);
    if (rhs.empty() || ec != std::errc() || ptr != rhs.data() + rhs.size())
      fail(l, t, "expected integer constant in '" + s + "'");
    if (k > 1000000000 || k < -1000000000) fail(l, t, "constant out of range in '" + s + "'");
    ClockIndex x, y = 0;
    if (auto dash = lhs.find('-'); dash != std::string::npos) {
      Token tx{lhs.substr(0, dash), t.col}, ty{lhs.substr(dash + 1), t.col + dash + 1};
      x = clock(l, tx);
      y = clock(l, ty);
      if (x == y) fail(l, t, "constraint relates a clock to itself");
    } else {
      x = clock(l, Token{lhs, t.col});
    }
    if (ge) return {y, x, Bound::make(-k, !weak)};
    return {x, y, Bound::make(k, !weak)};
  }

  TimedAutomaton ta_;
  std::map<std::string, ClockIndex> clock_ids_;
  std::map<std::string, LocIndex> loc_ids_;
  std::optional<LocIndex> initial_, target_;
  size_t initial_line_ = 0, last_line_ = 0;
  std::vector<size_t> guard_cols_;
};

}  // namespace

TimedAutomaton parse_model(std::string_view text) { return Parser().run(text); }

std::string format_constraint(const TimedAutomaton& ta, const AtomicGuard& a) {
  const int64_t k = a.bound.value();
  const bool s = a.bound.is_strict();
  if (a.y == 0) return ta.clock_name(a.x) + (s ? "<" : "<=") + std::to_string(k);
  if (a.x == 0) return ta.clock_name(a.y) + (s ? ">" : ">=") + std::to_string(-k);
  return ta.clock_name(a.x) + "-" + ta.clock_name(a.y) + (s ? "<" : "<=") + std::to_string(k);
}

std::string format_guard(const TimedAutomaton& ta, const Guard& g) {
  std::string out;
  for (size_t i = 0; i < g.size(); ++i) out += (i ? " and " : "") + format_constraint(ta, g[i]);
  return out;
}

std::string emit_model(const TimedAutomaton& ta) {
  std::ostringstream os;
  if (!ta.clocks.empty()) {
    os << "clocks";
    for (const auto& c : ta.clocks) os << " " << c;
    os << "\n";
  }
  for (size_t i = 0; i < ta.locations.size(); ++i) {
    const auto& l = ta.locations[i];
    os << "location " << l.name;
    if (i == ta.initial) os << " initial";
    if (!l.invariant.empty()) os << " invariant " << format_guard(ta, l.invariant);
    os << "\n";
  }
  for (const auto& e : ta.edges) {
    os << "edge " << ta.locations[e.src].name << " -> " << ta.locations[e.dst].name;
    if (!e.guard.empty()) os << " guard " << format_guard(ta, e.guard);
    if (!e.resets.empty()) {
      os << " reset";
      for (auto c : e.resets) os << " " << ta.clock_name(c);
    }
    os << "\n";
  }
  os << "target " << ta.locations[ta.target].name << "\n";
  return os.str();
}

Dbm initial_zone(const TimedAutomaton& ta) {
  return intersect(up(Dbm::zero(ta.dim())), ta.locations[ta.initial].invariant);
}

Dbm post(const TimedAutomaton& ta, const Dbm& z, size_t edge) {
  const Edge& e = ta.edges.at(edge);
  return post_edge(z, e.guard, e.resets, ta.locations[e.dst].invariant);
}

Dbm pre(const TimedAutomaton& ta, const Dbm& z, size_t edge) {
  const Edge& e = ta.edges.at(edge);
  return pre_edge(z, e.guard, e.resets, ta.locations[e.dst].invariant);
}

bool well_formed(const TimedAutomaton& ta, const SymbolicTrace& t) {
  LocIndex at = ta.initial;
  for (size_t e : t.edges) {
    if (e >= ta.edges.size() || ta.edges[e].src != at) return false;
    at = ta.edges[e].dst;
  }
  return true;
}

std::optional<Dbm> trace_feasible(const TimedAutomaton& ta, const SymbolicTrace& t) {
  if (!well_formed(ta, t)) throw std::invalid_argument("trace does not follow the automaton");
  Dbm z = Dbm::universe(ta.dim());
  if (!t.edges.empty()) z = intersect(z, ta.locations[ta.edges[t.edges.back()].dst].invariant);
  for (size_t i = t.edges.size(); i-- > 0;) {
    z = pre(ta, z, t.edges[i]);
    if (z.is_empty()) return std::nullopt;
  }
  z = intersect(z, initial_zone(ta));
  if (z.is_empty()) return std::nullopt;
  return z;
}

std::vector<Dbm> forward_chain(const TimedAutomaton& ta, const SymbolicTrace& t) {
  std::vector<Dbm> out{initial_zone(ta)};
  for (size_t e : t.edges) out.push_back(post(ta, out.back(), e));
  return out;
}

}  // namespace tacheck
