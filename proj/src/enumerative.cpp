#include "tacheck/enumerative.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <stdexcept>

#include "tacheck/interpolation.hpp"

namespace tacheck {

namespace {

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

EnumerativeEngine::EnumerativeEngine(const TimedAutomaton& ta, EnumOptions opt)
    : ta_(ta), opt_(opt), passed_(ta.locations.size()), out_(ta.locations.size()) {
  for (LocIndex l = 0; l < ta.locations.size(); ++l) out_[l] = ta.out_edges(l);
  const AbstractDomain d0 = opt_.syntactic_seed ? initial_domain(ta) : AbstractDomain(ta.dim());
  switch (opt_.mode) {
    case DomainMode::global:
    case DomainMode::per_node:
      domains_.push_back(d0);
      break;
    case DomainMode::per_location:
      domains_.assign(ta.locations.size(), d0);
      for (LocIndex l = 0; l < ta.locations.size(); ++l) loc_slot_.push_back(l);
      break;
  }
  const size_t root_slot = opt_.mode == DomainMode::per_location ? loc_slot_[ta.initial] : 0;
  push_wait(new_node(ta.initial, initial_zone(ta), root_slot));
}

NodeId EnumerativeEngine::new_node(LocIndex loc, Dbm zone, size_t domain) {
  if (nodes_.size() >= opt_.max_nodes) throw BudgetExceeded{"node budget exhausted"};
  ExplorationNode n;
  n.id = nodes_.size();
  n.loc = loc;
  n.zone = std::move(zone);
  n.domain = domain;
  nodes_.push_back(std::move(n));
  ++stats_.nodes_created;
  return nodes_.back().id;
}

size_t EnumerativeEngine::choose_dom(NodeId parent, size_t edge) {
  switch (opt_.mode) {
    case DomainMode::global: return 0;
    case DomainMode::per_location: return loc_slot_[ta_.edges[edge].dst];
    case DomainMode::per_node:
      // a fresh copy inheriting the parent's refinements
      domains_.push_back(domains_[nodes_[parent].domain]);
      return domains_.size() - 1;
  }
  return 0;
}

void EnumerativeEngine::push_wait(NodeId n) {
  auto& nd = nodes_[n];
  if (!nd.alive || nd.in_wait) return;
  nd.in_wait = true;
  wait_.push_back(n);
  stats_.peak_wait = std::max(stats_.peak_wait, ++wait_size_);
}

std::optional<NodeId> EnumerativeEngine::pop_wait() {
  while (!wait_.empty()) {
    NodeId n;
    if (opt_.order == SearchOrder::dfs) {
      n = wait_.back();
      wait_.pop_back();
    } else {
      n = wait_.front();
      wait_.pop_front();
    }
    auto& nd = nodes_[n];
    if (!nd.alive || !nd.in_wait) continue;
    nd.in_wait = false;
    --wait_size_;
    return n;
  }
  return std::nullopt;
}

void EnumerativeEngine::check_budget() const {
  if (deadline_ms_ > 0 && now_ms() > deadline_ms_) throw BudgetExceeded{"time budget exhausted"};
}

std::optional<NodeId> EnumerativeEngine::coverer(NodeId n) const {
  const auto& nd = nodes_[n];
  for (NodeId p : passed_[nd.loc])
    if (p != n && includes(nodes_[p].zone, nd.zone)) return p;
  return std::nullopt;
}

std::optional<std::vector<NodeId>> EnumerativeEngine::abs_reach() {
  ++stats_.abs_reach_calls;
  while (auto popped = pop_wait()) {
    check_budget();
    const NodeId n = *popped;
    if (nodes_[n].loc == ta_.target) {
      std::vector<NodeId> path{n};
      while (nodes_[path.back()].parent) path.push_back(*nodes_[path.back()].parent);
      std::reverse(path.begin(), path.end());
      if (opt_.checkpoints) {
        ++stats_.checkpoints;
        stats_.closure_violations += closure_violations();
      }
      return path;
    }
    nodes_[n].covered_by.reset();
    if (auto c = coverer(n)) {
      nodes_[n].covered_by = *c;
      nodes_[*c].covering.push_back(n);
      ++stats_.nodes_covered;
      continue;
    }
    nodes_[n].zone = alpha(domains_[nodes_[n].domain], nodes_[n].zone);
    nodes_[n].in_passed = true;
    passed_[nodes_[n].loc].insert(n);
    ++stats_.nodes_expanded;
    for (size_t e : out_[nodes_[n].loc]) {
      Dbm z = post(ta_, nodes_[n].zone, e);
      if (z.is_empty()) continue;
      const size_t slot = choose_dom(n, e);
      const NodeId c = new_node(ta_.edges[e].dst, std::move(z), slot);
      nodes_[c].parent = n;
      nodes_[c].parent_edge = e;
      nodes_[n].children.push_back(c);
      push_wait(c);
    }
  }
  if (opt_.checkpoints) {
    ++stats_.checkpoints;
    stats_.closure_violations += closure_violations();
  }
  return std::nullopt;
}

Dbm EnumerativeEngine::concrete(NodeId n) const {
  const auto& nd = nodes_[n];
  if (!nd.parent) return initial_zone(ta_);
  return post(ta_, nodes_[*nd.parent].zone, nd.parent_edge);
}

void EnumerativeEngine::release_covered(NodeId n, bool always) {
  auto& list = nodes_[n].covering;
  std::vector<NodeId> keep;
  for (NodeId m : list) {
    auto& md = nodes_[m];
    if (!md.alive || md.covered_by != n) continue;
    if (always || !includes(nodes_[n].zone, md.zone)) {
      md.covered_by.reset();
      ++stats_.uncovered;
      push_wait(m);
    } else {
      keep.push_back(m);
    }
  }
  nodes_[n].covering = std::move(keep);
}

void EnumerativeEngine::remove_passed(NodeId n) {
  auto& nd = nodes_[n];
  if (nd.in_passed) {
    passed_[nd.loc].erase(n);
    nd.in_passed = false;
  }
}

void EnumerativeEngine::delete_subtree(NodeId n, std::vector<NodeId>& orphans) {
  std::vector<NodeId> stack{n};
  while (!stack.empty()) {
    const NodeId m = stack.back();
    stack.pop_back();
    auto& md = nodes_[m];
    if (!md.alive) continue;
    remove_passed(m);
    if (md.in_wait) {
      md.in_wait = false;
      --wait_size_;
    }
    md.alive = false;
    ++stats_.nodes_deleted;
    orphans.insert(orphans.end(), md.covering.begin(), md.covering.end());
    md.covering.clear();
    for (NodeId c : md.children) stack.push_back(c);
    md.children.clear();
  }
}

void EnumerativeEngine::strengthen(NodeId n, const Dbm& z, const Dbm& c) {
  auto& slot = domains_[nodes_[n].domain];
  if (!intersect(alpha(slot, c), z).is_empty()) {
    auto mi = minimal_interpolant(c, z);
    if (mi.intersecting) throw std::logic_error("strengthen: concrete zone meets the backward zone");
    slot = slot.refined(mi.interpolant.constraints);
    ++stats_.interpolant_refinements;
  } else {
    ++stats_.zone_refinements;
  }
  nodes_[n].zone = alpha(slot, c);
  release_covered(n, false);
}

NodeId EnumerativeEngine::cut_heuristic(std::span<const NodeId> chain) const {
  for (NodeId n : chain)
    if (coverer(n)) return n;
  return chain.back();
}

RefinementOutcome EnumerativeEngine::refine(const std::vector<NodeId>& trace) {
  RefinementOutcome out;
  if (trace.empty()) return out;
  std::vector<Dbm> before;
  if (opt_.checkpoints)
    for (const auto& nd : nodes_) before.push_back(nd.zone);

  const size_t k = trace.size() - 1;
  std::vector<Dbm> z(trace.size());
  z[k] = nodes_[trace[k]].zone;
  size_t i0 = 0;
  for (size_t i = k;; --i) {
    if (intersect(concrete(trace[i]), z[i]).is_empty()) {
      i0 = i;
      break;
    }
    if (i == 0) return out;  // feasible
    z[i - 1] = intersect(pre(ta_, z[i], nodes_[trace[i]].parent_edge), nodes_[trace[i - 1]].zone);
  }
  out.verdict = Feasibility::not_feasible;
  ++stats_.refinements;
  // Unwinding of the recursion: each node is strengthened against the zone
  // it was visited with, after its parent.
  for (size_t j = i0; j <= k; ++j) {
    strengthen(trace[j], z[j], concrete(trace[j]));
    out.modified.push_back(trace[j]);
  }
  size_t j0 = k;
  for (size_t j = i0; j <= k; ++j)
    if (nodes_[trace[j]].zone.is_empty()) {
      j0 = j;
      break;
    }
  const std::span<const NodeId> chain(trace.data() + i0, j0 - i0 + 1);
  const NodeId cut = cut_heuristic(chain);
  out.cut_node = cut;

  std::vector<NodeId> orphans;
  auto& cd = nodes_[cut];
  for (NodeId c : cd.children) delete_subtree(c, orphans);
  cd.children.clear();
  if (cd.zone.is_empty()) {
    delete_subtree(cut, orphans);
  } else {
    remove_passed(cut);
    release_covered(cut, true);
    nodes_[cut].zone = concrete(cut);
    push_wait(cut);
    ++stats_.cuts;
  }
  for (NodeId m : orphans) {
    auto& md = nodes_[m];
    if (!md.alive || !md.covered_by) continue;
    const auto& cov = nodes_[*md.covered_by];
    if (cov.alive && cov.in_passed) continue;
    md.covered_by.reset();
    ++stats_.uncovered;
    push_wait(m);
  }
  // The last trace node sits outside both lists; requeue it if it survived.
  auto& last = nodes_[trace[k]];
  if (last.alive && !last.in_passed && !last.in_wait && !last.covered_by) push_wait(trace[k]);

  if (opt_.checkpoints) {
    ++stats_.checkpoints;
    for (size_t i = 0; i < before.size(); ++i) {
      const auto& nd = nodes_[i];
      if (nd.alive && !includes(before[i], nd.zone)) ++stats_.monotonicity_violations;
    }
    stats_.closure_violations += closure_violations();
  }
  return out;
}

size_t EnumerativeEngine::closure_violations() const {
  size_t bad = 0;
  for (const auto& nd : nodes_) {
    if (!nd.alive || !nd.in_passed) continue;
    for (size_t e : out_[nd.loc]) {
      const Dbm p = post(ta_, nd.zone, e);
      if (p.is_empty()) continue;
      bool ok = false;
      for (NodeId c : nd.children) {
        const auto& cd = nodes_[c];
        if (!cd.alive || cd.parent_edge != e || !includes(cd.zone, p)) continue;
        if (cd.in_passed && !includes(cd.zone, alpha(domains_[cd.domain], p))) continue;
        ok = true;
        break;
      }
      bad += !ok;
    }
  }
  return bad;
}

SymbolicTrace EnumerativeEngine::to_trace(const std::vector<NodeId>& path) const {
  SymbolicTrace t;
  for (size_t i = 1; i < path.size(); ++i) t.edges.push_back(nodes_[path[i]].parent_edge);
  return t;
}

uint64_t EnumerativeEngine::trace_hash(const std::vector<NodeId>& path) const {
  std::string s;
  for (NodeId n : path) {
    const auto& nd = nodes_[n];
    s += std::to_string(nd.parent ? nd.parent_edge : SIZE_MAX) + ":" + std::to_string(nd.loc) + ":" +
         nd.zone.str() + ";";
  }
  return std::hash<std::string>{}(s);
}

EnumResult EnumerativeEngine::check() {
  EnumResult res;
  start_ms_ = now_ms();
  deadline_ms_ = opt_.time_limit_s > 0 ? start_ms_ + opt_.time_limit_s * 1000 : 0;
  try {
    for (;;) {
      auto path = abs_reach();
      if (!path) {
        res.verdict = Verdict::not_reachable;
        break;
      }
      SymbolicTrace t = to_trace(*path);
      const bool feasible = trace_feasible(ta_, t).has_value();
      if (opt_.record_traces) {
        stats_.trace_hashes.push_back(trace_hash(*path));
        stats_.trace_spurious.push_back(!feasible);
      }
      if (feasible) {
        res.verdict = Verdict::reachable;
        res.trace = std::move(t);
        break;
      }
      if (stats_.refinements >= opt_.max_refinements) throw BudgetExceeded{"refinement budget exhausted"};
      if (refine(*path).verdict == Feasibility::feasible)
        throw std::logic_error("refine judged a spurious trace feasible");
    }
  } catch (const BudgetExceeded& b) {
    res.verdict = Verdict::inconclusive;
    res.reason = b.what;
  }
  for (const auto& d : domains_) stats_.domain_constraints = std::max(stats_.domain_constraints, d.size());
  stats_.time_ms = now_ms() - start_ms_;
  res.stats = stats_;
  return res;
}

EnumResult check_enumerative(const TimedAutomaton& ta, EnumOptions opt) {
  return EnumerativeEngine(ta, opt).check();
}

}  // namespace tacheck
