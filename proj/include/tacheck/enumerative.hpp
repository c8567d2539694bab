#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tacheck/automaton.hpp"
#include "tacheck/domain.hpp"
#include "tacheck/verdict.hpp"

namespace tacheck {

enum class SearchOrder { dfs, bfs };

using NodeId = size_t;

struct ExplorationNode {
  NodeId id = 0;
  LocIndex loc = 0;
  Dbm zone;
  size_t domain = 0;  // slot in the engine's domain registry
  std::optional<NodeId> parent;
  size_t parent_edge = 0;
  std::optional<NodeId> covered_by;
  std::vector<NodeId> children;
  std::vector<NodeId> covering;  // may hold stale entries; check covered_by
  bool in_passed = false;
  bool in_wait = false;
  bool alive = true;
};

struct EnumOptions {
  DomainMode mode = DomainMode::per_location;
  SearchOrder order = SearchOrder::dfs;
  size_t max_nodes = 2'000'000;
  size_t max_refinements = 200'000;
  double time_limit_s = 0;  // 0: unlimited
  // Seed domains with the automaton's own constraints; otherwise start empty.
  bool syntactic_seed = true;
  // Tree-wide successor-closure and zone-monotonicity checks around every
  // exploration and refinement. Quadratic; meant for tests.
  bool checkpoints = false;
  bool record_traces = false;
};

struct EnumStats {
  size_t nodes_created = 0;
  size_t nodes_expanded = 0;
  size_t nodes_covered = 0;
  size_t nodes_deleted = 0;
  size_t abs_reach_calls = 0;
  size_t refinements = 0;
  size_t interpolant_refinements = 0;  // Strengthen grew a domain
  size_t zone_refinements = 0;         // Strengthen only recomputed the zone
  size_t cuts = 0;                     // subtree re-queued rather than deleted
  size_t uncovered = 0;
  size_t peak_wait = 0;
  size_t domain_constraints = 0;
  double time_ms = 0;
  size_t checkpoints = 0;
  size_t closure_violations = 0;
  size_t monotonicity_violations = 0;
  // One hash per abstract counterexample, in order (record_traces).
  std::vector<uint64_t> trace_hashes;
  std::vector<bool> trace_spurious;
};

struct EnumResult {
  Verdict verdict = Verdict::inconclusive;
  std::optional<SymbolicTrace> trace;
  EnumStats stats;
  std::string reason;  // for inconclusive results
};

enum class Feasibility { feasible, not_feasible };

struct RefinementOutcome {
  Feasibility verdict = Feasibility::feasible;
  std::vector<NodeId> modified;
  std::optional<NodeId> cut_node;
};

class EnumerativeEngine {
 public:
  explicit EnumerativeEngine(const TimedAutomaton& ta, EnumOptions opt = {});

  EnumResult check();

  // Pieces of the loop, public for tests.
  // Root-to-target node path, or nullopt when wait runs dry. Throws
  // BudgetExceeded on limits.
  std::optional<std::vector<NodeId>> abs_reach();
  RefinementOutcome refine(const std::vector<NodeId>& trace);
  Dbm concrete(NodeId n) const;
  NodeId cut_heuristic(std::span<const NodeId> chain) const;

  const ExplorationNode& node(NodeId n) const { return nodes_.at(n); }
  size_t node_count() const { return nodes_.size(); }
  const AbstractDomain& domain_of(NodeId n) const { return domains_.at(nodes_.at(n).domain); }
  const EnumStats& stats() const { return stats_; }
  SymbolicTrace to_trace(const std::vector<NodeId>& path) const;
  uint64_t trace_hash(const std::vector<NodeId>& path) const;

  // Number of passed nodes breaking successor closure (every passed node has a child covering each exact successor).
  size_t closure_violations() const;

  struct BudgetExceeded {
    std::string what;
  };

 private:
  void strengthen(NodeId n, const Dbm& z, const Dbm& c);
  void push_wait(NodeId n);
  std::optional<NodeId> pop_wait();
  void remove_passed(NodeId n);
  void release_covered(NodeId n, bool always);
  void delete_subtree(NodeId n, std::vector<NodeId>& orphans);
  std::optional<NodeId> coverer(NodeId n) const;
  size_t choose_dom(NodeId parent, size_t edge);
  NodeId new_node(LocIndex loc, Dbm zone, size_t domain);
  void check_budget() const;

  const TimedAutomaton& ta_;
  EnumOptions opt_;
  std::vector<ExplorationNode> nodes_;
  std::vector<AbstractDomain> domains_;
  std::vector<size_t> loc_slot_;
  std::deque<NodeId> wait_;
  size_t wait_size_ = 0;
  std::vector<std::set<NodeId>> passed_;  // per location
  std::vector<std::vector<size_t>> out_;
  EnumStats stats_;
  double deadline_ms_ = 0;
  double start_ms_ = 0;
};

// Convenience wrapper around EnumerativeEngine::check.
EnumResult check_enumerative(const TimedAutomaton& ta, EnumOptions opt = {});

}  // namespace tacheck
