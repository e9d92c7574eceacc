#pragma once

#include "../schemes/plan_builder.hpp"
#include "gkm/batch.hpp"

#include <map>
#include <set>
#include <vector>

namespace gkm::detail {

/// Where Lam-Gouda put everybody: the leaves whose paths must be rekeyed and
/// the admitted joiners.
struct SlotLayout
{
  std::vector<NodeId> touched_leaves;
  std::vector<std::pair<MemberId, NodeId>> joiners;
  /// Set when surplus joiners needed a rekey subtree (positions changed).
  bool grafted = false;
};

/// Number of slots (departed leaves plus existing vacancies) joiners can
/// take without restructuring.
std::size_t free_slots(const GroupState& state, const BatchRequest& req);

SlotLayout lam_gouda_place(PlanBuilder& b, const BatchRequest& req);

/// Strict ancestors of the given leaves, deepest first.
std::vector<NodeId> ancestors_of(const KeyTree& tree, const std::vector<NodeId>& leaves);

struct Restructure
{
  /// Regroup-created interior nodes (new IDs), keys not yet installed.
  std::vector<NodeId> interior;
  /// New id -> old id for reused subtree roots and sibling singles.
  std::map<NodeId, NodeId> fragment_roots;
  std::set<MemberId> joiners;
};

/// Mark, prune and regroup; replaces b.tree() with the renamed tree.
Restructure rebuild_balanced(PlanBuilder& b, const BatchRequest& req);

} // namespace gkm::detail
