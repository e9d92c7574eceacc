#pragma once

#include "gkm/scheme.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace gkm {

enum class EventKind
{
  Join,
  Leave,
};

struct MembershipEvent
{
  std::uint64_t tick = 0;
  EventKind kind = EventKind::Join;
  MemberId member;

  bool operator==(const MembershipEvent&) const = default;
};

/// Joins and leaves gathered over one rekey interval, each sorted by id.
struct BatchRequest
{
  std::vector<MemberId> joins;
  std::vector<MemberId> leaves;
  std::uint64_t interval_index = 0;

  bool empty() const { return joins.empty() && leaves.empty(); }
  /// Throws InvalidParams unless joins/leaves are disjoint, leaves are
  /// current members and joins are not.
  void validate(const GroupState& state) const;

  bool operator==(const BatchRequest&) const = default;
};

/// Nets out a window of events: a member that joins as often as it leaves
/// within the window produces no request. The result ignores event order.
BatchRequest collect(std::span<const MembershipEvent> events, std::uint64_t interval_index = 0);

/// Marking algorithm over an LKH tree of any degree. Joiners take departed
/// slots left to right; surplus joiners form a rekey subtree at the
/// shallowest departed slot (or the shallowest leaf when nobody left).
RekeyPlan lam_gouda_rekey(const GroupState& state, const BatchRequest& req);

/// Mark, prune, regroup and rename over a binary tree. The returned rename
/// is also stored in the plan.
std::pair<RekeyPlan, PositionRename> balanced_batch_rekey(const GroupState& state, const BatchRequest& req);

enum class FactorVariant
{
  LamGoudaImproved,
  BalancedImproved,
};

RekeyPlan updating_factor_plan(const GroupState& state, const BatchRequest& req, FactorVariant variant);

/// Shape produced by the regrouping rule. Leaves reference input fragments
/// by index; interior nodes reference two children.
struct RegroupNode
{
  int fragment = -1;
  int left = -1;
  int right = -1;
  unsigned depth = 0;
};

struct RegroupResult
{
  std::vector<RegroupNode> nodes;
  int root = -1;

  unsigned depth() const { return root < 0 ? 0 : nodes[static_cast<std::size_t>(root)].depth; }
};

/// Repeatedly pairs the shallowest trees; an odd one out is joined with the
/// next-deeper tree. Fragments are given in tie-break order.
RegroupResult regroup(std::span<const unsigned> fragment_depths);

} // namespace gkm
