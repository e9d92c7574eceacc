#pragma once

#include "gkm/scheme.hpp"

#include <optional>
#include <string>
#include <vector>

namespace gkm::detail {

/// Accumulates a rekey plan against a copy of the controller state.
/// Generators mutate `next()`, emit messages naming the key they encrypt
/// under, and `finish()` derives recipients and message kinds from which
/// members hold each encryption key before or after the event.
class PlanBuilder
{
public:
  explicit PlanBuilder(const GroupState& before);

  const GroupState& before() const { return before_; }
  GroupState& next() { return plan_.next; }
  KeyTree& tree() { return plan_.next.tree; }

  KeyTerm fresh(const std::string& tag) { return plan_.next.keys.fresh_key(tag); }

  void emit(const KeyTerm& payload,
            NodeId target,
            const KeyTerm& enc_key,
            std::optional<NodeId> enc_node,
            PayloadRole role = PayloadRole::Key);
  void emit(std::vector<KeyTerm> payload,
            std::vector<NodeId> targets,
            const KeyTerm& enc_key,
            std::optional<NodeId> enc_node,
            PayloadRole role = PayloadRole::Key);
  /// Attach batch renaming fields to the most recent message.
  void address_last(NodeId destination, NodeId new_position);

  void set_dirtied(std::vector<NodeId> nodes) { plan_.dirtied_nodes = std::move(nodes); }
  void add_factor(NodeId node, NodeId source) { plan_.factor_sources[node] = source; }
  PositionRename& renames() { return plan_.renames; }
  void depart(MemberId m) { plan_.departed.push_back(m); }
  void admit(MemberId m, NodeId leaf, NodeId slot, const KeyTerm& key);

  /// Key held by `n` before the event, if any.
  std::optional<KeyTerm> old_key(NodeId n) const;

  RekeyPlan finish();

private:
  const GroupState& before_;
  RekeyPlan plan_;
};

/// Fresh-key tag conventions for node kinds.
std::string tag_for(const KeyNode& n);

/// Nodes sorted deepest first, ties by ascending NodeId.
std::vector<NodeId> bottom_up(std::vector<NodeId> nodes, unsigned degree);

} // namespace gkm::detail
