#pragma once

#include "gkm/node_id.hpp"
#include "gkm/term.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <utility>
#include <vector>

namespace gkm {

enum class NodeKind
{
  TekRoot,
  Kek,
  IndividualLeaf,
  ClusterLeaf,
};

struct KeyNode
{
  NodeId id;
  NodeKind kind = NodeKind::Kek;
  bool leaf = false;
  /// Empty for vacant leaves: a vacated slot's key is retired for good.
  std::optional<KeyTerm> key;
  std::uint64_t key_version = 0;
  std::vector<MemberId> occupants;

  bool vacant() const { return leaf && occupants.empty(); }
};

enum class TreeLayout
{
  /// k-ary tree grown by splitting leaves.
  Balanced,
  /// Single-level star whose degree widens on demand (Simple, GKMP).
  Flat,
};

struct InsertResult
{
  NodeId leaf;
  /// Set when a leaf had to be split: its occupants moved from `first` to
  /// `second` and `first` became an interior node.
  std::optional<std::pair<NodeId, NodeId>> moved;
};

/// Key tree addressed by closed-form node IDs. Nodes live in an ordered map,
/// members map to leaves, and a leaf holds at most `leaf_capacity` members
/// (1 except for hybrid cluster trees).
///
/// Structural operations leave keys of new interior nodes empty; the rekeying
/// scheme driving the change is responsible for installing them.
class KeyTree
{
public:
  KeyTree(unsigned degree, unsigned leaf_capacity = 1, TreeLayout layout = TreeLayout::Balanced);

  static KeyTree build_balanced(std::span<const MemberId> members, unsigned degree);
  static KeyTree build_flat(std::span<const MemberId> members);
  /// Balanced tree over ceil(N/M) cluster leaves with members packed M per
  /// leaf in order.
  static KeyTree build_clustered(std::span<const MemberId> members, unsigned degree, unsigned cluster_size);

  unsigned degree() const { return degree_; }
  unsigned leaf_capacity() const { return capacity_; }
  TreeLayout layout() const { return layout_; }
  std::uint64_t version() const { return version_; }

  bool empty() const { return nodes_.empty(); }
  std::size_t member_count() const { return placement_.size(); }
  std::size_t node_count() const { return nodes_.size(); }
  bool contains(MemberId m) const { return placement_.contains(m); }
  bool has_node(NodeId n) const { return nodes_.contains(n); }

  const KeyNode& node(NodeId n) const;
  const std::map<NodeId, KeyNode>& nodes() const { return nodes_; }
  const std::map<MemberId, NodeId>& placement() const { return placement_; }
  std::vector<MemberId> members() const;

  NodeId leaf_of(MemberId m) const;
  std::vector<NodeId> path_to_root(MemberId m) const;
  std::vector<NodeId> path_from(NodeId n) const;
  std::set<MemberId> subtree_members(NodeId n) const;
  /// Children of `n` that exist in the tree.
  std::vector<NodeId> children(NodeId n) const;

  /// Height over all leaves, vacant or not.
  unsigned height() const;
  /// Every leaf at the same depth h, k^h of them, all filled to capacity.
  bool is_full_balanced() const;
  /// Number of nodes currently holding a key.
  std::size_t stored_key_count() const;

  InsertResult insert_member(MemberId m);
  /// Returns the nodes whose keys the removed member knew and others still
  /// share: the path above a vacated leaf, or the whole path when the leaf
  /// is a cluster that keeps other occupants.
  std::vector<NodeId> remove_member(MemberId m);

  void set_key(NodeId n, KeyTerm key);
  void clear_key(NodeId n);
  const KeyTerm& key(NodeId n) const;

  /// Low-level construction used by restructuring batch algorithms.
  void add_node(NodeId id, bool leaf);
  void place(MemberId m, NodeId leaf);
  /// Removes a member without collapsing an emptied tree; a leaf left with
  /// no occupants loses its key.
  void unplace(MemberId m);
  /// Turns a childless leaf into an interior node (key cleared).
  void make_interior(NodeId n);
  /// Moves the occupants and key of leaf `from` onto the vacant leaf `to`.
  void move_leaf(NodeId from, NodeId to);

  /// Throws InternalInconsistency if any structural invariant is broken.
  void check_invariants() const;

  bool operator==(const KeyTree& other) const;

private:
  KeyNode& mutable_node(NodeId n);
  NodeKind kind_for(NodeId id, bool leaf) const;
  std::optional<NodeId> find_slot() const;

  unsigned degree_;
  unsigned capacity_;
  TreeLayout layout_;
  std::uint64_t version_ = 0;
  std::map<NodeId, KeyNode> nodes_;
  std::map<MemberId, NodeId> placement_;
};

} // namespace gkm
