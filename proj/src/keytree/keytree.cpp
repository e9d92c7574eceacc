#include "gkm/keytree.hpp"

#include "gkm/error.hpp"

#include <algorithm>
#include <tuple>

namespace gkm {

KeyTree::KeyTree(unsigned degree, unsigned leaf_capacity, TreeLayout layout)
  : degree_(degree)
  , capacity_(leaf_capacity)
  , layout_(layout)
{
  if (degree < 2) {
    throw Error(ErrorCode::InvalidParams, "tree degree must be at least 2");
  }
  if (leaf_capacity < 1) {
    throw Error(ErrorCode::InvalidParams, "leaf capacity must be at least 1");
  }
}

namespace {

unsigned
min_height(std::size_t leaves, unsigned degree)
{
  unsigned h = 0;
  std::uint64_t span = 1;
  while (span < leaves) {
    span *= degree;
    ++h;
  }
  return h;
}

} // namespace

KeyTree
KeyTree::build_balanced(std::span<const MemberId> members, unsigned degree)
{
  return build_clustered(members, degree, 1);
}

KeyTree
KeyTree::build_clustered(std::span<const MemberId> members, unsigned degree, unsigned cluster_size)
{
  if (members.empty()) {
    throw Error(ErrorCode::EmptyGroup, "cannot build a key tree without members");
  }
  KeyTree tree(degree, cluster_size);
  const std::size_t leaves = (members.size() + cluster_size - 1) / cluster_size;
  const unsigned h = min_height(leaves, degree);

  for (unsigned d = 0; d <= h; ++d) {
    const auto first = level_start(d, degree);
    const auto width = checked_pow(degree, d);
    for (std::uint64_t i = 0; i < width; ++i) {
      tree.add_node(NodeId{ first + i }, d == h);
    }
  }
  const auto first_leaf = level_start(h, degree);
  for (std::size_t i = 0; i < members.size(); ++i) {
    tree.place(members[i], NodeId{ first_leaf + i / cluster_size });
  }
  return tree;
}

KeyTree
KeyTree::build_flat(std::span<const MemberId> members)
{
  if (members.empty()) {
    throw Error(ErrorCode::EmptyGroup, "cannot build a key tree without members");
  }
  const auto width = static_cast<unsigned>(std::max<std::size_t>(2, members.size()));
  KeyTree tree(width, 1, TreeLayout::Flat);
  tree.add_node(kRoot, false);
  for (unsigned i = 1; i <= width; ++i) {
    tree.add_node(NodeId{ i }, true);
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    tree.place(members[i], NodeId{ i + 1 });
  }
  return tree;
}

NodeKind
KeyTree::kind_for(NodeId id, bool leaf) const
{
  if (id.is_root()) {
    return NodeKind::TekRoot;
  }
  if (!leaf) {
    return NodeKind::Kek;
  }
  return capacity_ > 1 ? NodeKind::ClusterLeaf : NodeKind::IndividualLeaf;
}

void
KeyTree::add_node(NodeId id, bool leaf)
{
  if (!id.is_root() && !nodes_.contains(parent_id(id, degree_))) {
    throw Error(ErrorCode::InternalInconsistency, "parent of node " + to_string(id) + " missing");
  }
  KeyNode n;
  n.id = id;
  n.leaf = leaf;
  n.kind = kind_for(id, leaf);
  nodes_[id] = std::move(n);
  ++version_;
}

void
KeyTree::place(MemberId m, NodeId leaf)
{
  auto& n = mutable_node(leaf);
  if (!n.leaf) {
    throw Error(ErrorCode::InternalInconsistency, "cannot place a member on interior node " + to_string(leaf));
  }
  if (n.occupants.size() >= capacity_) {
    throw Error(ErrorCode::InternalInconsistency, "leaf " + to_string(leaf) + " is full");
  }
  if (placement_.contains(m)) {
    throw Error(ErrorCode::AlreadyMember, to_string(m));
  }
  n.occupants.push_back(m);
  std::sort(n.occupants.begin(), n.occupants.end());
  placement_[m] = leaf;
  ++version_;
}

const KeyNode&
KeyTree::node(NodeId n) const
{
  auto it = nodes_.find(n);
  if (it == nodes_.end()) {
    throw Error(ErrorCode::NodeNotFound, to_string(n));
  }
  return it->second;
}

KeyNode&
KeyTree::mutable_node(NodeId n)
{
  auto it = nodes_.find(n);
  if (it == nodes_.end()) {
    throw Error(ErrorCode::NodeNotFound, to_string(n));
  }
  return it->second;
}

std::vector<MemberId>
KeyTree::members() const
{
  std::vector<MemberId> out;
  out.reserve(placement_.size());
  for (const auto& [m, _] : placement_) {
    out.push_back(m);
  }
  return out;
}

NodeId
KeyTree::leaf_of(MemberId m) const
{
  auto it = placement_.find(m);
  if (it == placement_.end()) {
    throw Error(ErrorCode::MemberNotFound, to_string(m));
  }
  return it->second;
}

std::vector<NodeId>
KeyTree::path_from(NodeId n) const
{
  std::vector<NodeId> path{ n };
  while (!n.is_root()) {
    n = parent_id(n, degree_);
    path.push_back(n);
  }
  return path;
}

std::vector<NodeId>
KeyTree::path_to_root(MemberId m) const
{
  return path_from(leaf_of(m));
}

std::set<MemberId>
KeyTree::subtree_members(NodeId n) const
{
  node(n);
  std::set<MemberId> out;
  for (const auto& [m, leaf] : placement_) {
    if (is_ancestor_or_self(n, leaf, degree_)) {
      out.insert(m);
    }
  }
  return out;
}

std::vector<NodeId>
KeyTree::children(NodeId n) const
{
  std::vector<NodeId> out;
  if (node(n).leaf) {
    return out;
  }
  for (auto c : child_ids(n, degree_)) {
    if (nodes_.contains(c)) {
      out.push_back(c);
    }
  }
  return out;
}

unsigned
KeyTree::height() const
{
  unsigned h = 0;
  for (const auto& [id, n] : nodes_) {
    if (n.leaf) {
      h = std::max(h, depth_of(id, degree_));
    }
  }
  return h;
}

bool
KeyTree::is_full_balanced() const
{
  if (nodes_.empty()) {
    return false;
  }
  const unsigned h = height();
  std::uint64_t leaves = 0;
  for (const auto& [id, n] : nodes_) {
    if (!n.leaf) {
      continue;
    }
    if (depth_of(id, degree_) != h || n.occupants.size() != capacity_) {
      return false;
    }
    ++leaves;
  }
  return leaves == checked_pow(degree_, h);
}

std::size_t
KeyTree::stored_key_count() const
{
  return static_cast<std::size_t>(
    std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) { return kv.second.key.has_value(); }));
}

std::optional<NodeId>
KeyTree::find_slot() const
{
  std::optional<std::tuple<unsigned, NodeId>> best;
  for (const auto& [id, n] : nodes_) {
    if (!n.leaf || n.occupants.size() >= capacity_) {
      continue;
    }
    const auto cand = std::make_tuple(depth_of(id, degree_), id);
    if (!best || cand < *best) {
      best = cand;
    }
  }
  if (!best) {
    return std::nullopt;
  }
  return std::get<1>(*best);
}

InsertResult
KeyTree::insert_member(MemberId m)
{
  if (placement_.contains(m)) {
    throw Error(ErrorCode::AlreadyMember, to_string(m));
  }

  if (nodes_.empty()) {
    if (layout_ == TreeLayout::Flat) {
      add_node(kRoot, false);
      for (auto c : child_ids(kRoot, degree_)) {
        add_node(c, true);
      }
      place(m, NodeId{ 1 });
      return { NodeId{ 1 }, std::nullopt };
    }
    add_node(kRoot, true);
    place(m, kRoot);
    return { kRoot, std::nullopt };
  }

  if (auto slot = find_slot()) {
    place(m, *slot);
    return { *slot, std::nullopt };
  }

  if (layout_ == TreeLayout::Flat) {
    // Children of the root keep their IDs when the degree grows.
    ++degree_;
    const NodeId leaf{ degree_ };
    add_node(leaf, true);
    place(m, leaf);
    return { leaf, std::nullopt };
  }

  // No free slot: split the shallowest (then leftmost) leaf.
  std::optional<std::tuple<unsigned, NodeId>> best;
  for (const auto& [id, n] : nodes_) {
    if (n.leaf) {
      const auto cand = std::make_tuple(depth_of(id, degree_), id);
      if (!best || cand < *best) {
        best = cand;
      }
    }
  }
  const NodeId split = std::get<1>(*best);
  const auto kids = child_ids(split, degree_);

  KeyNode old = nodes_.at(split);
  for (auto c : kids) {
    add_node(c, true);
  }
  auto& moved = nodes_.at(kids[0]);
  moved.key = old.key;
  moved.key_version = old.key_version;
  moved.occupants = old.occupants;
  for (auto occ : old.occupants) {
    placement_[occ] = kids[0];
  }

  auto& interior = nodes_.at(split);
  interior.leaf = false;
  interior.kind = kind_for(split, false);
  interior.occupants.clear();
  interior.key.reset();
  ++interior.key_version;

  place(m, kids[1]);
  return { kids[1], std::make_pair(split, kids[0]) };
}

std::vector<NodeId>
KeyTree::remove_member(MemberId m)
{
  const NodeId leaf = leaf_of(m);
  auto path = path_from(leaf);

  auto& n = mutable_node(leaf);
  std::erase(n.occupants, m);
  placement_.erase(m);
  ++version_;

  if (placement_.empty()) {
    nodes_.clear();
    return {};
  }
  if (n.occupants.empty()) {
    n.key.reset();
    ++n.key_version;
    path.erase(path.begin());
  }
  return path;
}

void
KeyTree::unplace(MemberId m)
{
  auto& n = mutable_node(leaf_of(m));
  std::erase(n.occupants, m);
  placement_.erase(m);
  if (n.occupants.empty()) {
    n.key.reset();
    ++n.key_version;
  }
  ++version_;
}

void
KeyTree::make_interior(NodeId id)
{
  auto& n = mutable_node(id);
  if (!n.occupants.empty()) {
    throw Error(ErrorCode::InternalInconsistency, "cannot make occupied leaf " + to_string(id) + " interior");
  }
  n.leaf = false;
  n.kind = kind_for(id, false);
  n.key.reset();
  ++n.key_version;
  ++version_;
}

void
KeyTree::move_leaf(NodeId from, NodeId to)
{
  auto& src = mutable_node(from);
  auto& dst = mutable_node(to);
  if (!src.leaf || !dst.vacant()) {
    throw Error(ErrorCode::InternalInconsistency, "move_leaf needs a leaf source and a vacant target");
  }
  dst.occupants = std::move(src.occupants);
  dst.key = std::move(src.key);
  src.occupants.clear();
  src.key.reset();
  ++src.key_version;
  ++dst.key_version;
  for (auto m : dst.occupants) {
    placement_[m] = to;
  }
  ++version_;
}

void
KeyTree::set_key(NodeId n, KeyTerm key)
{
  auto& node = mutable_node(n);
  node.key = std::move(key);
  ++node.key_version;
  ++version_;
}

void
KeyTree::clear_key(NodeId n)
{
  auto& node = mutable_node(n);
  node.key.reset();
  ++node.key_version;
  ++version_;
}

const KeyTerm&
KeyTree::key(NodeId n) const
{
  const auto& nd = node(n);
  if (!nd.key) {
    throw Error(ErrorCode::InternalInconsistency, "node " + to_string(n) + " holds no key");
  }
  return *nd.key;
}

void
KeyTree::check_invariants() const
{
  auto fail = [](const std::string& why) { throw Error(ErrorCode::InternalInconsistency, why); };
  if (nodes_.empty()) {
    if (!placement_.empty()) {
      fail("members placed in an empty tree");
    }
    return;
  }
  if (!nodes_.contains(kRoot)) {
    fail("root missing");
  }
  std::size_t placed = 0;
  for (const auto& [id, n] : nodes_) {
    if (n.id != id) {
      fail("node id mismatch at " + to_string(id));
    }
    if ((n.kind == NodeKind::TekRoot) != id.is_root()) {
      fail("TEK kind must sit exactly at the root");
    }
    if (!id.is_root() && !nodes_.contains(parent_id(id, degree_))) {
      fail("dangling node " + to_string(id));
    }
    if (!id.is_root() && nodes_.at(parent_id(id, degree_)).leaf) {
      fail("leaf " + to_string(parent_id(id, degree_)) + " has children");
    }
    if (!n.leaf && !n.occupants.empty()) {
      fail("interior node " + to_string(id) + " has occupants");
    }
    if (n.occupants.size() > capacity_) {
      fail("leaf " + to_string(id) + " over capacity");
    }
    for (auto m : n.occupants) {
      auto it = placement_.find(m);
      if (it == placement_.end() || it->second != id) {
        fail("placement disagrees for " + to_string(m));
      }
      ++placed;
    }
  }
  if (placed != placement_.size()) {
    fail("placement lists members missing from leaves");
  }
}

bool
KeyTree::operator==(const KeyTree& other) const
{
  if (degree_ != other.degree_ || capacity_ != other.capacity_ || layout_ != other.layout_ ||
      placement_ != other.placement_ || nodes_.size() != other.nodes_.size()) {
    return false;
  }
  for (auto a = nodes_.begin(), b = other.nodes_.begin(); a != nodes_.end(); ++a, ++b) {
    const auto& x = a->second;
    const auto& y = b->second;
    if (x.id != y.id || x.kind != y.kind || x.leaf != y.leaf || x.key != y.key || x.occupants != y.occupants) {
      return false;
    }
  }
  return true;
}

} // namespace gkm
