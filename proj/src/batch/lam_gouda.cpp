#include "batch_impl.hpp"
#include "gkm/error.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace gkm::detail {

namespace {

unsigned
height_for(std::size_t leaves, unsigned degree)
{
  unsigned h = 0;
  std::uint64_t span = 1;
  while (span < leaves) {
    span *= degree;
    ++h;
  }
  return h;
}

/// Balanced subtree of `joiners` hanging from the (interior) node `root`.
std::vector<NodeId>
grow_subtree(KeyTree& t, NodeId root, const std::vector<MemberId>& joiners)
{
  const unsigned k = t.degree();
  const unsigned h = std::max(1u, height_for(joiners.size(), k));
  for (unsigned d = 1; d <= h; ++d) {
    const auto width = checked_pow(k, d);
    for (std::uint64_t i = 0; i < width; ++i) {
      t.add_node(descendant(root, d, i, k), d == h);
    }
  }
  std::vector<NodeId> leaves;
  for (std::size_t i = 0; i < joiners.size(); ++i) {
    const auto leaf = descendant(root, h, i, k);
    t.place(joiners[i], leaf);
    leaves.push_back(leaf);
  }
  return leaves;
}

std::vector<NodeId>
vacant_leaves(const KeyTree& t)
{
  std::vector<NodeId> out;
  for (const auto& [id, n] : t.nodes()) {
    if (n.vacant()) {
      out.push_back(id);
    }
  }
  return out;
}

} // namespace

std::size_t
free_slots(const GroupState& state, const BatchRequest& req)
{
  return vacant_leaves(state.tree).size() + req.leaves.size();
}

std::vector<NodeId>
ancestors_of(const KeyTree& tree, const std::vector<NodeId>& leaves)
{
  std::set<NodeId> out;
  for (auto leaf : leaves) {
    NodeId n = leaf;
    while (!n.is_root()) {
      n = parent_id(n, tree.degree());
      out.insert(n);
    }
  }
  return bottom_up({ out.begin(), out.end() }, tree.degree());
}

SlotLayout
lam_gouda_place(PlanBuilder& b, const BatchRequest& req)
{
  req.validate(b.before());
  auto& t = b.tree();
  const unsigned k = t.degree();
  SlotLayout out;

  std::vector<MemberId> joiners = req.joins;
  std::sort(joiners.begin(), joiners.end());

  std::vector<NodeId> slots = vacant_leaves(t);
  for (auto m : req.leaves) {
    const auto leaf = t.leaf_of(m);
    slots.push_back(leaf);
    out.touched_leaves.push_back(leaf);
    t.unplace(m);
    b.depart(m);
  }
  std::sort(slots.begin(), slots.end());

  if (t.member_count() == 0 && !t.empty() && joiners.size() > slots.size()) {
    // Nothing worth keeping: start over from the joiners alone.
    t = KeyTree(k);
    slots.clear();
    out.touched_leaves.clear();
  }

  auto admit = [&](MemberId m, NodeId leaf) {
    const auto key = b.fresh("ind");
    t.set_key(leaf, key);
    b.admit(m, leaf, leaf, key);
    out.joiners.emplace_back(m, leaf);
    out.touched_leaves.push_back(leaf);
  };

  if (t.empty()) {
    if (!joiners.empty()) {
      t = KeyTree::build_balanced(joiners, k);
      for (const auto& [m, leaf] : t.placement()) {
        admit(m, leaf);
      }
      out.grafted = true;
    }
    return out;
  }

  if (joiners.size() <= slots.size()) {
    for (std::size_t i = 0; i < joiners.size(); ++i) {
      t.place(joiners[i], slots[i]);
      admit(joiners[i], slots[i]);
    }
    return out;
  }

  out.grafted = true;
  std::vector<MemberId> surplus;
  if (!slots.empty()) {
    // Shallowest free slot hosts the rekey subtree; the rest are filled.
    const NodeId graft = slots.front();
    std::size_t next = 0;
    for (std::size_t i = 1; i < slots.size(); ++i) {
      t.place(joiners[next], slots[i]);
      admit(joiners[next], slots[i]);
      ++next;
    }
    surplus.assign(joiners.begin() + static_cast<std::ptrdiff_t>(next), joiners.end());
    t.make_interior(graft);
    for (auto leaf : grow_subtree(t, graft, surplus)) {
      admit(t.node(leaf).occupants.front(), leaf);
    }
    return out;
  }

  // Nobody left and no vacancy: the shallowest leaf moves down one level.
  NodeId graft = kRoot;
  {
    std::optional<std::pair<unsigned, NodeId>> best;
    for (const auto& [id, n] : t.nodes()) {
      if (n.leaf) {
        const auto cand = std::make_pair(depth_of(id, k), id);
        if (!best || cand < *best) {
          best = cand;
        }
      }
    }
    graft = best->second;
  }
  const auto kids = child_ids(graft, k);
  for (auto c : kids) {
    t.add_node(c, true);
  }
  t.move_leaf(graft, kids[0]);
  t.make_interior(graft);
  b.renames().moves[graft] = kids[0];
  out.touched_leaves.push_back(kids[0]);

  if (joiners.size() <= k - 1) {
    for (std::size_t i = 0; i < joiners.size(); ++i) {
      t.place(joiners[i], kids[i + 1]);
      admit(joiners[i], kids[i + 1]);
    }
  } else {
    t.make_interior(kids[1]);
    for (auto leaf : grow_subtree(t, kids[1], joiners)) {
      admit(t.node(leaf).occupants.front(), leaf);
    }
  }
  return out;
}

} // namespace gkm::detail

namespace gkm {

RekeyPlan
lam_gouda_rekey(const GroupState& state, const BatchRequest& req)
{
  if (state.params.scheme != SchemeId::LKH) {
    throw Error(ErrorCode::InvalidParams, "batch rekeying runs over an LKH tree");
  }
  detail::PlanBuilder b(state);
  if (req.empty()) {
    return b.finish();
  }
  auto layout = detail::lam_gouda_place(b, req);
  auto& t = b.tree();
  if (t.member_count() == 0) {
    t = KeyTree(t.degree());
    return b.finish();
  }

  const auto dirtied = detail::ancestors_of(t, layout.touched_leaves);
  b.set_dirtied(dirtied);

  // A node nobody left from keeps its old holders: as in an LKH join, one
  // copy under the old key reaches them all.
  const auto& old = state.tree;
  std::set<NodeId> departed_below;
  for (auto m : req.leaves) {
    NodeId n = old.leaf_of(m);
    while (!n.is_root()) {
      n = parent_id(n, t.degree());
      departed_below.insert(n);
    }
  }
  std::map<NodeId, KeyTerm> reuse;
  for (auto p : dirtied) {
    if (!departed_below.contains(p) && old.has_node(p) && !old.node(p).leaf && old.node(p).key &&
        !old.subtree_members(p).empty()) {
      reuse.emplace(p, *old.node(p).key);
    }
  }

  const std::set<NodeId> changed(dirtied.begin(), dirtied.end());
  std::set<NodeId> admitted;
  for (const auto& [m, leaf] : layout.joiners) {
    admitted.insert(leaf);
  }
  for (auto p : dirtied) {
    if (t.subtree_members(p).empty()) {
      t.clear_key(p);
    } else {
      t.set_key(p, b.fresh(detail::tag_for(t.node(p))));
    }
  }
  for (auto p : dirtied) {
    if (!t.node(p).key) {
      continue;
    }
    const auto& nk = t.key(p);
    const auto it = reuse.find(p);
    if (it != reuse.end()) {
      b.emit(nk, p, it->second, p);
    }
    for (auto c : t.children(p)) {
      const auto& ck = t.node(c).key;
      if (!ck || t.subtree_members(c).empty()) {
        continue;
      }
      if (it != reuse.end() && !changed.contains(c) && !admitted.contains(c)) {
        continue;
      }
      b.emit(nk, p, *ck, c);
    }
  }
  return b.finish();
}

} // namespace gkm
