#include "batch_impl.hpp"
#include "gkm/error.hpp"

#include <algorithm>

namespace gkm {

namespace {

RekeyPlan
lam_gouda_improved(const GroupState& state, const BatchRequest& req)
{
  req.validate(state);
  if (req.joins.size() > detail::free_slots(state, req)) {
    throw Error(ErrorCode::InvalidParams, "updating factors need every joiner to take a free slot");
  }
  detail::PlanBuilder b(state);
  if (req.empty()) {
    return b.finish();
  }
  const auto layout = detail::lam_gouda_place(b, req);
  auto& t = b.tree();
  if (t.member_count() == 0) {
    t = KeyTree(t.degree());
    return b.finish();
  }

  const auto dirtied = detail::ancestors_of(t, layout.touched_leaves);
  b.set_dirtied(dirtied);
  const std::set<NodeId> dirty(dirtied.begin(), dirtied.end());
  const std::set<NodeId> touched(layout.touched_leaves.begin(), layout.touched_leaves.end());
  const auto factor = b.fresh("f");

  std::vector<NodeId> explicit_nodes;
  bool any_factor = false;
  for (auto p : dirtied) {
    if (t.subtree_members(p).empty()) {
      t.clear_key(p);
    } else if (const auto old = b.old_key(p)) {
      t.set_key(p, xor_terms(*old, factor));
      b.add_factor(p, p);
      any_factor = true;
    } else {
      t.set_key(p, b.fresh(detail::tag_for(t.node(p))));
      explicit_nodes.push_back(p);
    }
  }

  if (any_factor) {
    for (auto p : dirtied) {
      for (auto c : t.children(p)) {
        if (dirty.contains(c) || touched.contains(c) || !t.node(c).key) {
          continue;
        }
        b.emit(factor, c, t.key(c), c, PayloadRole::XorFactor);
      }
    }
  }
  for (auto p : explicit_nodes) {
    for (auto c : t.children(p)) {
      if (const auto& ck = t.node(c).key) {
        b.emit(t.key(p), p, *ck, c);
      }
    }
  }
  for (const auto& [m, leaf] : layout.joiners) {
    for (auto p : t.path_from(leaf)) {
      if (p != leaf && dirty.contains(p) && t.node(p).key) {
        b.emit(t.key(p), p, t.key(leaf), leaf);
      }
    }
  }
  return b.finish();
}

NodeId
lowest_common_ancestor(const KeyTree& t, const std::set<MemberId>& members)
{
  std::optional<NodeId> acc;
  for (auto m : members) {
    NodeId n = t.leaf_of(m);
    if (!acc) {
      acc = n;
      continue;
    }
    NodeId a = *acc;
    while (a != n) {
      if (a > n) {
        a = parent_id(a, t.degree());
      } else {
        n = parent_id(n, t.degree());
      }
    }
    acc = a;
  }
  return *acc;
}

RekeyPlan
balanced_improved(const GroupState& state, const BatchRequest& req)
{
  detail::PlanBuilder b(state);
  if (req.empty()) {
    return b.finish();
  }
  const auto r = detail::rebuild_balanced(b, req);
  const KeyTree& old = state.tree;
  auto& t = b.tree();
  b.set_dirtied(r.interior);
  const std::set<MemberId> leavers(req.leaves.begin(), req.leaves.end());

  std::set<NodeId> factor_nodes;
  std::vector<NodeId> explicit_nodes;
  std::optional<KeyTerm> factor;
  for (auto p : r.interior) {
    const auto below = t.subtree_members(p);
    const bool fresh_members =
      std::any_of(below.begin(), below.end(), [&](MemberId m) { return r.joiners.contains(m); });
    std::optional<NodeId> source;
    if (!fresh_members) {
      const auto q = lowest_common_ancestor(old, below);
      auto survivors = old.subtree_members(q);
      std::erase_if(survivors, [&](MemberId m) { return leavers.contains(m); });
      if (survivors == below) {
        source = q;
      }
    }
    if (source) {
      if (!factor) {
        factor = b.fresh("f");
      }
      t.set_key(p, xor_terms(old.key(*source), *factor));
      b.add_factor(p, *source);
      factor_nodes.insert(p);
    } else {
      t.set_key(p, b.fresh(detail::tag_for(t.node(p))));
      explicit_nodes.push_back(p);
    }
  }

  if (factor) {
    for (const auto& [at, from] : r.fragment_roots) {
      bool reached = false;
      for (auto n : t.path_from(at)) {
        reached = reached || factor_nodes.contains(n);
      }
      if (reached) {
        b.emit(*factor, at, t.key(at), at, PayloadRole::XorFactor);
        b.address_last(from, at);
      }
    }
  }
  for (auto p : explicit_nodes) {
    for (auto c : t.children(p)) {
      b.emit(t.key(p), p, t.key(c), c);
      const auto it = r.fragment_roots.find(c);
      b.address_last(it == r.fragment_roots.end() ? c : it->second, c);
    }
  }
  return b.finish();
}

} // namespace

RekeyPlan
updating_factor_plan(const GroupState& state, const BatchRequest& req, FactorVariant variant)
{
  if (state.params.scheme != SchemeId::LKH) {
    throw Error(ErrorCode::InvalidParams, "batch rekeying runs over an LKH tree");
  }
  switch (variant) {
    case FactorVariant::LamGoudaImproved:
      return lam_gouda_improved(state, req);
    case FactorVariant::BalancedImproved:
      return balanced_improved(state, req);
  }
  throw Error(ErrorCode::InvalidParams, "unknown factor variant");
}

} // namespace gkm
