#include "gkm/error.hpp"
#include "plan_builder.hpp"
#include "schemes_impl.hpp"

#include <algorithm>

namespace gkm::detail {

namespace {

struct Departure
{
  std::vector<NodeId> path;
  std::vector<NodeId> dirtied;
  bool emptied = false;
};

Departure
depart(PlanBuilder& b, MemberId m)
{
  Departure d;
  d.path = b.before().tree.path_to_root(m);
  d.dirtied = b.tree().remove_member(m);
  d.emptied = b.tree().empty();
  b.next().member_keys.erase(m);
  b.depart(m);
  b.set_dirtied(d.dirtied);
  return d;
}

/// Path node directly below `p` on the departed member's path.
NodeId
below(const std::vector<NodeId>& path, NodeId p)
{
  auto it = std::find(path.begin(), path.end(), p);
  return *(it - 1);
}

struct Arrival
{
  NodeId leaf;
  std::vector<NodeId> path;
  KeyTerm key = KeyTerm::zero();
  NodeId key_slot;
};

Arrival
arrive(PlanBuilder& b, MemberId m)
{
  auto res = b.tree().insert_member(m);
  if (res.moved) {
    b.renames().moves[res.moved->first] = res.moved->second;
  }
  Arrival a;
  a.leaf = res.leaf;
  a.path = b.tree().path_from(res.leaf);
  if (b.before().params.scheme == SchemeId::Hybrid) {
    a.key = b.fresh("mem");
    a.key_slot = kMemberKeySlot;
    b.next().member_keys.insert_or_assign(m, a.key);
  } else {
    a.key = b.fresh("ind");
    a.key_slot = a.leaf;
    b.tree().set_key(a.leaf, a.key);
  }
  b.admit(m, a.leaf, a.key_slot, a.key);
  return a;
}

std::vector<NodeId>
above_leaf(const std::vector<NodeId>& path)
{
  return { path.begin() + 1, path.end() };
}

} // namespace

RekeyPlan
lkh_leave(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  auto d = depart(b, m);
  if (d.emptied) {
    return b.finish();
  }
  for (auto p : d.dirtied) {
    b.tree().set_key(p, b.fresh(tag_for(b.tree().node(p))));
  }
  for (auto p : d.dirtied) {
    const auto& nk = b.tree().key(p);
    const NodeId prev = below(d.path, p);
    for (auto c : b.tree().children(p)) {
      if (c == prev) {
        if (std::find(d.dirtied.begin(), d.dirtied.end(), c) != d.dirtied.end()) {
          b.emit(nk, p, b.tree().key(c), c);
        }
      } else if (const auto& ck = b.tree().node(c).key) {
        b.emit(nk, p, *ck, c);
      }
    }
  }
  return b.finish();
}

RekeyPlan
lkh_join(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  auto a = arrive(b, m);
  const auto dirtied = above_leaf(a.path);
  b.set_dirtied(dirtied);
  for (auto p : dirtied) {
    const auto nk = b.fresh(tag_for(b.tree().node(p)));
    b.tree().set_key(p, nk);
    b.emit(nk, p, a.key, a.key_slot);
    if (auto old = b.old_key(p)) {
      b.emit(nk, p, *old, p);
    }
  }
  return b.finish();
}

namespace {

KeyTerm
chain_step(SchemeId s, const KeyTerm& t)
{
  return s == SchemeId::OFC ? KeyTerm::g_right(t) : hash_h(t);
}

PayloadRole
chain_role(SchemeId s)
{
  return s == SchemeId::OFC ? PayloadRole::ChainR : PayloadRole::ChainH;
}

/// Installs r, f(r), f(f(r)), ... on `dirtied` from the bottom up.
void
install_chain(PlanBuilder& b, const std::vector<NodeId>& dirtied, const KeyTerm& r)
{
  KeyTerm cur = r;
  for (std::size_t i = 0; i < dirtied.size(); ++i) {
    if (i != 0) {
      cur = chain_step(b.before().params.scheme, cur);
    }
    b.tree().set_key(dirtied[i], cur);
  }
}

} // namespace

RekeyPlan
chain_leave(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  const auto scheme = s.params.scheme;
  const auto role = chain_role(scheme);
  const NodeId leaf = s.tree.leaf_of(m);
  auto d = depart(b, m);
  if (d.emptied) {
    return b.finish();
  }

  const auto r = b.fresh("r");
  install_chain(b, d.dirtied, r);

  if (d.dirtied.front() == leaf) {
    // Cluster keeps members: the new cluster key goes to each survivor.
    for (auto o : b.tree().node(leaf).occupants) {
      b.emit(r, leaf, b.next().member_keys.at(o), kMemberKeySlot, role);
    }
  }
  for (auto p : d.dirtied) {
    if (p == leaf) {
      continue;
    }
    const auto& nk = b.tree().key(p);
    const NodeId prev = below(d.path, p);
    for (auto c : b.tree().children(p)) {
      if (c == prev) {
        continue;
      }
      if (const auto& ck = b.tree().node(c).key) {
        b.emit(nk, p, *ck, c, role);
      }
    }
  }
  return b.finish();
}

RekeyPlan
chain_join(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  const auto role = chain_role(s.params.scheme);
  auto a = arrive(b, m);
  const auto dirtied = s.params.scheme == SchemeId::Hybrid ? a.path : above_leaf(a.path);
  b.set_dirtied(dirtied);
  if (dirtied.empty()) {
    return b.finish();
  }
  const auto r = b.fresh("r");
  install_chain(b, dirtied, r);
  b.emit(r, dirtied.front(), a.key, a.key_slot, role);
  for (auto p : dirtied) {
    if (auto old = b.old_key(p)) {
      b.emit(b.tree().key(p), p, *old, p, role);
    }
  }
  return b.finish();
}

RekeyPlan
sdlkh_leave(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  auto d = depart(b, m);
  if (d.emptied) {
    return b.finish();
  }
  const auto factor = b.fresh("D");
  for (auto p : d.dirtied) {
    b.tree().set_key(p, xor_terms(*b.old_key(p), factor));
    b.add_factor(p, p);
  }
  for (auto p : d.dirtied) {
    const NodeId prev = below(d.path, p);
    for (auto c : b.tree().children(p)) {
      if (c == prev) {
        continue;
      }
      if (const auto& ck = b.tree().node(c).key) {
        b.emit(factor, p, *ck, c, PayloadRole::XorFactor);
      }
    }
  }
  return b.finish();
}

RekeyPlan
sdlkh_join(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  auto a = arrive(b, m);
  const auto dirtied = above_leaf(a.path);
  b.set_dirtied(dirtied);
  if (dirtied.empty()) {
    return b.finish();
  }

  const auto factor = b.fresh("D");
  std::vector<NodeId> created;
  for (auto p : dirtied) {
    const auto old = b.old_key(p);
    if (old && !s.tree.node(p).leaf) {
      b.tree().set_key(p, xor_terms(*old, factor));
      b.add_factor(p, p);
    } else {
      // A split leaf becomes a brand-new interior node.
      b.tree().set_key(p, b.fresh(tag_for(b.tree().node(p))));
      created.push_back(p);
    }
  }
  for (auto p : created) {
    if (auto old = b.old_key(p)) {
      b.emit(b.tree().key(p), p, *old, p);
    }
  }
  for (auto p : dirtied) {
    b.emit(b.tree().key(p), p, a.key, a.key_slot);
  }
  if (created.size() != dirtied.size()) {
    b.emit(factor, kRoot, *b.old_key(kRoot), kRoot, PayloadRole::XorFactor);
  }
  return b.finish();
}

} // namespace gkm::detail
