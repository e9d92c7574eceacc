#include "gkm/error.hpp"
#include "gkm/scheme.hpp"

#include <algorithm>

namespace gkm {

namespace {

bool
on_path(NodeId n, NodeId leaf, unsigned degree)
{
  return is_pseudo_slot(n) || is_ancestor_or_self(n, leaf, degree);
}

const Registration*
registration_of(const RekeyPlan& plan, MemberId member)
{
  for (const auto& r : plan.registrations) {
    if (r.member == member) {
      return &r;
    }
  }
  return nullptr;
}

MemberState process(const MemberState& ms, const RekeyPlan& plan, const PositionRename& renames);

} // namespace

MemberState
admit_member(const RekeyPlan& plan, MemberId member)
{
  const auto* r = registration_of(plan, member);
  if (r == nullptr) {
    throw Error(ErrorCode::MemberNotFound, to_string(member) + " is not admitted by this plan");
  }
  MemberState ms;
  ms.id = member;
  ms.leaf = r->leaf;
  ms.degree = plan.degree;
  ms.known.emplace(r->slot, r->key);
  // Registration data is already in post-event coordinates.
  return process(ms, plan, PositionRename{});
}

MemberState
apply_plan_member(const MemberState& ms, const RekeyPlan& plan)
{
  if (registration_of(plan, ms.id) != nullptr) {
    return admit_member(plan, ms.id);
  }
  return process(ms, plan, plan.renames);
}

namespace {

MemberState
process(const MemberState& ms, const RekeyPlan& plan, const PositionRename& renames)
{
  MemberState out;
  out.id = ms.id;
  out.degree = plan.degree;
  out.leaf = renames.apply(ms.leaf);

  // Everything the member could decrypt with, old or newly learned.
  std::set<KeyTerm> ring;
  for (const auto& [slot, k] : ms.known) {
    ring.insert(k);
    if (is_pseudo_slot(slot)) {
      out.known.emplace(slot, k);
    } else if (renames.moves.contains(slot) || !renames.total) {
      out.known.emplace(renames.apply(slot), k);
    }
  }

  const std::set<NodeId> dirtied(plan.dirtied_nodes.begin(), plan.dirtied_nodes.end());

  auto learn = [&](NodeId slot, const KeyTerm& k) {
    out.known.insert_or_assign(slot, k);
    ring.insert(k);
  };

  for (const auto& msg : plan.messages) {
    const auto& ct = msg.ciphertext;
    if (!ring.contains(ct.enc_key)) {
      continue;
    }
    const auto& payload = decrypt(ct, ring);
    for (std::size_t i = 0; i < payload.size(); ++i) {
      const NodeId target = ct.targets[i];
      switch (msg.role) {
        case PayloadRole::Key:
          learn(target, payload[i]);
          break;
        case PayloadRole::ChainH:
        case PayloadRole::ChainR: {
          learn(target, payload[i]);
          NodeId t = target;
          KeyTerm cur = payload[i];
          while (!t.is_root() && dirtied.contains(parent_id(t, out.degree))) {
            cur = msg.role == PayloadRole::ChainH ? hash_h(cur) : KeyTerm::g_right(cur);
            t = parent_id(t, out.degree);
            learn(t, cur);
          }
          break;
        }
        case PayloadRole::XorFactor:
          for (const auto& [node, source] : plan.factor_sources) {
            if (!on_path(node, out.leaf, out.degree)) {
              continue;
            }
            if (auto it = ms.known.find(source); it != ms.known.end()) {
              learn(node, xor_terms(it->second, payload[i]));
            }
          }
          break;
      }
    }
  }

  std::erase_if(out.known, [&](const auto& kv) { return !on_path(kv.first, out.leaf, out.degree); });
  return out;
}

} // namespace

} // namespace gkm
