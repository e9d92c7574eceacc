#include "gkm/error.hpp"
#include "gkm/scheme.hpp"
#include "plan_builder.hpp"
#include "schemes_impl.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace gkm {

namespace detail {

PlanBuilder::PlanBuilder(const GroupState& before)
  : before_(before)
{
  plan_.next = before;
  ++plan_.next.event_counter;
}

void
PlanBuilder::emit(const KeyTerm& payload,
                  NodeId target,
                  const KeyTerm& enc_key,
                  std::optional<NodeId> enc_node,
                  PayloadRole role)
{
  emit(std::vector<KeyTerm>{ payload }, std::vector<NodeId>{ target }, enc_key, enc_node, role);
}

void
PlanBuilder::emit(std::vector<KeyTerm> payload,
                  std::vector<NodeId> targets,
                  const KeyTerm& enc_key,
                  std::optional<NodeId> enc_node,
                  PayloadRole role)
{
  RekeyMessage msg;
  msg.ciphertext = encrypt(std::move(payload), std::move(targets), enc_key);
  msg.role = role;
  msg.enc_node = enc_node;
  plan_.messages.push_back(std::move(msg));
}

void
PlanBuilder::address_last(NodeId destination, NodeId new_position)
{
  plan_.messages.back().destination_node = destination;
  plan_.messages.back().new_position = new_position;
}

void
PlanBuilder::admit(MemberId m, NodeId leaf, NodeId slot, const KeyTerm& key)
{
  plan_.registrations.push_back(Registration{ m, leaf, slot, key });
}

std::optional<KeyTerm>
PlanBuilder::old_key(NodeId n) const
{
  if (!before_.tree.has_node(n)) {
    return std::nullopt;
  }
  return before_.tree.node(n).key;
}

RekeyPlan
PlanBuilder::finish()
{
  auto& next = plan_.next;
  next.tree.check_invariants();

  std::unordered_map<KeyTerm, std::set<MemberId>> holders;
  for (const auto& [m, _] : next.tree.placement()) {
    if (before_.tree.contains(m)) {
      for (const auto& [slot, k] : before_.slots_of(m)) {
        holders[k].insert(m);
      }
    }
    for (const auto& [slot, k] : next.slots_of(m)) {
      holders[k].insert(m);
    }
  }

  std::unordered_set<KeyTerm> individual;
  for (const GroupState* st : std::array<const GroupState*, 2>{ &before_, &next }) {
    if (st->tree.leaf_capacity() == 1) {
      for (const auto& [id, n] : st->tree.nodes()) {
        if (n.leaf && n.key) {
          individual.insert(*n.key);
        }
      }
    }
    for (const auto& [m, k] : st->member_keys) {
      individual.insert(k);
    }
  }
  for (const auto& r : plan_.registrations) {
    individual.insert(r.key);
  }

  std::vector<RekeyMessage> kept;
  for (auto& msg : plan_.messages) {
    auto it = holders.find(msg.ciphertext.enc_key);
    if (it == holders.end() || it->second.empty()) {
      continue;
    }
    msg.recipients = it->second;
    msg.kind = individual.contains(msg.ciphertext.enc_key) ? MessageKind::Unicast : MessageKind::Multicast;
    msg.ciphertext.seq = next.next_seq++;
    kept.push_back(std::move(msg));
  }
  plan_.messages = std::move(kept);
  plan_.new_group_key = next.group_key();
  plan_.degree = next.tree.degree();
  return std::move(plan_);
}

std::string
tag_for(const KeyNode& n)
{
  switch (n.kind) {
    case NodeKind::TekRoot:
      return "tek";
    case NodeKind::Kek:
      return "kek";
    case NodeKind::IndividualLeaf:
      return "ind";
    case NodeKind::ClusterLeaf:
      return "clu";
  }
  return "key";
}

std::vector<NodeId>
bottom_up(std::vector<NodeId> nodes, unsigned degree)
{
  std::sort(nodes.begin(), nodes.end(), [degree](NodeId a, NodeId b) {
    const auto da = depth_of(a, degree);
    const auto db = depth_of(b, degree);
    return std::tie(db, a) < std::tie(da, b);
  });
  return nodes;
}

} // namespace detail

InitResult
init_group(const SchemeParams& params, std::span<const MemberId> members)
{
  params.validate();
  if (members.empty()) {
    throw Error(ErrorCode::EmptyGroup, "initial member list is empty");
  }
  {
    std::set<MemberId> uniq(members.begin(), members.end());
    if (uniq.size() != members.size()) {
      throw Error(ErrorCode::AlreadyMember, "duplicate member in initial list");
    }
  }

  InitResult out;
  auto& st = out.state;
  st.params = params;
  switch (params.scheme) {
    case SchemeId::Simple:
    case SchemeId::GKMP:
      st.tree = KeyTree::build_flat(members);
      break;
    case SchemeId::Hybrid:
      st.tree = KeyTree::build_clustered(members, params.degree, params.cluster_size);
      break;
    default:
      st.tree = KeyTree::build_balanced(members, params.degree);
      break;
  }

  std::vector<NodeId> ids;
  for (const auto& [id, n] : st.tree.nodes()) {
    if (!n.vacant()) {
      ids.push_back(id);
    }
  }
  for (auto id : ids) {
    st.tree.set_key(id, st.keys.fresh_key(detail::tag_for(st.tree.node(id))));
  }
  if (params.scheme == SchemeId::GKMP) {
    st.gkek = st.keys.fresh_key("gkek");
  }
  if (params.scheme == SchemeId::Hybrid) {
    for (auto m : members) {
      st.member_keys.emplace(m, st.keys.fresh_key("mem"));
    }
  }

  for (auto m : members) {
    MemberState ms;
    ms.id = m;
    ms.leaf = st.tree.leaf_of(m);
    ms.degree = st.tree.degree();
    ms.known = st.slots_of(m);
    out.members.emplace(m, std::move(ms));
  }
  return out;
}

RekeyPlan
plan_leave(const GroupState& state, MemberId member)
{
  if (!state.tree.contains(member)) {
    throw Error(ErrorCode::MemberNotFound, to_string(member));
  }
  switch (state.params.scheme) {
    case SchemeId::Simple:
      return detail::simple_leave(state, member);
    case SchemeId::GKMP:
      return detail::gkmp_leave(state, member);
    case SchemeId::LKH:
      return detail::lkh_leave(state, member);
    case SchemeId::OFC:
    case SchemeId::IHC:
    case SchemeId::Hybrid:
      return detail::chain_leave(state, member);
    case SchemeId::SDLKH:
      return detail::sdlkh_leave(state, member);
  }
  throw Error(ErrorCode::InvalidParams, "unknown scheme");
}

RekeyPlan
plan_join(const GroupState& state, MemberId member)
{
  if (state.tree.contains(member)) {
    throw Error(ErrorCode::AlreadyMember, to_string(member));
  }
  switch (state.params.scheme) {
    case SchemeId::Simple:
      return detail::simple_join(state, member);
    case SchemeId::GKMP:
      return detail::gkmp_join(state, member);
    case SchemeId::LKH:
      return detail::lkh_join(state, member);
    case SchemeId::OFC:
    case SchemeId::IHC:
    case SchemeId::Hybrid:
      return detail::chain_join(state, member);
    case SchemeId::SDLKH:
      return detail::sdlkh_join(state, member);
  }
  throw Error(ErrorCode::InvalidParams, "unknown scheme");
}

} // namespace gkm
