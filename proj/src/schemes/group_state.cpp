#include "gkm/error.hpp"
#include "gkm/scheme.hpp"

#include <algorithm>

namespace gkm {

std::string
to_string(SchemeId s)
{
  switch (s) {
    case SchemeId::Simple:
      return "Simple";
    case SchemeId::GKMP:
      return "GKMP";
    case SchemeId::LKH:
      return "LKH";
    case SchemeId::OFC:
      return "OFC";
    case SchemeId::IHC:
      return "IHC";
    case SchemeId::SDLKH:
      return "SDLKH";
    case SchemeId::Hybrid:
      return "Hybrid";
  }
  return "?";
}

SchemeId
parse_scheme(const std::string& name)
{
  for (auto s : { SchemeId::Simple,
                  SchemeId::GKMP,
                  SchemeId::LKH,
                  SchemeId::OFC,
                  SchemeId::IHC,
                  SchemeId::SDLKH,
                  SchemeId::Hybrid }) {
    if (to_string(s) == name) {
      return s;
    }
  }
  if (name == "SD-LKH") {
    return SchemeId::SDLKH;
  }
  if (name == "OFT") {
    return SchemeId::OFC;
  }
  throw Error(ErrorCode::InvalidParams, "unknown scheme '" + name + "'");
}

std::string
to_string(MessageKind k)
{
  return k == MessageKind::Unicast ? "unicast" : "multicast";
}

std::string
to_string(PayloadRole r)
{
  switch (r) {
    case PayloadRole::Key:
      return "key";
    case PayloadRole::ChainH:
      return "chain-H";
    case PayloadRole::ChainR:
      return "chain-R";
    case PayloadRole::XorFactor:
      return "xor-factor";
  }
  return "?";
}

void
SchemeParams::validate() const
{
  if (degree < 2) {
    throw Error(ErrorCode::InvalidParams, "degree must be at least 2");
  }
  if (scheme == SchemeId::OFC && degree != 2) {
    throw Error(ErrorCode::InvalidParams, "OFC requires a binary tree");
  }
  if (cluster_size < 1) {
    throw Error(ErrorCode::InvalidParams, "cluster size must be at least 1");
  }
  if (scheme != SchemeId::Hybrid && cluster_size != 1) {
    throw Error(ErrorCode::InvalidParams, "only Hybrid supports clusters");
  }
}

std::map<NodeId, KeyTerm>
GroupState::slots_of(MemberId m) const
{
  std::map<NodeId, KeyTerm> out;
  for (auto n : tree.path_to_root(m)) {
    const auto& nd = tree.node(n);
    if (nd.key) {
      out.emplace(n, *nd.key);
    }
  }
  if (gkek) {
    out.emplace(kGkekSlot, *gkek);
  }
  if (auto it = member_keys.find(m); it != member_keys.end()) {
    out.emplace(kMemberKeySlot, it->second);
  }
  return out;
}

std::optional<KeyTerm>
GroupState::group_key() const
{
  if (tree.empty()) {
    return std::nullopt;
  }
  return tree.node(kRoot).key;
}

std::size_t
GroupState::controller_keys_stored() const
{
  std::size_t n = tree.stored_key_count() + (gkek ? 1 : 0);
  if (params.scheme == SchemeId::Hybrid) {
    // One seed per populated cluster; member keys are re-derived from it.
    for (const auto& [id, node] : tree.nodes()) {
      if (node.leaf && !node.occupants.empty()) {
        ++n;
      }
    }
  }
  return n;
}

std::size_t
GroupState::member_keys_stored(MemberId m) const
{
  return slots_of(m).size();
}

std::size_t
GroupState::max_member_keys_stored() const
{
  std::size_t best = 0;
  for (const auto& [m, _] : tree.placement()) {
    best = std::max(best, member_keys_stored(m));
  }
  return best;
}

bool
GroupState::knows_key(const KeyTerm& key) const
{
  if (gkek && *gkek == key) {
    return true;
  }
  for (const auto& [_, k] : member_keys) {
    if (k == key) {
      return true;
    }
  }
  for (const auto& [_, n] : tree.nodes()) {
    if (n.key && *n.key == key) {
      return true;
    }
  }
  return false;
}

NodeId
PositionRename::apply(NodeId n) const
{
  if (auto it = moves.find(n); it != moves.end()) {
    return it->second;
  }
  return n;
}

std::size_t
RekeyPlan::payload_keys() const
{
  std::size_t n = 0;
  for (const auto& m : messages) {
    n += m.ciphertext.payload.size();
  }
  return n;
}

std::size_t
RekeyPlan::unicast_count() const
{
  return static_cast<std::size_t>(std::count_if(
    messages.begin(), messages.end(), [](const auto& m) { return m.kind == MessageKind::Unicast; }));
}

std::size_t
RekeyPlan::multicast_count() const
{
  return messages.size() - unicast_count();
}

std::set<MemberId>
recipients_of(const RekeyMessage& msg, const GroupState& state)
{
  if (!state.knows_key(msg.ciphertext.enc_key)) {
    throw Error(ErrorCode::InternalInconsistency,
                "controller holds no slot keyed " + msg.ciphertext.enc_key.repr());
  }
  std::set<MemberId> out;
  for (const auto& [m, _] : state.tree.placement()) {
    for (const auto& [slot, k] : state.slots_of(m)) {
      if (k == msg.ciphertext.enc_key) {
        out.insert(m);
        break;
      }
    }
  }
  return out;
}

} // namespace gkm
