#pragma once

#include "gkm/cipher.hpp"
#include "gkm/keytree.hpp"
#include "gkm/node_id.hpp"
#include "gkm/term.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gkm {

enum class SchemeId
{
  Simple,
  GKMP,
  LKH,
  OFC,
  IHC,
  SDLKH,
  Hybrid,
};

std::string to_string(SchemeId s);
SchemeId parse_scheme(const std::string& name);

struct SchemeParams
{
  SchemeId scheme = SchemeId::LKH;
  /// Tree degree (the `a` of a hybrid tree). Ignored by Simple and GKMP.
  unsigned degree = 2;
  /// Members per leaf; only Hybrid uses a value above 1.
  unsigned cluster_size = 1;

  void validate() const;
};

/// Key slots outside the tree: GKMP's key-encryption key and a hybrid
/// member's own key within its cluster.
inline constexpr NodeId kGkekSlot{ std::numeric_limits<std::uint64_t>::max() };
inline constexpr NodeId kMemberKeySlot{ std::numeric_limits<std::uint64_t>::max() - 1 };

inline bool
is_pseudo_slot(NodeId n)
{
  return n == kGkekSlot || n == kMemberKeySlot;
}

/// Controller-side state. Keys live in the tree nodes; GKMP's GKEK and
/// hybrid per-member keys are held alongside.
struct GroupState
{
  SchemeParams params;
  KeyTree tree{ 2 };
  KeyFactory keys;
  std::optional<KeyTerm> gkek;
  std::map<MemberId, KeyTerm> member_keys;
  std::uint64_t event_counter = 0;
  std::uint64_t next_seq = 0;

  /// Every key the member is entitled to, keyed by slot.
  std::map<NodeId, KeyTerm> slots_of(MemberId m) const;
  std::optional<KeyTerm> group_key() const;
  std::size_t controller_keys_stored() const;
  std::size_t member_keys_stored(MemberId m) const;
  std::size_t max_member_keys_stored() const;

  /// True when some slot in the controller's key map holds `key`.
  bool knows_key(const KeyTerm& key) const;
};

enum class MessageKind
{
  Unicast,
  Multicast,
};

/// How a recipient turns the payload into keys.
enum class PayloadRole
{
  /// Install the payload at its target slot.
  Key,
  /// Install, then derive each dirtied ancestor with H.
  ChainH,
  /// Install, then derive each dirtied ancestor with R (right half of G).
  ChainR,
  /// XOR the payload into every factor-derived key on the recipient's path.
  XorFactor,
};

std::string to_string(MessageKind k);
std::string to_string(PayloadRole r);

struct RekeyMessage
{
  std::set<MemberId> recipients;
  Ciphertext ciphertext;
  MessageKind kind = MessageKind::Multicast;
  PayloadRole role = PayloadRole::Key;
  /// Slot whose key encrypts the message, in pre- or post-event numbering.
  std::optional<NodeId> enc_node;
  /// Restructuring batches: the subtree root the message is addressed to and
  /// its position after renaming.
  std::optional<NodeId> destination_node;
  std::optional<NodeId> new_position;
};

struct PositionRename
{
  std::map<NodeId, NodeId> moves;
  /// When set, slots missing from `moves` are discarded rather than kept.
  bool total = false;

  NodeId apply(NodeId n) const;
  bool empty() const { return moves.empty() && !total; }
};

struct Registration
{
  MemberId member;
  NodeId leaf;
  NodeId slot;
  KeyTerm key = KeyTerm::zero();
};

struct RekeyPlan
{
  std::vector<RekeyMessage> messages;
  std::optional<KeyTerm> new_group_key;
  std::vector<NodeId> dirtied_nodes;
  /// New node -> old node whose key is combined with the factor.
  std::map<NodeId, NodeId> factor_sources;
  PositionRename renames;
  std::vector<Registration> registrations;
  std::vector<MemberId> departed;
  unsigned degree = 2;
  GroupState next;

  std::size_t payload_keys() const;
  std::size_t unicast_count() const;
  std::size_t multicast_count() const;
};

struct MemberState
{
  MemberId id;
  NodeId leaf;
  unsigned degree = 2;
  std::map<NodeId, KeyTerm> known;

  bool operator==(const MemberState&) const = default;
};

struct InitResult
{
  GroupState state;
  std::map<MemberId, MemberState> members;
};

InitResult init_group(const SchemeParams& params, std::span<const MemberId> members);

RekeyPlan plan_leave(const GroupState& state, MemberId member);
RekeyPlan plan_join(const GroupState& state, MemberId member);

/// Member-side processing: decrypt what the member can, apply renames and
/// the scheme's derivation rule, and keep only the keys on its new path.
MemberState apply_plan_member(const MemberState& ms, const RekeyPlan& plan);

/// Initial state of a member admitted by `plan`.
MemberState admit_member(const RekeyPlan& plan, MemberId member);

/// Members of `state` currently holding the message's encryption key.
std::set<MemberId> recipients_of(const RekeyMessage& msg, const GroupState& state);

} // namespace gkm
