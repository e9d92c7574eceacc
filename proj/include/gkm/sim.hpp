#pragma once

#include "gkm/batch.hpp"
#include "gkm/cipher.hpp"
#include "gkm/scheme.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace gkm {

enum class BatchAlgorithm
{
  LamGouda,
  Balanced,
  LamGoudaImproved,
  BalancedImproved,
};

std::string to_string(BatchAlgorithm a);
BatchAlgorithm parse_batch_algorithm(const std::string& name);

struct ScenarioConfig
{
  SchemeParams params;
  /// Members 1..initial_size form the starting group.
  std::uint32_t initial_size = 1;
  std::vector<MembershipEvent> events;
  /// Window length in ticks; unset processes every event on its own.
  std::optional<std::uint64_t> batch_interval;
  BatchAlgorithm batch_algorithm = BatchAlgorithm::LamGouda;
  std::uint64_t seed = 0;
  unsigned key_length_bits = 128;
  CryptoMode crypto_mode = CryptoMode::Symbolic;

  /// Throws InvalidScenario on bad parameters or an event list that does
  /// not match membership (leaving non-members, joining twice).
  void validate() const;

  bool operator==(const ScenarioConfig&) const;
};

/// Random join/leave history over a group that starts as members
/// 1..initial_size. New members get fresh ids; the size stays in
/// [1, max_size].
std::vector<MembershipEvent>
random_events(std::uint32_t initial_size, std::uint32_t max_size, std::size_t count, std::uint64_t seed);

struct CostFields
{
  std::uint64_t unicast_count = 0;
  std::uint64_t multicast_count = 0;
  std::uint64_t payload_keys = 0;
  std::uint64_t bytes = 0;
  std::uint64_t controller_keys_stored = 0;
  std::uint64_t max_member_keys_stored = 0;

  std::uint64_t messages() const { return unicast_count + multicast_count; }
  bool operator==(const CostFields&) const = default;
};

/// Formula values for one event; each field is set only where the formula
/// applies (message counts on full trees, storage on a full post-state).
struct PredictedCost
{
  std::optional<std::uint64_t> messages;
  std::optional<std::uint64_t> payload_keys;
  std::optional<std::uint64_t> bytes;
  std::optional<std::uint64_t> controller_keys_stored;
  std::optional<std::uint64_t> max_member_keys_stored;

  bool operator==(const PredictedCost&) const = default;
};

struct EventCost
{
  std::uint64_t index = 0;
  std::string label;
  CostFields measured;
  PredictedCost predicted;

  bool operator==(const EventCost&) const = default;
};

struct CostReport
{
  SchemeParams params;
  unsigned key_length_bits = 128;
  std::vector<EventCost> events;
  CostFields total;

  bool operator==(const CostReport&) const;
};

struct TraceEvent
{
  std::uint64_t index = 0;
  std::uint64_t tick = 0;
  bool batch = false;
  std::vector<MemberId> joins;
  std::vector<MemberId> leaves;
  std::vector<RekeyMessage> messages;
  std::vector<NodeId> dirtied;
  PositionRename renames;
  std::optional<KeyTerm> group_key;
  /// Keys each leaver held when it left, and each joiner after it joined.
  std::map<MemberId, std::vector<KeyTerm>> departed_keys;
  std::map<MemberId, std::vector<KeyTerm>> joined_keys;
  /// Concrete mode: hex of the first bytes of the new group key.
  std::string group_key_fingerprint;
};

struct Trace
{
  std::optional<KeyTerm> initial_group_key;
  std::vector<TraceEvent> events;
  /// Final controller state, kept for inspection.
  GroupState final_state;
};

/// Full-tree formula values for a group of `n` members.
struct FormulaCosts
{
  std::uint64_t leave_messages = 0;
  std::uint64_t leave_payload = 0;
  std::uint64_t join_messages = 0;
  std::uint64_t join_payload = 0;
  std::uint64_t controller_keys = 0;
  std::uint64_t member_keys = 0;
};

/// Throws NotPredictable unless `n` (or n/M for Hybrid) is k^h with h >= 1.
FormulaCosts predict_costs(const SchemeParams& params, std::uint64_t n);

/// Hybrid controller storage sum_{i=0..h} a^i + C for C = a^h clusters.
std::uint64_t hybrid_storage_sum(unsigned a, std::uint64_t clusters);
/// Closed form ((2a-1)C - 1)/(a-1) of the same quantity.
std::uint64_t hybrid_storage_closed(unsigned a, std::uint64_t clusters);

/// Smallest-storage cluster size with (M-1) + (a-1) log_a(C) <= beta log_a N,
/// C = ceil(N/M); ties go to the smallest M. Unset when infeasible.
std::optional<std::uint32_t> optimize_cluster_size(std::uint32_t n, unsigned a, double beta);

enum class Persona
{
  DepartedMember,
  JoiningMember,
};

struct AttackerView
{
  Persona persona = Persona::DepartedMember;
  std::vector<KeyTerm> known;
  std::vector<Ciphertext> observed;
};

/// Attacker knowledge: the XOR span of everything learned, closed under
/// decryption and the one-way functions over the trace's atoms.
class Closure
{
public:
  bool derivable(const KeyTerm& t) const;
  /// Known terms, opened payloads and reachable derived atoms.
  const std::set<KeyTerm>& terms() const { return terms_; }
  /// Sequence numbers of the ciphertexts the attacker opened.
  const std::vector<std::uint64_t>& opened() const { return opened_; }

private:
  friend Closure attacker_closure(const AttackerView& view, const std::vector<KeyTerm>& extra_universe);

  std::map<KeyTerm, std::size_t> atom_index_;
  std::vector<std::vector<std::uint64_t>> rows_;
  std::vector<std::ptrdiff_t> pivot_row_;
  std::set<KeyTerm> terms_;
  std::vector<std::uint64_t> opened_;
};

/// `extra_universe` lists terms that should be decidable (targets) even if
/// they never appear in the view.
Closure attacker_closure(const AttackerView& view, const std::vector<KeyTerm>& extra_universe = {});

enum class Verdict
{
  Pass,
  Fail,
  NotApplicable,
};

std::string to_string(Verdict v);

struct EventAudit
{
  std::uint64_t index = 0;
  MemberId member;
  EventKind kind = EventKind::Leave;
  Verdict forward_secrecy = Verdict::NotApplicable;
  Verdict backward_secrecy = Verdict::NotApplicable;
  /// Rendering of a group key the persona could derive.
  std::optional<std::string> witness;
  /// Ciphertext sequence numbers the persona opened.
  std::vector<std::uint64_t> opened;

  bool operator==(const EventAudit&) const = default;
};

struct AuditReport
{
  std::vector<EventAudit> events;

  bool all_pass() const;
  std::size_t failures() const;
  bool operator==(const AuditReport&) const = default;
};

AuditReport audit_secrecy(const Trace& trace);

struct ScenarioResult
{
  CostReport cost;
  AuditReport audit;
  Trace trace;
};

/// Deterministic: the same config yields the same trace and reports.
/// Throws InvalidScenario for bad configs and InternalInconsistency when a
/// member ends an event without exactly its path keys.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

} // namespace gkm
