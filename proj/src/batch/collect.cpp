#include "gkm/batch.hpp"
#include "gkm/error.hpp"

#include <map>
#include <set>

namespace gkm {

BatchRequest
collect(std::span<const MembershipEvent> events, std::uint64_t interval_index)
{
  std::map<MemberId, std::pair<unsigned, unsigned>> tally;
  for (const auto& e : events) {
    auto& [joins, leaves] = tally[e.member];
    (e.kind == EventKind::Join ? joins : leaves) += 1;
  }
  BatchRequest req;
  req.interval_index = interval_index;
  for (const auto& [m, t] : tally) {
    // A consistent history alternates, so only the surplus survives.
    if (t.first == t.second) {
      continue;
    }
    (t.first > t.second ? req.joins : req.leaves).push_back(m);
  }
  return req;
}

void
BatchRequest::validate(const GroupState& state) const
{
  std::set<MemberId> seen;
  for (auto m : leaves) {
    if (!seen.insert(m).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate request for " + to_string(m));
    }
    if (!state.tree.contains(m)) {
      throw Error(ErrorCode::InvalidParams, to_string(m) + " leaves but is not a member");
    }
  }
  for (auto m : joins) {
    if (!seen.insert(m).second) {
      throw Error(ErrorCode::InvalidParams, "duplicate request for " + to_string(m));
    }
    if (state.tree.contains(m)) {
      throw Error(ErrorCode::InvalidParams, to_string(m) + " joins but is already a member");
    }
  }
}

} // namespace gkm
