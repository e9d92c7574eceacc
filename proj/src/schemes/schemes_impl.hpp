#pragma once

#include "gkm/scheme.hpp"

namespace gkm::detail {

RekeyPlan simple_leave(const GroupState& s, MemberId m);
RekeyPlan simple_join(const GroupState& s, MemberId m);
RekeyPlan gkmp_leave(const GroupState& s, MemberId m);
RekeyPlan gkmp_join(const GroupState& s, MemberId m);
RekeyPlan lkh_leave(const GroupState& s, MemberId m);
RekeyPlan lkh_join(const GroupState& s, MemberId m);
/// OFC, IHC and the inter-cluster part of Hybrid share the one-way chain.
RekeyPlan chain_leave(const GroupState& s, MemberId m);
RekeyPlan chain_join(const GroupState& s, MemberId m);
RekeyPlan sdlkh_leave(const GroupState& s, MemberId m);
RekeyPlan sdlkh_join(const GroupState& s, MemberId m);

} // namespace gkm::detail
