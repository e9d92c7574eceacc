#include "plan_builder.hpp"
#include "schemes_impl.hpp"

namespace gkm::detail {

RekeyPlan
simple_leave(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  b.tree().remove_member(m);
  b.depart(m);
  if (b.tree().empty()) {
    return b.finish();
  }
  b.set_dirtied({ kRoot });
  const auto gk = b.fresh("tek");
  b.tree().set_key(kRoot, gk);
  for (const auto& [member, leaf] : b.tree().placement()) {
    b.emit(gk, kRoot, b.tree().key(leaf), leaf);
  }
  return b.finish();
}

RekeyPlan
simple_join(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  const auto leaf = b.tree().insert_member(m).leaf;
  const auto ik = b.fresh("ind");
  b.tree().set_key(leaf, ik);
  b.admit(m, leaf, leaf, ik);
  b.set_dirtied({ kRoot });
  const auto gk = b.fresh("tek");
  b.tree().set_key(kRoot, gk);
  for (const auto& [member, l] : b.tree().placement()) {
    b.emit(gk, kRoot, b.tree().key(l), l);
  }
  return b.finish();
}

RekeyPlan
gkmp_leave(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  b.tree().remove_member(m);
  b.depart(m);
  if (b.tree().empty()) {
    b.next().gkek.reset();
    return b.finish();
  }
  b.set_dirtied({ kRoot, kGkekSlot });
  const auto tek = b.fresh("tek");
  const auto gkek = b.fresh("gkek");
  b.tree().set_key(kRoot, tek);
  b.next().gkek = gkek;
  // The rekey packet travels under the GKEK every member (including the
  // one leaving) already holds.
  b.emit({ tek, gkek }, { kRoot, kGkekSlot }, *s.gkek, kGkekSlot);
  return b.finish();
}

RekeyPlan
gkmp_join(const GroupState& s, MemberId m)
{
  PlanBuilder b(s);
  const auto leaf = b.tree().insert_member(m).leaf;
  const auto ik = b.fresh("ind");
  b.tree().set_key(leaf, ik);
  b.admit(m, leaf, leaf, ik);
  b.set_dirtied({ kRoot, kGkekSlot });
  const auto tek = b.fresh("tek");
  const auto gkek = b.fresh("gkek");
  b.tree().set_key(kRoot, tek);
  b.next().gkek = gkek;
  b.emit({ tek, gkek }, { kRoot, kGkekSlot }, ik, leaf);
  if (s.gkek) {
    b.emit({ tek, gkek }, { kRoot, kGkekSlot }, *s.gkek, kGkekSlot);
  }
  return b.finish();
}

} // namespace gkm::detail
