#include "batch_impl.hpp"
#include "gkm/error.hpp"

#include <algorithm>
#include <functional>
#include <limits>

namespace gkm {

RegroupResult
regroup(std::span<const unsigned> fragment_depths)
{
  RegroupResult out;
  struct Live
  {
    int node;
    std::size_t order;
  };
  std::vector<Live> live;
  for (std::size_t i = 0; i < fragment_depths.size(); ++i) {
    out.nodes.push_back({ static_cast<int>(i), -1, -1, fragment_depths[i] });
    live.push_back({ static_cast<int>(i), i });
  }
  if (live.empty()) {
    return out;
  }

  auto depth = [&](const Live& l) { return out.nodes[static_cast<std::size_t>(l.node)].depth; };
  auto join = [&](const Live& a, const Live& b) {
    const unsigned d = std::max(depth(a), depth(b)) + 1;
    out.nodes.push_back({ -1, a.node, b.node, d });
    return Live{ static_cast<int>(out.nodes.size() - 1), std::min(a.order, b.order) };
  };
  auto by_depth = [&](const Live& a, const Live& b) {
    return std::make_pair(depth(a), a.order) < std::make_pair(depth(b), b.order);
  };

  while (live.size() > 1) {
    std::sort(live.begin(), live.end(), by_depth);
    const unsigned d = depth(live.front());
    std::size_t n = 0;
    while (n < live.size() && depth(live[n]) == d) {
      ++n;
    }
    std::vector<Live> next;
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      next.push_back(join(live[i], live[i + 1]));
    }
    std::vector<Live> rest(live.begin() + static_cast<std::ptrdiff_t>(n), live.end());
    if (n % 2 == 1) {
      const Live odd = live[n - 1];
      // Pair the odd one with the shallowest deeper tree, which goes left.
      std::vector<Live> deeper = rest;
      deeper.insert(deeper.end(), next.begin(), next.end());
      if (deeper.empty()) {
        next.push_back(odd);
      } else {
        auto it = std::min_element(deeper.begin(), deeper.end(), by_depth);
        const Live partner = *it;
        auto drop = [&](std::vector<Live>& v) {
          std::erase_if(v, [&](const Live& l) { return l.node == partner.node; });
        };
        drop(rest);
        drop(next);
        next.push_back(join(partner, odd));
      }
    }
    next.insert(next.end(), rest.begin(), rest.end());
    live = std::move(next);
  }
  out.root = live.front().node;
  return out;
}

} // namespace gkm

namespace gkm::detail {

namespace {

struct Fragment
{
  enum class Kind
  {
    Subtree,
    Single,
    Joiner,
  } kind;
  NodeId old_root;
  MemberId member;
  unsigned depth = 0;
};

unsigned
occupied_depth(const KeyTree& t, NodeId root)
{
  unsigned best = 0;
  const unsigned base = depth_of(root, t.degree());
  for (auto m : t.subtree_members(root)) {
    best = std::max(best, depth_of(t.leaf_of(m), t.degree()) - base);
  }
  return best;
}

} // namespace

Restructure
rebuild_balanced(PlanBuilder& b, const BatchRequest& req)
{
  req.validate(b.before());
  const KeyTree& old = b.before().tree;
  if (old.degree() != 2) {
    throw Error(ErrorCode::InvalidParams, "balanced batch rekeying needs a binary tree");
  }

  std::set<NodeId> marked;
  for (auto m : req.leaves) {
    for (auto n : old.path_to_root(m)) {
      marked.insert(n);
    }
    b.depart(m);
  }

  std::vector<NodeId> roots;
  if (marked.empty()) {
    if (!old.empty()) {
      roots.push_back(kRoot);
    }
  } else {
    for (auto p : marked) {
      for (auto c : old.children(p)) {
        if (!marked.contains(c)) {
          roots.push_back(c);
        }
      }
    }
  }
  std::sort(roots.begin(), roots.end());

  std::vector<Fragment> frags;
  for (auto c : roots) {
    const auto members = old.subtree_members(c);
    if (members.empty()) {
      continue;
    }
    if (members.size() == 1) {
      const auto m = *members.begin();
      frags.push_back({ Fragment::Kind::Single, old.leaf_of(m), m, 0 });
    } else {
      frags.push_back({ Fragment::Kind::Subtree, c, MemberId{}, occupied_depth(old, c) });
    }
  }
  // Existing fragments order by smallest contained node; joiners follow.
  std::sort(frags.begin(), frags.end(), [](const Fragment& a, const Fragment& b) { return a.old_root < b.old_root; });
  std::vector<MemberId> joiners = req.joins;
  std::sort(joiners.begin(), joiners.end());
  for (auto m : joiners) {
    frags.push_back({ Fragment::Kind::Joiner, NodeId{}, m, 0 });
  }

  Restructure out;
  KeyTree& t = b.tree();
  t = KeyTree(2);
  b.renames().total = true;
  if (frags.empty()) {
    return out;
  }

  std::vector<unsigned> depths;
  for (const auto& f : frags) {
    depths.push_back(f.depth);
  }
  const auto shape = regroup(depths);

  // Copy an old subtree below new id `to`, dropping memberless branches.
  std::function<void(NodeId, NodeId)> embed = [&](NodeId from, NodeId to) {
    const auto& n = old.node(from);
    t.add_node(to, n.leaf);
    if (n.key) {
      t.set_key(to, *n.key);
    }
    b.renames().moves[from] = to;
    for (auto m : n.occupants) {
      t.place(m, to);
    }
    for (auto c : old.children(from)) {
      if (old.subtree_members(c).empty()) {
        continue;
      }
      const auto slot = (c.value - 1) % 2;
      embed(c, NodeId{ 2 * to.value + 1 + slot });
    }
  };

  std::function<void(int, NodeId)> lay = [&](int idx, NodeId at) {
    const auto& rn = shape.nodes[static_cast<std::size_t>(idx)];
    if (rn.fragment < 0) {
      t.add_node(at, false);
      out.interior.push_back(at);
      lay(rn.left, NodeId{ 2 * at.value + 1 });
      lay(rn.right, NodeId{ 2 * at.value + 2 });
      return;
    }
    const auto& f = frags[static_cast<std::size_t>(rn.fragment)];
    switch (f.kind) {
      case Fragment::Kind::Subtree:
        embed(f.old_root, at);
        out.fragment_roots[at] = f.old_root;
        break;
      case Fragment::Kind::Single:
        t.add_node(at, true);
        t.set_key(at, old.key(f.old_root));
        t.place(f.member, at);
        b.renames().moves[f.old_root] = at;
        out.fragment_roots[at] = f.old_root;
        break;
      case Fragment::Kind::Joiner: {
        t.add_node(at, true);
        const auto key = b.fresh("ind");
        t.set_key(at, key);
        t.place(f.member, at);
        b.admit(f.member, at, at, key);
        out.joiners.insert(f.member);
        break;
      }
    }
  };
  lay(shape.root, kRoot);
  out.interior = bottom_up(out.interior, 2);
  return out;
}

} // namespace gkm::detail

namespace gkm {

std::pair<RekeyPlan, PositionRename>
balanced_batch_rekey(const GroupState& state, const BatchRequest& req)
{
  if (state.params.scheme != SchemeId::LKH) {
    throw Error(ErrorCode::InvalidParams, "batch rekeying runs over an LKH tree");
  }
  detail::PlanBuilder b(state);
  if (req.empty()) {
    auto plan = b.finish();
    return { plan, plan.renames };
  }
  const auto r = detail::rebuild_balanced(b, req);
  auto& t = b.tree();
  b.set_dirtied(r.interior);
  for (auto p : r.interior) {
    t.set_key(p, b.fresh(detail::tag_for(t.node(p))));
  }
  for (auto p : r.interior) {
    for (auto c : t.children(p)) {
      b.emit(t.key(p), p, t.key(c), c);
      const auto it = r.fragment_roots.find(c);
      b.address_last(it == r.fragment_roots.end() ? c : it->second, c);
    }
  }
  auto plan = b.finish();
  return { plan, plan.renames };
}

} // namespace gkm
