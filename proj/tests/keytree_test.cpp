#include "gkm/error.hpp"
#include "gkm/keytree.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>

using namespace gkm;
using namespace gkm::test;

namespace {

std::vector<std::uint64_t>
values(const std::vector<NodeId>& ids)
{
  std::vector<std::uint64_t> out;
  for (auto n : ids) {
    out.push_back(n.value);
  }
  return out;
}

unsigned
min_height(std::uint64_t n, unsigned k)
{
  unsigned h = 0;
  while (ipow(k, h) < n) {
    ++h;
  }
  return h;
}

KeyTree
keyed(std::uint32_t n, unsigned k)
{
  auto t = KeyTree::build_balanced(members(n), k);
  KeyFactory f;
  for (const auto& [id, node] : t.nodes()) {
    if (!node.vacant()) {
      t.set_key(id, f.fresh_key("k"));
    }
  }
  return t;
}

} // namespace

TEST(NodeIdTest, ParentOfKnownNodes)
{
  EXPECT_EQ(parent_id(N(4), 3), N(1));
  EXPECT_EQ(parent_id(N(1), 3), N(0));
  EXPECT_EQ(parent_id(N(12), 3), N(3));
  const auto kids = child_ids(N(3), 3);
  EXPECT_NE(std::find(kids.begin(), kids.end(), N(12)), kids.end());
}

TEST(NodeIdTest, RootHasNoParent)
{
  try {
    parent_id(kRoot, 2);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RootHasNoParent);
  }
}

TEST(NodeIdTest, ChildrenOfKnownNodes)
{
  EXPECT_EQ(values(child_ids(N(0), 3)), (std::vector<std::uint64_t>{ 1, 2, 3 }));
  EXPECT_EQ(values(child_ids(N(2), 3)), (std::vector<std::uint64_t>{ 7, 8, 9 }));
  EXPECT_EQ(values(child_ids(N(0), 2)), (std::vector<std::uint64_t>{ 1, 2 }));
}

TEST(NodeIdTest, ParentChildRoundTrip)
{
  for (unsigned k = 2; k <= 8; ++k) {
    for (std::uint64_t m = 0; m <= 10000; ++m) {
      for (auto c : child_ids(N(m), k)) {
        ASSERT_EQ(parent_id(c, k), N(m)) << "k=" << k << " m=" << m;
      }
    }
  }
}

TEST(NodeIdTest, LevelLabels)
{
  EXPECT_EQ(label_string(kRoot, 2), "K_0");
  EXPECT_EQ(label_string(N(8), 2), "K_{3,2}");
  EXPECT_EQ(label_string(N(2), 2), "K_{1,2}");
  for (unsigned k = 2; k <= 4; ++k) {
    for (unsigned level = 0; level <= 4; ++level) {
      for (std::uint64_t i = 1; i <= ipow(k, level); ++i) {
        const auto id = at_label(level, i, k);
        const auto l = level_label(id, k);
        ASSERT_EQ(l.level, level);
        ASSERT_EQ(l.index, i);
        ASSERT_EQ(depth_of(id, k), level);
      }
    }
  }
}

TEST(KeyTreeTest, EightMemberBinaryTree)
{
  const auto t = KeyTree::build_balanced(members(8), 2);
  EXPECT_EQ(t.height(), 3U);
  EXPECT_EQ(t.node_count(), 15U);
  EXPECT_EQ(values(t.path_to_root(M(1))), (std::vector<std::uint64_t>{ 7, 3, 1, 0 }));
  EXPECT_TRUE(t.is_full_balanced());
}

TEST(KeyTreeTest, SingleMemberIsRoot)
{
  const auto t = KeyTree::build_balanced(members(1), 2);
  EXPECT_EQ(t.node_count(), 1U);
  EXPECT_EQ(values(t.path_to_root(M(1))), (std::vector<std::uint64_t>{ 0 }));
}

TEST(KeyTreeTest, TwentySevenMemberTernaryTree)
{
  const auto t = KeyTree::build_balanced(members(27), 3);
  std::uint64_t expected_nodes = 0;
  for (unsigned i = 0; i <= 3; ++i) {
    expected_nodes += ipow(3, i);
  }
  EXPECT_EQ(t.height(), 3U);
  EXPECT_EQ(t.node_count(), expected_nodes);
  const auto path = t.path_to_root(M(1));
  ASSERT_EQ(path.size(), 4U);
  EXPECT_EQ(path[1], at_label(2, 1, 3));
  EXPECT_EQ(path[2], at_label(1, 1, 3));
  EXPECT_EQ(path[3], kRoot);
}

TEST(KeyTreeTest, BalancedHeightIsMinimal)
{
  for (unsigned k = 2; k <= 4; ++k) {
    for (std::uint32_t n = 1; n <= 512; ++n) {
      const auto t = KeyTree::build_balanced(members(n), k);
      const auto h = min_height(n, k);
      ASSERT_EQ(t.height(), h) << "k=" << k << " n=" << n;
      for (auto m : t.members()) {
        ASSERT_EQ(t.path_to_root(m).size(), h + 1U);
      }
    }
  }
}

TEST(KeyTreeTest, EmptyMemberListRejected)
{
  try {
    KeyTree::build_balanced({}, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGroup);
  }
}

TEST(KeyTreeTest, MemberPathOfNineMemberTernaryTree)
{
  const auto t = KeyTree::build_balanced(members(9), 3);
  EXPECT_EQ(values(t.path_to_root(M(7))), (std::vector<std::uint64_t>{ 10, 3, 0 }));
}

TEST(KeyTreeTest, PathsAscendViaParent)
{
  const auto t = KeyTree::build_balanced(members(50), 3);
  for (auto m : t.members()) {
    const auto p = t.path_to_root(m);
    EXPECT_EQ(p.back(), kRoot);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
      EXPECT_EQ(parent_id(p[i], 3), p[i + 1]);
      EXPECT_GT(p[i], p[i + 1]);
    }
  }
}

TEST(KeyTreeTest, UnknownMemberPath)
{
  const auto t = KeyTree::build_balanced(members(4), 2);
  try {
    t.path_to_root(M(99));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MemberNotFound);
  }
}

TEST(KeyTreeTest, SubtreeMembers)
{
  const auto t = KeyTree::build_balanced(members(8), 2);
  EXPECT_EQ(t.subtree_members(at_label(1, 2, 2)), (std::set<MemberId>{ M(5), M(6), M(7), M(8) }));
  EXPECT_EQ(t.subtree_members(kRoot).size(), 8U);

  const auto partial = KeyTree::build_balanced(members(3), 2);
  EXPECT_TRUE(partial.subtree_members(N(6)).empty());
  try {
    partial.subtree_members(N(40));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NodeNotFound);
  }
}

TEST(KeyTreeTest, RemoveReturnsPathAboveLeaf)
{
  auto t = keyed(9, 3);
  EXPECT_EQ(values(t.remove_member(M(9))), (std::vector<std::uint64_t>{ 3, 0 }));
  EXPECT_TRUE(t.node(N(12)).vacant());
  EXPECT_FALSE(t.node(N(12)).key.has_value());

  auto bin = keyed(8, 2);
  EXPECT_EQ(bin.remove_member(M(1)), (std::vector<NodeId>{ at_label(2, 1, 2), at_label(1, 1, 2), kRoot }));
}

TEST(KeyTreeTest, RemoveSoleMember)
{
  auto t = keyed(1, 2);
  EXPECT_TRUE(t.remove_member(M(1)).empty());
  EXPECT_TRUE(t.empty());
}

TEST(KeyTreeTest, RemoveUnknownMember)
{
  auto t = keyed(4, 2);
  try {
    t.remove_member(M(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MemberNotFound);
  }
}

TEST(KeyTreeTest, InsertReusesVacancy)
{
  auto t = keyed(8, 2);
  t.remove_member(M(3));
  const auto r = t.insert_member(M(20));
  EXPECT_EQ(r.leaf, N(9));
  EXPECT_FALSE(r.moved.has_value());
  EXPECT_EQ(t.height(), 3U);
}

TEST(KeyTreeTest, InsertPicksLeftmostOfEqualDepth)
{
  auto t = keyed(8, 2);
  t.remove_member(M(6));
  t.remove_member(M(2));
  EXPECT_EQ(t.insert_member(M(20)).leaf, N(8));
  EXPECT_EQ(t.insert_member(M(21)).leaf, N(12));
}

TEST(KeyTreeTest, InsertIntoFullTreeSplitsOneLeaf)
{
  const auto before = keyed(8, 2);
  auto t = before;
  const auto r = t.insert_member(M(9));
  ASSERT_TRUE(r.moved.has_value());

  // Oracle: try splitting every leaf and keep the ones with the smallest
  // resulting height; the chosen leaf must be the leftmost of those.
  std::optional<std::pair<unsigned, NodeId>> best;
  for (const auto& [id, n] : before.nodes()) {
    if (!n.leaf) {
      continue;
    }
    const unsigned h = std::max(before.height(), depth_of(id, 2) + 1);
    if (!best || std::make_pair(h, id) < *best) {
      best = std::make_pair(h, id);
    }
  }
  EXPECT_EQ(r.moved->first, best->second);
  EXPECT_EQ(t.height(), 4U);
  for (auto m : before.members()) {
    if (before.leaf_of(m) != r.moved->first) {
      EXPECT_EQ(t.path_to_root(m), before.path_to_root(m));
    }
  }
  EXPECT_EQ(t.path_to_root(M(9)).size(), 5U);
  t.check_invariants();
}

TEST(KeyTreeTest, InsertDuplicateRejected)
{
  auto t = keyed(4, 2);
  try {
    t.insert_member(M(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::AlreadyMember);
  }
}

TEST(KeyTreeTest, RemoveThenInsertRestoresPlacement)
{
  for (std::uint32_t m = 1; m <= 16; ++m) {
    auto t = keyed(16, 2);
    const auto placement = t.placement();
    t.remove_member(M(m));
    t.insert_member(M(m));
    EXPECT_EQ(t.placement(), placement);
  }
}

TEST(KeyTreeTest, StorageOnFullTrees)
{
  for (unsigned k = 2; k <= 4; ++k) {
    for (unsigned h = 1; h <= 4; ++h) {
      const auto n = static_cast<std::uint32_t>(ipow(k, h));
      const auto t = keyed(n, k);
      std::uint64_t total = 0;
      for (unsigned i = 0; i <= h; ++i) {
        total += ipow(k, i);
      }
      EXPECT_EQ(t.stored_key_count(), total);
      for (auto m : t.members()) {
        EXPECT_EQ(t.path_to_root(m).size(), 1U + h);
      }
    }
  }
}

TEST(KeyTreeTest, ClusteredTree)
{
  const auto t = KeyTree::build_clustered(members(24), 2, 3);
  EXPECT_EQ(t.height(), 3U);
  EXPECT_TRUE(t.is_full_balanced());
  EXPECT_EQ(t.node(t.leaf_of(M(1))).occupants.size(), 3U);
  EXPECT_EQ(t.node(t.leaf_of(M(1))).kind, NodeKind::ClusterLeaf);
  EXPECT_EQ(t.leaf_of(M(1)), t.leaf_of(M(3)));
  EXPECT_NE(t.leaf_of(M(3)), t.leaf_of(M(4)));
}

TEST(KeyTreeTest, NodeKinds)
{
  const auto t = keyed(8, 2);
  EXPECT_EQ(t.node(kRoot).kind, NodeKind::TekRoot);
  EXPECT_EQ(t.node(N(1)).kind, NodeKind::Kek);
  EXPECT_EQ(t.node(N(7)).kind, NodeKind::IndividualLeaf);
}
