#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace gkm {

/// Position of a key in a k-ary key tree. Root is 0; the children of m are
/// k*m+1 .. k*m+k, numbered top-down and left-to-right.
struct NodeId
{
  std::uint64_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint64_t v)
    : value(v)
  {}

  constexpr bool is_root() const { return value == 0; }
  auto operator<=>(const NodeId&) const = default;
};

inline constexpr NodeId kRoot{ 0 };

struct MemberId
{
  std::uint32_t value = 0;

  constexpr MemberId() = default;
  constexpr explicit MemberId(std::uint32_t v)
    : value(v)
  {}

  auto operator<=>(const MemberId&) const = default;
};

std::string to_string(MemberId m);
std::string to_string(NodeId n);

NodeId parent_id(NodeId m, unsigned degree);
std::vector<NodeId> child_ids(NodeId m, unsigned degree);

/// Depth of a node below the root (root has depth 0).
unsigned depth_of(NodeId m, unsigned degree);

/// First NodeId on level `depth`, i.e. (k^depth - 1) / (k - 1).
std::uint64_t level_start(unsigned depth, unsigned degree);

/// k^exp with overflow detection.
std::uint64_t checked_pow(std::uint64_t base, unsigned exp);

/// Descendant of `root` at relative depth `rel_depth`, `offset` positions
/// from the left within that level of the subtree.
NodeId descendant(NodeId root, unsigned rel_depth, std::uint64_t offset, unsigned degree);

/// True when `ancestor` lies on the path from `node` to the root (inclusive).
bool is_ancestor_or_self(NodeId ancestor, NodeId node, unsigned degree);

/// Level/index label used in figures: K_{level,index} with a 1-based index.
struct LevelLabel
{
  unsigned level = 0;
  std::uint64_t index = 0;
};

LevelLabel level_label(NodeId m, unsigned degree);
std::string label_string(NodeId m, unsigned degree);

} // namespace gkm

template<>
struct std::hash<gkm::NodeId>
{
  std::size_t operator()(const gkm::NodeId& n) const noexcept
  {
    return std::hash<std::uint64_t>{}(n.value);
  }
};

template<>
struct std::hash<gkm::MemberId>
{
  std::size_t operator()(const gkm::MemberId& m) const noexcept
  {
    return std::hash<std::uint32_t>{}(m.value);
  }
};
