#include "gkm/node_id.hpp"

#include "gkm/error.hpp"

#include <limits>

namespace gkm {

std::string_view
to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::RootHasNoParent:
      return "RootHasNoParent";
    case ErrorCode::EmptyGroup:
      return "EmptyGroup";
    case ErrorCode::MemberNotFound:
      return "MemberNotFound";
    case ErrorCode::AlreadyMember:
      return "AlreadyMember";
    case ErrorCode::NodeNotFound:
      return "NodeNotFound";
    case ErrorCode::NotDecryptable:
      return "NotDecryptable";
    case ErrorCode::InvalidParams:
      return "InvalidParams";
    case ErrorCode::InternalInconsistency:
      return "InternalInconsistency";
    case ErrorCode::InvalidScenario:
      return "InvalidScenario";
    case ErrorCode::NotPredictable:
      return "NotPredictable";
  }
  return "Unknown";
}

std::string
to_string(MemberId m)
{
  return "M" + std::to_string(m.value);
}

std::string
to_string(NodeId n)
{
  return std::to_string(n.value);
}

static void
require_degree(unsigned degree)
{
  if (degree < 2) {
    throw Error(ErrorCode::InvalidParams, "tree degree must be at least 2");
  }
}

NodeId
parent_id(NodeId m, unsigned degree)
{
  require_degree(degree);
  if (m.is_root()) {
    throw Error(ErrorCode::RootHasNoParent, "node 0 is the root");
  }
  return NodeId{ (m.value - 1) / degree };
}

std::vector<NodeId>
child_ids(NodeId m, unsigned degree)
{
  require_degree(degree);
  constexpr auto max = std::numeric_limits<std::uint64_t>::max();
  if (m.value > (max - degree) / degree) {
    throw Error(ErrorCode::InvalidParams, "node id overflow below " + to_string(m));
  }
  std::vector<NodeId> out;
  out.reserve(degree);
  for (unsigned i = 1; i <= degree; ++i) {
    out.emplace_back(degree * m.value + i);
  }
  return out;
}

unsigned
depth_of(NodeId m, unsigned degree)
{
  unsigned d = 0;
  while (!m.is_root()) {
    m = parent_id(m, degree);
    ++d;
  }
  return d;
}

std::uint64_t
checked_pow(std::uint64_t base, unsigned exp)
{
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (r > std::numeric_limits<std::uint64_t>::max() / base) {
      throw Error(ErrorCode::InvalidParams, "power overflow");
    }
    r *= base;
  }
  return r;
}

std::uint64_t
level_start(unsigned depth, unsigned degree)
{
  require_degree(degree);
  return (checked_pow(degree, depth) - 1) / (degree - 1);
}

NodeId
descendant(NodeId root, unsigned rel_depth, std::uint64_t offset, unsigned degree)
{
  // Walking down rel_depth levels maps m to m*k^d + (k^d-1)/(k-1).
  const auto span = checked_pow(degree, rel_depth);
  if (offset >= span) {
    throw Error(ErrorCode::InvalidParams, "descendant offset out of range");
  }
  const auto base = level_start(rel_depth, degree);
  if (root.value != 0 &&
      root.value > (std::numeric_limits<std::uint64_t>::max() - base - offset) / span) {
    throw Error(ErrorCode::InvalidParams, "node id overflow");
  }
  return NodeId{ root.value * span + base + offset };
}

bool
is_ancestor_or_self(NodeId ancestor, NodeId node, unsigned degree)
{
  while (true) {
    if (node == ancestor) {
      return true;
    }
    if (node.is_root() || node.value < ancestor.value) {
      return false;
    }
    node = parent_id(node, degree);
  }
}

LevelLabel
level_label(NodeId m, unsigned degree)
{
  const unsigned d = depth_of(m, degree);
  return LevelLabel{ d, m.value - level_start(d, degree) + 1 };
}

std::string
label_string(NodeId m, unsigned degree)
{
  if (m.is_root()) {
    return "K_0";
  }
  const auto l = level_label(m, degree);
  return "K_{" + std::to_string(l.level) + "," + std::to_string(l.index) + "}";
}

} // namespace gkm
