#include "gkm/term.hpp"

#include "gkm/error.hpp"

#include <algorithm>
#include <functional>

namespace gkm {

namespace {

bool
valid_tag(const std::string& tag)
{
  return !tag.empty() && std::all_of(tag.begin(), tag.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
  });
}

} // namespace

KeyTerm
KeyTerm::make(Node n)
{
  switch (n.kind) {
    case TermKind::Zero:
      n.repr = "0";
      break;
    case TermKind::Fresh:
      n.repr = n.tag + "#" + std::to_string(n.number);
      break;
    case TermKind::HashIter:
      n.repr = (n.number == 1 ? std::string("H(") : "H^" + std::to_string(n.number) + "(") +
               n.children.front().repr() + ")";
      break;
    case TermKind::GLeft:
      n.repr = "L(" + n.children.front().repr() + ")";
      break;
    case TermKind::GRight:
      n.repr = "R(" + n.children.front().repr() + ")";
      break;
    case TermKind::Xor: {
      n.repr = "(";
      for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i != 0) {
          n.repr += " ^ ";
        }
        n.repr += n.children[i].repr();
      }
      n.repr += ")";
      break;
    }
  }
  n.hash = std::hash<std::string>{}(n.repr);
  return KeyTerm(std::make_shared<const Node>(std::move(n)));
}

KeyTerm
KeyTerm::zero()
{
  static const KeyTerm z = make(Node{});
  return z;
}

KeyTerm
KeyTerm::fresh(std::string tag, std::uint64_t index)
{
  if (!valid_tag(tag)) {
    throw Error(ErrorCode::InvalidParams, "fresh tag must be alphanumeric: '" + tag + "'");
  }
  Node n;
  n.kind = TermKind::Fresh;
  n.tag = std::move(tag);
  n.number = index;
  return make(std::move(n));
}

KeyTerm
KeyTerm::hash_iter(const KeyTerm& base, std::uint64_t count)
{
  if (count == 0) {
    return base;
  }
  if (base.kind() == TermKind::HashIter) {
    return hash_iter(base.base(), base.count() + count);
  }
  Node n;
  n.kind = TermKind::HashIter;
  n.number = count;
  n.children = { base };
  return make(std::move(n));
}

KeyTerm
KeyTerm::g_left(const KeyTerm& base)
{
  Node n;
  n.kind = TermKind::GLeft;
  n.children = { base };
  return make(std::move(n));
}

KeyTerm
KeyTerm::g_right(const KeyTerm& base)
{
  Node n;
  n.kind = TermKind::GRight;
  n.children = { base };
  return make(std::move(n));
}

KeyTerm
KeyTerm::xor_of(std::vector<KeyTerm> operands)
{
  std::vector<KeyTerm> flat;
  for (auto& op : operands) {
    auto atoms = op.xor_atoms();
    flat.insert(flat.end(), atoms.begin(), atoms.end());
  }
  std::sort(flat.begin(), flat.end());

  std::vector<KeyTerm> kept;
  for (std::size_t i = 0; i < flat.size();) {
    std::size_t j = i;
    while (j < flat.size() && flat[j] == flat[i]) {
      ++j;
    }
    if ((j - i) % 2 == 1) {
      kept.push_back(flat[i]);
    }
    i = j;
  }

  if (kept.empty()) {
    return zero();
  }
  if (kept.size() == 1) {
    return kept.front();
  }
  Node n;
  n.kind = TermKind::Xor;
  n.children = std::move(kept);
  return make(std::move(n));
}

std::vector<KeyTerm>
KeyTerm::xor_atoms() const
{
  switch (kind()) {
    case TermKind::Zero:
      return {};
    case TermKind::Xor:
      return node_->children;
    default:
      return { *this };
  }
}

KeyTerm
KeyFactory::fresh_key(const std::string& tag)
{
  auto& counter = counters_[tag];
  return KeyTerm::fresh(tag, counter++);
}

KeyTerm
hash_h(const KeyTerm& t)
{
  return KeyTerm::hash_iter(t, 1);
}

KeyTerm
hash_n(const KeyTerm& t, std::uint64_t n)
{
  return KeyTerm::hash_iter(t, n);
}

std::pair<KeyTerm, KeyTerm>
owf_g(const KeyTerm& t)
{
  return { KeyTerm::g_left(t), KeyTerm::g_right(t) };
}

KeyTerm
xor_terms(const KeyTerm& a, const KeyTerm& b)
{
  return KeyTerm::xor_of({ a, b });
}

} // namespace gkm
