#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gkm {

enum class TermKind
{
  Zero,
  Fresh,
  HashIter,
  GLeft,
  GRight,
  Xor,
};

/// Symbolic key value. Terms are immutable, shared, and always held in
/// canonical form, so structural equality is a comparison of renderings.
///
/// Canonical form:
///  - HashIter(HashIter(t, a), b) is stored as HashIter(t, a + b)
///  - Xor operands are flattened, sorted, and cancelled in pairs; a single
///    surviving operand collapses to itself and none collapses to Zero
class KeyTerm
{
public:
  static KeyTerm zero();
  static KeyTerm fresh(std::string tag, std::uint64_t index);
  static KeyTerm hash_iter(const KeyTerm& base, std::uint64_t count);
  static KeyTerm g_left(const KeyTerm& base);
  static KeyTerm g_right(const KeyTerm& base);
  static KeyTerm xor_of(std::vector<KeyTerm> operands);

  TermKind kind() const { return node_->kind; }

  const std::string& tag() const { return node_->tag; }
  std::uint64_t index() const { return node_->number; }
  std::uint64_t count() const { return node_->number; }
  const KeyTerm& base() const { return node_->children.front(); }
  std::span<const KeyTerm> operands() const { return node_->children; }

  /// Xor operands of the term; an atom is its own single operand and Zero
  /// has none.
  std::vector<KeyTerm> xor_atoms() const;
  bool is_atom() const { return kind() != TermKind::Xor && kind() != TermKind::Zero; }

  const std::string& repr() const { return node_->repr; }
  std::size_t hash() const { return node_->hash; }

  friend bool operator==(const KeyTerm& a, const KeyTerm& b)
  {
    return a.node_ == b.node_ || (a.node_->hash == b.node_->hash && a.node_->repr == b.node_->repr);
  }
  friend bool operator<(const KeyTerm& a, const KeyTerm& b) { return a.repr() < b.repr(); }

private:
  struct Node
  {
    TermKind kind = TermKind::Zero;
    std::string tag;
    std::uint64_t number = 0;
    std::vector<KeyTerm> children;
    std::string repr;
    std::size_t hash = 0;
  };

  explicit KeyTerm(std::shared_ptr<const Node> n)
    : node_(std::move(n))
  {}

  static KeyTerm make(Node n);

  std::shared_ptr<const Node> node_;
};

/// Per-run source of fresh terms. Each tag has its own counter starting at
/// zero, so the term sequence depends only on the order of requests.
class KeyFactory
{
public:
  KeyTerm fresh_key(const std::string& tag);

private:
  std::map<std::string, std::uint64_t> counters_;
};

KeyTerm hash_h(const KeyTerm& t);
KeyTerm hash_n(const KeyTerm& t, std::uint64_t n);
std::pair<KeyTerm, KeyTerm> owf_g(const KeyTerm& t);
KeyTerm xor_terms(const KeyTerm& a, const KeyTerm& b);

} // namespace gkm

template<>
struct std::hash<gkm::KeyTerm>
{
  std::size_t operator()(const gkm::KeyTerm& t) const noexcept { return t.hash(); }
};
