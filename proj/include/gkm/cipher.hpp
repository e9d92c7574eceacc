#pragma once

#include "gkm/node_id.hpp"
#include "gkm/term.hpp"

#include <cstdint>
#include <set>
#include <vector>

namespace gkm {

/// One key (or, for GKMP's key packet, two keys) encrypted under a single
/// existing key. `targets[i]` names the tree slot `payload[i]` is meant for.
struct Ciphertext
{
  std::vector<KeyTerm> payload;
  std::vector<NodeId> targets;
  KeyTerm enc_key = KeyTerm::zero();
  std::uint64_t seq = 0;

  NodeId target_node() const { return targets.front(); }
};

Ciphertext encrypt(const KeyTerm& payload, const KeyTerm& key, NodeId target);
Ciphertext encrypt(std::vector<KeyTerm> payload, std::vector<NodeId> targets, const KeyTerm& key);

/// Throws Error(NotDecryptable) unless `known` contains the encryption key.
const std::vector<KeyTerm>& decrypt(const Ciphertext& ct, const std::set<KeyTerm>& known);

enum class CryptoMode
{
  Symbolic,
  Concrete,
};

struct CryptoParams
{
  unsigned key_length_bits = 128;
  CryptoMode mode = CryptoMode::Symbolic;

  void validate() const;
};

} // namespace gkm
