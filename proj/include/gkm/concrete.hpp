#pragma once

#include "gkm/term.hpp"

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace gkm {

using Bytes = std::vector<std::uint8_t>;

/// Maps symbolic terms to byte strings of the configured key length.
///
/// Fresh terms come from HMAC-SHA256 keyed by the run seed; H and the two
/// halves of G are HMAC-SHA256 under distinct domain-separation labels; XOR
/// is bytewise. Only used for sizing and for cross-checking decryptability.
class ConcreteKeys
{
public:
  ConcreteKeys(std::uint64_t seed, unsigned key_length_bits);

  const Bytes& bytes(const KeyTerm& t);
  unsigned key_length_bits() const { return bits_; }

private:
  Bytes expand(std::string_view label, const Bytes& input) const;

  Bytes seed_key_;
  unsigned bits_;
  std::unordered_map<KeyTerm, Bytes> cache_;
};

} // namespace gkm
