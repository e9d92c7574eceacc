#include "gkm/cipher.hpp"

#include "gkm/error.hpp"

namespace gkm {

Ciphertext
encrypt(const KeyTerm& payload, const KeyTerm& key, NodeId target)
{
  return encrypt(std::vector<KeyTerm>{ payload }, std::vector<NodeId>{ target }, key);
}

Ciphertext
encrypt(std::vector<KeyTerm> payload, std::vector<NodeId> targets, const KeyTerm& key)
{
  if (payload.empty() || payload.size() != targets.size()) {
    throw Error(ErrorCode::InvalidParams, "ciphertext payload and targets must pair up");
  }
  Ciphertext ct;
  ct.payload = std::move(payload);
  ct.targets = std::move(targets);
  ct.enc_key = key;
  return ct;
}

const std::vector<KeyTerm>&
decrypt(const Ciphertext& ct, const std::set<KeyTerm>& known)
{
  if (!known.contains(ct.enc_key)) {
    throw Error(ErrorCode::NotDecryptable, "key " + ct.enc_key.repr() + " not held");
  }
  return ct.payload;
}

void
CryptoParams::validate() const
{
  if (key_length_bits == 0) {
    throw Error(ErrorCode::InvalidParams, "key length must be positive");
  }
}

} // namespace gkm
