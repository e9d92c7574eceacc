#include "gkm/concrete.hpp"

#include "gkm/error.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <array>

namespace gkm {

namespace {

Bytes
hmac_sha256(const Bytes& key, const Bytes& msg)
{
  std::array<unsigned char, EVP_MAX_MD_SIZE> out{};
  unsigned int len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), msg.data(), msg.size(), out.data(), &len) ==
      nullptr) {
    throw Error(ErrorCode::InternalInconsistency, "HMAC-SHA256 failed");
  }
  return Bytes(out.begin(), out.begin() + len);
}

void
append(Bytes& b, std::string_view s)
{
  b.insert(b.end(), s.begin(), s.end());
}

} // namespace

ConcreteKeys::ConcreteKeys(std::uint64_t seed, unsigned key_length_bits)
  : bits_(key_length_bits)
{
  if (key_length_bits == 0 || key_length_bits % 8 != 0) {
    throw Error(ErrorCode::InvalidParams, "concrete mode needs a positive whole-byte key length");
  }
  for (int i = 0; i < 8; ++i) {
    seed_key_.push_back(static_cast<std::uint8_t>(seed >> (8 * i)));
  }
}

Bytes
ConcreteKeys::expand(std::string_view label, const Bytes& input) const
{
  const std::size_t want = bits_ / 8;
  Bytes out;
  for (std::uint32_t block = 0; out.size() < want; ++block) {
    Bytes msg;
    append(msg, label);
    msg.push_back(0);
    for (int i = 0; i < 4; ++i) {
      msg.push_back(static_cast<std::uint8_t>(block >> (8 * i)));
    }
    msg.insert(msg.end(), input.begin(), input.end());
    auto chunk = hmac_sha256(seed_key_, msg);
    out.insert(out.end(), chunk.begin(), chunk.end());
  }
  out.resize(want);
  return out;
}

const Bytes&
ConcreteKeys::bytes(const KeyTerm& t)
{
  if (auto it = cache_.find(t); it != cache_.end()) {
    return it->second;
  }

  Bytes value;
  switch (t.kind()) {
    case TermKind::Zero:
      value.assign(bits_ / 8, 0);
      break;
    case TermKind::Fresh: {
      Bytes in;
      append(in, t.tag());
      in.push_back(0);
      append(in, std::to_string(t.index()));
      value = expand("fresh", in);
      break;
    }
    case TermKind::HashIter: {
      value = bytes(t.base());
      for (std::uint64_t i = 0; i < t.count(); ++i) {
        value = expand("H", value);
      }
      break;
    }
    case TermKind::GLeft:
      value = expand("G-left", bytes(t.base()));
      break;
    case TermKind::GRight:
      value = expand("G-right", bytes(t.base()));
      break;
    case TermKind::Xor: {
      value.assign(bits_ / 8, 0);
      for (const auto& op : t.operands()) {
        const auto& b = bytes(op);
        for (std::size_t i = 0; i < value.size(); ++i) {
          value[i] ^= b[i];
        }
      }
      break;
    }
  }
  return cache_.emplace(t, std::move(value)).first->second;
}

} // namespace gkm
