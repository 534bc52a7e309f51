#include "staterecall/seed.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>

#include "staterecall/error.hpp"

namespace staterecall {

std::string_view family_token(Family family) {
  switch (family) {
    case Family::AstroRecall:
      return "astro";
    case Family::CollisionSim:
      return "collision";
  }
  return "unknown";
}

Family parse_family(std::string_view token) {
  if (token == "astro") return Family::AstroRecall;
  if (token == "collision") return Family::CollisionSim;
  throw Error(ErrorCode::InvalidArgument, "unknown family '" + std::string(token) + "'");
}

Seed derive_instance_seed(Seed base, Family family, std::uint64_t m, std::uint64_t n,
                          std::uint64_t index) {
  std::array<unsigned char, 8> key{};
  for (int i = 0; i < 8; ++i) key[i] = static_cast<unsigned char>(base >> (56 - 8 * i));

  const std::string message = std::string(family_token(family)) + "|" + std::to_string(m) +
                              "|" + std::to_string(n) + "|" + std::to_string(index);

  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int digest_len = 0;
  if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
           reinterpret_cast<const unsigned char*>(message.data()), message.size(),
           digest.data(), &digest_len) == nullptr ||
      digest_len != 32) {
    throw std::runtime_error("HMAC-SHA256 failed");
  }

  Seed out = 0;
  for (int i = 0; i < 8; ++i) out = (out << 8) | digest[i];
  return out;
}

std::array<unsigned char, 32> sha256(std::string_view bytes) {
  std::array<unsigned char, 32> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != 32) {
    throw std::runtime_error("SHA-256 failed");
  }
  return digest;
}

std::string sha256_hex(std::string_view bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char b : sha256(bytes)) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

}  // namespace staterecall
