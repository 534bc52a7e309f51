#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace staterecall {

enum class Family { AstroRecall, CollisionSim };

/// Canonical lowercase token: "astro" or "collision".
std::string_view family_token(Family family);
Family parse_family(std::string_view token);

using Seed = std::uint64_t;

/// HMAC-SHA256 keyed by the 8 big-endian bytes of `base`, over the ASCII
/// string "family|m|n|index" (decimal fields, family as family_token()).
/// The first 8 digest bytes, read big-endian, are the instance seed.
Seed derive_instance_seed(Seed base, Family family, std::uint64_t m, std::uint64_t n,
                          std::uint64_t index);

std::array<unsigned char, 32> sha256(std::string_view bytes);
std::string sha256_hex(std::string_view bytes);

}  // namespace staterecall
