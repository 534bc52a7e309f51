#pragma once

#include <compare>
#include <cstddef>
#include <string>
#include <string_view>

namespace staterecall {

// Bijective base-26 naming: 0 -> a, 25 -> z, 26 -> aa, 27 -> ab, ...
std::string alpha_label(std::size_t ordinal, char first);
// Inverse of alpha_label. Throws Error(InvalidArgument) on anything that is
// not a run of letters in the expected case.
std::size_t alpha_ordinal(std::string_view label, char first);

/// Astro variable name (lowercase sequence a, b, ..., z, aa, ...).
struct VarName {
  std::string name;

  static VarName from_ordinal(std::size_t i) { return {alpha_label(i, 'a')}; }
  [[nodiscard]] std::size_t ordinal() const { return alpha_ordinal(name, 'a'); }

  friend bool operator==(const VarName&, const VarName&) = default;
  friend auto operator<=>(const VarName&, const VarName&) = default;
};

/// Collision particle label (uppercase sequence A, B, ..., Z, AA, ...).
struct ParticleLabel {
  std::string name;

  static ParticleLabel from_ordinal(std::size_t i) { return {alpha_label(i, 'A')}; }
  [[nodiscard]] std::size_t ordinal() const { return alpha_ordinal(name, 'A'); }

  friend bool operator==(const ParticleLabel&, const ParticleLabel&) = default;
  friend auto operator<=>(const ParticleLabel&, const ParticleLabel&) = default;
};

/// Option letter for position i (A, B, C, ...).
inline std::string option_letter(std::size_t i) { return alpha_label(i, 'A'); }

}  // namespace staterecall
