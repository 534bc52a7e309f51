#include "staterecall/labels.hpp"

#include <algorithm>

#include "staterecall/error.hpp"

namespace staterecall {

std::string alpha_label(std::size_t ordinal, char first) {
  std::string out;
  std::size_t k = ordinal + 1;
  while (k > 0) {
    --k;
    out.push_back(static_cast<char>(first + static_cast<char>(k % 26)));
    k /= 26;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::size_t alpha_ordinal(std::string_view label, char first) {
  if (label.empty()) throw Error(ErrorCode::InvalidArgument, "empty label");
  std::size_t k = 0;
  for (char c : label) {
    if (c < first || c > first + 25) {
      throw Error(ErrorCode::InvalidArgument, "bad label '" + std::string(label) + "'");
    }
    k = k * 26 + static_cast<std::size_t>(c - first) + 1;
  }
  return k - 1;
}

}  // namespace staterecall
