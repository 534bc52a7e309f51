#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "staterecall/catalog.hpp"
#include "staterecall/labels.hpp"
#include "staterecall/seed.hpp"

namespace staterecall {

/// Simultaneous assignment `left.first, left.second = right.first, right.second`.
struct SwapOp {
  VarName left_first;
  VarName left_second;
  VarName right_first;
  VarName right_second;

  friend bool operator==(const SwapOp&, const SwapOp&) = default;
};

/// How generated swaps are drawn.
///   Anchored: (q, x) = (x, y) with q the query variable and x != y drawn from
///             the other variables.
///   TrueSwap: (p, q) = (q, p).
///   General:  (p, q) = (r, s), p != q and r != s, each pair drawn independently.
enum class SwapPattern { Anchored, TrueSwap, General };

std::string_view swap_pattern_token(SwapPattern pattern);
SwapPattern parse_swap_pattern(std::string_view token);

using Bindings = std::map<VarName, std::int64_t>;

/// Applies swaps in order. Both right-hand values are read from the state
/// before the op, then written to the two left names.
Bindings simulate_swaps(Bindings state, std::span<const SwapOp> swaps);

struct AstroInstance {
  std::size_t m = 0;
  std::size_t n = 0;
  Seed seed = 0;
  SwapPattern pattern = SwapPattern::Anchored;

  std::vector<std::string> columns;
  std::string target_column;
  std::string retrieve_column;
  std::vector<CatalogRow> rows;                // sampled order; variable i is bound to rows[i]
  std::vector<std::size_t> row_catalog_index;  // position of rows[i] in the source catalog
  std::map<VarName, std::size_t> binding;      // variable -> index into rows
  std::vector<SwapOp> swaps;
  VarName query_var;
  std::string option_a;
  std::string option_b;
  std::string correct_letter;  // "A" or "B"

  /// Row ordinal query_var holds after all swaps.
  [[nodiscard]] std::size_t answer_row() const;
  /// retrieve_column value of answer_row().
  [[nodiscard]] std::string answer() const;
  [[nodiscard]] std::vector<std::string> option_texts() const { return {option_a, option_b}; }

  friend bool operator==(const AstroInstance&, const AstroInstance&) = default;
};

/// Fully determined by (catalog, m, n, seed, pattern).
///
/// Draw order from Rng(seed): full shuffle of catalog row indices, keeping the
/// first m rows whose target values are pairwise distinct; query variable;
/// the n swaps; distractor row among the other m-1; correct position.
AstroInstance generate_astro(const Catalog& catalog, std::size_t m, std::size_t n, Seed seed,
                             SwapPattern pattern = SwapPattern::Anchored);

}  // namespace staterecall
