#include "staterecall/astro.hpp"

#include <numeric>
#include <set>

#include "staterecall/error.hpp"
#include "staterecall/rng.hpp"

namespace staterecall {

std::string_view swap_pattern_token(SwapPattern pattern) {
  switch (pattern) {
    case SwapPattern::Anchored: return "anchored";
    case SwapPattern::TrueSwap: return "true-swap";
    case SwapPattern::General: return "general";
  }
  return "unknown";
}

SwapPattern parse_swap_pattern(std::string_view token) {
  if (token == "anchored") return SwapPattern::Anchored;
  if (token == "true-swap") return SwapPattern::TrueSwap;
  if (token == "general") return SwapPattern::General;
  throw Error(ErrorCode::InvalidArgument, "unknown swap pattern '" + std::string(token) + "'");
}

Bindings simulate_swaps(Bindings state, std::span<const SwapOp> swaps) {
  auto lookup = [&](const VarName& v) -> std::int64_t& {
    auto it = state.find(v);
    if (it == state.end()) throw Error(ErrorCode::UnknownVariable, "'" + v.name + "' is unbound");
    return it->second;
  };
  for (const auto& op : swaps) {
    const std::int64_t first = lookup(op.right_first);
    const std::int64_t second = lookup(op.right_second);
    std::int64_t& dst_first = lookup(op.left_first);
    std::int64_t& dst_second = lookup(op.left_second);
    dst_first = first;
    dst_second = second;
  }
  return state;
}

std::size_t AstroInstance::answer_row() const {
  Bindings initial;
  for (const auto& [var, row] : binding) initial[var] = static_cast<std::int64_t>(row);
  return static_cast<std::size_t>(simulate_swaps(std::move(initial), swaps).at(query_var));
}

std::string AstroInstance::answer() const { return rows.at(answer_row()).at(retrieve_column); }

namespace {

// Two distinct indices in [0, count) excluding `skip` (pass count to skip none).
std::pair<std::size_t, std::size_t> draw_pair(Rng& rng, std::size_t count, std::size_t skip) {
  std::vector<std::size_t> pool;
  pool.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (i != skip) pool.push_back(i);
  }
  auto picked = rng.sample(std::move(pool), 2);
  return {picked[0], picked[1]};
}

}  // namespace

AstroInstance generate_astro(const Catalog& catalog, std::size_t m, std::size_t n, Seed seed,
                             SwapPattern pattern) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "m must be at least 2");
  if (m > catalog.size()) {
    throw Error(ErrorCode::CatalogTooSmall, "m=" + std::to_string(m) + " exceeds " +
                                                std::to_string(catalog.size()) + " catalog rows");
  }
  if (pattern == SwapPattern::Anchored && n > 0 && m < 3) {
    throw Error(ErrorCode::InsufficientVariables,
                "anchored swaps need two variables besides the query variable");
  }

  Rng rng(seed);
  AstroInstance inst;
  inst.m = m;
  inst.n = n;
  inst.seed = seed;
  inst.pattern = pattern;
  inst.columns = catalog.columns;
  inst.target_column = catalog.target_column;
  inst.retrieve_column = catalog.retrieve_column;

  std::vector<std::size_t> order(catalog.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::set<double> seen_targets;
  for (std::size_t idx : order) {
    if (inst.rows.size() == m) break;
    if (!seen_targets.insert(catalog.target_value(idx)).second) continue;
    inst.rows.push_back(catalog.rows[idx]);
    inst.row_catalog_index.push_back(idx);
  }
  if (inst.rows.size() < m) {
    throw Error(ErrorCode::CatalogTooSmall,
                "only " + std::to_string(inst.rows.size()) + " distinct target values available");
  }
  for (std::size_t i = 0; i < m; ++i) inst.binding[VarName::from_ordinal(i)] = i;

  const auto query = static_cast<std::size_t>(rng.uniform(m));
  inst.query_var = VarName::from_ordinal(query);

  inst.swaps.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    SwapOp op;
    switch (pattern) {
      case SwapPattern::Anchored: {
        auto [x, y] = draw_pair(rng, m, query);
        op = {inst.query_var, VarName::from_ordinal(x), VarName::from_ordinal(x),
              VarName::from_ordinal(y)};
        break;
      }
      case SwapPattern::TrueSwap: {
        auto [p, q] = draw_pair(rng, m, m);
        op = {VarName::from_ordinal(p), VarName::from_ordinal(q), VarName::from_ordinal(q),
              VarName::from_ordinal(p)};
        break;
      }
      case SwapPattern::General: {
        auto [p, q] = draw_pair(rng, m, m);
        auto [r, s] = draw_pair(rng, m, m);
        op = {VarName::from_ordinal(p), VarName::from_ordinal(q), VarName::from_ordinal(r),
              VarName::from_ordinal(s)};
        break;
      }
    }
    inst.swaps.push_back(std::move(op));
  }

  const std::size_t answer_row = inst.answer_row();
  auto distractor = static_cast<std::size_t>(rng.uniform(m - 1));
  if (distractor >= answer_row) ++distractor;

  const std::string correct = inst.rows[answer_row].at(catalog.retrieve_column);
  const std::string wrong = inst.rows[distractor].at(catalog.retrieve_column);
  if (rng.uniform(2) == 0) {
    inst.option_a = correct;
    inst.option_b = wrong;
    inst.correct_letter = "A";
  } else {
    inst.option_a = wrong;
    inst.option_b = correct;
    inst.correct_letter = "B";
  }
  return inst;
}

}  // namespace staterecall
