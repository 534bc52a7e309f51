#pragma once

#include <memory>
#include <json.hpp>
#include <string>
#include <string_view>

#include "staterecall/seed.hpp"
#include "staterecall/task.hpp"

namespace staterecall {

enum class BaselineName { Oracle, Random, Stateless, FlakyFormat };

std::string_view baseline_token(BaselineName name);
BaselineName parse_baseline(std::string_view token);

struct BaselineSpec {
  BaselineName name = BaselineName::Oracle;
  std::shared_ptr<const BaselineSpec> inner;  // FlakyFormat only
  double fail_rate = 0.0;                     // FlakyFormat only
  Seed rng_seed = 0;

  static BaselineSpec oracle(Seed rng_seed = 0) { return {BaselineName::Oracle, nullptr, 0.0, rng_seed}; }
  static BaselineSpec random(Seed rng_seed = 0) { return {BaselineName::Random, nullptr, 0.0, rng_seed}; }
  static BaselineSpec stateless(Seed rng_seed = 0) {
    return {BaselineName::Stateless, nullptr, 0.0, rng_seed};
  }
  static BaselineSpec flaky(BaselineSpec inner, double fail_rate, Seed rng_seed = 0) {
    return {BaselineName::FlakyFormat, std::make_shared<const BaselineSpec>(std::move(inner)),
            fail_rate, rng_seed};
  }

  void validate() const;
};

nlohmann::json to_json(const BaselineSpec& spec);

/// Non-JSON text FlakyFormat substitutes for a well-formed answer.
inline constexpr const char* kFlakyFiller =
    "Let me keep tracking the updates step by step before settling on an answer...";

/// Synthetic raw completion for `task`. Deterministic in (task, spec).
std::string solve(const TaskInstance& task, const BaselineSpec& spec);

}  // namespace staterecall
