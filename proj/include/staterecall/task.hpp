#pragma once

#include <json.hpp>

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "staterecall/astro.hpp"
#include "staterecall/catalog.hpp"
#include "staterecall/collision.hpp"
#include "staterecall/seed.hpp"

namespace staterecall {

inline constexpr int kInstanceSchema = 1;

struct GenerationConfig {
  SwapPattern swap_pattern = SwapPattern::Anchored;
  VelocityPool pool;
};

struct TaskInstance {
  Family family = Family::AstroRecall;
  std::variant<AstroInstance, CollisionInstance> payload;
  std::size_t index = 0;
  Seed instance_seed = 0;

  [[nodiscard]] const AstroInstance& astro() const { return std::get<AstroInstance>(payload); }
  [[nodiscard]] const CollisionInstance& collision() const {
    return std::get<CollisionInstance>(payload);
  }
  [[nodiscard]] std::size_t m() const;
  [[nodiscard]] std::size_t n() const;
  [[nodiscard]] const std::string& correct_letter() const;
  [[nodiscard]] std::vector<std::string> option_letters() const;
  [[nodiscard]] std::vector<std::string> option_texts() const;

  friend bool operator==(const TaskInstance&, const TaskInstance&) = default;
};

/// Derives the instance seed from `base_seed` and generates the payload.
/// `catalog` is required for AstroRecall and ignored otherwise.
TaskInstance generate_task(Family family, const Catalog* catalog, std::size_t m, std::size_t n,
                           std::size_t index, Seed base_seed, const GenerationConfig& cfg = {});

/// Canonical form: object keys sorted, carries "schema": 1.
nlohmann::json to_json(const TaskInstance& task);
TaskInstance task_from_json(const nlohmann::json& j);
/// Compact single-line dump of to_json().
std::string canonical_string(const TaskInstance& task);

}  // namespace staterecall
