#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "staterecall/labels.hpp"
#include "staterecall/seed.hpp"

namespace staterecall {

/// Closed integer range [lo, hi] of initial velocities.
struct VelocityPool {
  std::int64_t lo = 0;
  std::int64_t hi = 99;

  [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(hi - lo + 1); }
  friend bool operator==(const VelocityPool&, const VelocityPool&) = default;
};

using CollisionPair = std::pair<ParticleLabel, ParticleLabel>;
using Velocities = std::map<ParticleLabel, std::int64_t>;

bool same_unordered(const CollisionPair& a, const CollisionPair& b);

/// Each collision exchanges the two particles' current velocities.
Velocities simulate_collisions(Velocities state, std::span<const CollisionPair> collisions);

struct CollisionInstance {
  std::size_t m = 0;
  std::size_t n = 0;
  Seed seed = 0;
  VelocityPool pool;
  Velocities velocities;
  std::vector<CollisionPair> collisions;
  ParticleLabel query;
  std::vector<std::int64_t> options;  // letters A-D by position
  std::string correct_letter;

  [[nodiscard]] std::int64_t answer() const;
  [[nodiscard]] std::vector<std::string> option_texts() const;

  friend bool operator==(const CollisionInstance&, const CollisionInstance&) = default;
};

/// Draw order from Rng(seed): m velocities sampled from the pool; n
/// collisions, each an ordered draw of two distinct particles redrawn while it
/// equals the previous pair as an unordered pair; query particle; three
/// distractors from pool values other than the answer; shuffle of the four
/// options.
CollisionInstance generate_collision(std::size_t m, std::size_t n, Seed seed,
                                     VelocityPool pool = {});

}  // namespace staterecall
