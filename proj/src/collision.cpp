#include "staterecall/collision.hpp"

#include <algorithm>

#include "staterecall/error.hpp"
#include "staterecall/rng.hpp"

namespace staterecall {

bool same_unordered(const CollisionPair& a, const CollisionPair& b) {
  return (a.first == b.first && a.second == b.second) ||
         (a.first == b.second && a.second == b.first);
}

Velocities simulate_collisions(Velocities state, std::span<const CollisionPair> collisions) {
  for (const auto& [x, y] : collisions) {
    if (x == y) throw Error(ErrorCode::SelfCollision, x.name + " collides with itself");
    auto ix = state.find(x);
    auto iy = state.find(y);
    if (ix == state.end()) throw Error(ErrorCode::UnknownParticle, x.name);
    if (iy == state.end()) throw Error(ErrorCode::UnknownParticle, y.name);
    std::swap(ix->second, iy->second);
  }
  return state;
}

std::int64_t CollisionInstance::answer() const {
  return simulate_collisions(velocities, collisions).at(query);
}

std::vector<std::string> CollisionInstance::option_texts() const {
  std::vector<std::string> out;
  out.reserve(options.size());
  for (auto v : options) out.push_back(std::to_string(v));
  return out;
}

CollisionInstance generate_collision(std::size_t m, std::size_t n, Seed seed, VelocityPool pool) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "m must be at least 2");
  if (pool.hi < pool.lo) throw Error(ErrorCode::InvalidArgument, "empty velocity pool");
  if (m + 3 > pool.size()) {
    throw Error(ErrorCode::PoolExhausted, "m=" + std::to_string(m) + " needs " +
                                              std::to_string(m + 3) + " pool values, pool has " +
                                              std::to_string(pool.size()));
  }
  if (m == 2 && n >= 2) {
    throw Error(ErrorCode::DegenerateNoUndo,
                "with two particles every collision repeats the previous one");
  }

  Rng rng(seed);
  CollisionInstance inst;
  inst.m = m;
  inst.n = n;
  inst.seed = seed;
  inst.pool = pool;

  std::vector<std::int64_t> values(pool.size());
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = pool.lo + static_cast<std::int64_t>(i);
  const auto initial = rng.sample(values, m);
  for (std::size_t i = 0; i < m; ++i) inst.velocities[ParticleLabel::from_ordinal(i)] = initial[i];

  inst.collisions.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    CollisionPair pair;
    do {
      const auto a = static_cast<std::size_t>(rng.uniform(m));
      auto b = static_cast<std::size_t>(rng.uniform(m - 1));
      if (b >= a) ++b;
      pair = {ParticleLabel::from_ordinal(a), ParticleLabel::from_ordinal(b)};
    } while (!inst.collisions.empty() && same_unordered(pair, inst.collisions.back()));
    inst.collisions.push_back(std::move(pair));
  }

  inst.query = ParticleLabel::from_ordinal(static_cast<std::size_t>(rng.uniform(m)));
  const std::int64_t correct = inst.answer();

  std::vector<std::int64_t> others;
  others.reserve(values.size() - 1);
  std::copy_if(values.begin(), values.end(), std::back_inserter(others),
               [&](std::int64_t v) { return v != correct; });
  auto distractors = rng.sample(std::move(others), 3);

  inst.options = {correct, distractors[0], distractors[1], distractors[2]};
  rng.shuffle(inst.options);
  const auto pos = static_cast<std::size_t>(
      std::find(inst.options.begin(), inst.options.end(), correct) - inst.options.begin());
  inst.correct_letter = option_letter(pos);
  return inst;
}

}  // namespace staterecall
