#include <doctest.h>

#include <algorithm>
#include <set>

#include "prompt_oracle.hpp"
#include "staterecall/collision.hpp"
#include "staterecall/prompt.hpp"
#include "support/checks.hpp"

using namespace staterecall;

namespace {
ParticleLabel p(const char* s) { return {s}; }
}  // namespace

TEST_CASE("hand-traced collision sequence") {
  const Velocities start{{p("A"), 2}, {p("B"), 5}, {p("C"), 7}};
  const std::vector<CollisionPair> hits{{p("A"), p("B")}, {p("B"), p("C")}};
  const Velocities want{{p("A"), 5}, {p("B"), 7}, {p("C"), 2}};
  CHECK(simulate_collisions(start, hits) == want);
  CHECK(simulate_collisions(start, {}) == start);
}

TEST_CASE("a repeated exchange restores the original state") {
  const Velocities start{{p("A"), 2}, {p("B"), 5}};
  const std::vector<CollisionPair> hits{{p("A"), p("B")}, {p("A"), p("B")}};
  CHECK(simulate_collisions(start, hits) == start);
}

TEST_CASE("simulation errors") {
  const Velocities start{{p("A"), 2}, {p("B"), 5}};
  const std::vector<CollisionPair> self{{p("A"), p("A")}};
  const std::vector<CollisionPair> unknown{{p("A"), p("Q")}};
  CHECK_ERROR_CODE(simulate_collisions(start, self), ErrorCode::SelfCollision);
  CHECK_ERROR_CODE(simulate_collisions(start, unknown), ErrorCode::UnknownParticle);
}

TEST_CASE("same_unordered ignores order") {
  CHECK(same_unordered({p("A"), p("B")}, {p("B"), p("A")}));
  CHECK_FALSE(same_unordered({p("A"), p("B")}, {p("A"), p("C")}));
}

TEST_CASE("n = 0 answers with the initial velocity") {
  for (Seed s = 0; s < 50; ++s) {
    const auto inst = generate_collision(5, 0, s);
    CHECK(inst.collisions.empty());
    CHECK(inst.answer() == inst.velocities.at(inst.query));
  }
}

TEST_CASE("m = 64, n = 64 instances hold every invariant") {
  for (Seed s = 0; s < 50; ++s) {
    const auto inst = generate_collision(64, 64, s);
    REQUIRE(inst.velocities.size() == 64);
    REQUIRE(inst.collisions.size() == 64);
    std::set<std::int64_t> initial;
    for (const auto& [label, vel] : inst.velocities) {
      CHECK(vel >= 0);
      CHECK(vel <= 99);
      initial.insert(vel);
    }
    CHECK(initial.size() == 64);
    for (std::size_t k = 0; k < inst.collisions.size(); ++k) {
      CHECK(inst.collisions[k].first != inst.collisions[k].second);
      if (k > 0) CHECK_FALSE(same_unordered(inst.collisions[k], inst.collisions[k - 1]));
    }
    REQUIRE(inst.options.size() == 4);
    CHECK(std::set<std::int64_t>(inst.options.begin(), inst.options.end()).size() == 4);
    const auto pos = static_cast<std::size_t>(inst.correct_letter[0] - 'A');
    CHECK(inst.options[pos] == inst.answer());
    CHECK(oracle::solve_collision_prompt(render_collision(inst).text) == inst.correct_letter);
  }
}

TEST_CASE("custom pools are respected") {
  const auto inst = generate_collision(3, 4, 5, VelocityPool{-3, 3});
  for (auto o : inst.options) {
    CHECK(o >= -3);
    CHECK(o <= 3);
  }
}

TEST_CASE("generation errors") {
  CHECK_ERROR_CODE(generate_collision(98, 4, 1), ErrorCode::PoolExhausted);
  CHECK_NOTHROW(generate_collision(97, 4, 1));
  CHECK_ERROR_CODE(generate_collision(2, 2, 1), ErrorCode::DegenerateNoUndo);
  CHECK_NOTHROW(generate_collision(2, 1, 1));
  CHECK_NOTHROW(generate_collision(2, 0, 1));
  CHECK_ERROR_CODE(generate_collision(1, 0, 1), ErrorCode::InvalidArgument);
  CHECK_ERROR_CODE(generate_collision(3, 0, 1, VelocityPool{5, 4}), ErrorCode::InvalidArgument);
}

TEST_CASE("generation is deterministic in the seed") {
  CHECK(generate_collision(8, 8, 3) == generate_collision(8, 8, 3));
  CHECK_FALSE(generate_collision(8, 8, 3) == generate_collision(8, 8, 4));
}
