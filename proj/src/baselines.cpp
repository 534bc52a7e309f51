#include "staterecall/baselines.hpp"

#include <algorithm>

#include "staterecall/error.hpp"
#include "staterecall/rng.hpp"

namespace staterecall {

std::string_view baseline_token(BaselineName name) {
  switch (name) {
    case BaselineName::Oracle: return "oracle";
    case BaselineName::Random: return "random";
    case BaselineName::Stateless: return "stateless";
    case BaselineName::FlakyFormat: return "flaky";
  }
  return "unknown";
}

BaselineName parse_baseline(std::string_view token) {
  for (auto n : {BaselineName::Oracle, BaselineName::Random, BaselineName::Stateless,
                 BaselineName::FlakyFormat}) {
    if (baseline_token(n) == token) return n;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown baseline '" + std::string(token) + "'");
}

void BaselineSpec::validate() const {
  if (name == BaselineName::FlakyFormat) {
    if (!inner) throw Error(ErrorCode::InvalidArgument, "flaky baseline needs an inner solver");
    if (!(fail_rate >= 0.0 && fail_rate <= 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "fail rate must lie in [0, 1]");
    }
    inner->validate();
  } else if (inner || fail_rate != 0.0) {
    throw Error(ErrorCode::InvalidArgument, "only the flaky baseline takes an inner solver and fail rate");
  }
}

nlohmann::json to_json(const BaselineSpec& spec) {
  nlohmann::json j = {{"name", baseline_token(spec.name)}, {"rng_seed", spec.rng_seed}};
  if (spec.name == BaselineName::FlakyFormat) {
    j["fail_rate"] = spec.fail_rate;
    j["inner"] = to_json(*spec.inner);
  }
  return j;
}

namespace {

// Independent stream per (solver seed, instance, purpose).
Rng stream(const BaselineSpec& spec, const TaskInstance& task, std::uint64_t salt) {
  std::uint64_t s = spec.rng_seed ^ (salt * 0xD1B54A32D192ED03ULL);
  const std::uint64_t mixed = splitmix64(s) ^ task.instance_seed;
  return Rng(mixed);
}

std::string answer_json(const std::string& letter) { return R"({"answer":")" + letter + R"("})"; }

std::string random_letter(const TaskInstance& task, Rng& rng) {
  const auto letters = task.option_letters();
  return letters[static_cast<std::size_t>(rng.uniform(letters.size()))];
}

// Answer computed from the initial state only. Falls back to a random letter
// when that answer is not among the options.
std::string stateless_letter(const TaskInstance& task, Rng& rng) {
  if (task.family == Family::AstroRecall) {
    const auto& a = task.astro();
    const auto& guess = a.rows.at(a.binding.at(a.query_var)).at(a.retrieve_column);
    if (guess == a.option_a) return "A";
    if (guess == a.option_b) return "B";
    return random_letter(task, rng);
  }
  const auto& c = task.collision();
  const auto guess = c.velocities.at(c.query);
  const auto it = std::find(c.options.begin(), c.options.end(), guess);
  if (it != c.options.end()) return option_letter(static_cast<std::size_t>(it - c.options.begin()));
  return random_letter(task, rng);
}

}  // namespace

std::string solve(const TaskInstance& task, const BaselineSpec& spec) {
  switch (spec.name) {
    case BaselineName::Oracle: {
      // recompute through the simulators rather than echo the stored letter
      const auto texts = task.option_texts();
      const std::string answer = task.family == Family::AstroRecall
                                     ? task.astro().answer()
                                     : std::to_string(task.collision().answer());
      const auto it = std::find(texts.begin(), texts.end(), answer);
      if (it == texts.end()) throw Error(ErrorCode::InvalidArgument, "oracle answer missing from options");
      return answer_json(option_letter(static_cast<std::size_t>(it - texts.begin())));
    }
    case BaselineName::Random: {
      Rng rng = stream(spec, task, 1);
      return answer_json(random_letter(task, rng));
    }
    case BaselineName::Stateless: {
      Rng rng = stream(spec, task, 2);
      return answer_json(stateless_letter(task, rng));
    }
    case BaselineName::FlakyFormat: {
      spec.validate();
      Rng rng = stream(spec, task, 3);
      if (rng.unit() < spec.fail_rate) return kFlakyFiller;
      return solve(task, *spec.inner);
    }
  }
  return {};
}

}  // namespace staterecall
