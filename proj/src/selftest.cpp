#include "staterecall/selftest.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "staterecall/error.hpp"

namespace staterecall {

namespace {

struct FamilyRun {
  std::vector<TaskInstance> tasks;
  std::vector<RenderedPrompt> prompts;
};

FamilyRun generate_all(Family family, const Catalog* catalog, const std::vector<GridCell>& grid,
                       std::size_t per_bin, Seed base) {
  FamilyRun out;
  for (const auto& cell : grid) {
    for (std::size_t i = 0; i < per_bin; ++i) {
      out.tasks.push_back(generate_task(family, catalog, cell.m, cell.n, i, base));
      out.prompts.push_back(render(out.tasks.back()));
    }
  }
  return out;
}

std::vector<RunRecord> score_with(const FamilyRun& run, const BaselineSpec& spec,
                                  const std::optional<std::string>& fault) {
  std::vector<RunRecord> records;
  records.reserve(run.tasks.size());
  for (std::size_t i = 0; i < run.tasks.size(); ++i) {
    RunRecord rec = evaluate_item(run.tasks[i], run.prompts[i], spec, nullptr, ParserConfig{});
    if (fault == "oracle-flip" && spec.name == BaselineName::Oracle) {
      const auto letters = run.tasks[i].option_letters();
      const auto wrong = *std::find_if(letters.begin(), letters.end(),
                                       [&](const std::string& l) { return l != rec.correct_letter; });
      rec.completion = R"({"answer":")" + wrong + R"("})";
      rec.parse = parse_answer(rec.completion, letters, run.tasks[i].option_texts());
      rec.predicted = rec.parse.letter;
      rec.is_correct = score(rec.parse, rec.correct_letter);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << std::fixed << v;
  return os.str();
}

}  // namespace

std::vector<PropertyResult> run_selftest(const SelftestOptions& opts) {
  const std::vector<GridCell> grid =
      opts.quick ? std::vector<GridCell>{{4, 4}, {16, 16}} : square_grid();
  const std::size_t per_bin = opts.quick ? 40 : 100;

  const Catalog catalog = load_catalog(opts.catalog_path, kDefaultTargetColumn, kDefaultRetrieveColumn);
  std::map<Family, FamilyRun> runs;
  for (auto family : {Family::AstroRecall, Family::CollisionSim}) {
    runs[family] = generate_all(family, &catalog, grid, per_bin, opts.base_seed);
  }

  std::vector<PropertyResult> results;
  auto add = [&](std::string name, bool ok, std::string detail) {
    results.push_back({std::move(name), ok, std::move(detail)});
  };

  // oracle-accuracy
  {
    bool ok = true;
    std::string detail = "every bin at accuracy 1 and parsed-weighted 1";
    for (auto& [family, run] : runs) {
      const auto report = aggregate(score_with(run, BaselineSpec::oracle(), opts.inject_fault));
      for (const auto& b : report.bins) {
        if (b.accuracy() != Rational{1, 1} || b.parsed_weighted() != Rational{1, 1}) {
          ok = false;
          detail = std::string(family_token(family)) + " bin " + std::to_string(b.m) + "x" +
                   std::to_string(b.n) + " has accuracy " + b.accuracy().decimal();
          break;
        }
      }
      if (!ok) break;
    }
    add("oracle-accuracy", ok, detail);
  }

  // chance-calibration: random accuracy within 3 binomial sigma of chance
  {
    bool ok = true;
    std::string detail;
    for (auto& [family, run] : runs) {
      const auto overall = aggregate(score_with(run, BaselineSpec::random(7), std::nullopt)).overall();
      const double p = chance_level(family).value();
      const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(overall.total));
      const double acc = overall.accuracy().value();
      const bool in_band = std::abs(acc - p) <= 3 * sigma;
      ok = ok && in_band;
      detail += std::string(family_token(family)) + " " + fmt(acc) + " vs " + fmt(p) + " +/- " +
                fmt(3 * sigma) + "; ";
    }
    add("chance-calibration", ok, detail);
  }

  // flaky-format: parsing failures depress parsed-weighted, not raw accuracy
  {
    bool ok = true;
    std::string detail;
    const auto spec = BaselineSpec::flaky(BaselineSpec::oracle(), 0.5, 11);
    for (auto& [family, run] : runs) {
      const auto overall = aggregate(score_with(run, spec, std::nullopt)).overall();
      const double sigma = std::sqrt(0.25 / static_cast<double>(overall.total));
      const double rate = overall.parsed_rate().value();
      const bool in_band = overall.accuracy() == Rational{1, 1} && std::abs(rate - 0.5) <= 3 * sigma &&
                           overall.parsed_weighted() == overall.parsed_rate();
      ok = ok && in_band;
      detail += std::string(family_token(family)) + " parsed_rate " + fmt(rate) + " accuracy " +
                overall.accuracy().decimal() + "; ";
    }
    add("flaky-format", ok, detail);
  }

  // metric-identity: parsed_weighted * total == correct for every bin
  {
    bool ok = true;
    for (auto& [family, run] : runs) {
      for (const auto& b : aggregate(score_with(run, BaselineSpec::random(3), std::nullopt)).bins) {
        const auto pw = b.parsed_weighted();
        ok = ok && pw.num * b.total == b.correct * pw.den;
      }
    }
    add("metric-identity", ok, "parsed_weighted x total = correct");
  }

  // simulator-invariants on the generated instances
  {
    bool ok = true;
    std::string detail = "conservation, no-undo, option validity";
    for (const auto& task : runs[Family::CollisionSim].tasks) {
      const auto& c = task.collision();
      std::vector<std::int64_t> before;
      std::vector<std::int64_t> after;
      for (const auto& [l, v] : c.velocities) before.push_back(v);
      for (const auto& [l, v] : simulate_collisions(c.velocities, c.collisions)) after.push_back(v);
      std::sort(before.begin(), before.end());
      std::sort(after.begin(), after.end());
      std::vector<std::int64_t> opts_sorted = c.options;
      std::sort(opts_sorted.begin(), opts_sorted.end());
      const bool distinct = std::adjacent_find(opts_sorted.begin(), opts_sorted.end()) == opts_sorted.end();
      bool no_undo = true;
      for (std::size_t k = 1; k < c.collisions.size(); ++k) {
        no_undo = no_undo && !same_unordered(c.collisions[k], c.collisions[k - 1]);
      }
      if (before != after || !distinct || !no_undo) {
        ok = false;
        detail = "collision instance " + std::to_string(task.index) + " violates an invariant";
        break;
      }
    }
    for (const auto& task : runs[Family::AstroRecall].tasks) {
      const auto& a = task.astro();
      if (a.option_a == a.option_b) {
        ok = false;
        detail = "astro distractor equals the answer";
      }
    }
    add("simulator-invariants", ok, detail);
  }

  return results;
}

}  // namespace staterecall
