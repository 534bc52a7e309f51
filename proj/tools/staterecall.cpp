// staterecall: generate, run, score, report, and selftest entry point.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "staterecall/error.hpp"
#include "staterecall/metrics.hpp"
#include "staterecall/runner.hpp"
#include "staterecall/selftest.hpp"

namespace sr = staterecall;
namespace fs = std::filesystem;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridFlags {
  std::string grid;
  bool square = false;
  std::string m_list;
  std::string n_list;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--grid", grid, "Comma list of MxN cells, e.g. 4x4,8x16");
    cmd.add_flag("--square", square, "Diagonal cells 4x4,8x8,16x16,32x32,64x64");
    cmd.add_option("--m", m_list, "Comma list of m values (crossed with --n; default 4,8,16,32,64)");
    cmd.add_option("--n", n_list, "Comma list of n values (crossed with --m; default 4,8,16,32,64)");
  }

  std::vector<sr::GridCell> resolve() const {
    const int sources = (!grid.empty()) + (square ? 1 : 0) + (!m_list.empty() || !n_list.empty());
    if (sources > 1) throw UsageError("use only one of --grid, --square, --m/--n");
    if (!grid.empty()) return sr::parse_grid(grid);
    if (square) return sr::square_grid();
    if (m_list.empty() && n_list.empty()) return sr::default_grid();
    auto values = [](const std::string& text) {
      std::vector<std::size_t> out;
      if (text.empty()) return std::vector<std::size_t>{4, 8, 16, 32, 64};
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
          v = std::stoul(item, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError("bad value '" + item + "' in --m/--n");
        out.push_back(v);
      }
      return out;
    };
    std::vector<sr::GridCell> cells;
    for (auto m : values(m_list)) {
      for (auto n : values(n_list)) cells.push_back({m, n});
    }
    return cells;
  }
};

struct GenerationFlags {
  std::string family;
  std::size_t count = 100;
  std::uint64_t seed = 0;
  std::string catalog = sr::default_catalog_path().string();
  std::string target_column = sr::kDefaultTargetColumn;
  std::string retrieve_column = sr::kDefaultRetrieveColumn;
  std::string swap_pattern = "anchored";
  std::int64_t pool_min = 0;
  std::int64_t pool_max = 99;
  GridFlags grid;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--family", family, "Task family")
        ->required()
        ->check(CLI::IsMember({"astro", "collision"}));
    grid.add_to(cmd);
    cmd.add_option("--count", count, "Instances per (m, n) bin")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--seed", seed, "Base seed")->capture_default_str();
    cmd.add_option("--catalog", catalog, "Catalog CSV (astro)")->capture_default_str();
    cmd.add_option("--target-column", target_column, "Numeric catalog column bound to variables")
        ->capture_default_str();
    cmd.add_option("--retrieve-column", retrieve_column, "Identity catalog column used as answers")
        ->capture_default_str();
    cmd.add_option("--swap-pattern", swap_pattern, "Astro swap pattern")
        ->capture_default_str()
        ->check(CLI::IsMember({"anchored", "true-swap", "general"}));
    cmd.add_option("--pool-min", pool_min, "Smallest collision velocity")->capture_default_str();
    cmd.add_option("--pool-max", pool_max, "Largest collision velocity")->capture_default_str();
  }

  void apply(sr::RunConfig& cfg) const {
    cfg.family = sr::parse_family(family);
    cfg.grid = grid.resolve();
    cfg.instances_per_bin = count;
    cfg.base_seed = seed;
    cfg.catalog_path = catalog;
    cfg.target_column = target_column;
    cfg.retrieve_column = retrieve_column;
    cfg.generation.swap_pattern = sr::parse_swap_pattern(swap_pattern);
    cfg.generation.pool = {pool_min, pool_max};
  }
};

struct ParserFlags {
  bool no_option_text = false;
  std::string think_open = "<think>";
  std::string think_close = "</think>";

  void add_to(CLI::App& cmd) {
    cmd.add_flag("--no-option-text", no_option_text, "Accept only option letters as answers");
    cmd.add_option("--think-open", think_open, "Opening reasoning tag")->capture_default_str();
    cmd.add_option("--think-close", think_close, "Closing reasoning tag")->capture_default_str();
  }

  sr::ParserConfig config() const {
    sr::ParserConfig p;
    p.accept_option_text = !no_option_text;
    p.reasoning_delimiters = {{think_open, think_close}};
    return p;
  }
};

void print_table(std::ostream& os, const sr::GridReport& report) {
  os << "family " << sr::family_token(report.family) << ", chance "
     << report.chance_level().decimal(2) << '\n';
  os << std::left << std::setw(6) << "m" << std::setw(6) << "n" << std::setw(7) << "total"
     << std::setw(8) << "parsed" << std::setw(9) << "correct" << std::setw(10) << "accuracy"
     << std::setw(13) << "parsed_rate" << "parsed_weighted" << '\n';
  for (const auto& b : report.bins) {
    os << std::left << std::setw(6) << b.m << std::setw(6) << b.n << std::setw(7) << b.total
       << std::setw(8) << b.parsed << std::setw(9) << b.correct << std::setw(10)
       << b.accuracy().decimal(4) << std::setw(13) << b.parsed_rate().decimal(4)
       << b.parsed_weighted().decimal(4) << '\n';
  }
}

int cmd_generate(const GenerationFlags& flags, const std::string& out_path) {
  sr::RunConfig cfg;
  flags.apply(cfg);
  std::optional<sr::Catalog> catalog;
  if (cfg.family == sr::Family::AstroRecall) {
    catalog = sr::load_catalog(cfg.catalog_path, cfg.target_column, cfg.retrieve_column);
  }
  const auto plan = sr::plan_run(cfg);
  std::ostringstream buffer;
  for (const auto& item : plan) {
    const auto task = sr::generate_task(cfg.family, catalog ? &*catalog : nullptr, item.m, item.n,
                                        item.index, cfg.base_seed, cfg.generation);
    const nlohmann::json line = {
        {"family", sr::family_token(cfg.family)},
        {"m", item.m},
        {"n", item.n},
        {"index", item.index},
        {"instance_seed", item.instance_seed},
        {"instance", sr::to_json(task)},
        {"prompt", sr::render(task).text},
    };
    buffer << line.dump() << '\n';
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw sr::Error(sr::ErrorCode::Io, "cannot write " + out_path);
  out << buffer.str();
  std::cout << "wrote " << plan.size() << " instances to " << out_path << '\n';
  return 0;
}

struct RunFlags {
  GenerationFlags gen;
  ParserFlags parser;
  std::string baseline;
  std::string inner = "oracle";
  double fail_rate = 0.5;
  std::uint64_t solver_seed = 0;
  std::string endpoint;
  std::string model;
  std::string variant = "think";
  double temperature = 0.0;
  std::uint32_t max_tokens = 0;
  double timeout_s = 600.0;
  std::uint32_t max_retries = 3;
  std::size_t max_in_flight = 8;
  std::string api_key;
  std::string output_dir = "runs";
  std::string run_id;
  bool resume = false;
};

sr::RunConfig build_run_config(const RunFlags& f) {
  if (f.baseline.empty() == f.endpoint.empty()) {
    throw UsageError("exactly one of --baseline or --endpoint is required");
  }
  sr::RunConfig cfg;
  f.gen.apply(cfg);
  cfg.parser = f.parser.config();
  cfg.output_dir = f.output_dir;
  if (!f.baseline.empty()) {
    const auto name = sr::parse_baseline(f.baseline);
    if (name == sr::BaselineName::FlakyFormat) {
      sr::BaselineSpec inner{sr::parse_baseline(f.inner), nullptr, 0.0, f.solver_seed};
      cfg.solver = sr::BaselineSpec::flaky(inner, f.fail_rate, f.solver_seed);
    } else {
      cfg.solver = sr::BaselineSpec{name, nullptr, 0.0, f.solver_seed};
    }
    cfg.run_id = f.run_id.empty() ? f.gen.family + "-" + f.baseline + "-seed" + std::to_string(f.gen.seed)
                                  : f.run_id;
  } else {
    if (f.model.empty()) throw UsageError("--model is required with --endpoint");
    auto e = sr::EndpointConfig::preset(sr::parse_variant(f.variant), f.endpoint, f.model);
    e.temperature = f.temperature;
    if (f.max_tokens > 0) e.max_output_tokens = f.max_tokens;
    e.request_timeout_s = f.timeout_s;
    e.max_retries = f.max_retries;
    e.max_in_flight = f.max_in_flight;
    if (!f.api_key.empty()) e.api_key = f.api_key;
    cfg.solver = e;
    std::string safe_model;
    for (char c : f.model) safe_model.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    cfg.run_id = f.run_id.empty() ? f.gen.family + "-" + safe_model + "-" + f.variant + "-seed" +
                                        std::to_string(f.gen.seed)
                                  : f.run_id;
  }
  return cfg;
}

int cmd_run(const RunFlags& flags) {
  const auto cfg = build_run_config(flags);
  sr::RunHooks hooks;
  hooks.progress = [](std::size_t done, std::size_t total) {
    if (done == total || done % 100 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
  };
  sr::RunSummary summary;
  if (flags.resume) {
    // count what is left before starting
    const auto plan = sr::plan_run(cfg);
    const auto loaded = sr::load_records(cfg.run_dir() / "records.jsonl", false);
    std::size_t remaining = plan.size() >= loaded.records.size() ? plan.size() - loaded.records.size() : 0;
    std::cout << remaining << " remaining\n";
    summary = sr::resume_run(cfg, hooks);
  } else {
    summary = sr::execute_run(cfg, hooks);
  }
  if (summary.executed > 0) std::cerr << '\n';
  if (summary.repaired_partial_line) std::cerr << "warning: dropped a partial trailing record\n";
  print_table(std::cout, summary.report);
  std::cout << "config:  " << summary.config_path.string() << '\n'
            << "records: " << summary.records_path.string() << '\n'
            << "metrics: " << summary.metrics_path.string() << '\n';
  return 0;
}

int cmd_score(const std::string& run_dir, const std::string& records, std::string out,
              const ParserFlags& parser) {
  if (run_dir.empty() == records.empty()) throw UsageError("give exactly one of --run-dir or --records");
  const fs::path records_path = records.empty() ? fs::path(run_dir) / "records.jsonl" : fs::path(records);
  if (!fs::exists(records_path)) throw sr::Error(sr::ErrorCode::Io, records_path.string() + " not found");
  if (out.empty()) out = (records_path.parent_path() / "metrics.csv").string();

  auto loaded = sr::load_records(records_path, /*repair=*/false);
  if (loaded.dropped_partial_tail) {
    std::cerr << "warning: ignoring partial trailing line in " << records_path.string() << '\n';
  }
  const auto rescored = sr::rescore(std::move(loaded.records), parser.config());
  const auto report = sr::aggregate(rescored);
  sr::write_metrics_csv(fs::path(out), report);
  print_table(std::cout, report);
  std::cout << "metrics: " << out << '\n';
  return 0;
}

int cmd_report(const std::vector<std::string>& paths, const std::string& metric) {
  for (const auto& path : paths) {
    const auto report = sr::read_metrics_csv(path);
    std::vector<std::size_t> ms;
    std::vector<std::size_t> ns;
    std::map<std::pair<std::size_t, std::size_t>, std::string> cell;
    for (const auto& b : report.bins) {
      if (std::find(ms.begin(), ms.end(), b.m) == ms.end()) ms.push_back(b.m);
      if (std::find(ns.begin(), ns.end(), b.n) == ns.end()) ns.push_back(b.n);
      const sr::Rational v = metric == "accuracy"      ? b.accuracy()
                             : metric == "parsed_rate" ? b.parsed_rate()
                                                       : b.parsed_weighted();
      cell[{b.m, b.n}] = v.decimal(3);
    }
    std::sort(ms.begin(), ms.end());
    std::sort(ns.begin(), ns.end());
    std::cout << path << " (" << sr::family_token(report.family) << ", " << metric << ", chance "
              << report.chance_level().decimal(2) << ")\n";
    std::cout << std::setw(8) << "m \\ n";
    for (auto n : ns) std::cout << std::setw(8) << n;
    std::cout << '\n';
    for (auto m : ms) {
      std::cout << std::setw(8) << m;
      for (auto n : ns) {
        const auto it = cell.find({m, n});
        std::cout << std::setw(8) << (it == cell.end() ? "-" : it->second);
      }
      std::cout << '\n';
    }
    const auto all = report.overall();
    std::cout << "overall: accuracy " << all.accuracy().decimal(4) << ", parsed_rate "
              << all.parsed_rate().decimal(4) << ", parsed_weighted " << all.parsed_weighted().decimal(4)
              << "\n\n";
  }
  return 0;
}

int cmd_selftest(bool quick, const std::string& fault, const std::string& catalog) {
  sr::SelftestOptions opts;
  opts.quick = quick;
  opts.catalog_path = catalog;
  if (!fault.empty()) opts.inject_fault = fault;
  const auto results = sr::run_selftest(opts);
  const sr::PropertyResult* first_failure = nullptr;
  for (const auto& r : results) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    if (!r.passed && first_failure == nullptr) first_failure = &r;
  }
  if (first_failure != nullptr) {
    std::cerr << "selftest failed: " << first_failure->name << '\n';
    return kExitRuntime;
  }
  std::cout << "selftest passed\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"State-based recall benchmark generator and evaluation harness"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.get_formatter()->column_width(44);

  auto* gen = app.add_subcommand("generate", "Write instances.jsonl without contacting any endpoint");
  GenerationFlags gen_flags;
  std::string gen_out = "instances.jsonl";
  gen_flags.add_to(*gen);
  gen->add_option("--out", gen_out, "Output JSONL path")->capture_default_str();

  auto* run = app.add_subcommand("run", "Evaluate a baseline or an OpenAI-compatible endpoint");
  RunFlags run_flags;
  run_flags.gen.add_to(*run);
  run_flags.parser.add_to(*run);
  run->add_option("--baseline", run_flags.baseline, "Scripted solver")
      ->check(CLI::IsMember({"oracle", "random", "stateless", "flaky"}));
  run->add_option("--inner", run_flags.inner, "Solver wrapped by --baseline flaky")
      ->capture_default_str()
      ->check(CLI::IsMember({"oracle", "random", "stateless"}));
  run->add_option("--fail-rate", run_flags.fail_rate, "Format failure probability for flaky")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  run->add_option("--solver-seed", run_flags.solver_seed, "Seed for random/flaky solvers")->capture_default_str();
  run->add_option("--endpoint", run_flags.endpoint, "Base URL, e.g. http://localhost:8000");
  run->add_option("--model", run_flags.model, "Model id sent to the endpoint");
  run->add_option("--variant", run_flags.variant, "Sampling preset (think: 6000 tokens, instruct: 40)")
      ->capture_default_str()
      ->check(CLI::IsMember({"think", "instruct"}));
  run->add_option("--temperature", run_flags.temperature, "Sampling temperature")->capture_default_str();
  run->add_option("--max-tokens", run_flags.max_tokens, "Override the preset output-token cap (0: preset)")
      ->capture_default_str();
  run->add_option("--timeout", run_flags.timeout_s, "Per-request timeout in seconds")->capture_default_str();
  run->add_option("--max-retries", run_flags.max_retries, "Retries for 429/5xx/network errors")
      ->capture_default_str();
  run->add_option("--max-in-flight", run_flags.max_in_flight, "Concurrent requests")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  run->add_option("--api-key", run_flags.api_key, "Bearer token (default: $STATERECALL_API_KEY)");
  run->add_option("--output-dir", run_flags.output_dir, "Parent directory for runs")->capture_default_str();
  run->add_option("--run-id", run_flags.run_id, "Run directory name (default derived from flags)");
  run->add_flag("--resume", run_flags.resume, "Continue an interrupted run with identical flags");

  auto* score = app.add_subcommand("score", "Re-parse and re-aggregate a records file");
  std::string score_dir;
  std::string score_records;
  std::string score_out;
  ParserFlags score_parser;
  score->add_option("--run-dir", score_dir, "Run directory containing records.jsonl");
  score->add_option("--records", score_records, "Path to a records.jsonl file");
  score->add_option("--out", score_out, "Metrics CSV path (default: next to the records)");
  score_parser.add_to(*score);

  auto* report = app.add_subcommand("report", "Print metrics.csv files as m x n tables");
  std::vector<std::string> report_paths;
  std::string report_metric = "parsed_weighted";
  report->add_option("--metrics", report_paths, "metrics.csv path (repeatable)")->required()->check(CLI::ExistingFile);
  report->add_option("--metric", report_metric, "Metric shown in the table")
      ->capture_default_str()
      ->check(CLI::IsMember({"accuracy", "parsed_rate", "parsed_weighted"}));

  auto* selftest = app.add_subcommand("selftest", "Run the scripted-solver checks in-process");
  bool quick = false;
  std::string fault;
  std::string selftest_catalog = sr::default_catalog_path().string();
  selftest->add_flag("--quick", quick, "Smaller grid, both families");
  selftest->add_option("--catalog", selftest_catalog, "Catalog CSV")->capture_default_str();
  selftest->add_option("--inject-fault", fault, "Deliberately break a solver (oracle-flip)")
      ->check(CLI::IsMember({"oracle-flip"}))
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen) return cmd_generate(gen_flags, gen_out);
    if (*run) return cmd_run(run_flags);
    if (*score) return cmd_score(score_dir, score_records, score_out, score_parser);
    if (*report) return cmd_report(report_paths, report_metric);
    if (*selftest) return cmd_selftest(quick, fault, selftest_catalog);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == sr::ErrorCode::InvalidGrid ? kExitUsage : kExitRuntime;
  } catch (const sr::EndpointError& e) {
    std::cerr << "endpoint error after " << e.attempts() << " attempt(s): " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
