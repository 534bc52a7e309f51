#pragma once

#include <json.hpp>

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "staterecall/answer_parse.hpp"
#include "staterecall/baselines.hpp"
#include "staterecall/endpoint.hpp"
#include "staterecall/metrics.hpp"
#include "staterecall/prompt.hpp"
#include "staterecall/record.hpp"
#include "staterecall/task.hpp"

namespace staterecall {

struct GridCell {
  std::size_t m = 0;
  std::size_t n = 0;
  friend auto operator<=>(const GridCell&, const GridCell&) = default;
};

/// {4, 8, 16, 32, 64} x {4, 8, 16, 32, 64}.
std::vector<GridCell> default_grid();
/// Diagonal cells (v, v) for each v in {4, 8, 16, 32, 64}.
std::vector<GridCell> square_grid();
/// "4x4,8x16" -> [(4,4), (8,16)]. Throws Error(InvalidGrid).
std::vector<GridCell> parse_grid(std::string_view text);

/// Bundled exoplanet catalog and its column names.
std::filesystem::path default_catalog_path();
inline constexpr const char* kDefaultTargetColumn = "Orbital Period (days)";
inline constexpr const char* kDefaultRetrieveColumn = "Planet";

using Solver = std::variant<BaselineSpec, EndpointConfig>;

struct RunConfig {
  Family family = Family::AstroRecall;
  std::vector<GridCell> grid = default_grid();
  std::size_t instances_per_bin = 100;
  Seed base_seed = 0;
  GenerationConfig generation;
  std::filesystem::path catalog_path = default_catalog_path();
  std::string target_column = kDefaultTargetColumn;
  std::string retrieve_column = kDefaultRetrieveColumn;
  Solver solver = BaselineSpec::oracle();
  ParserConfig parser;
  PromptTemplateConfig prompt;
  std::filesystem::path output_dir = "runs";
  std::string run_id = "run";
  std::size_t workers = 0;  // 0: endpoint max_in_flight, or 1 for baselines

  void validate() const;
  [[nodiscard]] std::filesystem::path run_dir() const { return output_dir / run_id; }
  /// Everything that determines record contents. Hashed for resume checks.
  [[nodiscard]] nlohmann::json snapshot() const;
  [[nodiscard]] std::string snapshot_hash() const;
};

struct PlanItem {
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t index = 0;
  Seed instance_seed = 0;
  friend bool operator==(const PlanItem&, const PlanItem&) = default;
};

/// Sorted by (m, n, index); duplicate grid cells collapse.
std::vector<PlanItem> plan_run(const RunConfig& cfg);

struct RunHooks {
  /// Stop after writing this many new records, leaving the run resumable.
  std::optional<std::size_t> halt_after;
  std::function<void(std::size_t done, std::size_t total)> progress;
};

struct RunSummary {
  GridReport report;
  std::size_t planned = 0;
  std::size_t previously_done = 0;
  std::size_t executed = 0;
  bool halted = false;
  bool repaired_partial_line = false;
  std::filesystem::path run_dir;
  std::filesystem::path config_path;
  std::filesystem::path records_path;
  std::filesystem::path metrics_path;
};

/// Starts from an empty records file (any previous records are discarded).
RunSummary execute_run(const RunConfig& cfg, const RunHooks& hooks = {});
/// Continues an existing run directory. Throws Error(ConfigMismatch) when the
/// stored snapshot hash differs from cfg.snapshot_hash().
RunSummary resume_run(const RunConfig& cfg, const RunHooks& hooks = {});

struct LoadedRecords {
  std::vector<RunRecord> records;
  bool dropped_partial_tail = false;
};

/// Reads records.jsonl. A final line that is unterminated or not valid JSON is
/// a crash artifact: it is dropped (and truncated from disk when `repair`).
/// Any other malformed line throws Error(MalformedRecord).
LoadedRecords load_records(const std::filesystem::path& path, bool repair);

/// Re-parses every stored completion with `parser` and rescores it.
std::vector<RunRecord> rescore(std::vector<RunRecord> records, const ParserConfig& parser);

/// Generates, renders, solves, parses, and scores a single plan item.
RunRecord evaluate_item(const TaskInstance& task, const RenderedPrompt& prompt,
                        const Solver& solver, EndpointClient* client, const ParserConfig& parser);

}  // namespace staterecall
