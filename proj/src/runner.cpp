#include "staterecall/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "staterecall/error.hpp"

#ifndef STATERECALL_DATA_DIR
#define STATERECALL_DATA_DIR "data"
#endif

namespace staterecall {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kLadder[] = {4, 8, 16, 32, 64};

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()) % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms.count()));
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool filesystem_safe(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) || c == '-' || c == '_' || c == '.';
  });
}

json parser_json(const ParserConfig& p) {
  json delims = json::array();
  for (const auto& d : p.reasoning_delimiters) delims.push_back({d.open, d.close});
  return {{"reasoning_delimiters", std::move(delims)}, {"accept_option_text", p.accept_option_text}};
}

using ItemKey = std::tuple<std::size_t, std::size_t, std::size_t>;

ItemKey key_of(const RunRecord& r) { return {r.m, r.n, r.index}; }

}  // namespace

std::vector<GridCell> default_grid() {
  std::vector<GridCell> grid;
  for (auto m : kLadder) {
    for (auto n : kLadder) grid.push_back({m, n});
  }
  return grid;
}

std::vector<GridCell> square_grid() {
  std::vector<GridCell> grid;
  for (auto v : kLadder) grid.push_back({v, v});
  return grid;
}

std::vector<GridCell> parse_grid(std::string_view text) {
  std::vector<GridCell> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = std::min(text.find(',', pos), text.size());
    std::string cell(text.substr(pos, comma - pos));
    cell.erase(0, std::min(cell.find_first_not_of(' '), cell.size()));
    cell.erase(std::min(cell.find_last_not_of(' ') + 1, cell.size()));
    const auto x = cell.find('x');
    std::size_t used_m = 0;
    std::size_t used_n = 0;
    try {
      if (x == std::string::npos) throw std::invalid_argument("no x");
      const std::string ms = cell.substr(0, x);
      const std::string ns = cell.substr(x + 1);
      const auto m = std::stoul(ms, &used_m);
      const auto n = std::stoul(ns, &used_n);
      if (used_m != ms.size() || used_n != ns.size() || ms.empty() || ns.empty() ||
          ms.front() == '-' || ns.front() == '-') {
        throw std::invalid_argument("trailing");
      }
      grid.push_back({m, n});
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidGrid, "bad grid cell '" + cell + "', expected MxN");
    }
    pos = comma + 1;
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidGrid, "empty grid");
  return grid;
}

fs::path default_catalog_path() {
  if (const char* env = std::getenv("STATERECALL_DATA_DIR"); env != nullptr && *env != '\0') {
    return fs::path(env) / "exoplanets.csv";
  }
  return fs::path(STATERECALL_DATA_DIR) / "exoplanets.csv";
}

void RunConfig::validate() const {
  if (grid.empty()) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  for (const auto& c : grid) {
    if (c.m < 2) throw Error(ErrorCode::InvalidGrid, "m must be at least 2");
  }
  if (instances_per_bin < 1) throw Error(ErrorCode::InvalidArgument, "instances_per_bin must be >= 1");
  if (!filesystem_safe(run_id)) {
    throw Error(ErrorCode::InvalidArgument, "run id '" + run_id + "' is not filesystem-safe");
  }
  if (const auto* b = std::get_if<BaselineSpec>(&solver)) b->validate();
  if (const auto* e = std::get_if<EndpointConfig>(&solver)) e->validate();
  for (const auto& d : parser.reasoning_delimiters) {
    if (d.open.empty() || d.close.empty() || d.open == d.close) {
      throw Error(ErrorCode::InvalidArgument, "reasoning delimiters must be non-empty and distinct");
    }
  }
}

json RunConfig::snapshot() const {
  json grid_json = json::array();
  for (const auto& c : grid) grid_json.push_back({c.m, c.n});
  json j = {
      {"family", family_token(family)},
      {"grid", std::move(grid_json)},
      {"instances_per_bin", instances_per_bin},
      {"base_seed", base_seed},
      {"parser", parser_json(parser)},
      {"answer_instruction", prompt.answer_instruction},
      {"run_id", run_id},
  };
  if (family == Family::AstroRecall) {
    j["swap_pattern"] = swap_pattern_token(generation.swap_pattern);
    j["catalog"] = {{"sha256", sha256_hex(read_file(catalog_path))},
                    {"target_column", target_column},
                    {"retrieve_column", retrieve_column}};
  } else {
    j["velocity_pool"] = {generation.pool.lo, generation.pool.hi};
  }
  if (const auto* b = std::get_if<BaselineSpec>(&solver)) {
    j["solver"] = {{"baseline", to_json(*b)}};
  } else {
    const auto& e = std::get<EndpointConfig>(solver);
    j["solver"] = {{"endpoint",
                    {{"model", e.model_id},
                     {"variant", variant_token(e.variant)},
                     {"temperature", e.temperature},
                     {"max_tokens", e.max_output_tokens}}}};
  }
  return j;
}

std::string RunConfig::snapshot_hash() const { return sha256_hex(snapshot().dump()); }

std::vector<PlanItem> plan_run(const RunConfig& cfg) {
  if (cfg.grid.empty()) throw Error(ErrorCode::InvalidGrid, "grid is empty");
  std::set<GridCell> cells(cfg.grid.begin(), cfg.grid.end());
  std::vector<PlanItem> plan;
  plan.reserve(cells.size() * cfg.instances_per_bin);
  for (const auto& c : cells) {
    for (std::size_t i = 0; i < cfg.instances_per_bin; ++i) {
      plan.push_back({c.m, c.n, i, derive_instance_seed(cfg.base_seed, cfg.family, c.m, c.n, i)});
    }
  }
  return plan;
}

LoadedRecords load_records(const fs::path& path, bool repair) {
  LoadedRecords out;
  if (!fs::exists(path)) return out;
  const std::string content = read_file(path);

  std::size_t pos = 0;
  std::size_t line_no = 0;
  std::size_t good_end = 0;
  while (pos < content.size()) {
    ++line_no;
    const auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = content.substr(pos, (terminated ? nl : content.size()) - pos);
    const std::size_t next = terminated ? nl + 1 : content.size();
    const bool last = next >= content.size();

    auto parsed = json::parse(line, nullptr, false);
    if (!terminated || parsed.is_discarded()) {
      if (!last) {
        throw Error(ErrorCode::MalformedRecord,
                    path.string() + ":" + std::to_string(line_no) + " is not valid JSON");
      }
      out.dropped_partial_tail = true;
      break;
    }
    try {
      out.records.push_back(record_from_json(parsed));
    } catch (const Error& e) {
      throw Error(ErrorCode::MalformedRecord, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    good_end = next;
    pos = next;
  }
  if (out.dropped_partial_tail && repair) fs::resize_file(path, good_end);
  return out;
}

RunRecord evaluate_item(const TaskInstance& task, const RenderedPrompt& prompt, const Solver& solver,
                        EndpointClient* client, const ParserConfig& parser) {
  RunRecord rec;
  rec.family = task.family;
  rec.m = task.m();
  rec.n = task.n();
  rec.index = task.index;
  rec.instance_seed = task.instance_seed;
  rec.instance = to_json(task);
  rec.prompt = prompt.text;
  rec.correct_letter = task.correct_letter();

  if (const auto* baseline = std::get_if<BaselineSpec>(&solver)) {
    const auto start = std::chrono::steady_clock::now();
    rec.completion = solve(task, *baseline);
    rec.finish_reason = FinishReason::Stop;
    rec.attempts = 1;
    rec.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  } else {
    if (client == nullptr) throw Error(ErrorCode::InvalidArgument, "endpoint solver needs a client");
    auto result = client->complete(prompt);
    rec.completion = std::move(result.raw_text);
    rec.finish_reason = result.finish_reason;
    rec.attempts = result.attempt_count;
    rec.latency_ms = result.latency_ms;
  }

  const auto letters = task.option_letters();
  const auto texts = task.option_texts();
  rec.parse = parse_answer(rec.completion, letters, texts, parser);
  if (rec.parse.parsed()) rec.predicted = rec.parse.letter;
  rec.is_correct = score(rec.parse, rec.correct_letter);
  rec.timestamp = utc_timestamp();
  return rec;
}

std::vector<RunRecord> rescore(std::vector<RunRecord> records, const ParserConfig& parser) {
  for (auto& rec : records) {
    const TaskInstance task = task_from_json(rec.instance);
    const auto letters = task.option_letters();
    const auto texts = task.option_texts();
    rec.correct_letter = task.correct_letter();
    rec.parse = parse_answer(rec.completion, letters, texts, parser);
    rec.predicted = rec.parse.parsed() ? std::optional<std::string>(rec.parse.letter) : std::nullopt;
    rec.is_correct = score(rec.parse, rec.correct_letter);
  }
  return records;
}

namespace {

enum class Mode { Fresh, Resume };

RunSummary run_impl(const RunConfig& cfg, const RunHooks& hooks, Mode mode) {
  cfg.validate();
  RunSummary summary;
  summary.run_dir = cfg.run_dir();
  summary.config_path = summary.run_dir / "config.json";
  summary.records_path = summary.run_dir / "records.jsonl";
  summary.metrics_path = summary.run_dir / "metrics.csv";

  const auto plan = plan_run(cfg);
  summary.planned = plan.size();

  std::optional<Catalog> catalog;
  if (cfg.family == Family::AstroRecall) {
    catalog = load_catalog(cfg.catalog_path, cfg.target_column, cfg.retrieve_column);
  }
  auto regenerate = [&](const PlanItem& item) {
    TaskInstance task = generate_task(cfg.family, catalog ? &*catalog : nullptr, item.m, item.n,
                                      item.index, cfg.base_seed, cfg.generation);
    return task;
  };

  const std::string hash = cfg.snapshot_hash();
  std::vector<RunRecord> existing;
  if (mode == Mode::Resume) {
    if (!fs::exists(summary.config_path)) {
      throw Error(ErrorCode::ConfigMismatch, "no run to resume at " + summary.run_dir.string());
    }
    const auto stored = json::parse(read_file(summary.config_path), nullptr, false);
    if (stored.is_discarded() || !stored.contains("hash") || stored["hash"] != hash) {
      throw Error(ErrorCode::ConfigMismatch,
                  "configuration differs from the snapshot in " + summary.config_path.string());
    }
    auto loaded = load_records(summary.records_path, /*repair=*/true);
    summary.repaired_partial_line = loaded.dropped_partial_tail;
    existing = std::move(loaded.records);
  } else {
    fs::create_directories(summary.run_dir);
    json runtime = {{"catalog_path", cfg.catalog_path.string()}};
    if (const auto* e = std::get_if<EndpointConfig>(&cfg.solver)) {
      runtime["base_url"] = e->base_url;
      runtime["max_in_flight"] = e->max_in_flight;
      runtime["max_retries"] = e->max_retries;
      runtime["request_timeout_s"] = e->request_timeout_s;
    }
    const json config = {{"snapshot", cfg.snapshot()}, {"hash", hash}, {"runtime", runtime}};
    write_file_atomic(summary.config_path, config.dump(2) + "\n");
    write_file_atomic(summary.records_path, "");
  }

  std::map<ItemKey, const PlanItem*> by_key;
  for (const auto& item : plan) by_key[{item.m, item.n, item.index}] = &item;
  std::set<ItemKey> done;
  for (const auto& rec : existing) {
    const auto key = key_of(rec);
    const auto it = by_key.find(key);
    if (it == by_key.end() || rec.family != cfg.family) {
      throw Error(ErrorCode::ConfigMismatch, "records contain an item outside the plan");
    }
    if (!done.insert(key).second) throw Error(ErrorCode::DuplicateInstance, "records repeat an item");
    if (to_json(regenerate(*it->second)) != rec.instance) {
      throw Error(ErrorCode::ConfigMismatch, "stored instance differs from regeneration");
    }
  }
  summary.previously_done = done.size();

  std::vector<const PlanItem*> pending;
  for (const auto& item : plan) {
    if (!done.count({item.m, item.n, item.index})) pending.push_back(&item);
  }

  std::optional<EndpointClient> client;
  std::size_t workers = cfg.workers;
  if (const auto* e = std::get_if<EndpointConfig>(&cfg.solver)) {
    client.emplace(*e);
    if (workers == 0) workers = e->max_in_flight;
  }
  if (workers == 0) workers = 1;
  workers = std::min(workers, std::max<std::size_t>(pending.size(), 1));

  const std::size_t limit =
      hooks.halt_after ? std::min(*hooks.halt_after, pending.size()) : pending.size();

  std::mutex mu;
  std::condition_variable cv;
  std::map<std::size_t, RunRecord> ready;
  std::exception_ptr failure;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= limit) return;
      try {
        const TaskInstance task = regenerate(*pending[slot]);
        const RenderedPrompt prompt = render(task, cfg.prompt);
        RunRecord rec = evaluate_item(task, prompt, cfg.solver, client ? &*client : nullptr, cfg.parser);
        std::lock_guard lock(mu);
        ready.emplace(slot, std::move(rec));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);

  {
    std::ofstream out(summary.records_path, std::ios::binary | std::ios::app);
    if (!out) throw Error(ErrorCode::Io, "cannot append to " + summary.records_path.string());
    std::size_t written = 0;
    // single writer: records go out in plan order as the contiguous prefix completes
    while (written < limit) {
      std::unique_lock lock(mu);
      cv.wait(lock, [&] { return ready.count(written) > 0 || failure; });
      if (!ready.count(written)) break;
      RunRecord rec = std::move(ready.at(written));
      ready.erase(written);
      lock.unlock();
      out << to_json(rec).dump() << '\n';
      out.flush();
      ++written;
      if (hooks.progress) hooks.progress(summary.previously_done + written, summary.planned);
    }
    stop = true;
    for (auto& t : pool) t.join();
    summary.executed = written;
  }
  if (failure) std::rethrow_exception(failure);

  if (summary.previously_done + summary.executed < summary.planned) {
    summary.halted = true;
    return summary;
  }

  auto all = load_records(summary.records_path, /*repair=*/false).records;
  const bool ordered = std::is_sorted(all.begin(), all.end(), [](const RunRecord& a, const RunRecord& b) {
    return key_of(a) < key_of(b);
  });
  if (!ordered) {
    std::sort(all.begin(), all.end(),
              [](const RunRecord& a, const RunRecord& b) { return key_of(a) < key_of(b); });
    std::string content;
    for (const auto& r : all) content += to_json(r).dump() + "\n";
    write_file_atomic(summary.records_path, content);
  }
  summary.report = aggregate(all);
  summary.report.family = cfg.family;
  write_metrics_csv(summary.metrics_path, summary.report);
  return summary;
}

}  // namespace

RunSummary execute_run(const RunConfig& cfg, const RunHooks& hooks) {
  return run_impl(cfg, hooks, Mode::Fresh);
}

RunSummary resume_run(const RunConfig& cfg, const RunHooks& hooks) {
  return run_impl(cfg, hooks, Mode::Resume);
}

}  // namespace staterecall
