// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "prompt_oracle.hpp"
#include "staterecall/runner.hpp"
#include "support/mock_server.hpp"

extern char** environ;

using namespace staterecall;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void fail(const std::string& why) {
    if (ok) detail.str("");
    ok = false;
    detail << why;
  }
};

int g_failures = 0;

void report(const std::string& name, const std::function<void(Outcome&)>& check) {
  Outcome out;
  const auto start = Clock::now();
  try {
    check(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!out.ok) ++g_failures;
  std::printf("%s %-22s %6.2fs  %s\n", out.ok ? "PASS" : "FAIL", name.c_str(), secs, out.detail.str().c_str());
  std::fflush(stdout);
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / ("staterecall_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

fs::path catalog_path() { return fs::path(STATERECALL_TEST_DATA_DIR) / "exoplanets.csv"; }

const Catalog& catalog() {
  static const Catalog cat = load_catalog(catalog_path(), kDefaultTargetColumn, kDefaultRetrieveColumn);
  return cat;
}

RunConfig grid_config(Family family, Solver solver, const std::string& id) {
  RunConfig cfg;
  cfg.family = family;
  cfg.grid = default_grid();
  cfg.instances_per_bin = 100;
  cfg.base_seed = 20240601;
  cfg.catalog_path = catalog_path();
  cfg.solver = std::move(solver);
  cfg.output_dir = scratch();
  cfg.run_id = id + "-" + std::string(family_token(family));
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double v, int places = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", places, v);
  return buf;
}

std::string oracle_letter(const std::string& prompt) {
  return prompt.rfind("Problem:", 0) == 0 ? oracle::solve_collision_prompt(prompt)
                                          : oracle::solve_astro_prompt(prompt);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Reports collected across criteria for the metric identity check.
std::vector<GridReport> g_reports;

void oracle_sweep(Outcome& out) {
  const auto start = Clock::now();
  std::size_t bins = 0;
  for (auto family : {Family::AstroRecall, Family::CollisionSim}) {
    const auto s = execute_run(grid_config(family, BaselineSpec::oracle(), "oracle"));
    g_reports.push_back(s.report);
    for (const auto& b : s.report.bins) {
      ++bins;
      if (b.total != 100 || b.accuracy() != Rational{1, 1} || b.parsed_weighted() != Rational{1, 1}) {
        out.fail(std::string(family_token(family)) + " bin " + std::to_string(b.m) + "x" + std::to_string(b.n) +
                 " accuracy " + b.accuracy().decimal());
      }
    }
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (bins != 50) out.fail("expected 50 bins, got " + std::to_string(bins));
  if (secs >= 60.0) out.fail("took " + fixed(secs, 1) + "s");
  if (out.ok) out.detail << "50/50 bins at accuracy 1 and parsed-weighted 1 in " << fixed(secs, 2) << "s";
}

// Binomial 3-sigma half-widths at N = 2500: astro sqrt(.25/2500) * 3 = 0.030,
// collision sqrt(.1875/2500) * 3 = 0.026. Both sit inside the 0.03 tolerance.
void chance_calibration(Outcome& out) {
  for (auto family : {Family::AstroRecall, Family::CollisionSim}) {
    const auto s = execute_run(grid_config(family, BaselineSpec::random(20240601), "random"));
    g_reports.push_back(s.report);
    const auto all = s.report.overall();
    const double p = chance_level(family).value();
    const double acc = all.accuracy().value();
    const double sigma3 = 3 * std::sqrt(p * (1 - p) / static_cast<double>(all.total));
    out.detail << family_token(family) << " " << fixed(acc) << " vs " << fixed(p, 2) << " (N=" << all.total
               << ", 3sigma " << fixed(sigma3, 3) << "); ";
    if (all.total < 2500 || std::abs(acc - p) > 0.03) {
      out.ok = false;
    }
  }
}

// Per-bin binomial 3-sigma for p = 0.5, N = 100 is 0.15.
void flaky_demo(Outcome& out) {
  const auto spec = BaselineSpec::flaky(BaselineSpec::oracle(), 0.5, 20240601);
  double lo = 1.0;
  double hi = 0.0;
  double min_acc = 1.0;
  for (auto family : {Family::AstroRecall, Family::CollisionSim}) {
    const auto s = execute_run(grid_config(family, spec, "flaky"));
    g_reports.push_back(s.report);
    for (const auto& b : s.report.bins) {
      const double acc = b.accuracy().value();
      const double rate = b.parsed_rate().value();
      const double pw = b.parsed_weighted().value();
      lo = std::min({lo, rate, pw});
      hi = std::max({hi, rate, pw});
      min_acc = std::min(min_acc, acc);
      if (acc < 0.99 || std::abs(rate - 0.5) > 0.15 || std::abs(pw - 0.5) > 0.15) {
        out.fail(std::string(family_token(family)) + " bin " + std::to_string(b.m) + "x" +
                 std::to_string(b.n) + " accuracy " + fixed(acc) + " parsed_rate " + fixed(rate) +
                 " parsed_weighted " + fixed(pw));
        return;
      }
    }
  }
  out.detail << "50 bins: min accuracy " << fixed(min_acc) << ", parsed_rate and parsed_weighted in ["
             << fixed(lo, 2) << ", " << fixed(hi, 2) << "]";
}

void metric_identity(Outcome& out) {
  std::size_t bins = 0;
  for (const auto& r : g_reports) {
    for (const auto& b : r.bins) {
      ++bins;
      const auto pw = b.parsed_weighted();
      if (pw.num * b.total != b.correct * pw.den) {
        out.fail("bin " + std::to_string(b.m) + "x" + std::to_string(b.n) + " breaks the identity");
      }
    }
  }
  const auto sub = parsed_weighted(Rational{1, 1}, 3, 100);
  if (sub != Rational::of(3, 100) || sub.decimal(2) != "0.03") out.fail("(1.0, 3, 100) gave " + sub.decimal());
  if (bins < 150) out.fail("only " + std::to_string(bins) + " bins checked");
  if (out.ok) out.detail << bins << " bins exact; (1.0, 3, 100) -> " << sub.decimal(2);
}

void conservation(Outcome& out) {
  Rng pick(99);
  std::size_t collision_cases = 0;
  std::size_t swap_cases = 0;
  for (; collision_cases < 10000; ++collision_cases) {
    const std::size_t m = 3 + pick.uniform(62);
    const std::size_t n = pick.uniform(65);
    const auto inst = generate_collision(m, n, pick.next());
    std::multiset<std::int64_t> before;
    std::multiset<std::int64_t> after;
    for (const auto& [l, v] : inst.velocities) before.insert(v);
    for (const auto& [l, v] : simulate_collisions(inst.velocities, inst.collisions)) after.insert(v);
    if (before != after) out.fail("collision multiset changed for seed " + std::to_string(inst.seed));
  }
  const SwapPattern patterns[] = {SwapPattern::Anchored, SwapPattern::TrueSwap, SwapPattern::General};
  for (; swap_cases < 10000; ++swap_cases) {
    const std::size_t m = 3 + pick.uniform(62);
    const std::size_t n = pick.uniform(65);
    const auto inst = generate_astro(catalog(), m, n, pick.next(), patterns[swap_cases % 3]);
    Bindings b;
    std::set<std::int64_t> initial;
    for (const auto& [var, row] : inst.binding) {
      b[var] = static_cast<std::int64_t>(row);
      initial.insert(static_cast<std::int64_t>(row));
    }
    for (const auto& [var, v] : simulate_swaps(b, inst.swaps)) {
      if (!initial.count(v)) out.fail("swap produced a value outside the initial set");
    }
  }
  if (out.ok) {
    out.detail << collision_cases << " collision and " << swap_cases << " swap cases, 0 counterexamples";
  }
}

void oracle_equivalence(Outcome& out) {
  std::size_t astro = 0;
  std::size_t collision = 0;
  std::size_t skipped_cells = 0;
  const SwapPattern patterns[] = {SwapPattern::Anchored, SwapPattern::TrueSwap, SwapPattern::General};
  for (std::size_t m = 2; m <= 6; ++m) {
    for (std::size_t n = 0; n <= 6; ++n) {
      for (std::size_t seed = 0; seed < 1000; ++seed) {
        GenerationConfig cfg;
        cfg.swap_pattern = m == 2 && n > 0 ? patterns[1 + seed % 2] : patterns[seed % 3];
        const auto a = generate_task(Family::AstroRecall, &catalog(), m, n, seed, 7, cfg);
        if (oracle::solve_astro_prompt(render(a).text) != a.correct_letter()) {
          out.fail("astro m=" + std::to_string(m) + " n=" + std::to_string(n) + " index " + std::to_string(seed));
        }
        ++astro;
      }
      if (m == 2 && n >= 2) {
        ++skipped_cells;  // no valid collision sequence exists
        continue;
      }
      for (std::size_t seed = 0; seed < 1000; ++seed) {
        const auto c = generate_task(Family::CollisionSim, nullptr, m, n, seed, 7);
        if (oracle::solve_collision_prompt(render(c).text) != c.correct_letter()) {
          out.fail("collision m=" + std::to_string(m) + " n=" + std::to_string(n) + " index " +
                   std::to_string(seed));
        }
        ++collision;
      }
    }
  }
  if (out.ok) {
    out.detail << astro << " astro and " << collision << " collision instances agree (m 2..6, n 0..6, 1000 each; "
               << skipped_cells << " degenerate collision cells excluded)";
  }
}

int spawn_cli(const std::vector<std::string>& args, const fs::path& log, pid_t* pid_out = nullptr) {
  std::vector<std::string> full{STATERECALL_CLI_PATH};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : full) argv.push_back(a.data());
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&actions, 1, 2);
  pid_t pid = 0;
  const int rc = posix_spawn(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw std::runtime_error("cannot spawn the CLI");
  if (pid_out != nullptr) {
    *pid_out = pid;
    return 0;
  }
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void determinism(Outcome& out) {
  const auto dir = scratch() / "determinism";
  fs::create_directories(dir);
  for (const char* family : {"astro", "collision"}) {
    const std::vector<std::string> base{"generate", "--family", family, "--grid", "4x4,16x16,64x64",
                                        "--count", "50", "--seed", "7", "--catalog", catalog_path().string()};
    auto first = base;
    first.insert(first.end(), {"--out", (dir / (std::string(family) + "_1.jsonl")).string()});
    auto second = base;
    second.insert(second.end(), {"--out", (dir / (std::string(family) + "_2.jsonl")).string()});
    if (spawn_cli(first, dir / "log1.txt") != 0 || spawn_cli(second, dir / "log2.txt") != 0) {
      out.fail("generate failed: " + slurp(dir / "log1.txt"));
      return;
    }
    const auto a = slurp(dir / (std::string(family) + "_1.jsonl"));
    if (a.empty() || a != slurp(dir / (std::string(family) + "_2.jsonl"))) {
      out.fail(std::string(family) + " instances.jsonl differs between invocations");
    }
  }
  struct Golden {
    const char* file;
    Family family;
    std::size_t m, n, index;
  };
  const Golden goldens[] = {{"astro_m8_n8_seed0_i0.txt", Family::AstroRecall, 8, 8, 0},
                            {"astro_m4_n0_seed0_i1.txt", Family::AstroRecall, 4, 0, 1},
                            {"collision_m8_n8_seed0_i7.txt", Family::CollisionSim, 8, 8, 7},
                            {"collision_m4_n0_seed0_i0.txt", Family::CollisionSim, 4, 0, 0}};
  for (const auto& g : goldens) {
    const auto task = generate_task(g.family, &catalog(), g.m, g.n, g.index, 0);
    if (render(task).text != slurp(fs::path(STATERECALL_GOLDEN_DIR) / g.file)) {
      out.fail(std::string("prompt differs from golden ") + g.file);
    }
  }
  if (out.ok) out.detail << "byte-identical reruns for both families; 4 golden prompts match";
}

void constraint_audit(Outcome& out) {
  Rng pick(4242);
  std::size_t collisions = 0;
  std::size_t adjacent_dupes = 0;
  std::size_t bad_options = 0;
  for (; collisions < 10000; ++collisions) {
    const std::size_t m = 3 + pick.uniform(62);
    const std::size_t n = pick.uniform(65);
    const auto c = generate_collision(m, n, pick.next());
    for (std::size_t k = 1; k < c.collisions.size(); ++k) {
      if (same_unordered(c.collisions[k], c.collisions[k - 1])) ++adjacent_dupes;
    }
    const std::set<std::int64_t> distinct(c.options.begin(), c.options.end());
    const auto pos = static_cast<std::size_t>(c.correct_letter.at(0) - 'A');
    const bool in_pool = std::all_of(c.options.begin(), c.options.end(),
                                     [&](std::int64_t v) { return v >= c.pool.lo && v <= c.pool.hi; });
    if (c.options.size() != 4 || distinct.size() != 4 || pos >= 4 || c.options[pos] != c.answer() || !in_pool) {
      ++bad_options;
    }
  }
  std::size_t astro = 0;
  std::size_t clashes = 0;
  for (; astro < 10000; ++astro) {
    const std::size_t m = 3 + pick.uniform(62);
    const std::size_t n = pick.uniform(65);
    const auto a = generate_astro(catalog(), m, n, pick.next());
    if (a.option_a == a.option_b) ++clashes;
    const auto& correct = a.correct_letter == "A" ? a.option_a : a.option_b;
    const auto& other = a.correct_letter == "A" ? a.option_b : a.option_a;
    bool other_in_rows = false;
    for (const auto& row : a.rows) other_in_rows |= row.at(a.retrieve_column) == other;
    if ((a.correct_letter != "A" && a.correct_letter != "B") || correct != a.answer() || !other_in_rows) {
      ++bad_options;
    }
  }
  if (adjacent_dupes || clashes || bad_options) {
    out.fail(std::to_string(adjacent_dupes) + " adjacent duplicate pairs, " + std::to_string(clashes) +
             " distractor clashes, " + std::to_string(bad_options) + " invalid option sets");
  } else {
    out.detail << collisions << " collision and " << astro << " astro instances: 0 violations";
  }
}

enum class Canned { Valid, ThinkWrapped, Garbage, Truncated };

Canned canned_case(const std::string& prompt) { return static_cast<Canned>(fnv1a(prompt) % 4); }

void mock_round_trip(Outcome& out) {
  // retry policy in isolation
  {
    int hits = 0;
    testsupport::MockServer flaky([&](const httplib::Request&, httplib::Response& res) {
      if (++hits <= 2) {
        res.status = 503;
        return;
      }
      res.set_content(testsupport::completion_body(R"({"answer":"A"})"), "application/json");
    });
    auto cfg = EndpointConfig::preset(Variant::Think, flaky.url(), "mock");
    cfg.backoff_base = std::chrono::milliseconds(5);
    const auto result = EndpointClient(cfg).complete("ping");
    if (result.attempt_count != 3) out.fail("attempt_count " + std::to_string(result.attempt_count));
  }

  std::mutex mu;
  std::map<std::string, int> failures_left;
  testsupport::MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto prompt = nlohmann::json::parse(req.body).at("messages").at(0).at("content").get<std::string>();
    {
      std::lock_guard lock(mu);
      auto [it, fresh] = failures_left.emplace(prompt, fnv1a(prompt) % 10 == 0 ? 2 : 0);
      if (it->second > 0) {
        --it->second;
        res.status = 502;
        return;
      }
    }
    const std::string correct = oracle_letter(prompt);
    const std::string wrong = correct == "A" ? "B" : "A";
    switch (canned_case(prompt)) {
      case Canned::Valid:
        res.set_content(testsupport::completion_body(R"({"answer": ")" + correct + R"("})"), "application/json");
        break;
      case Canned::ThinkWrapped:
        res.set_content(testsupport::completion_body("<think>Tracking... maybe {\"answer\":\"" + wrong +
                                                     "\"}? No.</think>\n{\"answer\":\"" + correct + "\"}"),
                        "application/json");
        break;
      case Canned::Garbage:
        res.set_content(testsupport::completion_body("The answer is clearly the second option."),
                        "application/json");
        break;
      case Canned::Truncated:
        res.set_content(testsupport::completion_body("<think>Let me track each update in turn. First", "length"),
                        "application/json");
        break;
    }
  });

  std::size_t checked = 0;
  std::size_t retried = 0;
  for (auto family : {Family::AstroRecall, Family::CollisionSim}) {
    auto e = EndpointConfig::preset(Variant::Think, server.url(), "mock");
    e.backoff_base = std::chrono::milliseconds(2);
    e.max_in_flight = 4;
    RunConfig cfg = grid_config(family, e, "mock");
    cfg.grid = {{4, 4}, {8, 8}, {16, 16}};
    cfg.instances_per_bin = 40;
    const auto s = execute_run(cfg);
    std::map<std::pair<std::size_t, std::size_t>, BinMetrics> expected;
    for (const auto& r : load_records(s.records_path, false).records) {
      ParseOutcome want;
      switch (canned_case(r.prompt)) {
        case Canned::Valid:
        case Canned::ThinkWrapped: want = ParseOutcome::ok(r.correct_letter); break;
        case Canned::Garbage: want = ParseOutcome::fail(UnparsedReason::NoJsonObject); break;
        case Canned::Truncated: want = ParseOutcome::fail(UnparsedReason::Truncated); break;
      }
      if (r.parse != want) out.fail("unexpected outcome for " + std::to_string(r.m) + "x" + std::to_string(r.n) +
                                    " index " + std::to_string(r.index));
      const std::uint32_t want_attempts = fnv1a(r.prompt) % 10 == 0 ? 3 : 1;
      if (r.attempts != want_attempts) out.fail("record attempts " + std::to_string(r.attempts));
      retried += r.attempts == 3;
      auto& b = expected[{r.m, r.n}];
      b.m = r.m;
      b.n = r.n;
      ++b.total;
      b.parsed += want.parsed();
      b.correct += want.parsed();
      ++checked;
    }
    for (const auto& b : s.report.bins) {
      const auto& w = expected[{b.m, b.n}];
      if (b.total != w.total || b.parsed != w.parsed || b.correct != w.correct) {
        out.fail("BinMetrics mismatch in " + std::to_string(b.m) + "x" + std::to_string(b.n));
      }
    }
  }
  if (out.ok) {
    out.detail << checked << " canned completions scored as expected; fail-twice retry reached attempt_count 3 ("
               << retried << " records retried in-run)";
  }
}

std::size_t line_count(const fs::path& p) {
  const auto s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

void resume_correctness(Outcome& out) {
  testsupport::MockServer server([&](const httplib::Request& req, httplib::Response& res) {
    const auto prompt = nlohmann::json::parse(req.body).at("messages").at(0).at("content").get<std::string>();
    std::this_thread::sleep_for(std::chrono::milliseconds(3));
    const std::string body = fnv1a(prompt) % 3 == 0 ? "no idea" : R"({"answer":")" + oracle_letter(prompt) + R"("})";
    res.set_content(testsupport::completion_body(body), "application/json");
  });
  const auto dir = scratch() / "resume";
  fs::create_directories(dir);
  auto args = [&](const std::string& id) {
    return std::vector<std::string>{"run",          "--family",        "collision", "--grid",
                                    "4x4,8x8",      "--count",         "100",       "--seed",
                                    "5",            "--endpoint",      server.url(), "--model",
                                    "mock",         "--max-in-flight", "2",         "--output-dir",
                                    dir.string(),   "--run-id",        id};
  };
  if (spawn_cli(args("straight"), dir / "straight.log") != 0) {
    out.fail("uninterrupted run failed: " + slurp(dir / "straight.log"));
    return;
  }

  pid_t pid = 0;
  spawn_cli(args("killed"), dir / "killed.log", &pid);
  const auto records = dir / "killed" / "records.jsonl";
  const auto deadline = Clock::now() + std::chrono::seconds(60);
  while (Clock::now() < deadline && (!fs::exists(records) || line_count(records) < 100)) {
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  ::kill(pid, SIGKILL);
  int status = 0;
  waitpid(pid, &status, 0);
  const std::size_t at_kill = line_count(records);
  if (WIFEXITED(status) || at_kill >= 200) {
    out.fail("run finished before it could be killed");
    return;
  }

  auto resumed = args("killed");
  resumed.push_back("--resume");
  if (spawn_cli(resumed, dir / "resumed.log") != 0) {
    out.fail("resume failed: " + slurp(dir / "resumed.log"));
    return;
  }
  auto view = [](const fs::path& p) {
    std::vector<nlohmann::json> v;
    for (const auto& r : load_records(p, false).records) v.push_back(deterministic_view(r));
    return v;
  };
  const auto a = view(dir / "straight" / "records.jsonl");
  const auto b = view(records);
  if (a.size() != 200 || a != b) {
    out.fail("resumed records differ from the uninterrupted run");
  } else if (slurp(dir / "straight" / "metrics.csv") != slurp(dir / "killed" / "metrics.csv")) {
    out.fail("metrics differ");
  } else {
    out.detail << "killed with " << at_kill << "/200 records on disk; resumed records and metrics match";
  }
}

}  // namespace

int main() {
  report("oracle-sweep", oracle_sweep);
  report("chance-calibration", chance_calibration);
  report("flaky-format-demo", flaky_demo);
  report("metric-identity", metric_identity);
  report("simulator-conservation", conservation);
  report("oracle-equivalence", oracle_equivalence);
  report("determinism", determinism);
  report("constraint-audit", constraint_audit);
  report("mock-endpoint", mock_round_trip);
  report("resume-correctness", resume_correctness);
  fs::remove_all(scratch());
  std::printf("%d of 10 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
