#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "staterecall/runner.hpp"

namespace staterecall {

struct SelftestOptions {
  bool quick = false;
  Seed base_seed = 20240601;
  std::filesystem::path catalog_path = default_catalog_path();
  /// Test hook: "oracle-flip" makes the oracle answer a wrong letter.
  std::optional<std::string> inject_fault;
};

struct PropertyResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Runs the scripted-solver checks in memory (no files, no network) over a
/// reduced grid for both families. Returns one result per property, in a
/// fixed order.
std::vector<PropertyResult> run_selftest(const SelftestOptions& opts);

}  // namespace staterecall
