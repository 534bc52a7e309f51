#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "staterecall/answer_parse.hpp"
#include "staterecall/seed.hpp"

namespace staterecall {

enum class FinishReason { Stop, Length, Other };

std::string_view to_string(FinishReason reason);
FinishReason parse_finish_reason(std::string_view token);

/// One evaluated item, as persisted to records.jsonl.
struct RunRecord {
  Family family = Family::AstroRecall;
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t index = 0;
  Seed instance_seed = 0;
  nlohmann::json instance;  // canonical TaskInstance
  std::string prompt;
  std::string completion;
  FinishReason finish_reason = FinishReason::Stop;
  ParseOutcome parse;
  std::optional<std::string> predicted;
  std::string correct_letter;
  bool is_correct = false;
  std::uint32_t attempts = 1;
  double latency_ms = 0.0;
  std::string timestamp;  // ISO-8601 UTC
};

/// Exact-match scoring on the option letter.
bool score(const ParseOutcome& parse, const std::string& correct_letter);

nlohmann::json to_json(const RunRecord& rec);
RunRecord record_from_json(const nlohmann::json& j);
/// to_json() without the transport-dependent fields (latency_ms, timestamp,
/// attempts).
nlohmann::json deterministic_view(const RunRecord& rec);

}  // namespace staterecall
