#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace staterecall {

enum class ParseStatus { Parsed, Unparsed };
enum class UnparsedReason { NoJsonObject, NoAnswerKey, InvalidOption, Truncated, Empty };

std::string_view to_string(UnparsedReason reason);
UnparsedReason parse_unparsed_reason(std::string_view token);

struct ParseOutcome {
  ParseStatus status = ParseStatus::Unparsed;
  std::string letter;                    // set iff Parsed
  std::optional<UnparsedReason> reason;  // set iff Unparsed

  [[nodiscard]] bool parsed() const { return status == ParseStatus::Parsed; }

  static ParseOutcome ok(std::string letter) {
    return {ParseStatus::Parsed, std::move(letter), std::nullopt};
  }
  static ParseOutcome fail(UnparsedReason why) { return {ParseStatus::Unparsed, {}, why}; }

  friend bool operator==(const ParseOutcome&, const ParseOutcome&) = default;
};

struct ReasoningDelimiters {
  std::string open;
  std::string close;
};

struct ParserConfig {
  std::vector<ReasoningDelimiters> reasoning_delimiters{{"<think>", "</think>"}};
  bool accept_option_text = true;
};

struct StrippedText {
  std::string text;
  bool truncated = false;  // an open tag had no matching close tag
};

/// Removes every complete open...close span for each delimiter pair, in
/// config order. An open tag without a close tag drops the rest of the text.
/// A close tag with no open tag before it (chat templates often put the open
/// tag in the prompt) drops everything up to and including it.
StrippedText strip_reasoning(std::string_view raw, const ParserConfig& cfg);

/// Top-level, syntactically valid JSON objects found in `text`, in order.
std::vector<std::string> find_json_objects(std::string_view text);

ParseOutcome parse_answer(std::string_view raw, std::span<const std::string> option_letters,
                          std::span<const std::string> option_texts, const ParserConfig& cfg = {});

}  // namespace staterecall
