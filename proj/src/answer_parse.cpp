#include "staterecall/answer_parse.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>

#include "staterecall/error.hpp"

namespace staterecall {

std::string_view to_string(UnparsedReason reason) {
  switch (reason) {
    case UnparsedReason::NoJsonObject: return "NoJsonObject";
    case UnparsedReason::NoAnswerKey: return "NoAnswerKey";
    case UnparsedReason::InvalidOption: return "InvalidOption";
    case UnparsedReason::Truncated: return "Truncated";
    case UnparsedReason::Empty: return "Empty";
  }
  return "Unknown";
}

UnparsedReason parse_unparsed_reason(std::string_view token) {
  for (auto r : {UnparsedReason::NoJsonObject, UnparsedReason::NoAnswerKey,
                 UnparsedReason::InvalidOption, UnparsedReason::Truncated, UnparsedReason::Empty}) {
    if (to_string(r) == token) return r;
  }
  throw Error(ErrorCode::MalformedRecord, "unknown parse reason '" + std::string(token) + "'");
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string fold(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

// One left-to-right pass for a single delimiter pair.
bool strip_pass(std::string& text, const ReasoningDelimiters& d, bool& truncated) {
  bool changed = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto open = text.find(d.open, pos);
    const auto close = text.find(d.close, pos);
    if (open == std::string::npos && close == std::string::npos) break;
    if (close != std::string::npos && (open == std::string::npos || close < open)) {
      // orphan close tag: everything before it was reasoning
      text.erase(0, close + d.close.size());
      pos = 0;
      changed = true;
      continue;
    }
    const auto end = text.find(d.close, open + d.open.size());
    if (end == std::string::npos) {
      text.erase(open);
      truncated = true;
      return true;
    }
    text.erase(open, end + d.close.size() - open);
    pos = open;
    changed = true;
  }
  return changed;
}

// Index one past the '}' balancing the '{' at `start`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

std::optional<std::string> answer_value_text(const nlohmann::json& value) {
  if (value.is_string()) return trim(value.get<std::string>());
  if (value.is_number()) return value.dump();
  return std::nullopt;
}

}  // namespace

StrippedText strip_reasoning(std::string_view raw, const ParserConfig& cfg) {
  StrippedText out{std::string(raw), false};
  for (const auto& d : cfg.reasoning_delimiters) {
    if (d.open.empty() || d.close.empty() || d.open == d.close) {
      throw Error(ErrorCode::InvalidArgument, "reasoning delimiters must be non-empty and distinct");
    }
  }
  // Erasing a span can splice a new tag together, so iterate to a fixpoint.
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& d : cfg.reasoning_delimiters) changed |= strip_pass(out.text, d, out.truncated);
  }
  return out;
}

std::vector<std::string> find_json_objects(std::string_view text) {
  std::vector<std::string> found;
  std::size_t pos = 0;
  while ((pos = text.find('{', pos)) != std::string_view::npos) {
    const auto end = balanced_end(text, pos);
    if (end != std::string_view::npos) {
      auto candidate = text.substr(pos, end - pos);
      auto parsed = nlohmann::json::parse(candidate, nullptr, false);
      if (!parsed.is_discarded() && parsed.is_object()) {
        found.emplace_back(candidate);
        pos = end;
        continue;
      }
    }
    ++pos;
  }
  return found;
}

ParseOutcome parse_answer(std::string_view raw, std::span<const std::string> option_letters,
                          std::span<const std::string> option_texts, const ParserConfig& cfg) {
  if (option_letters.empty()) throw Error(ErrorCode::InvalidArgument, "no option letters");
  if (trim(raw).empty()) return ParseOutcome::fail(UnparsedReason::Empty);

  const StrippedText stripped = strip_reasoning(raw, cfg);
  const auto objects = find_json_objects(stripped.text);

  std::optional<nlohmann::json> answer;
  for (auto it = objects.rbegin(); it != objects.rend(); ++it) {
    auto obj = nlohmann::json::parse(*it);
    if (obj.contains("answer")) {
      answer = obj.at("answer");
      break;
    }
  }

  if (answer) {
    const auto value = answer_value_text(*answer);
    if (value) {
      const std::string folded = fold(*value);
      for (const auto& letter : option_letters) {
        if (fold(letter) == folded) return ParseOutcome::ok(letter);
      }
      if (cfg.accept_option_text) {
        const std::size_t count = std::min(option_letters.size(), option_texts.size());
        for (std::size_t i = 0; i < count; ++i) {
          if (fold(trim(option_texts[i])) == folded) return ParseOutcome::ok(option_letters[i]);
        }
      }
    }
    return ParseOutcome::fail(UnparsedReason::InvalidOption);
  }
  if (stripped.truncated) return ParseOutcome::fail(UnparsedReason::Truncated);
  if (trim(stripped.text).empty()) return ParseOutcome::fail(UnparsedReason::Empty);
  if (!objects.empty()) return ParseOutcome::fail(UnparsedReason::NoAnswerKey);
  return ParseOutcome::fail(UnparsedReason::NoJsonObject);
}

}  // namespace staterecall
