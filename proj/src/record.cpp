#include "staterecall/record.hpp"

#include "staterecall/error.hpp"

namespace staterecall {

using nlohmann::json;

std::string_view to_string(FinishReason reason) {
  switch (reason) {
    case FinishReason::Stop: return "stop";
    case FinishReason::Length: return "length";
    case FinishReason::Other: return "other";
  }
  return "other";
}

FinishReason parse_finish_reason(std::string_view token) {
  if (token == "stop") return FinishReason::Stop;
  if (token == "length") return FinishReason::Length;
  return FinishReason::Other;
}

bool score(const ParseOutcome& parse, const std::string& correct_letter) {
  return parse.parsed() && parse.letter == correct_letter;
}

json to_json(const RunRecord& rec) {
  json parse = {{"status", rec.parse.parsed() ? "parsed" : "unparsed"}};
  if (rec.parse.parsed()) {
    parse["letter"] = rec.parse.letter;
  } else {
    parse["reason"] = to_string(*rec.parse.reason);
  }
  return {
      {"family", family_token(rec.family)},
      {"m", rec.m},
      {"n", rec.n},
      {"index", rec.index},
      {"instance_seed", rec.instance_seed},
      {"instance", rec.instance},
      {"prompt", rec.prompt},
      {"completion", rec.completion},
      {"finish_reason", to_string(rec.finish_reason)},
      {"parse", std::move(parse)},
      {"predicted", rec.predicted ? json(*rec.predicted) : json(nullptr)},
      {"correct_letter", rec.correct_letter},
      {"is_correct", rec.is_correct},
      {"attempts", rec.attempts},
      {"latency_ms", rec.latency_ms},
      {"timestamp", rec.timestamp},
  };
}

RunRecord record_from_json(const json& j) {
  try {
    RunRecord rec;
    rec.family = parse_family(j.at("family").get<std::string>());
    rec.m = j.at("m").get<std::size_t>();
    rec.n = j.at("n").get<std::size_t>();
    rec.index = j.at("index").get<std::size_t>();
    rec.instance_seed = j.at("instance_seed").get<Seed>();
    rec.instance = j.at("instance");
    rec.prompt = j.at("prompt").get<std::string>();
    rec.completion = j.at("completion").get<std::string>();
    rec.finish_reason = parse_finish_reason(j.at("finish_reason").get<std::string>());
    const auto& p = j.at("parse");
    if (p.at("status").get<std::string>() == "parsed") {
      rec.parse = ParseOutcome::ok(p.at("letter").get<std::string>());
    } else {
      rec.parse = ParseOutcome::fail(parse_unparsed_reason(p.at("reason").get<std::string>()));
    }
    if (!j.at("predicted").is_null()) rec.predicted = j.at("predicted").get<std::string>();
    rec.correct_letter = j.at("correct_letter").get<std::string>();
    rec.is_correct = j.at("is_correct").get<bool>();
    rec.attempts = j.value("attempts", 1U);
    rec.latency_ms = j.value("latency_ms", 0.0);
    rec.timestamp = j.value("timestamp", std::string{});
    if (rec.is_correct != score(rec.parse, rec.correct_letter)) {
      throw Error(ErrorCode::MalformedRecord, "is_correct disagrees with parse outcome");
    }
    return rec;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, e.what());
  }
}

json deterministic_view(const RunRecord& rec) {
  json j = to_json(rec);
  j.erase("latency_ms");
  j.erase("timestamp");
  j.erase("attempts");
  return j;
}

}  // namespace staterecall
