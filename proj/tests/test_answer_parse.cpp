#include <doctest.h>

#include "staterecall/answer_parse.hpp"
#include "support/checks.hpp"

using namespace staterecall;

namespace {

const std::vector<std::string> kAD{"A", "B", "C", "D"};
const std::vector<std::string> kAB{"A", "B"};
const std::vector<std::string> kPlanets{"TOI-3894 b", "HAT-P-18 b"};
const std::vector<std::string> kSpeeds{"12", "7", "40", "3"};

ParseOutcome p4(const std::string& raw, const ParserConfig& cfg = {}) {
  return parse_answer(raw, kAD, kSpeeds, cfg);
}
ParseOutcome p2(const std::string& raw, const ParserConfig& cfg = {}) {
  return parse_answer(raw, kAB, kPlanets, cfg);
}
ParseOutcome fail(UnparsedReason r) { return ParseOutcome::fail(r); }

}  // namespace

TEST_CASE("direct answers") {
  CHECK(p4(R"({"answer": "B"})") == ParseOutcome::ok("B"));
  CHECK(p4(R"(  {"answer":" c "}  )") == ParseOutcome::ok("C"));
  CHECK(p2("<think>long trace, maybe B?</think>\n{\"answer\":\"a\"}") == ParseOutcome::ok("A"));
}

TEST_CASE("unparsed reasons") {
  CHECK(p4("I think the answer is B") == fail(UnparsedReason::NoJsonObject));
  CHECK(p4(R"({"answer": "E"})") == fail(UnparsedReason::InvalidOption));
  CHECK(p4(R"({"answer": null})") == fail(UnparsedReason::InvalidOption));
  CHECK(p4(R"({"choice": "B"})") == fail(UnparsedReason::NoAnswerKey));
  CHECK(p4("") == fail(UnparsedReason::Empty));
  CHECK(p4("   \n\t") == fail(UnparsedReason::Empty));
  CHECK(p4("<think>all reasoning</think>") == fail(UnparsedReason::Empty));
  CHECK(p4("<think>I keep going and going") == fail(UnparsedReason::Truncated));
  CHECK(p4(R"(<think>maybe {"answer": "A"} or)") == fail(UnparsedReason::Truncated));
  CHECK(p4(R"({"answer": "B")") == fail(UnparsedReason::NoJsonObject));
}

TEST_CASE("option text matching") {
  CHECK(p2(R"({"answer":"HAT-P-18 b"})") == ParseOutcome::ok("B"));
  CHECK(p2(R"({"answer":"hat-p-18 B"})") == ParseOutcome::ok("B"));
  CHECK(p4(R"({"answer": 40})") == ParseOutcome::ok("C"));
  CHECK(p4(R"({"answer": "7"})") == ParseOutcome::ok("B"));
  ParserConfig letters_only;
  letters_only.accept_option_text = false;
  CHECK(p2(R"({"answer":"HAT-P-18 b"})", letters_only) == fail(UnparsedReason::InvalidOption));
  CHECK(p2(R"({"answer":"b"})", letters_only) == ParseOutcome::ok("B"));
}

TEST_CASE("the last object with an answer key wins") {
  CHECK(p4(R"({"answer":"A"} on reflection {"answer":"D"} {"note":"x"})") == ParseOutcome::ok("D"));
  CHECK(p4(R"(draft {"answer": {"nested": 1}} then {"answer":"C"})") == ParseOutcome::ok("C"));
  CHECK(p4(R"({"answer":"C"} and later {"answer":"Z"})") == fail(UnparsedReason::InvalidOption));
  CHECK(p4(R"(text with a brace } and {"answer":"A", "why":"{curly}"})") == ParseOutcome::ok("A"));
}

TEST_CASE("reasoning stripping") {
  const ParserConfig cfg;
  CHECK(strip_reasoning("a<think>x</think>b<think>y</think>c", cfg).text == "abc");
  const auto t = strip_reasoning("keep<think>lost", cfg);
  CHECK(t.text == "keep");
  CHECK(t.truncated);
  // open tag supplied by the chat template, only the close tag is generated
  CHECK(strip_reasoning("reasoning...</think>{\"answer\":\"A\"}", cfg).text == "{\"answer\":\"A\"}");
  CHECK(p4("reasoning {\"answer\":\"B\"}...</think>{\"answer\":\"A\"}") == ParseOutcome::ok("A"));

  ParserConfig two;
  two.reasoning_delimiters = {{"<think>", "</think>"}, {"<reasoning>", "</reasoning>"}};
  CHECK(strip_reasoning("<reasoning>r</reasoning>x<think>t</think>y", two).text == "xy");

  ParserConfig bad;
  bad.reasoning_delimiters = {{"", "</think>"}};
  CHECK_ERROR_CODE(strip_reasoning("x", bad), ErrorCode::InvalidArgument);
}

TEST_CASE("stripping is idempotent") {
  const ParserConfig cfg;
  const char* samples[] = {
      "<think>a</think>b",
      "<thi<think>x</think>nk>inner</think>tail",
      "x</think>y<think>z",
      "<think><think>a</think></think>b",
      "plain",
  };
  for (const char* s : samples) {
    const auto once = strip_reasoning(s, cfg);
    const auto twice = strip_reasoning(once.text, cfg);
    CHECK_MESSAGE(once.text == twice.text, s);
  }
}

TEST_CASE("json object scanning") {
  const auto objs = find_json_objects(R"(x {"a":1} y {bad} {"b":{"c":2}} {"s":"}"})");
  REQUIRE(objs.size() == 3);
  CHECK(objs[0] == R"({"a":1})");
  CHECK(objs[1] == R"({"b":{"c":2}})");
  CHECK(objs[2] == R"({"s":"}"})");
}

TEST_CASE("reason tokens round-trip") {
  for (auto r : {UnparsedReason::NoJsonObject, UnparsedReason::NoAnswerKey, UnparsedReason::InvalidOption,
                 UnparsedReason::Truncated, UnparsedReason::Empty}) {
    CHECK(parse_unparsed_reason(to_string(r)) == r);
  }
}
