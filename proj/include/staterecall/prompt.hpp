#pragma once

#include <string>
#include <vector>

#include "staterecall/astro.hpp"
#include "staterecall/collision.hpp"
#include "staterecall/task.hpp"

namespace staterecall {

inline constexpr const char* kDefaultAnswerInstruction =
    R"(Reply with a JSON object of the form {"answer": "<LETTER>"}.)";

struct PromptTemplateConfig {
  // Appended as the final line of every prompt. Must mention the key "answer".
  std::string answer_instruction = kDefaultAnswerInstruction;
};

struct RenderedPrompt {
  std::string text;
  std::size_t char_count = 0;
  std::vector<std::string> option_letters;
};

RenderedPrompt render_astro(const AstroInstance& instance, const PromptTemplateConfig& cfg = {});
RenderedPrompt render_collision(const CollisionInstance& instance,
                                const PromptTemplateConfig& cfg = {});
RenderedPrompt render(const TaskInstance& task, const PromptTemplateConfig& cfg = {});

/// Letters of the "X) ..." lines in the options block, in order of appearance.
std::vector<std::string> extract_option_letters(const std::string& prompt_text);

}  // namespace staterecall
