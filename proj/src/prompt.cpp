#include "staterecall/prompt.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "staterecall/error.hpp"

namespace staterecall {

namespace {

void check_config(const PromptTemplateConfig& cfg) {
  if (cfg.answer_instruction.find("answer") == std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "answer instruction must mention the key \"answer\"");
  }
  if (cfg.answer_instruction.find('\n') != std::string::npos) {
    throw Error(ErrorCode::InvalidArgument, "answer instruction must be a single line");
  }
}

RenderedPrompt finish(std::string text, std::size_t option_count) {
  RenderedPrompt out;
  out.char_count = text.size();
  out.text = std::move(text);
  for (std::size_t i = 0; i < option_count; ++i) out.option_letters.push_back(option_letter(i));
  return out;
}

std::string pad(const std::string& s, std::size_t width) {
  return s + std::string(width > s.size() ? width - s.size() : 0, ' ');
}

// Rows are listed in catalog order, so a row's table position says nothing
// about which variable it is bound to.
void write_table(std::ostream& os, const AstroInstance& inst) {
  std::vector<std::size_t> widths;
  for (const auto& col : inst.columns) widths.push_back(std::max<std::size_t>(col.size(), 3));
  for (const auto& row : inst.rows) {
    for (std::size_t c = 0; c < inst.columns.size(); ++c) {
      widths[c] = std::max(widths[c], row.at(inst.columns[c]).size());
    }
  }

  std::vector<std::size_t> order(inst.rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return inst.row_catalog_index[a] < inst.row_catalog_index[b];
  });

  os << '|';
  for (std::size_t c = 0; c < inst.columns.size(); ++c) os << ' ' << pad(inst.columns[c], widths[c]) << " |";
  os << "\n|";
  for (std::size_t c = 0; c < inst.columns.size(); ++c) os << std::string(widths[c] + 2, '-') << '|';
  os << '\n';
  for (std::size_t r : order) {
    os << '|';
    for (std::size_t c = 0; c < inst.columns.size(); ++c) {
      os << ' ' << pad(inst.rows[r].at(inst.columns[c]), widths[c]) << " |";
    }
    os << '\n';
  }
}

}  // namespace

RenderedPrompt render_astro(const AstroInstance& inst, const PromptTemplateConfig& cfg) {
  check_config(cfg);
  std::ostringstream os;
  write_table(os, inst);

  os << "\nConsider the following " << inst.target_column << ":\n";
  std::string names;
  std::string values;
  // binding is keyed by name, which does not sort by ordinal past "z"
  for (std::size_t i = 0; i < inst.m; ++i) {
    const VarName var = VarName::from_ordinal(i);
    if (i > 0) {
      names += ", ";
      values += ", ";
    }
    names += var.name;
    values += inst.rows.at(inst.binding.at(var)).at(inst.target_column);
  }
  os << names << " = " << values << "\n\n";

  os << "Consider the following swapping:\n";
  if (!inst.swaps.empty()) os << '\n';
  for (const auto& op : inst.swaps) {
    os << "- " << op.left_first.name << ", " << op.left_second.name << " = " << op.right_first.name
       << ", " << op.right_second.name << '\n';
  }
  os << '\n';

  os << "The " << inst.retrieve_column << " with the " << inst.target_column << " = "
     << inst.query_var.name << " is\n\n";
  os << "The two candidate answers are:\n\n";
  os << "A) " << inst.option_a << '\n';
  os << "B) " << inst.option_b << "\n\n";
  os << "Reply:\n" << cfg.answer_instruction << '\n';
  return finish(os.str(), 2);
}

RenderedPrompt render_collision(const CollisionInstance& inst, const PromptTemplateConfig& cfg) {
  check_config(cfg);
  std::ostringstream os;
  os << "Problem:\n"
        "Consider a one-dimensional system in which all particles\n"
        "move along a single line.\n"
        "\n"
        "Key rule:\n"
        "- When two particles of equal mass collide elastically,\n"
        "they simply exchange velocities.\n"
        "(This means each particle leaves the collision with the\n"
        "other particle's incoming velocity.)\n"
        "\n"
        "Initial velocities:\n";
  for (std::size_t i = 0; i < inst.m; ++i) {
    const auto label = ParticleLabel::from_ordinal(i);
    os << label.name << " = " << inst.velocities.at(label) << '\n';
  }
  os << "\nCollisions occur in the following order:\n";
  for (std::size_t k = 0; k < inst.collisions.size(); ++k) {
    os << (k + 1) << ". " << inst.collisions[k].first.name << " collides with "
       << inst.collisions[k].second.name << '\n';
  }
  os << "\nQuestion:\n- What is the velocity of " << inst.query.name << "?\n\nOptions:\n";
  for (std::size_t i = 0; i < inst.options.size(); ++i) {
    os << option_letter(i) << ") " << inst.options[i] << '\n';
  }
  os << "\nAnswer:\n" << cfg.answer_instruction << '\n';
  return finish(os.str(), inst.options.size());
}

RenderedPrompt render(const TaskInstance& task, const PromptTemplateConfig& cfg) {
  return task.family == Family::AstroRecall ? render_astro(task.astro(), cfg)
                                            : render_collision(task.collision(), cfg);
}

std::vector<std::string> extract_option_letters(const std::string& prompt_text) {
  std::vector<std::string> letters;
  std::istringstream in(prompt_text);
  std::string line;
  while (std::getline(in, line)) {
    std::size_t k = 0;
    while (k < line.size() && line[k] >= 'A' && line[k] <= 'Z') ++k;
    if (k > 0 && k + 1 < line.size() && line[k] == ')' && line[k + 1] == ' ') {
      letters.push_back(line.substr(0, k));
    }
  }
  return letters;
}

}  // namespace staterecall
