#pragma once

// Brute-force reference solver. It reads only the rendered prompt text and
// shares no code with the generators or simulators.

#include <string>

namespace oracle {

// Correct option letter for a rendered astro prompt.
std::string solve_astro_prompt(const std::string& prompt);

// Correct option letter for a rendered collision prompt.
std::string solve_collision_prompt(const std::string& prompt);

}  // namespace oracle
