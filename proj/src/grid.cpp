#include "detour/grid.hpp"

namespace detour {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Right: return "right";
    case Action::Down: return "down";
    case Action::Left: return "left";
  }
  return "?";
}

std::optional<Action> parse_action(std::string_view s) {
  for (Action a : kActions) {
    if (to_string(a) == s) return a;
  }
  // Browser key names.
  if (s == "ArrowUp") return Action::Up;
  if (s == "ArrowRight") return Action::Right;
  if (s == "ArrowDown") return Action::Down;
  if (s == "ArrowLeft") return Action::Left;
  return std::nullopt;
}

}  // namespace detour
