#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string_view>

namespace detour {

/// Cell ids are 1-based. Index 0 is never a valid cell.
using Cell = int;

enum class Action : std::uint8_t { Up = 0, Right = 1, Down = 2, Left = 3 };

inline constexpr int kActionCount = 4;
inline constexpr std::array<Action, kActionCount> kActions = {Action::Up, Action::Right, Action::Down,
                                                             Action::Left};

constexpr int index_of(Action a) { return static_cast<int>(a); }
constexpr Action action_at(int i) { return static_cast<Action>(i); }

constexpr Action opposite(Action a) {
  switch (a) {
    case Action::Up: return Action::Down;
    case Action::Right: return Action::Left;
    case Action::Down: return Action::Up;
    case Action::Left: return Action::Right;
  }
  return a;
}

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

/// Rectangular board, numbered column by column: cell = (col - 1) * rows + row.
/// With the default 4 x 7 board, moving right adds 4 and moving down adds 1.
struct GridSpec {
  int rows = 4;
  int cols = 7;

  constexpr int cell_count() const { return rows * cols; }
  constexpr bool contains(Cell c) const { return c >= 1 && c <= cell_count(); }
  constexpr int row_of(Cell c) const { return (c - 1) % rows + 1; }
  constexpr int col_of(Cell c) const { return (c - 1) / rows + 1; }
  constexpr Cell at(int row, int col) const { return (col - 1) * rows + row; }

  /// Geometric neighbour, ignoring walls. Empty when the move leaves the board.
  constexpr std::optional<Cell> neighbor(Cell c, Action a) const {
    const int r = row_of(c);
    const int k = col_of(c);
    switch (a) {
      case Action::Up:
        if (r > 1) return c - 1;
        break;
      case Action::Down:
        if (r < rows) return c + 1;
        break;
      case Action::Right:
        if (k < cols) return c + rows;
        break;
      case Action::Left:
        if (k > 1) return c - rows;
        break;
    }
    return std::nullopt;
  }

  /// Action moving from `from` to the adjacent cell `to`, if they are adjacent.
  constexpr std::optional<Action> action_between(Cell from, Cell to) const {
    for (Action a : kActions) {
      if (auto n = neighbor(from, a); n && *n == to) return a;
    }
    return std::nullopt;
  }

  friend constexpr bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// A directed blocked transition: taking `action` in `from` does not move.
struct Wall {
  Cell from = 0;
  Action action = Action::Up;

  friend constexpr auto operator<=>(const Wall&, const Wall&) = default;
};

}  // namespace detour
