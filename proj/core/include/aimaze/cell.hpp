#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace aimaze {

/// Matrix coordinates (row, col): row 0 is the top row.
/// NORTH decrements row, SOUTH increments row, EAST increments col,
/// WEST decrements col.
struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

enum class Direction : std::uint8_t { North, South, East, West };

inline constexpr std::array<Direction, 4> kDirections = {
    Direction::North, Direction::South, Direction::East, Direction::West};

constexpr Cell step(Cell from, Direction d) {
  switch (d) {
    case Direction::North: return {from.row - 1, from.col};
    case Direction::South: return {from.row + 1, from.col};
    case Direction::East: return {from.row, from.col + 1};
    case Direction::West: return {from.row, from.col - 1};
  }
  return from;
}

constexpr Direction reverse(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::South: return Direction::North;
    case Direction::East: return Direction::West;
    case Direction::West: return Direction::East;
  }
  return d;
}

/// Direction of the unit step from a to b, if the cells are 4-adjacent.
std::optional<Direction> direction_between(Cell a, Cell b);

int manhattan(Cell a, Cell b);

std::string to_string(Direction d);     // "N" / "S" / "E" / "W"
std::string to_string(Cell c);          // "r:c"
std::optional<Direction> direction_from_string(std::string_view s);

}  // namespace aimaze
