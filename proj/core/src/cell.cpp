#include "aimaze/cell.hpp"

#include <cstdlib>

namespace aimaze {

std::optional<Direction> direction_between(Cell a, Cell b) {
  for (const Direction d : kDirections) {
    if (step(a, d) == b) return d;
  }
  return std::nullopt;
}

int manhattan(Cell a, Cell b) {
  return std::abs(a.row - b.row) + std::abs(a.col - b.col);
}

std::string to_string(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::South: return "S";
    case Direction::East: return "E";
    case Direction::West: return "W";
  }
  return "?";
}

std::string to_string(Cell c) {
  return std::to_string(c.row) + ":" + std::to_string(c.col);
}

std::optional<Direction> direction_from_string(std::string_view s) {
  if (s == "N" || s == "north") return Direction::North;
  if (s == "S" || s == "south") return Direction::South;
  if (s == "E" || s == "east") return Direction::East;
  if (s == "W" || s == "west") return Direction::West;
  return std::nullopt;
}

}  // namespace aimaze
