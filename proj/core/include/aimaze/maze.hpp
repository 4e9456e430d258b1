#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aimaze/cell.hpp"

namespace aimaze {

enum class CellKind : char {
  Wall = 'W',
  Open = 'O',
  Exit = 'E',
  Frame = 'X',
};

/// Discrete n x n maze. The outer ring is Frame; interior cells are
/// Wall/Open/Exit. Exactly one Exit exists in a finished maze and every
/// start is an Open cell with a path to it.
struct MazeGrid {
  int size = 0;
  std::vector<CellKind> cells;  // row-major, size*size
  std::vector<Cell> starts;
  Cell exit{-1, -1};
  std::uint64_t seed = 0;
  double dead_end_factor = 0.0;

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < size && c.col >= 0 && c.col < size;
  }
  CellKind at(Cell c) const { return cells[c.row * size + c.col]; }
  CellKind& at(Cell c) { return cells[c.row * size + c.col]; }
  bool passable(Cell c) const {
    if (!in_bounds(c)) return false;
    const CellKind k = at(c);
    return k == CellKind::Open || k == CellKind::Exit;
  }
  bool interior(Cell c) const {
    return c.row >= 1 && c.row < size - 1 && c.col >= 1 && c.col < size - 1;
  }
  int passable_neighbors(Cell c) const;

  bool operator==(const MazeGrid&) const = default;
};

struct ValidationReport {
  bool pass = false;
  double connectivity_ratio = 0.0;
  // Shortest-path edge count from the nearest start to the exit; -1 when
  // some start cannot reach it.
  int optimal_path_length = -1;
  std::vector<std::string> failures;
};

class GenerationError : public std::runtime_error {
 public:
  GenerationError(std::string message, int attempts)
      : std::runtime_error(std::move(message)), attempts_(attempts) {}
  int attempts() const { return attempts_; }

 private:
  int attempts_ = 0;
};

/// Start-count rule: 1 below 15, 5 below 25, 9 from 25 up.
int start_count_for_size(int n);

/// Connectivity ratio: passable interior cells over all interior cells.
double connectivity_ratio(const MazeGrid& grid);

/// Carve a maze by recursive backtracking, tune the dead-end density
/// toward dead_end_factor, spread the starts, and place the exit.
/// Pure in (size, dead_end_factor, seed); retries internally up to 64
/// attempts and throws GenerationError when validation cannot be met.
MazeGrid generate_maze(int size, double dead_end_factor, std::uint64_t seed);

/// Pass iff connectivity ratio is in [0.10, 0.95], every start reaches the
/// exit, and the optimal path length is at least the side length.
ValidationReport validate_maze(const MazeGrid& grid);

/// Minimum-length 4-connected path through passable cells, endpoints
/// included; nullopt when disconnected. Throws std::invalid_argument for
/// non-passable endpoints.
std::optional<std::vector<Cell>> shortest_path(const MazeGrid& grid, Cell a,
                                               Cell b);

/// BFS distance map from `from` over passable cells; -1 = unreachable.
std::vector<int> bfs_distances(const MazeGrid& grid, Cell from);

struct ExitPlacement {
  Cell cell;
  double score = 0.0;
};

/// Argmax of the exit-placement score over candidate cells: Open cells
/// reachable from `start` with positive path distance that are not starts.
/// Score(p) = 10*d_path(start,p) + 5*d_manhattan(start,p) + edge bonus
/// (15 edge-adjacent, +25 more when corner-adjacent) + topology bonus
/// (+30 dead end, -10 junction) + 2*d_manhattan(p, center).
/// Ties break in row-major order. nullopt when no candidate is reachable.
std::optional<ExitPlacement> place_exit(const MazeGrid& grid, Cell start);

}  // namespace aimaze
