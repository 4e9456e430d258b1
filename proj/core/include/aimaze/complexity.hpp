#pragma once

#include <vector>

#include "aimaze/maze.hpp"

namespace aimaze {

/// A trap: a pocket of open cells hanging off a single optimal-path cell
/// and terminating only in dead ends.
/// weight = 1.0 + 0.5*depth + 0.3*branches + 0.2*dead_ends.
struct TrapRecord {
  Cell branch_cell{-1, -1};  // the optimal-path cell the trap hangs off
  int depth = 0;             // longest branch-cell-to-dead-end distance
  int branches = 0;          // junction cells internal to the trap
  int dead_ends = 0;         // dead-end cells inside the trap
  double weight = 1.0;

  bool operator==(const TrapRecord&) const = default;
};

double trap_weight(int depth, int branches, int dead_ends);

struct MazeComplexity {
  double surprisingness = 0.0;  // bits
  double deceptiveness = 0.0;   // bits
  std::vector<TrapRecord> traps;
  double total_trap_complexity = 0.0;
  double connectivity_ratio = 0.0;
  int optimal_path_length = 0;

  bool operator==(const MazeComplexity&) const = default;
};

/// Entropy (bits) of a 4-symbol direction count vector.
double direction_entropy(const std::array<int, 4>& counts);

/// Entropy (bits) of the N/S/E/W move distribution along the optimal path
/// from starts[0] to the exit. Throws std::runtime_error when no path
/// exists.
double surprisingness(const MazeGrid& grid);

std::vector<TrapRecord> detect_traps(const MazeGrid& grid);

/// Trap cell sets aligned index-for-index with detect_traps output.
std::vector<std::vector<Cell>> trap_cells(const MazeGrid& grid);

/// Sum over trap branch cells c and trap entries s adjacent to c of
/// -p(s|c) log2 p(s|c), with p uniform over the feasible moves from c.
double deceptiveness(const MazeGrid& grid);

MazeComplexity compute_complexity(const MazeGrid& grid);

}  // namespace aimaze
