#include "aimaze/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace aimaze {
namespace {

std::vector<Cell> optimal_path(const MazeGrid& grid) {
  if (grid.starts.empty()) throw std::runtime_error("maze has no starts");
  const auto path = shortest_path(grid, grid.starts.front(), grid.exit);
  if (!path) throw std::runtime_error("no optimal path to exit");
  return *path;
}

struct TrapScan {
  std::vector<TrapRecord> records;
  std::vector<std::vector<Cell>> components;
};

/// Off-path connected components of passable cells. A component touching
/// exactly one optimal-path cell is a trap; components touching two or
/// more are alternative corridors that rejoin the path.
TrapScan scan_traps(const MazeGrid& grid) {
  TrapScan scan;
  const std::vector<Cell> path = optimal_path(grid);
  const std::set<Cell> on_path(path.begin(), path.end());

  std::set<Cell> seen;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      const Cell origin{r, c};
      if (!grid.passable(origin) || on_path.count(origin) ||
          seen.count(origin)) {
        continue;
      }

      std::vector<Cell> component;
      std::set<Cell> touched_path;
      std::deque<Cell> queue{origin};
      seen.insert(origin);
      while (!queue.empty()) {
        const Cell cur = queue.front();
        queue.pop_front();
        component.push_back(cur);
        for (const Direction d : kDirections) {
          const Cell t = step(cur, d);
          if (!grid.passable(t)) continue;
          if (on_path.count(t)) {
            touched_path.insert(t);
            continue;
          }
          if (seen.insert(t).second) queue.push_back(t);
        }
      }
      if (touched_path.size() != 1) continue;

      const Cell branch = *touched_path.begin();
      const std::set<Cell> in_trap(component.begin(), component.end());

      // Depth: longest BFS distance from the branch cell into the trap.
      std::map<Cell, int> dist{{branch, 0}};
      std::deque<Cell> frontier{branch};
      int depth = 0;
      while (!frontier.empty()) {
        const Cell cur = frontier.front();
        frontier.pop_front();
        for (const Direction d : kDirections) {
          const Cell t = step(cur, d);
          if (!in_trap.count(t) || dist.count(t)) continue;
          dist[t] = dist[cur] + 1;
          depth = std::max(depth, dist[t]);
          frontier.push_back(t);
        }
      }

      int branches = 0;
      int dead_ends = 0;
      for (const Cell cell : component) {
        int trap_degree = 0;
        for (const Direction d : kDirections) {
          if (in_trap.count(step(cell, d))) ++trap_degree;
        }
        if (trap_degree >= 3) ++branches;
        if (grid.passable_neighbors(cell) == 1) ++dead_ends;
      }

      TrapRecord record;
      record.branch_cell = branch;
      record.depth = depth;
      record.branches = branches;
      record.dead_ends = dead_ends;
      record.weight = trap_weight(depth, branches, dead_ends);
      std::sort(component.begin(), component.end());
      scan.records.push_back(record);
      scan.components.push_back(std::move(component));
    }
  }
  return scan;
}

}  // namespace

double trap_weight(int depth, int branches, int dead_ends) {
  return 1.0 + 0.5 * depth + 0.3 * branches + 0.2 * dead_ends;
}

double direction_entropy(const std::array<int, 4>& counts) {
  double total = 0.0;
  for (const int n : counts) total += n;
  if (total <= 0.0) return 0.0;
  double entropy = 0.0;
  for (const int n : counts) {
    if (n == 0) continue;
    const double p = n / total;
    entropy -= p * std::log2(p);
  }
  return entropy;
}

double surprisingness(const MazeGrid& grid) {
  const std::vector<Cell> path = optimal_path(grid);
  if (path.size() < 2) return 0.0;

  std::array<int, 4> counts{};
  for (std::size_t i = 1; i < path.size(); ++i) {
    const auto d = direction_between(path[i - 1], path[i]);
    counts[static_cast<std::size_t>(*d)] += 1;
  }
  return direction_entropy(counts);
}

std::vector<TrapRecord> detect_traps(const MazeGrid& grid) {
  return scan_traps(grid).records;
}

std::vector<std::vector<Cell>> trap_cells(const MazeGrid& grid) {
  return scan_traps(grid).components;
}

double deceptiveness(const MazeGrid& grid) {
  const TrapScan scan = scan_traps(grid);
  if (scan.records.empty()) return 0.0;

  double total = 0.0;
  for (std::size_t i = 0; i < scan.records.size(); ++i) {
    const Cell branch = scan.records[i].branch_cell;
    const int feasible = grid.passable_neighbors(branch);
    if (feasible <= 0) continue;
    const double p = 1.0 / feasible;
    const std::set<Cell> in_trap(scan.components[i].begin(),
                                 scan.components[i].end());
    for (const Direction d : kDirections) {
      if (in_trap.count(step(branch, d))) total += -p * std::log2(p);
    }
  }
  return total;
}

MazeComplexity compute_complexity(const MazeGrid& grid) {
  MazeComplexity out;
  out.surprisingness = surprisingness(grid);
  TrapScan scan = scan_traps(grid);
  out.traps = std::move(scan.records);
  out.total_trap_complexity = 0.0;
  for (const TrapRecord& t : out.traps) out.total_trap_complexity += t.weight;
  out.deceptiveness = deceptiveness(grid);
  out.connectivity_ratio = connectivity_ratio(grid);
  out.optimal_path_length =
      static_cast<int>(optimal_path(grid).size()) - 1;
  return out;
}

}  // namespace aimaze
