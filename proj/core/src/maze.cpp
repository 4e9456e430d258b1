#include "aimaze/maze.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "aimaze/rng.hpp"

namespace aimaze {
namespace {

constexpr int kMaxAttempts = 64;
constexpr double kRhoMin = 0.10;
constexpr double kRhoMax = 0.95;

std::vector<Cell> open_cells(const MazeGrid& grid) {
  std::vector<Cell> out;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      if (grid.at({r, c}) == CellKind::Open) out.push_back({r, c});
    }
  }
  return out;
}

int open_neighbor_count(const MazeGrid& grid, Cell c) {
  int n = 0;
  for (const Direction d : kDirections) {
    const Cell t = step(c, d);
    if (grid.in_bounds(t) && grid.at(t) == CellKind::Open) ++n;
  }
  return n;
}

bool is_dead_end(const MazeGrid& grid, Cell c) {
  return grid.at(c) == CellKind::Open && open_neighbor_count(grid, c) == 1;
}

int count_dead_ends(const MazeGrid& grid) {
  int n = 0;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      if (is_dead_end(grid, {r, c})) ++n;
    }
  }
  return n;
}

int count_open(const MazeGrid& grid) {
  int n = 0;
  for (const CellKind k : grid.cells) {
    if (k == CellKind::Open) ++n;
  }
  return n;
}

/// Backtracking carve over a node lattice with the given spacing,
/// modified to branch: the growth head usually extends the newest cell
/// (long solution sequences) but regularly resumes a random active cell,
/// which multiplies junction decision points. Spacing 2 saturates the
/// interior; spacing 3 leaves thicker wall mass so the dead-end pass can
/// grow deep stub pockets for the high-difficulty factors.
void carve_corridors(MazeGrid& grid, Rng& rng, int spacing) {
  std::vector<Cell> lattice;
  for (int r = 1; r < grid.size - 1; r += spacing) {
    for (int c = 1; c < grid.size - 1; c += spacing) {
      lattice.push_back({r, c});
    }
  }
  const Cell origin = rng.pick(lattice);
  grid.at(origin) = CellKind::Open;

  const auto jump = [&](Cell from, Direction d) {
    Cell to = from;
    for (int i = 0; i < spacing; ++i) to = step(to, d);
    return to;
  };

  std::vector<Cell> active{origin};
  while (!active.empty()) {
    const std::size_t pick =
        rng.chance(0.3) ? active.size() - 1
                        : rng.below(static_cast<std::uint32_t>(active.size()));
    const Cell cur = active[pick];
    std::vector<Direction> options;
    for (const Direction d : kDirections) {
      const Cell to = jump(cur, d);
      if (grid.interior(to) && grid.at(to) == CellKind::Wall) {
        options.push_back(d);
      }
    }
    if (options.empty()) {
      active.erase(active.begin() + pick);
      continue;
    }
    const Direction d =
        options[rng.below(static_cast<std::uint32_t>(options.size()))];
    Cell walk = cur;
    for (int i = 0; i < spacing; ++i) {
      walk = step(walk, d);
      grid.at(walk) = CellKind::Open;
    }
    active.push_back(walk);
  }
}

/// Open-room plazas: multi-cell chambers along the corridor network.
/// Rooms add loops and diffusion area without touching the dead-end
/// budget, which stretches undirected exploration far more than it
/// stretches systematic sweeps.
void carve_rooms(MazeGrid& grid, Rng& rng) {
  const int rooms = std::max(1, grid.size / 8);
  for (int i = 0; i < rooms; ++i) {
    const int side = 3 + static_cast<int>(rng.below(std::max(2, grid.size / 9)));
    if (grid.size - 1 - side <= 1) continue;
    const int top = 1 + rng.below(static_cast<std::uint32_t>(grid.size - 1 - side));
    const int left = 1 + rng.below(static_cast<std::uint32_t>(grid.size - 1 - side));
    bool touches_corridor = false;
    for (int r = top; r < top + side && !touches_corridor; ++r) {
      for (int c = left; c < left + side; ++c) {
        if (grid.at({r, c}) == CellKind::Open) {
          touches_corridor = true;
          break;
        }
      }
    }
    if (!touches_corridor) continue;  // keep the maze connected
    for (int r = top; r < top + side; ++r) {
      for (int c = left; c < left + side; ++c) {
        grid.at({r, c}) = CellKind::Open;
      }
    }
  }
}

/// Nudge the dead-end count toward dead_end_factor * open_count: below
/// target, carve one-cell stubs off corridors; above target, braid (open
/// a wall next to a dead end so it joins another corridor). Stops within
/// max(1, 20%) of the target, when the candidate pool is exhausted, or at
/// the edit budget.
void tune_dead_ends(MazeGrid& grid, double factor, Rng& rng) {
  const int interior = (grid.size - 2) * (grid.size - 2);
  int edits_left = 10 * interior;
  while (edits_left-- > 0) {
    const int open = count_open(grid);
    const int dead = count_dead_ends(grid);
    const double target = factor * open;
    const double tolerance = std::max(1.0, 0.2 * target);
    if (std::abs(dead - target) <= tolerance) return;

    if (dead < target) {
      // Stub candidates: interior walls touching exactly one Open cell
      // whose neighbor keeps degree >= 2 after carving (guarantees a net
      // new dead end).
      std::vector<Cell> candidates;
      for (int r = 1; r < grid.size - 1; ++r) {
        for (int c = 1; c < grid.size - 1; ++c) {
          const Cell w{r, c};
          if (grid.at(w) != CellKind::Wall) continue;
          Cell neighbor{-1, -1};
          int open_adjacent = 0;
          for (const Direction d : kDirections) {
            const Cell t = step(w, d);
            if (grid.in_bounds(t) && grid.at(t) == CellKind::Open) {
              ++open_adjacent;
              neighbor = t;
            }
          }
          if (open_adjacent == 1 && open_neighbor_count(grid, neighbor) >= 2) {
            candidates.push_back(w);
          }
        }
      }
      if (candidates.empty()) return;  // best effort: pool exhausted
      grid.at(candidates[rng.below(static_cast<std::uint32_t>(candidates.size()))]) =
          CellKind::Open;
    } else {
      // Braid candidates: walls adjacent to a dead end whose far side is
      // open, so opening them gives the dead end a second exit.
      std::vector<Cell> candidates;
      for (int r = 1; r < grid.size - 1; ++r) {
        for (int c = 1; c < grid.size - 1; ++c) {
          const Cell cell{r, c};
          if (!is_dead_end(grid, cell)) continue;
          for (const Direction d : kDirections) {
            const Cell wall = step(cell, d);
            const Cell far = step(wall, d);
            if (grid.interior(wall) && grid.at(wall) == CellKind::Wall &&
                grid.in_bounds(far) && grid.at(far) == CellKind::Open) {
              candidates.push_back(wall);
            }
          }
        }
      }
      if (candidates.empty()) return;
      grid.at(candidates[rng.below(static_cast<std::uint32_t>(candidates.size()))]) =
          CellKind::Open;
    }
  }
}

/// Farthest-point spread over the candidate cells: each added start
/// maximizes the minimum Manhattan distance to those already chosen.
void spread_starts(MazeGrid& grid, const std::vector<Cell>& candidates,
                   int count) {
  while (static_cast<int>(grid.starts.size()) < count) {
    Cell best{-1, -1};
    int best_dist = -1;
    for (const Cell c : candidates) {
      int nearest = std::numeric_limits<int>::max();
      for (const Cell s : grid.starts) {
        nearest = std::min(nearest, manhattan(c, s));
      }
      if (nearest > best_dist) {
        best_dist = nearest;
        best = c;
      }
    }
    if (best_dist <= 0) break;  // candidate pool exhausted
    grid.starts.push_back(best);
  }
}

}  // namespace

int MazeGrid::passable_neighbors(Cell c) const {
  int n = 0;
  for (const Direction d : kDirections) {
    if (passable(step(c, d))) ++n;
  }
  return n;
}

int start_count_for_size(int n) {
  if (n < 15) return 1;
  if (n < 25) return 5;
  return 9;
}

double connectivity_ratio(const MazeGrid& grid) {
  const int interior = (grid.size - 2) * (grid.size - 2);
  if (interior <= 0) return 0.0;
  int open = 0;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      if (grid.passable({r, c})) ++open;
    }
  }
  return static_cast<double>(open) / interior;
}

std::vector<int> bfs_distances(const MazeGrid& grid, Cell from) {
  std::vector<int> dist(static_cast<std::size_t>(grid.size) * grid.size, -1);
  if (!grid.passable(from)) return dist;
  std::deque<Cell> queue{from};
  dist[from.row * grid.size + from.col] = 0;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    const int next = dist[cur.row * grid.size + cur.col] + 1;
    for (const Direction d : kDirections) {
      const Cell t = step(cur, d);
      if (!grid.passable(t)) continue;
      int& slot = dist[t.row * grid.size + t.col];
      if (slot < 0) {
        slot = next;
        queue.push_back(t);
      }
    }
  }
  return dist;
}

std::optional<std::vector<Cell>> shortest_path(const MazeGrid& grid, Cell a,
                                               Cell b) {
  if (!grid.in_bounds(a) || !grid.in_bounds(b)) {
    throw std::invalid_argument("shortest_path: cell out of bounds");
  }
  if (!grid.passable(a) || !grid.passable(b)) {
    throw std::invalid_argument("shortest_path: endpoint not passable");
  }
  if (a == b) return std::vector<Cell>{a};

  std::vector<Cell> parent(static_cast<std::size_t>(grid.size) * grid.size,
                           Cell{-1, -1});
  std::vector<int> dist(static_cast<std::size_t>(grid.size) * grid.size, -1);
  std::deque<Cell> queue{a};
  dist[a.row * grid.size + a.col] = 0;
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    if (cur == b) break;
    for (const Direction d : kDirections) {
      const Cell t = step(cur, d);
      if (!grid.passable(t)) continue;
      if (dist[t.row * grid.size + t.col] >= 0) continue;
      dist[t.row * grid.size + t.col] = dist[cur.row * grid.size + cur.col] + 1;
      parent[t.row * grid.size + t.col] = cur;
      queue.push_back(t);
    }
  }
  if (dist[b.row * grid.size + b.col] < 0) return std::nullopt;

  std::vector<Cell> path;
  for (Cell c = b; c != a; c = parent[c.row * grid.size + c.col]) {
    path.push_back(c);
  }
  path.push_back(a);
  std::reverse(path.begin(), path.end());
  return path;
}

std::optional<ExitPlacement> place_exit(const MazeGrid& grid, Cell start) {
  const std::vector<int> dist = bfs_distances(grid, start);
  const double center = (grid.size - 1) / 2.0;
  const int edge_lo = 1;
  const int edge_hi = grid.size - 2;

  std::optional<ExitPlacement> best;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      const Cell p{r, c};
      if (grid.at(p) != CellKind::Open) continue;
      const int d_path = dist[r * grid.size + c];
      if (d_path <= 0) continue;  // unreachable, or the start itself
      if (std::find(grid.starts.begin(), grid.starts.end(), p) !=
          grid.starts.end()) {
        continue;
      }
      const bool on_edge =
          r == edge_lo || r == edge_hi || c == edge_lo || c == edge_hi;
      const bool on_corner =
          (r == edge_lo || r == edge_hi) && (c == edge_lo || c == edge_hi);
      double edge_bonus = 0.0;
      if (on_edge) edge_bonus = on_corner ? 40.0 : 15.0;

      const int degree = grid.passable_neighbors(p);
      double topology_bonus = 0.0;
      if (degree == 1) {
        topology_bonus = 30.0;
      } else if (degree >= 3) {
        topology_bonus = -10.0;
      }

      const double center_dist =
          std::abs(r - center) + std::abs(c - center);
      const double score = 10.0 * d_path + 5.0 * manhattan(start, p) +
                           edge_bonus + topology_bonus + 2.0 * center_dist;
      if (!best || score > best->score) best = ExitPlacement{p, score};
    }
  }
  return best;
}

ValidationReport validate_maze(const MazeGrid& grid) {
  ValidationReport report;
  report.connectivity_ratio = connectivity_ratio(grid);

  for (int r = 0; r < grid.size; ++r) {
    for (int c = 0; c < grid.size; ++c) {
      const Cell cell{r, c};
      const bool boundary = r == 0 || c == 0 || r == grid.size - 1 ||
                            c == grid.size - 1;
      if (boundary && grid.at(cell) != CellKind::Frame) {
        report.failures.push_back("boundary cell not frame");
        r = grid.size;
        break;
      }
      if (!boundary && grid.at(cell) == CellKind::Frame) {
        report.failures.push_back("frame cell in interior");
        r = grid.size;
        break;
      }
    }
  }

  int exits = 0;
  for (const CellKind k : grid.cells) {
    if (k == CellKind::Exit) ++exits;
  }
  if (exits != 1) {
    report.failures.push_back("expected exactly one exit, found " +
                              std::to_string(exits));
  }
  if (grid.starts.empty()) report.failures.push_back("no start cells");
  for (const Cell s : grid.starts) {
    if (!grid.in_bounds(s) || grid.at(s) != CellKind::Open) {
      report.failures.push_back("start cell not open");
    }
  }

  if (report.connectivity_ratio < kRhoMin ||
      report.connectivity_ratio > kRhoMax) {
    report.failures.push_back("connectivity ratio out of range");
  }

  if (exits == 1 && !grid.starts.empty() &&
      grid.in_bounds(grid.exit) && grid.at(grid.exit) == CellKind::Exit) {
    const std::vector<int> dist = bfs_distances(grid, grid.exit);
    bool reachable = true;
    int nearest = std::numeric_limits<int>::max();
    for (const Cell s : grid.starts) {
      const int d =
          grid.in_bounds(s) ? dist[s.row * grid.size + s.col] : -1;
      if (d < 0) {
        reachable = false;
      } else {
        nearest = std::min(nearest, d);
      }
    }
    if (!reachable) {
      report.failures.push_back("unreachable exit");
    } else {
      // The task horizon is the best any start can do.
      report.optimal_path_length = nearest;
      if (report.optimal_path_length < grid.size) {
        report.failures.push_back("optimal path shorter than side length");
      }
    }
  } else if (exits == 1) {
    report.failures.push_back("exit position not marked in grid");
  }

  report.pass = report.failures.empty();
  return report;
}

MazeGrid generate_maze(int size, double dead_end_factor, std::uint64_t seed) {
  if (size < 8) throw std::invalid_argument("maze size must be >= 8");
  if (dead_end_factor < 0.03 || dead_end_factor > 0.35) {
    throw std::invalid_argument("dead_end_factor must be in [0.03, 0.35]");
  }

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(Rng::mix(seed, static_cast<std::uint64_t>(attempt)));

    MazeGrid grid;
    grid.size = size;
    grid.seed = seed;
    grid.dead_end_factor = dead_end_factor;
    grid.cells.assign(static_cast<std::size_t>(size) * size, CellKind::Wall);
    for (int i = 0; i < size; ++i) {
      grid.at({0, i}) = CellKind::Frame;
      grid.at({size - 1, i}) = CellKind::Frame;
      grid.at({i, 0}) = CellKind::Frame;
      grid.at({i, size - 1}) = CellKind::Frame;
    }

    // Dense factors use the coarser node lattice: thicker wall regions
    // let the dead-end pass grow enough stub pockets.
    const int spacing = dead_end_factor >= 0.18 ? 3 : 2;
    carve_corridors(grid, rng, spacing);
    carve_rooms(grid, rng);
    tune_dead_ends(grid, dead_end_factor, rng);

    // Primary start first, exit placed against it, then the remaining
    // starts spread over cells that keep the full task horizon (at least
    // n path steps from the exit).
    const std::vector<Cell> open = open_cells(grid);
    grid.starts = {open[rng.below(static_cast<std::uint32_t>(open.size()))]};
    const auto placed = place_exit(grid, grid.starts.front());
    if (!placed) continue;
    grid.exit = placed->cell;
    grid.at(grid.exit) = CellKind::Exit;

    // Prefer starts a full two side-lengths of path away from the exit;
    // fall back to the validation floor when the maze has too few such
    // cells for the start count.
    const std::vector<int> exit_dist = bfs_distances(grid, grid.exit);
    const auto candidates_at = [&](int min_dist) {
      std::vector<Cell> out;
      for (const Cell c : open) {
        if (c == placed->cell) continue;
        if (exit_dist[c.row * grid.size + c.col] >= min_dist) {
          out.push_back(c);
        }
      }
      return out;
    };
    std::vector<Cell> far_enough = candidates_at(2 * size);
    if (static_cast<int>(far_enough.size()) < start_count_for_size(size)) {
      far_enough = candidates_at(size);
    }
    spread_starts(grid, far_enough, start_count_for_size(size));

    if (validate_maze(grid).pass) return grid;
  }
  throw GenerationError("maze generation failed validation after " +
                            std::to_string(kMaxAttempts) + " attempts",
                        kMaxAttempts);
}

}  // namespace aimaze
