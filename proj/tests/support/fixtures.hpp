#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "aimaze/maze.hpp"

namespace aimaze::testsupport {

/// Build a grid from ASCII art. Characters: X frame, W wall, O open,
/// E exit, S start (an Open cell recorded in starts).
inline MazeGrid grid_from_ascii(const std::vector<std::string>& rows) {
  MazeGrid grid;
  grid.size = static_cast<int>(rows.size());
  grid.cells.assign(static_cast<std::size_t>(grid.size) * grid.size,
                    CellKind::Wall);
  for (int r = 0; r < grid.size; ++r) {
    if (static_cast<int>(rows[r].size()) != grid.size) {
      throw std::invalid_argument("fixture rows must be square");
    }
    for (int c = 0; c < grid.size; ++c) {
      switch (rows[r][c]) {
        case 'X': grid.at({r, c}) = CellKind::Frame; break;
        case 'W': grid.at({r, c}) = CellKind::Wall; break;
        case 'O': grid.at({r, c}) = CellKind::Open; break;
        case 'E':
          grid.at({r, c}) = CellKind::Exit;
          grid.exit = {r, c};
          break;
        case 'S':
          grid.at({r, c}) = CellKind::Open;
          grid.starts.push_back({r, c});
          break;
        default:
          throw std::invalid_argument("unknown fixture character");
      }
    }
  }
  return grid;
}

/// Independent BFS oracle, written in a deliberately different style from
/// the library implementation (index-based scan queue, no std::deque).
inline std::vector<std::vector<int>> oracle_bfs(const MazeGrid& grid,
                                                Cell from) {
  std::vector<std::vector<int>> dist(
      grid.size, std::vector<int>(grid.size, -1));
  if (!grid.passable(from)) return dist;
  std::vector<Cell> queue{from};
  dist[from.row][from.col] = 0;
  std::size_t head = 0;
  while (head < queue.size()) {
    const Cell cur = queue[head++];
    const int base = dist[cur.row][cur.col];
    const int dr[4] = {-1, 1, 0, 0};
    const int dc[4] = {0, 0, 1, -1};
    for (int i = 0; i < 4; ++i) {
      const int nr = cur.row + dr[i];
      const int nc = cur.col + dc[i];
      if (nr < 0 || nc < 0 || nr >= grid.size || nc >= grid.size) continue;
      const CellKind kind = grid.at({nr, nc});
      if (kind != CellKind::Open && kind != CellKind::Exit) continue;
      if (dist[nr][nc] != -1) continue;
      dist[nr][nc] = base + 1;
      queue.push_back({nr, nc});
    }
  }
  return dist;
}

/// Exhaustive exit-placement oracle: rescore every candidate from the
/// written formula and return the row-major argmax.
inline std::optional<Cell> oracle_exit_argmax(const MazeGrid& grid,
                                              Cell start) {
  const auto dist = oracle_bfs(grid, start);
  const double center = (grid.size - 1) / 2.0;
  std::optional<Cell> best;
  double best_score = 0.0;
  for (int r = 1; r < grid.size - 1; ++r) {
    for (int c = 1; c < grid.size - 1; ++c) {
      if (grid.at({r, c}) != CellKind::Open) continue;
      if (dist[r][c] <= 0) continue;
      bool is_start = false;
      for (const Cell s : grid.starts) {
        if (s.row == r && s.col == c) is_start = true;
      }
      if (is_start) continue;

      double score = 10.0 * dist[r][c];
      score += 5.0 * (std::abs(start.row - r) + std::abs(start.col - c));
      const bool edge = r == 1 || c == 1 || r == grid.size - 2 ||
                        c == grid.size - 2;
      const bool corner = (r == 1 || r == grid.size - 2) &&
                          (c == 1 || c == grid.size - 2);
      if (edge) score += 15.0;
      if (corner) score += 25.0;
      int degree = 0;
      if (grid.passable({r - 1, c})) ++degree;
      if (grid.passable({r + 1, c})) ++degree;
      if (grid.passable({r, c - 1})) ++degree;
      if (grid.passable({r, c + 1})) ++degree;
      if (degree == 1) score += 30.0;
      if (degree >= 3) score -= 10.0;
      score += 2.0 * (std::abs(r - center) + std::abs(c - center));

      if (!best || score > best_score) {
        best = Cell{r, c};
        best_score = score;
      }
    }
  }
  return best;
}

/// Plain -sum(p log2 p) over integer counts.
inline double oracle_entropy_bits(const std::vector<int>& counts) {
  double total = 0.0;
  for (const int c : counts) total += c;
  double h = 0.0;
  for (const int c : counts) {
    if (c <= 0) continue;
    const double p = c / total;
    h -= p * std::log2(p);
  }
  return h;
}

/// Frequency-count normalized entropy oracle for token sequences.
inline double oracle_token_entropy(const std::vector<std::string>& tokens) {
  std::map<std::string, int> freq;
  for (const auto& t : tokens) freq[t] += 1;
  if (freq.size() < 2) return 0.0;
  std::vector<int> counts;
  for (const auto& [t, n] : freq) counts.push_back(n);
  return oracle_entropy_bits(counts) / std::log2(double(freq.size()));
}

}  // namespace aimaze::testsupport
