#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "aimaze/complexity.hpp"
#include "aimaze/maze.hpp"

namespace aimaze {

class MazeIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maze file layout (UTF-8 text, '\n' line ends):
///   size=<n> seed=<u64> dead_end_factor=<decimal>
///   <n rows of n characters from {W,O,E,X}>
///   starts=<row>,<col>[;<row>,<col>...]
///   checksum=<16 hex digits, FNV-1a 64 of all preceding lines>
///   [complexity]
///   surprisingness=<decimal>
///   deceptiveness=<decimal>
///   total_trap_complexity=<decimal>
///   connectivity_ratio=<decimal>
///   optimal_path_length=<int>
///   trap=<row>,<col> depth=<int> branches=<int> dead_ends=<int> weight=<decimal>
std::string serialize_maze(const MazeGrid& grid,
                           const MazeComplexity& complexity);

struct LoadedMaze {
  MazeGrid grid;
  MazeComplexity complexity;
};

/// Throws MazeIoError on malformed input, checksum mismatch, or grid
/// invariant violations (frame boundary, exactly one exit, open starts,
/// start-to-exit connectivity).
LoadedMaze parse_maze(std::string_view text);

void save_maze(const MazeGrid& grid, const MazeComplexity& complexity,
               const std::filesystem::path& file);
LoadedMaze load_maze(const std::filesystem::path& file);

}  // namespace aimaze
