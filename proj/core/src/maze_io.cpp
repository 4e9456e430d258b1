#include "aimaze/maze_io.hpp"

#include <fstream>
#include <sstream>

#include "aimaze/text.hpp"

namespace aimaze {
namespace {

std::string starts_line(const MazeGrid& grid) {
  std::string line = "starts=";
  for (std::size_t i = 0; i < grid.starts.size(); ++i) {
    if (i > 0) line += ';';
    line += std::to_string(grid.starts[i].row) + ',' +
            std::to_string(grid.starts[i].col);
  }
  return line;
}

Cell parse_cell_pair(std::string_view text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw MazeIoError("malformed cell pair");
  const auto row = parse_int(trim(parts[0]));
  const auto col = parse_int(trim(parts[1]));
  if (!row || !col) throw MazeIoError("malformed cell pair");
  return {static_cast<int>(*row), static_cast<int>(*col)};
}

double require_double(std::string_view text, const char* what) {
  const auto v = parse_double(trim(text));
  if (!v) throw MazeIoError(std::string("malformed ") + what);
  return *v;
}

void enforce_invariants(const MazeGrid& grid) {
  int exits = 0;
  for (int r = 0; r < grid.size; ++r) {
    for (int c = 0; c < grid.size; ++c) {
      const Cell cell{r, c};
      const bool boundary =
          r == 0 || c == 0 || r == grid.size - 1 || c == grid.size - 1;
      if (boundary != (grid.at(cell) == CellKind::Frame)) {
        throw MazeIoError("frame boundary invariant violated");
      }
      if (grid.at(cell) == CellKind::Exit) ++exits;
    }
  }
  if (exits != 1) {
    throw MazeIoError("expected exactly one exit, found " +
                      std::to_string(exits));
  }
  if (grid.at(grid.exit) != CellKind::Exit) {
    throw MazeIoError("exit position does not match grid");
  }
  if (grid.starts.empty()) throw MazeIoError("no start cells");
  const std::vector<int> dist = bfs_distances(grid, grid.exit);
  for (const Cell s : grid.starts) {
    if (!grid.in_bounds(s) || grid.at(s) != CellKind::Open) {
      throw MazeIoError("start cell not open");
    }
    if (dist[s.row * grid.size + s.col] < 0) {
      throw MazeIoError("start cannot reach exit");
    }
  }
}

}  // namespace

std::string serialize_maze(const MazeGrid& grid,
                           const MazeComplexity& complexity) {
  std::string body = "size=" + std::to_string(grid.size) +
                     " seed=" + std::to_string(grid.seed) +
                     " dead_end_factor=" + format_double(grid.dead_end_factor) +
                     "\n";
  for (int r = 0; r < grid.size; ++r) {
    for (int c = 0; c < grid.size; ++c) {
      body += static_cast<char>(grid.at({r, c}));
    }
    body += '\n';
  }
  body += starts_line(grid) + "\n";

  std::string out = body;
  out += "checksum=" + to_hex(fnv1a64(body)) + "\n";
  out += "[complexity]\n";
  out += "surprisingness=" + format_double(complexity.surprisingness) + "\n";
  out += "deceptiveness=" + format_double(complexity.deceptiveness) + "\n";
  out += "total_trap_complexity=" +
         format_double(complexity.total_trap_complexity) + "\n";
  out += "connectivity_ratio=" + format_double(complexity.connectivity_ratio) +
         "\n";
  out += "optimal_path_length=" +
         std::to_string(complexity.optimal_path_length) + "\n";
  for (const TrapRecord& t : complexity.traps) {
    out += "trap=" + std::to_string(t.branch_cell.row) + ',' +
           std::to_string(t.branch_cell.col) +
           " depth=" + std::to_string(t.depth) +
           " branches=" + std::to_string(t.branches) +
           " dead_ends=" + std::to_string(t.dead_ends) +
           " weight=" + format_double(t.weight) + "\n";
  }
  return out;
}

LoadedMaze parse_maze(std::string_view text) {
  std::vector<std::string_view> lines = split(text, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.size() < 4) throw MazeIoError("truncated maze file");

  LoadedMaze out;
  MazeGrid& grid = out.grid;

  // Header.
  {
    const auto fields = split(lines[0], ' ');
    if (fields.size() != 3) throw MazeIoError("malformed header");
    for (const auto field : fields) {
      const auto kv = split(field, '=');
      if (kv.size() != 2) throw MazeIoError("malformed header");
      if (kv[0] == "size") {
        const auto n = parse_int(kv[1]);
        if (!n || *n < 3) throw MazeIoError("malformed size");
        grid.size = static_cast<int>(*n);
      } else if (kv[0] == "seed") {
        const auto s = parse_u64(kv[1]);
        if (!s) throw MazeIoError("malformed seed");
        grid.seed = *s;
      } else if (kv[0] == "dead_end_factor") {
        grid.dead_end_factor = require_double(kv[1], "dead_end_factor");
      } else {
        throw MazeIoError("unknown header field");
      }
    }
  }
  if (grid.size <= 0 ||
      lines.size() < static_cast<std::size_t>(grid.size) + 3) {
    throw MazeIoError("truncated maze file");
  }

  // Grid rows.
  grid.cells.assign(static_cast<std::size_t>(grid.size) * grid.size,
                    CellKind::Wall);
  for (int r = 0; r < grid.size; ++r) {
    const std::string_view row = lines[1 + r];
    if (row.size() != static_cast<std::size_t>(grid.size)) {
      throw MazeIoError("grid row has wrong length");
    }
    for (int c = 0; c < grid.size; ++c) {
      switch (row[c]) {
        case 'W': grid.at({r, c}) = CellKind::Wall; break;
        case 'O': grid.at({r, c}) = CellKind::Open; break;
        case 'X': grid.at({r, c}) = CellKind::Frame; break;
        case 'E':
          grid.at({r, c}) = CellKind::Exit;
          grid.exit = {r, c};
          break;
        default: throw MazeIoError("unknown grid character");
      }
    }
  }

  // Starts.
  const std::string_view starts = lines[1 + grid.size];
  if (!starts.starts_with("starts=")) throw MazeIoError("missing starts line");
  for (const auto pair : split(starts.substr(7), ';')) {
    grid.starts.push_back(parse_cell_pair(pair));
  }

  // Checksum covers everything above it.
  const std::string_view checksum_line = lines[2 + grid.size];
  if (!checksum_line.starts_with("checksum=")) {
    throw MazeIoError("missing checksum line");
  }
  std::string body;
  for (int i = 0; i < 2 + grid.size; ++i) {
    body.append(lines[i]);
    body += '\n';
  }
  if (checksum_line.substr(9) != to_hex(fnv1a64(body))) {
    throw MazeIoError("checksum mismatch");
  }

  // Complexity block.
  std::size_t i = 3 + grid.size;
  if (i >= lines.size() || lines[i] != "[complexity]") {
    throw MazeIoError("missing complexity block");
  }
  for (++i; i < lines.size(); ++i) {
    const std::string_view line = lines[i];
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw MazeIoError("malformed metric");
    const std::string_view key = line.substr(0, eq);
    const std::string_view value = line.substr(eq + 1);
    if (key == "surprisingness") {
      out.complexity.surprisingness = require_double(value, "surprisingness");
    } else if (key == "deceptiveness") {
      out.complexity.deceptiveness = require_double(value, "deceptiveness");
    } else if (key == "total_trap_complexity") {
      out.complexity.total_trap_complexity =
          require_double(value, "total_trap_complexity");
    } else if (key == "connectivity_ratio") {
      out.complexity.connectivity_ratio =
          require_double(value, "connectivity_ratio");
    } else if (key == "optimal_path_length") {
      const auto v = parse_int(value);
      if (!v) throw MazeIoError("malformed optimal_path_length");
      out.complexity.optimal_path_length = static_cast<int>(*v);
    } else if (key == "trap") {
      const auto fields = split(value, ' ');
      if (fields.size() != 5) throw MazeIoError("malformed trap record");
      TrapRecord t;
      t.branch_cell = parse_cell_pair(fields[0]);
      for (std::size_t f = 1; f < fields.size(); ++f) {
        const auto kv = split(fields[f], '=');
        if (kv.size() != 2) throw MazeIoError("malformed trap record");
        if (kv[0] == "depth") {
          t.depth = static_cast<int>(parse_int(kv[1]).value_or(-1));
        } else if (kv[0] == "branches") {
          t.branches = static_cast<int>(parse_int(kv[1]).value_or(-1));
        } else if (kv[0] == "dead_ends") {
          t.dead_ends = static_cast<int>(parse_int(kv[1]).value_or(-1));
        } else if (kv[0] == "weight") {
          t.weight = require_double(kv[1], "trap weight");
        } else {
          throw MazeIoError("unknown trap field");
        }
      }
      if (t.depth < 0 || t.branches < 0 || t.dead_ends < 0) {
        throw MazeIoError("malformed trap record");
      }
      out.complexity.traps.push_back(t);
    } else {
      throw MazeIoError("unknown complexity key");
    }
  }

  enforce_invariants(grid);
  return out;
}

void save_maze(const MazeGrid& grid, const MazeComplexity& complexity,
               const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw MazeIoError("cannot open " + file.string() + " for write");
  out << serialize_maze(grid, complexity);
  if (!out) throw MazeIoError("write failed: " + file.string());
}

LoadedMaze load_maze(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw MazeIoError("cannot open " + file.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_maze(buffer.str());
}

}  // namespace aimaze
