#pragma once

#include <array>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aimaze/free_energy.hpp"
#include "aimaze/maze.hpp"

namespace aimaze {

inline constexpr std::size_t kRecentWindow = 8;

struct Counters {
  int total_moves = 0;
  int total_move_attempts = 0;
  int failed_moves = 0;
  int dead_end_revisits = 0;

  bool operator==(const Counters&) const = default;
};

struct BacktrackPlan {
  Cell target{-1, -1};
  std::vector<Cell> steps;  // successive cells to enter, excluding current

  bool operator==(const BacktrackPlan&) const = default;
};

/// Inactive | Active (advisory plan) | Lock (each step is forced).
/// Lock mode is what start_backtracking establishes; it clears itself when
/// the plan is exhausted.
struct BacktrackState {
  enum class Mode { Inactive, Active, Lock };
  Mode mode = Mode::Inactive;
  BacktrackPlan plan;
  std::size_t cursor = 0;  // index of the next planned step

  bool active() const { return mode != Mode::Inactive; }
  std::optional<Cell> next_cell() const {
    if (mode == Mode::Inactive || cursor >= plan.steps.size()) {
      return std::nullopt;
    }
    return plan.steps[cursor];
  }

  bool operator==(const BacktrackState&) const = default;
};

/// One execution node's local state.
struct AgentState {
  int agent_id = 0;
  Cell position{0, 0};
  std::optional<Cell> previous_position;
  std::set<Cell> visited;
  std::vector<Cell> path_history;       // starts with the spawn cell
  std::set<Cell> marked_dead_ends;
  std::deque<Cell> recent_moves;        // ring of last 8 entered cells
  std::set<Cell> entered;               // distinct cells entered by moves
  int moves_since_new_cell = 0;         // successful moves since first entry
  Counters counters;
  BacktrackState backtrack;
  WeightVector weights;

  BehaviorWindow behavior_window() const;
};

AgentState make_agent(int id, Cell start, WeightVector base = {});

/// Deterministic dump of the full state; used for replay-equality checks.
std::string debug_string(const AgentState& state);

struct Observation {
  Cell position{0, 0};
  std::vector<Direction> available_moves;       // N,S,E,W order
  std::array<CellKind, 9> local_view{};         // row-major 3x3 patch
  bool exit_adjacent = false;                   // Exit anywhere in the patch
  std::vector<Direction> unexplored_directions; // available, target unvisited

  CellKind view_at(Direction d) const;
  CellKind view_center() const { return local_view[4]; }
};

struct MoveResult {
  enum class Failure { BlockedByWall, BoundaryViolation, LockViolation };

  bool success = false;
  std::optional<Cell> new_position;
  std::optional<Failure> failure;
};

std::string to_string(MoveResult::Failure f);

/// Single-step move per the matrix convention. Wall and boundary failures
/// count as attempts; a lock violation leaves the state untouched.
MoveResult apply_move(AgentState& state, const MazeGrid& grid, Direction dir);

Observation get_current_view(const AgentState& state, const MazeGrid& grid);

struct MarkOutcome {
  bool marked = false;
  std::string skip_reason;  // empty when marked
};

/// Marks the current cell iff (a) exactly one available move and it leads
/// to a visited cell, (b) no unexplored directions remain, (c) not
/// backtracking, and (d) the dead-end confidence (share of the four
/// neighbor directions that are wall or visited) meets the threshold.
MarkOutcome mark_dead_end(AgentState& state, const MazeGrid& grid);

/// Confidence statistic used by criterion (d).
double dead_end_confidence(const AgentState& state, const MazeGrid& grid);

struct BacktrackResult {
  enum class Error { None, AlreadyBacktracking, NoUnexploredOpening };

  Error error = Error::None;
  BacktrackPlan plan;
  bool ok() const { return error == Error::None; }
};

/// BFS restricted to visited cells toward the nearest visited cell that
/// borders an unexplored passable cell; ties break on plan length then
/// row-major target. Establishes lock mode unless the plan is empty.
BacktrackResult start_backtracking(AgentState& state, const MazeGrid& grid);

/// ceil(2.5 * n^2) tool-call steps.
int step_budget(const MazeGrid& grid);
int step_budget_for(int size, double multiplier);

}  // namespace aimaze
