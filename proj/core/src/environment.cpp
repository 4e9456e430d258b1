#include "aimaze/environment.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

namespace aimaze {

BehaviorWindow AgentState::behavior_window() const {
  BehaviorWindow w;
  w.total_moves = counters.total_moves;
  w.total_move_attempts = counters.total_move_attempts;
  w.dead_end_revisits = counters.dead_end_revisits;
  w.unique_entered = static_cast<int>(entered.size());
  w.recent.assign(recent_moves.begin(), recent_moves.end());
  const std::size_t tail = std::min<std::size_t>(path_history.size(),
                                                 kRecentWindow + 2);
  w.path_tail.assign(path_history.end() - tail, path_history.end());
  return w;
}

AgentState make_agent(int id, Cell start, WeightVector base) {
  AgentState state;
  state.agent_id = id;
  state.position = start;
  state.visited.insert(start);
  state.path_history.push_back(start);
  state.weights = base;
  return state;
}

std::string debug_string(const AgentState& s) {
  std::ostringstream out;
  out << "agent=" << s.agent_id << " pos=" << to_string(s.position)
      << " prev=" << (s.previous_position ? to_string(*s.previous_position)
                                          : std::string("-"));
  out << " moves=" << s.counters.total_moves
      << " attempts=" << s.counters.total_move_attempts
      << " failed=" << s.counters.failed_moves
      << " revisits=" << s.counters.dead_end_revisits
      << " stale=" << s.moves_since_new_cell;
  out << " mode=" << static_cast<int>(s.backtrack.mode)
      << " cursor=" << s.backtrack.cursor;
  out << " visited=";
  for (const Cell c : s.visited) out << to_string(c) << ' ';
  out << "history=";
  for (const Cell c : s.path_history) out << to_string(c) << ' ';
  out << "marked=";
  for (const Cell c : s.marked_dead_ends) out << to_string(c) << ' ';
  out << "recent=";
  for (const Cell c : s.recent_moves) out << to_string(c) << ' ';
  return out.str();
}

CellKind Observation::view_at(Direction d) const {
  const Cell offset = step(Cell{1, 1}, d);  // center of the 3x3 is (1,1)
  return local_view[offset.row * 3 + offset.col];
}

std::string to_string(MoveResult::Failure f) {
  switch (f) {
    case MoveResult::Failure::BlockedByWall: return "blocked_by_wall";
    case MoveResult::Failure::BoundaryViolation: return "boundary_violation";
    case MoveResult::Failure::LockViolation: return "lock_violation";
  }
  return "?";
}

MoveResult apply_move(AgentState& state, const MazeGrid& grid, Direction dir) {
  MoveResult result;
  const Cell target = step(state.position, dir);

  if (state.backtrack.mode == BacktrackState::Mode::Lock) {
    const auto planned = state.backtrack.next_cell();
    if (!planned || *planned != target) {
      result.failure = MoveResult::Failure::LockViolation;
      return result;  // protocol violation: no state change at all
    }
  }

  if (!grid.in_bounds(target) || grid.at(target) == CellKind::Frame) {
    state.counters.total_move_attempts += 1;
    state.counters.failed_moves += 1;
    result.failure = MoveResult::Failure::BoundaryViolation;
    return result;
  }
  if (grid.at(target) == CellKind::Wall) {
    state.counters.total_move_attempts += 1;
    state.counters.failed_moves += 1;
    result.failure = MoveResult::Failure::BlockedByWall;
    return result;
  }

  state.counters.total_move_attempts += 1;
  state.counters.total_moves += 1;
  if (state.marked_dead_ends.count(target)) {
    state.counters.dead_end_revisits += 1;
  }
  state.previous_position = state.position;
  state.position = target;
  state.visited.insert(target);
  if (state.entered.insert(target).second) {
    state.moves_since_new_cell = 0;
  } else {
    state.moves_since_new_cell += 1;
  }
  state.path_history.push_back(target);
  state.recent_moves.push_back(target);
  if (state.recent_moves.size() > kRecentWindow) {
    state.recent_moves.pop_front();
  }

  // Advance or retire the backtracking plan.
  if (state.backtrack.mode == BacktrackState::Mode::Lock) {
    state.backtrack.cursor += 1;
    if (state.backtrack.cursor >= state.backtrack.plan.steps.size()) {
      state.backtrack = BacktrackState{};
    }
  } else if (state.backtrack.mode == BacktrackState::Mode::Active) {
    const auto planned = state.backtrack.next_cell();
    if (planned && *planned == target) {
      state.backtrack.cursor += 1;
      if (state.backtrack.cursor >= state.backtrack.plan.steps.size()) {
        state.backtrack = BacktrackState{};
      }
    } else {
      state.backtrack = BacktrackState{};  // plan abandoned
    }
  }

  result.success = true;
  result.new_position = target;
  return result;
}

Observation get_current_view(const AgentState& state, const MazeGrid& grid) {
  Observation obs;
  obs.position = state.position;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const Cell c{state.position.row + dr, state.position.col + dc};
      const CellKind kind = grid.in_bounds(c) ? grid.at(c) : CellKind::Frame;
      obs.local_view[(dr + 1) * 3 + (dc + 1)] = kind;
      if (kind == CellKind::Exit) obs.exit_adjacent = true;
    }
  }
  for (const Direction d : kDirections) {
    const Cell target = step(state.position, d);
    if (!grid.passable(target)) continue;
    obs.available_moves.push_back(d);
    if (!state.visited.count(target)) {
      obs.unexplored_directions.push_back(d);
    }
  }
  return obs;
}

double dead_end_confidence(const AgentState& state, const MazeGrid& grid) {
  int closed = 0;
  for (const Direction d : kDirections) {
    const Cell target = step(state.position, d);
    if (!grid.passable(target) || state.visited.count(target)) ++closed;
  }
  return closed / 4.0;
}

MarkOutcome mark_dead_end(AgentState& state, const MazeGrid& grid) {
  const Observation obs = get_current_view(state, grid);

  if (obs.available_moves.size() != 1) {
    return {false, "multiple paths"};
  }
  const Cell only = step(state.position, obs.available_moves.front());
  if (!state.visited.count(only)) {
    return {false, "only move leads to unvisited cell"};
  }
  if (!obs.unexplored_directions.empty()) {
    return {false, "unexplored directions remain"};
  }
  if (state.backtrack.active()) {
    return {false, "backtracking"};
  }
  if (dead_end_confidence(state, grid) < state.weights.dead_end_confidence) {
    return {false, "confidence below threshold"};
  }
  state.marked_dead_ends.insert(state.position);
  return {true, ""};
}

BacktrackResult start_backtracking(AgentState& state, const MazeGrid& grid) {
  BacktrackResult result;
  if (state.backtrack.active()) {
    result.error = BacktrackResult::Error::AlreadyBacktracking;
    return result;
  }

  // BFS over visited cells only; a target qualifies when it borders a
  // passable cell the agent has not visited.
  const auto qualifies = [&](Cell c) {
    for (const Direction d : kDirections) {
      const Cell t = step(c, d);
      if (grid.passable(t) && !state.visited.count(t)) return true;
    }
    return false;
  };

  std::map<Cell, Cell> parent;
  parent[state.position] = state.position;
  std::optional<Cell> target;
  // Plain BFS yields nearest-first; among equidistant candidates the
  // first hit in row-major push order wins, so expand in that order.
  std::vector<Cell> layer{state.position};
  if (qualifies(state.position)) target = state.position;
  while (!target && !layer.empty()) {
    std::vector<Cell> next;
    for (const Cell cur : layer) {
      for (const Direction d : kDirections) {
        const Cell t = step(cur, d);
        if (!grid.passable(t) || !state.visited.count(t)) continue;
        if (parent.count(t)) continue;
        parent[t] = cur;
        next.push_back(t);
      }
    }
    std::sort(next.begin(), next.end());
    for (const Cell c : next) {
      if (qualifies(c)) {
        target = c;
        break;
      }
    }
    layer = std::move(next);
  }

  if (!target) {
    result.error = BacktrackResult::Error::NoUnexploredOpening;
    return result;
  }

  BacktrackPlan plan;
  plan.target = *target;
  for (Cell c = *target; c != state.position; c = parent[c]) {
    plan.steps.push_back(c);
  }
  std::reverse(plan.steps.begin(), plan.steps.end());
  result.plan = plan;

  if (!plan.steps.empty()) {
    state.backtrack.mode = BacktrackState::Mode::Lock;
    state.backtrack.plan = std::move(plan);
    state.backtrack.cursor = 0;
  }
  return result;
}

int step_budget(const MazeGrid& grid) { return step_budget_for(grid.size, 2.5); }

int step_budget_for(int size, double multiplier) {
  return static_cast<int>(
      std::ceil(multiplier * static_cast<double>(size) * size));
}

}  // namespace aimaze
