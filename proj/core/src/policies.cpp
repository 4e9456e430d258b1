#include "aimaze/policies.hpp"

#include <algorithm>

namespace aimaze {
namespace {

PolicyDecision move_decision(int agent_id, Direction d,
                             DecisionSignal signal) {
  PolicyDecision decision;
  decision.primary = {move_tool(d), agent_id};
  decision.signal = std::move(signal);
  return decision;
}

DecisionSignal forced_signal() {
  return DecisionSignal::from_scores({1.0});
}

/// Softmax distribution over the scores of the candidate directions, in
/// N,S,E,W order.
DecisionSignal score_signal(const PolicyContext& ctx,
                            const std::vector<Direction>& candidates) {
  std::vector<double> values;
  for (const Direction d : candidates) {
    const auto it = ctx.scores.find(d);
    values.push_back(it == ctx.scores.end() ? 0.0 : it->second);
  }
  if (values.empty()) return forced_signal();
  return DecisionSignal::from_scores(values);
}

bool mark_criteria_anticipated(const PolicyContext& ctx, Direction d) {
  // Request the optional mark when the move enters an unvisited cell whose
  // visible lateral neighbors are blocked: the target is a corridor tip or
  // pocket. The environment gate re-checks the real criteria after the
  // move, so a wrong guess is skipped, never mis-marked.
  if (ctx.backtrack_mode != BacktrackState::Mode::Inactive) return false;
  const auto unexplored = ctx.observation.unexplored_directions;
  if (std::find(unexplored.begin(), unexplored.end(), d) == unexplored.end()) {
    return false;
  }
  const Cell target = step(Cell{1, 1}, d);  // 3x3 view coordinates
  int blocked_laterals = 0;
  int laterals = 0;
  for (const Direction lateral : kDirections) {
    if (lateral == d || lateral == reverse(d)) continue;
    const Cell c = step(target, lateral);
    if (c.row < 0 || c.row > 2 || c.col < 0 || c.col > 2) continue;
    ++laterals;
    const CellKind kind = ctx.observation.local_view[c.row * 3 + c.col];
    if (kind == CellKind::Wall || kind == CellKind::Frame) ++blocked_laterals;
  }
  return laterals > 0 && blocked_laterals == laterals;
}

}  // namespace

std::string to_string(ToolKind k) {
  switch (k) {
    case ToolKind::MoveNorth: return "move_north";
    case ToolKind::MoveSouth: return "move_south";
    case ToolKind::MoveEast: return "move_east";
    case ToolKind::MoveWest: return "move_west";
    case ToolKind::GetCurrentView: return "get_current_view";
    case ToolKind::MarkDeadEnd: return "mark_dead_end";
    case ToolKind::StartBacktracking: return "start_backtracking";
    case ToolKind::Finish: return "finish";
  }
  return "?";
}

std::optional<ToolKind> tool_from_name(std::string_view name) {
  if (name == "move_north") return ToolKind::MoveNorth;
  if (name == "move_south") return ToolKind::MoveSouth;
  if (name == "move_east") return ToolKind::MoveEast;
  if (name == "move_west") return ToolKind::MoveWest;
  if (name == "get_current_view") return ToolKind::GetCurrentView;
  if (name == "mark_dead_end") return ToolKind::MarkDeadEnd;
  if (name == "start_backtracking") return ToolKind::StartBacktracking;
  if (name == "finish") return ToolKind::Finish;
  return std::nullopt;
}

std::optional<Direction> tool_direction(ToolKind k) {
  switch (k) {
    case ToolKind::MoveNorth: return Direction::North;
    case ToolKind::MoveSouth: return Direction::South;
    case ToolKind::MoveEast: return Direction::East;
    case ToolKind::MoveWest: return Direction::West;
    default: return std::nullopt;
  }
}

ToolKind move_tool(Direction d) {
  switch (d) {
    case Direction::North: return ToolKind::MoveNorth;
    case Direction::South: return ToolKind::MoveSouth;
    case Direction::East: return ToolKind::MoveEast;
    case Direction::West: return ToolKind::MoveWest;
  }
  return ToolKind::MoveNorth;
}

PolicyDecision random_walk_decide(const PolicyContext& ctx, Rng& rng) {
  const auto& available = ctx.observation.available_moves;
  if (available.empty()) {
    // Walled in: step back the way we came if we know it.
    Direction d = Direction::North;
    if (ctx.previous_position) {
      if (const auto back =
              direction_between(ctx.observation.position,
                                *ctx.previous_position)) {
        d = *back;
      }
    }
    return move_decision(ctx.agent_id, d, forced_signal());
  }

  std::vector<Direction> options;
  for (const Direction d : available) {
    if (ctx.previous_position &&
        step(ctx.observation.position, d) == *ctx.previous_position) {
      continue;
    }
    options.push_back(d);
  }
  if (options.empty()) options = available;  // dead end: reverse is all there is

  const Direction choice =
      options[rng.below(static_cast<std::uint32_t>(options.size()))];
  std::vector<double> uniform(options.size(), 1.0);
  return move_decision(ctx.agent_id, choice,
                       DecisionSignal::from_scores(uniform));
}

PolicyDecision heuristic_decide(const PolicyContext& ctx) {
  const auto& obs = ctx.observation;

  // 1. Lock mode: the planned step is the only legal action.
  if (ctx.backtrack_mode == BacktrackState::Mode::Lock && ctx.planned_step) {
    return move_decision(ctx.agent_id, *ctx.planned_step, forced_signal());
  }

  // Victory: take the exit whenever it is one move away.
  for (const Direction d : obs.available_moves) {
    if (obs.view_at(d) == CellKind::Exit) {
      return move_decision(ctx.agent_id, d, forced_signal());
    }
  }

  // 2. Teammate avoidance narrows the candidate set (never to empty).
  std::vector<Direction> candidates = ctx.candidate_moves.empty()
                                          ? obs.available_moves
                                          : ctx.candidate_moves;

  // 3. Orchestrator override beats scores.
  if (ctx.override_direction) {
    const Direction d = *ctx.override_direction;
    if (std::find(obs.available_moves.begin(), obs.available_moves.end(), d) !=
        obs.available_moves.end()) {
      return move_decision(ctx.agent_id, d, forced_signal());
    }
  }

  // 4. Advisory (non-lock) plan continuation.
  if (ctx.backtrack_mode == BacktrackState::Mode::Active && ctx.planned_step) {
    const Direction d = *ctx.planned_step;
    if (std::find(obs.available_moves.begin(), obs.available_moves.end(), d) !=
        obs.available_moves.end()) {
      return move_decision(ctx.agent_id, d, forced_signal());
    }
  }

  // 5. Loop escape: a tight oscillation shows as 3+ window hits on the
  // current cell; a wider orbit shows as a window full of revisits.
  // Both triggers require nothing unexplored here - otherwise the argmax
  // already takes the opening and a backtrack plan would be empty.
  if (ctx.backtrack_mode == BacktrackState::Mode::Inactive &&
      obs.unexplored_directions.empty()) {
    const int repeats = static_cast<int>(
        std::count(ctx.recent_positions.begin(), ctx.recent_positions.end(),
                   obs.position));
    const bool stale =
        ctx.moves_since_new_cell >= static_cast<int>(kRecentWindow);
    if (repeats >= 3 || stale) {
      PolicyDecision decision;
      decision.primary = {ToolKind::StartBacktracking, ctx.agent_id};
      decision.signal = forced_signal();
      return decision;
    }
  }

  // 6. Safety: nowhere to go.
  if (obs.available_moves.empty()) {
    PolicyDecision decision;
    decision.primary = {ToolKind::StartBacktracking, ctx.agent_id};
    decision.signal = forced_signal();
    return decision;
  }

  // 7. Weighted-score argmax; N,S,E,W order breaks ties.
  Direction best = candidates.front();
  double best_score = -1e18;
  for (const Direction d : candidates) {
    const auto it = ctx.scores.find(d);
    const double s = it == ctx.scores.end() ? 0.0 : it->second;
    if (s > best_score) {
      best_score = s;
      best = d;
    }
  }

  PolicyDecision decision =
      move_decision(ctx.agent_id, best, score_signal(ctx, candidates));
  decision.mark_dead_end = mark_criteria_anticipated(ctx, best);
  return decision;
}

}  // namespace aimaze
