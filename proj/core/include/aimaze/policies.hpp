#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aimaze/environment.hpp"
#include "aimaze/free_energy.hpp"
#include "aimaze/rng.hpp"

namespace aimaze {

enum class ToolKind {
  MoveNorth,
  MoveSouth,
  MoveEast,
  MoveWest,
  GetCurrentView,
  MarkDeadEnd,
  StartBacktracking,
  Finish,
};

std::string to_string(ToolKind k);
std::optional<ToolKind> tool_from_name(std::string_view name);
std::optional<Direction> tool_direction(ToolKind k);
ToolKind move_tool(Direction d);

struct ToolCall {
  ToolKind kind = ToolKind::GetCurrentView;
  int issued_by = 0;
};

/// Everything a policy may consult for one decision. Mirrors the runtime
/// execution-context message: observation, weights, scores, guidance,
/// teammate info, and backtracking status.
struct PolicyContext {
  int agent_id = 0;
  int iteration = 0;
  Observation observation;
  WeightVector weights;
  std::map<Direction, double> scores;  // over candidate directions
  CoordinationContext coordination;

  // Backtracking status.
  BacktrackState::Mode backtrack_mode = BacktrackState::Mode::Inactive;
  std::optional<Direction> planned_step;

  // Own memory.
  std::optional<Cell> previous_position;
  std::vector<Cell> recent_positions;  // ring contents, oldest first
  int moves_since_new_cell = 0;
  std::size_t marked_dead_end_count = 0;
  double dead_end_confidence = 0.0;
  std::vector<Direction> candidate_moves;  // available after teammate filter

  // Orchestrator guidance for this agent.
  std::optional<Direction> override_direction;
  std::optional<double> relax_factor;
  std::vector<std::string> dynamic_modifiers;
};

struct PolicyDecision {
  ToolCall primary;
  bool mark_dead_end = false;  // optional second call after the move
  DecisionSignal signal;
  bool failed = false;  // transport/parse failure: the step is skipped
  std::string failure_reason;
  int contract_violations = 0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual PolicyDecision decide(const PolicyContext& ctx, Rng& rng) = 0;
  virtual std::string_view name() const = 0;
};

/// Floor baseline: uniform over available moves, avoiding the immediately
/// previous cell when an alternative exists. Ignores weights, scores,
/// guidance, and never starts backtracking.
PolicyDecision random_walk_decide(const PolicyContext& ctx, Rng& rng);

/// Deterministic decision hierarchy:
///   1 lock-mode override, then the exit move when the exit is a target,
///   2 teammate avoidance (candidate filter), 3 orchestrator override,
///   4 advisory-plan continuation, 5 loop escape when nothing unexplored
///     is adjacent (current cell seen 3+ times in the recent window, or
///     8+ moves without entering a new cell) -> start_backtracking,
///   6 all-blocked safety, 7 movement-score argmax (N,S,E,W tie order).
PolicyDecision heuristic_decide(const PolicyContext& ctx);

class RandomWalkPolicy final : public Policy {
 public:
  PolicyDecision decide(const PolicyContext& ctx, Rng& rng) override {
    return random_walk_decide(ctx, rng);
  }
  std::string_view name() const override { return "random_walk"; }
};

class HeuristicPolicy final : public Policy {
 public:
  PolicyDecision decide(const PolicyContext& ctx, Rng&) override {
    return heuristic_decide(ctx);
  }
  std::string_view name() const override { return "heuristic"; }
};

}  // namespace aimaze
