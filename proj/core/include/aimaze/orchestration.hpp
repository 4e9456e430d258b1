#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aimaze/environment.hpp"
#include "aimaze/free_energy.hpp"

namespace aimaze {

enum class PlanStep { LookAround, SelectDirection, Move, MarkDeadEnd };

std::string to_string(PlanStep s);

/// Static per-iteration plan; must contain at least one Move.
struct Plan {
  std::vector<PlanStep> steps;

  static Plan standard() {
    return {{PlanStep::LookAround, PlanStep::SelectDirection, PlanStep::Move,
             PlanStep::MarkDeadEnd}};
  }
  bool valid() const;
};

struct Directive {
  enum class Kind { ExplorationFocus, OverridePenalty, RelaxWeights, NoOp };

  int agent_id = 0;
  Kind kind = Kind::NoOp;
  std::vector<Cell> cells;               // ExplorationFocus payload
  std::optional<Direction> direction;    // OverridePenalty payload
  double factor = 1.0;                   // RelaxWeights payload
  std::string rationale;
};

std::string to_string(Directive::Kind k);

struct Corrections {
  std::vector<Cell> remove_dead_ends;
  std::vector<Cell> add_exploration_focus;
};

/// What the orchestrator knows about one execution node, refreshed every
/// iteration from that agent's own state and observations.
struct AgentSnapshot {
  int agent_id = 0;
  Cell position{0, 0};
  std::optional<Cell> previous_position;
  std::vector<Cell> recent_positions;
  std::set<Cell> visited;
  std::set<Cell> marked_dead_ends;
  std::vector<std::pair<Cell, CellKind>> observed;  // 3x3 patches seen
  std::optional<Category> category;
  std::map<Direction, double> last_scores;
  std::map<Direction, MovementFeatures> last_features;
};

AgentSnapshot snapshot_agent(const AgentState& state, const Observation& obs);

/// Global state: the union of everything any agent has discovered, plus
/// per-agent summaries and the current corrections/guidance.
struct OrchestratorState {
  int maze_size = 0;
  int iteration = 0;
  std::map<Cell, CellKind> discovered;
  std::map<int, AgentSnapshot> agents;
  std::set<Cell> validated_dead_ends;
  Corrections corrections;
  std::map<int, Directive> guidance;
  std::map<int, int> low_high_streak;  // consecutive LowDrive/HighCost

  bool knows_agent(int id) const { return agents.count(id) > 0; }
};

OrchestratorState init_orchestrator(int maze_size,
                                    const std::vector<AgentSnapshot>& agents);

/// Merges snapshots into the global state; discovered cells only grow.
/// Throws std::invalid_argument for an agent id not present at init.
void update_global_state(OrchestratorState& orch,
                         const std::vector<AgentSnapshot>& snapshots);

/// A marking is flagged for removal when the discovered map shows at
/// least two open neighbors and at least one of them lies off the marking
/// agent's own path.
std::vector<Cell> validate_dead_ends(const OrchestratorState& orch);

/// Frontier cells (discovered passable cells bordering undiscovered ones)
/// are split by nearest-agent BFS distance over discovered cells; each
/// agent gets up to 3 focus cells. Fills corrections.add_exploration_focus
/// and per-agent guidance (NoOp when the frontier is empty).
void assign_exploration_focus(OrchestratorState& orch);

/// Emits OverridePenalty when an agent's penalty-free best direction is
/// suppressed by coordination/backtrack penalties yet heads toward its
/// nearest frontier; emits RelaxWeights(0.5) after three consecutive
/// LowDrive/HighCost iterations.
void resolve_conflicts(OrchestratorState& orch,
                       const std::map<int, FreeEnergyRecord>& latest_records);

/// One update cycle: merge, validate markings, assign focus, resolve
/// conflicts. Returns the decision log entry as a JSON object with keys
/// "analysis", "corrections", "guidance_for_agents".
std::string orchestrate(OrchestratorState& orch,
                        const std::vector<AgentSnapshot>& snapshots,
                        const std::map<int, FreeEnergyRecord>& latest_records);

/// JSON projection of the current corrections and guidance.
std::string decision_json(const OrchestratorState& orch,
                          const std::string& analysis);

}  // namespace aimaze
