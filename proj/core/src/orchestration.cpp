#include "aimaze/orchestration.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace aimaze {
namespace {

using nlohmann::json;

bool discovered_passable(const OrchestratorState& orch, Cell c) {
  const auto it = orch.discovered.find(c);
  return it != orch.discovered.end() &&
         (it->second == CellKind::Open || it->second == CellKind::Exit);
}

/// BFS distances from `from` over discovered passable cells.
std::map<Cell, int> discovered_distances(const OrchestratorState& orch,
                                         Cell from) {
  std::map<Cell, int> dist;
  if (!discovered_passable(orch, from)) return dist;
  dist[from] = 0;
  std::deque<Cell> queue{from};
  while (!queue.empty()) {
    const Cell cur = queue.front();
    queue.pop_front();
    for (const Direction d : kDirections) {
      const Cell t = step(cur, d);
      if (!discovered_passable(orch, t) || dist.count(t)) continue;
      dist[t] = dist[cur] + 1;
      queue.push_back(t);
    }
  }
  return dist;
}

/// First step of the canonical BFS path from `from` to the nearest
/// frontier cell, with row-major tie-breaks.
std::optional<Cell> first_step_toward_frontier(
    const OrchestratorState& orch, Cell from,
    const std::vector<Cell>& frontier) {
  const std::map<Cell, int> dist = discovered_distances(orch, from);
  std::optional<Cell> nearest;
  int best = 0;
  for (const Cell f : frontier) {
    const auto it = dist.find(f);
    if (it == dist.end()) continue;
    if (!nearest || it->second < best) {
      nearest = f;
      best = it->second;
    }
  }
  if (!nearest || best == 0) return std::nullopt;

  // Walk the distance field back from the frontier cell to depth 1.
  Cell cur = *nearest;
  int d = best;
  while (d > 1) {
    for (const Direction dir : kDirections) {
      const Cell t = step(cur, dir);
      const auto it = dist.find(t);
      if (it != dist.end() && it->second == d - 1) {
        cur = t;
        break;
      }
    }
    --d;
  }
  return cur;
}

std::vector<Cell> compute_frontier(const OrchestratorState& orch) {
  std::vector<Cell> frontier;
  for (const auto& [cell, kind] : orch.discovered) {
    if (kind != CellKind::Open && kind != CellKind::Exit) continue;
    for (const Direction d : kDirections) {
      const Cell t = step(cell, d);
      if (t.row < 0 || t.col < 0 || t.row >= orch.maze_size ||
          t.col >= orch.maze_size) {
        continue;
      }
      if (!orch.discovered.count(t)) {
        frontier.push_back(cell);
        break;
      }
    }
  }
  return frontier;  // map iteration is already row-major
}

json cells_json(const std::vector<Cell>& cells) {
  json arr = json::array();
  for (const Cell c : cells) arr.push_back({c.row, c.col});
  return arr;
}

}  // namespace

std::string to_string(PlanStep s) {
  switch (s) {
    case PlanStep::LookAround: return "look_around";
    case PlanStep::SelectDirection: return "select_direction";
    case PlanStep::Move: return "move";
    case PlanStep::MarkDeadEnd: return "mark_dead_end";
  }
  return "?";
}

bool Plan::valid() const {
  return std::find(steps.begin(), steps.end(), PlanStep::Move) != steps.end();
}

std::string to_string(Directive::Kind k) {
  switch (k) {
    case Directive::Kind::ExplorationFocus: return "exploration_focus";
    case Directive::Kind::OverridePenalty: return "override_penalty";
    case Directive::Kind::RelaxWeights: return "relax_weights";
    case Directive::Kind::NoOp: return "noop";
  }
  return "?";
}

AgentSnapshot snapshot_agent(const AgentState& state, const Observation& obs) {
  AgentSnapshot snap;
  snap.agent_id = state.agent_id;
  snap.position = state.position;
  snap.previous_position = state.previous_position;
  snap.recent_positions.assign(state.recent_moves.begin(),
                               state.recent_moves.end());
  snap.visited = state.visited;
  snap.marked_dead_ends = state.marked_dead_ends;
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      const Cell c{obs.position.row + dr, obs.position.col + dc};
      snap.observed.emplace_back(c, obs.local_view[(dr + 1) * 3 + (dc + 1)]);
    }
  }
  return snap;
}

OrchestratorState init_orchestrator(int maze_size,
                                    const std::vector<AgentSnapshot>& agents) {
  OrchestratorState orch;
  orch.maze_size = maze_size;
  for (const AgentSnapshot& snap : agents) {
    orch.agents[snap.agent_id] = snap;
    orch.low_high_streak[snap.agent_id] = 0;
  }
  update_global_state(orch, agents);
  orch.iteration = 0;
  return orch;
}

void update_global_state(OrchestratorState& orch,
                         const std::vector<AgentSnapshot>& snapshots) {
  for (const AgentSnapshot& snap : snapshots) {
    if (!orch.knows_agent(snap.agent_id)) {
      throw std::invalid_argument("unknown agent id " +
                                  std::to_string(snap.agent_id));
    }
    for (const auto& [cell, kind] : snap.observed) {
      orch.discovered.emplace(cell, kind);
    }
    for (const Cell c : snap.visited) {
      orch.discovered.emplace(c, CellKind::Open);
    }
    orch.agents[snap.agent_id] = snap;
  }
  orch.iteration += 1;
}

std::vector<Cell> validate_dead_ends(const OrchestratorState& orch) {
  std::vector<Cell> flagged;
  for (const auto& [id, snap] : orch.agents) {
    for (const Cell mark : snap.marked_dead_ends) {
      int open_neighbors = 0;
      bool off_path_neighbor = false;
      for (const Direction d : kDirections) {
        const Cell t = step(mark, d);
        if (!discovered_passable(orch, t)) continue;
        ++open_neighbors;
        if (!snap.visited.count(t)) off_path_neighbor = true;
      }
      if (open_neighbors >= 2 && off_path_neighbor) flagged.push_back(mark);
    }
  }
  std::sort(flagged.begin(), flagged.end());
  flagged.erase(std::unique(flagged.begin(), flagged.end()), flagged.end());
  return flagged;
}

void assign_exploration_focus(OrchestratorState& orch) {
  orch.corrections.add_exploration_focus.clear();
  const std::vector<Cell> frontier = compute_frontier(orch);

  if (frontier.empty()) {
    for (const auto& [id, snap] : orch.agents) {
      Directive noop;
      noop.agent_id = id;
      noop.kind = Directive::Kind::NoOp;
      noop.rationale = "frontier exhausted";
      orch.guidance[id] = noop;
    }
    return;
  }

  std::map<int, std::map<Cell, int>> dist_by_agent;
  for (const auto& [id, snap] : orch.agents) {
    dist_by_agent[id] = discovered_distances(orch, snap.position);
  }

  // Nearest agent claims each frontier cell; lower id wins ties.
  std::map<int, std::vector<std::pair<int, Cell>>> claimed;
  for (const Cell f : frontier) {
    std::optional<int> owner;
    int best = 0;
    for (const auto& [id, dist] : dist_by_agent) {
      const auto it = dist.find(f);
      if (it == dist.end()) continue;
      if (!owner || it->second < best) {
        owner = id;
        best = it->second;
      }
    }
    if (owner) claimed[*owner].emplace_back(best, f);
  }

  for (const auto& [id, snap] : orch.agents) {
    Directive directive;
    directive.agent_id = id;
    auto it = claimed.find(id);
    if (it == claimed.end() || it->second.empty()) {
      directive.kind = Directive::Kind::NoOp;
      directive.rationale = "no frontier in reach";
    } else {
      std::stable_sort(it->second.begin(), it->second.end());
      directive.kind = Directive::Kind::ExplorationFocus;
      for (const auto& [d, cell] : it->second) {
        if (directive.cells.size() >= 3) break;
        directive.cells.push_back(cell);
      }
      directive.rationale =
          "nearest frontier split, " + std::to_string(it->second.size()) +
          " cells claimed";
      for (const Cell c : directive.cells) {
        orch.corrections.add_exploration_focus.push_back(c);
      }
    }
    orch.guidance[id] = directive;
  }
}

void resolve_conflicts(OrchestratorState& orch,
                       const std::map<int, FreeEnergyRecord>& latest_records) {
  const std::vector<Cell> frontier = compute_frontier(orch);

  for (auto& [id, snap] : orch.agents) {
    // Streak bookkeeping for temporary weight relaxation.
    const auto rec = latest_records.find(id);
    if (rec != latest_records.end() &&
        rec->second.category == Category::LowDriveHighCost) {
      orch.low_high_streak[id] += 1;
    } else {
      orch.low_high_streak[id] = 0;
    }

    if (orch.low_high_streak[id] >= 3) {
      Directive relax;
      relax.agent_id = id;
      relax.kind = Directive::Kind::RelaxWeights;
      relax.factor = 0.5;
      relax.rationale = "low drive / high cost for " +
                        std::to_string(orch.low_high_streak[id]) +
                        " iterations";
      orch.guidance[id] = relax;
      continue;
    }

    if (snap.last_scores.empty() || frontier.empty()) continue;

    // Best direction ignoring coordination/backtrack penalties.
    std::optional<Direction> raw_best;
    double raw_score = 0.0;
    for (const auto& [d, f] : snap.last_features) {
      const double s = f.explore + f.exploit;  // penalty-free preference
      if (!raw_best || s > raw_score) {
        raw_best = d;
        raw_score = s;
      }
    }
    if (!raw_best) continue;
    const auto feat = snap.last_features.find(*raw_best);
    if (feat == snap.last_features.end()) continue;
    if (feat->second.coordinate >= 0.0 && feat->second.backtrack >= 0.0) {
      continue;  // nothing suppressed
    }

    const Cell target = step(snap.position, *raw_best);
    const auto toward = first_step_toward_frontier(orch, snap.position,
                                                   frontier);
    if (!toward || *toward != target) continue;
    if (!discovered_passable(orch, target)) continue;

    Directive override_directive;
    override_directive.agent_id = id;
    override_directive.kind = Directive::Kind::OverridePenalty;
    override_directive.direction = *raw_best;
    override_directive.rationale = "penalty blocks the frontier route";
    orch.guidance[id] = override_directive;
  }
}

std::string decision_json(const OrchestratorState& orch,
                          const std::string& analysis) {
  json out;
  out["analysis"] = analysis;
  out["corrections"] = {
      {"remove_dead_ends", cells_json(orch.corrections.remove_dead_ends)},
      {"add_exploration_focus",
       cells_json(orch.corrections.add_exploration_focus)},
  };
  json guidance = json::object();
  for (const auto& [id, directive] : orch.guidance) {
    std::string text = to_string(directive.kind);
    if (directive.direction) text += " " + to_string(*directive.direction);
    if (directive.kind == Directive::Kind::RelaxWeights) {
      text += " factor=" + std::to_string(directive.factor);
    }
    if (directive.kind == Directive::Kind::ExplorationFocus) {
      for (const Cell c : directive.cells) text += " " + to_string(c);
    }
    if (!directive.rationale.empty()) text += " (" + directive.rationale + ")";
    guidance[std::to_string(id)] = text;
  }
  out["guidance_for_agents"] = guidance;
  return out.dump();
}

std::string orchestrate(OrchestratorState& orch,
                        const std::vector<AgentSnapshot>& snapshots,
                        const std::map<int, FreeEnergyRecord>& latest_records) {
  update_global_state(orch, snapshots);
  orch.corrections = Corrections{};
  orch.guidance.clear();

  orch.corrections.remove_dead_ends = validate_dead_ends(orch);
  for (const auto& [id, snap] : orch.agents) {
    for (const Cell mark : snap.marked_dead_ends) {
      const auto& removals = orch.corrections.remove_dead_ends;
      if (std::find(removals.begin(), removals.end(), mark) ==
          removals.end()) {
        orch.validated_dead_ends.insert(mark);
      }
    }
  }
  assign_exploration_focus(orch);
  resolve_conflicts(orch, latest_records);

  const std::string analysis =
      "iteration=" + std::to_string(orch.iteration) +
      " agents=" + std::to_string(orch.agents.size()) +
      " discovered=" + std::to_string(orch.discovered.size()) +
      " corrections=" +
      std::to_string(orch.corrections.remove_dead_ends.size()) +
      " focus=" +
      std::to_string(orch.corrections.add_exploration_focus.size());
  return decision_json(orch, analysis);
}

}  // namespace aimaze
