#include "aimaze/episode.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "aimaze/text.hpp"

namespace aimaze {
namespace {

struct AgentRuntime {
  AgentState state;
  Observation last_obs;
  PolicyDecision decision;
  std::optional<double> previous_free_energy;
  std::optional<Directive> directive;
};

std::shared_ptr<Policy> resolve_policy(const RunConfig& config) {
  if (config.policy_override) return config.policy_override;
  switch (config.policy) {
    case PolicyKind::RandomWalk: return std::make_shared<RandomWalkPolicy>();
    case PolicyKind::Heuristic: return std::make_shared<HeuristicPolicy>();
    case PolicyKind::Llm:
      throw std::invalid_argument(
          "llm policy must be injected via policy_override");
  }
  return nullptr;
}

std::vector<Cell> tail_positions(const AgentState& state, std::size_t n) {
  const std::size_t count = std::min(n, state.path_history.size());
  return {state.path_history.end() - count, state.path_history.end()};
}

CoordinationContext build_coordination(const std::vector<AgentRuntime>& agents,
                                       std::size_t self,
                                       const MazeGrid& grid,
                                       const std::optional<Directive>& dir) {
  CoordinationContext ctx;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (i == self) continue;
    const AgentState& mate = agents[i].state;
    for (const Cell c : tail_positions(mate, 10)) {
      ctx.teammate_recent.push_back(c);
    }
    ctx.teammate_dead_ends.insert(ctx.teammate_dead_ends.end(),
                                  mate.marked_dead_ends.begin(),
                                  mate.marked_dead_ends.end());
    for (const Cell c : mate.visited) {
      if (grid.passable_neighbors(c) >= 3) ctx.teammate_junctions.push_back(c);
    }
  }
  if (dir && dir->kind == Directive::Kind::ExplorationFocus) {
    ctx.exploration_focus = dir->cells;
  }
  return ctx;
}

PolicyContext build_context(const AgentRuntime& agent,
                            const Observation& obs, const MazeGrid& grid,
                            const CoordinationContext& coordination, int t) {
  PolicyContext ctx;
  ctx.agent_id = agent.state.agent_id;
  ctx.iteration = t;
  ctx.observation = obs;
  ctx.coordination = coordination;

  ctx.weights = agent.state.weights;
  if (agent.directive &&
      agent.directive->kind == Directive::Kind::RelaxWeights) {
    ctx.relax_factor = agent.directive->factor;
    ctx.weights.coordinate *= agent.directive->factor;
    ctx.weights.backtrack *= agent.directive->factor;
  }
  if (agent.directive &&
      agent.directive->kind == Directive::Kind::OverridePenalty) {
    ctx.override_direction = agent.directive->direction;
  }
  if (agent.directive && !agent.directive->rationale.empty()) {
    ctx.dynamic_modifiers.push_back(to_string(agent.directive->kind) + ": " +
                                    agent.directive->rationale);
  }

  const auto features = movement_features(agent.state, obs, coordination);
  for (const auto& [d, f] : features) {
    ctx.scores[d] = ctx.weights.explore * f.explore +
                    ctx.weights.exploit * f.exploit +
                    ctx.weights.coordinate * f.coordinate +
                    ctx.weights.backtrack * f.backtrack;
  }

  // Teammate avoidance acts through the coordinate term of the scores.
  ctx.candidate_moves = obs.available_moves;

  ctx.backtrack_mode = agent.state.backtrack.mode;
  if (const auto next = agent.state.backtrack.next_cell()) {
    ctx.planned_step = direction_between(agent.state.position, *next);
  }
  ctx.previous_position = agent.state.previous_position;
  ctx.recent_positions.assign(agent.state.recent_moves.begin(),
                              agent.state.recent_moves.end());
  ctx.moves_since_new_cell = agent.state.moves_since_new_cell;
  ctx.marked_dead_end_count = agent.state.marked_dead_ends.size();
  ctx.dead_end_confidence = dead_end_confidence(agent.state, grid);
  return ctx;
}

int move_step_index(const Plan& plan) {
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    if (plan.steps[i] == PlanStep::Move) return static_cast<int>(i) + 1;
  }
  return 1;
}

}  // namespace

std::string to_string(Configuration c) {
  switch (c) {
    case Configuration::Solo: return "solo";
    case Configuration::FEOnly: return "fe_only";
    case Configuration::FEPlusOrchestration: return "fe_orchestration";
  }
  return "?";
}

std::string to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::RandomWalk: return "random_walk";
    case PolicyKind::Heuristic: return "heuristic";
    case PolicyKind::Llm: return "llm";
  }
  return "?";
}

std::string to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::ExitReached: return "exit_reached";
    case TerminationReason::BudgetExhausted: return "budget_exhausted";
    case TerminationReason::Timeout: return "timeout";
  }
  return "?";
}

std::optional<Configuration> configuration_from_string(std::string_view s) {
  if (s == "solo") return Configuration::Solo;
  if (s == "fe_only") return Configuration::FEOnly;
  if (s == "fe_orchestration") return Configuration::FEPlusOrchestration;
  return std::nullopt;
}

std::optional<PolicyKind> policy_kind_from_string(std::string_view s) {
  if (s == "random_walk") return PolicyKind::RandomWalk;
  if (s == "heuristic") return PolicyKind::Heuristic;
  if (s == "llm") return PolicyKind::Llm;
  return std::nullopt;
}

std::string trace_line(int t, int k, int agent_id, std::string_view tool,
                       std::string_view args, std::string_view result,
                       Cell position) {
  std::string line = std::to_string(t);
  line += ',';
  line += std::to_string(k);
  line += ',';
  line += std::to_string(agent_id);
  line += ',';
  line += tool;
  line += ',';
  line += args;
  line += ',';
  line += result;
  line += ',';
  line += to_string(position);
  return line;
}

std::string fe_trace_header() {
  return "t,k,agent_id,u_epistemic,c_accuracy,free_energy,gradient,category,"
         "r1,r2,r3,r4,r5,w_explore,w_exploit,w_coordinate,w_backtrack";
}

std::string fe_trace_row(const FreeEnergyRecord& r) {
  std::string row = std::to_string(r.t) + ',' + std::to_string(r.k) + ',' +
                    std::to_string(r.agent_id);
  row += ',' + format_double(r.u_epistemic);
  row += ',' + format_double(r.c_accuracy);
  row += ',' + format_double(r.free_energy);
  row += ',' + format_double(r.gradient);
  row += ',' + to_string(r.category);
  for (const double v : r.risk) row += ',' + format_double(v);
  row += ',' + format_double(r.weights.explore);
  row += ',' + format_double(r.weights.exploit);
  row += ',' + format_double(r.weights.coordinate);
  row += ',' + format_double(r.weights.backtrack);
  return row;
}

RunResult run_episode(const MazeGrid& grid, const RunConfig& config) {
  if (config.num_execution_agents < 1) {
    throw std::invalid_argument("need at least one execution agent");
  }
  if (config.step_budget_multiplier <= 0.0) {
    throw std::invalid_argument("step budget multiplier must be positive");
  }
  if (!config.plan.valid()) {
    throw std::invalid_argument("plan must contain a Move step");
  }
  if (grid.starts.empty()) throw std::invalid_argument("maze has no starts");

  const bool fe_enabled = config.configuration != Configuration::Solo;
  const bool orch_enabled =
      config.configuration == Configuration::FEPlusOrchestration;
  const int agent_count =
      config.configuration == Configuration::Solo
          ? 1
          : config.num_execution_agents;
  const int budget = config.step_budget_override.value_or(
      step_budget_for(grid.size, config.step_budget_multiplier));
  const int fe_step = move_step_index(config.plan);

  RunResult result;
  Rng rng(Rng::mix(config.seed, 0x6d617a65ULL));
  const std::shared_ptr<Policy> policy = resolve_policy(config);

  std::vector<AgentRuntime> agents;
  const std::size_t offset = rng.below(
      static_cast<std::uint32_t>(grid.starts.size()));
  for (int i = 0; i < agent_count; ++i) {
    AgentRuntime rt;
    rt.state = make_agent(
        i, grid.starts[(offset + i) % grid.starts.size()]);
    rt.last_obs = get_current_view(rt.state, grid);
    agents.push_back(std::move(rt));
  }

  std::optional<OrchestratorState> orch;
  if (orch_enabled) {
    std::vector<AgentSnapshot> initial;
    for (const AgentRuntime& a : agents) {
      initial.push_back(snapshot_agent(a.state, a.last_obs));
    }
    orch = init_orchestrator(grid.size, initial);
  }

  std::map<int, FreeEnergyRecord> latest_records;
  const auto start_time = std::chrono::steady_clock::now();
  const auto elapsed_seconds = [&start_time] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };

  bool target_found = false;
  bool out_of_budget = false;
  bool timed_out = false;
  int t = 1;

  while (!target_found && !out_of_budget && !timed_out) {
    if (elapsed_seconds() >= config.timeout_seconds) {
      timed_out = true;
      break;
    }

    for (AgentRuntime& agent : agents) {
      if (result.steps_taken >= budget) {
        out_of_budget = true;
        break;
      }

      Observation obs = get_current_view(agent.state, grid);
      agent.decision = PolicyDecision{};
      bool mark_pending = false;

      for (std::size_t step_index = 0;
           step_index < config.plan.steps.size() && !target_found;
           ++step_index) {
        const int k = static_cast<int>(step_index) + 1;
        switch (config.plan.steps[step_index]) {
          case PlanStep::LookAround: {
            obs = get_current_view(agent.state, grid);
            agent.last_obs = obs;
            result.trace.push_back(trace_line(t, k, agent.state.agent_id,
                                              "get_current_view", "-", "ok",
                                              agent.state.position));
            break;
          }
          case PlanStep::SelectDirection: {
            const CoordinationContext coordination = build_coordination(
                agents, static_cast<std::size_t>(agent.state.agent_id), grid,
                agent.directive);
            const PolicyContext ctx =
                build_context(agent, obs, grid, coordination, t);
            agent.decision = policy->decide(ctx, rng);
            result.contract_violations += agent.decision.contract_violations;
            mark_pending = agent.decision.mark_dead_end;
            if (orch && orch->knows_agent(agent.state.agent_id)) {
              AgentSnapshot& snap = orch->agents[agent.state.agent_id];
              snap.last_scores = ctx.scores;
              snap.last_features = movement_features(agent.state, obs,
                                                     coordination);
            }
            break;
          }
          case PlanStep::Move: {
            result.steps_taken += 1;
            if (agent.decision.failed) {
              result.policy_failures += 1;
              result.trace.push_back(trace_line(
                  t, k, agent.state.agent_id, "none", "-",
                  "policy_failure:" + agent.decision.failure_reason,
                  agent.state.position));
              break;
            }
            const ToolKind tool = agent.decision.primary.kind;
            if (const auto dir = tool_direction(tool)) {
              const MoveResult moved = apply_move(agent.state, grid, *dir);
              result.trace.push_back(trace_line(
                  t, k, agent.state.agent_id, to_string(tool), "-",
                  moved.success ? "ok" : to_string(*moved.failure),
                  agent.state.position));
              if (moved.success && agent.state.position == grid.exit) {
                target_found = true;
              }
            } else if (tool == ToolKind::StartBacktracking) {
              const BacktrackResult bt =
                  start_backtracking(agent.state, grid);
              std::string outcome = "plan:" +
                                    std::to_string(bt.plan.steps.size());
              if (bt.error == BacktrackResult::Error::AlreadyBacktracking) {
                outcome = "already_backtracking";
              } else if (bt.error ==
                         BacktrackResult::Error::NoUnexploredOpening) {
                outcome = "no_unexplored_opening";
              }
              result.trace.push_back(trace_line(t, k, agent.state.agent_id,
                                                "start_backtracking", "-",
                                                outcome,
                                                agent.state.position));
            } else if (tool == ToolKind::GetCurrentView) {
              obs = get_current_view(agent.state, grid);
              agent.last_obs = obs;
              result.trace.push_back(trace_line(t, k, agent.state.agent_id,
                                                "get_current_view", "-", "ok",
                                                agent.state.position));
            } else if (tool == ToolKind::MarkDeadEnd) {
              const MarkOutcome outcome = mark_dead_end(agent.state, grid);
              result.trace.push_back(trace_line(
                  t, k, agent.state.agent_id, "mark_dead_end", "-",
                  outcome.marked
                      ? "marked"
                      : "skipped:" + replace_all(outcome.skip_reason, " ", "_"),
                  agent.state.position));
            } else {  // Finish is advisory; position decides the episode
              result.trace.push_back(trace_line(t, k, agent.state.agent_id,
                                                "finish", "-", "ack",
                                                agent.state.position));
            }
            break;
          }
          case PlanStep::MarkDeadEnd: {
            if (!mark_pending) break;
            const MarkOutcome outcome = mark_dead_end(agent.state, grid);
            result.trace.push_back(trace_line(
                t, k, agent.state.agent_id, "mark_dead_end", "-",
                outcome.marked
                    ? "marked"
                    : "skipped:" + replace_all(outcome.skip_reason, " ", "_"),
                agent.state.position));
            break;
          }
        }
      }

      if (fe_enabled) {
        FreeEnergyRecord record;
        record.agent_id = agent.state.agent_id;
        record.t = t;
        record.k = fe_step;
        record.u_epistemic = epistemic_drive(agent.decision.signal);
        record.u_signed = -agent.decision.signal.normalized_entropy();
        record.risk = risk_components(agent.state.behavior_window());
        record.c_accuracy = accuracy_cost(record.risk);
        record.free_energy =
            free_energy(record.u_epistemic, record.c_accuracy);
        record.gradient =
            agent.previous_free_energy
                ? record.free_energy - *agent.previous_free_energy
                : 0.0;
        agent.previous_free_energy = record.free_energy;
        record.category = categorize(record.u_epistemic, record.c_accuracy,
                                     config.thresholds);
        agent.state.weights = modulate_weights(WeightVector{}, record);
        record.weights = agent.state.weights;
        result.fe_trace.push_back(record);
        latest_records[agent.state.agent_id] = record;
      }

      if (target_found) break;
    }

    if (target_found || out_of_budget) break;

    if (orch_enabled) {
      std::vector<AgentSnapshot> snapshots;
      for (AgentRuntime& a : agents) {
        AgentSnapshot snap = snapshot_agent(a.state, a.last_obs);
        if (orch->knows_agent(a.state.agent_id)) {
          snap.last_scores = orch->agents[a.state.agent_id].last_scores;
          snap.last_features = orch->agents[a.state.agent_id].last_features;
        }
        if (latest_records.count(a.state.agent_id)) {
          snap.category = latest_records[a.state.agent_id].category;
        }
        snapshots.push_back(std::move(snap));
      }
      bool llm_cycle = false;
      if (config.orchestrator_transport) {
        update_global_state(*orch, snapshots);
        const TransportResult reply = config.orchestrator_transport->complete(
            render_orchestrator_request(*orch, config.orchestrator_llm));
        if (reply.ok) {
          const OrchestratorReply parsed =
              parse_orchestrator_reply(reply.body, *orch);
          if (parsed.ok) {
            llm_cycle = true;
            orch->corrections = parsed.corrections;
            orch->guidance.clear();
            for (AgentRuntime& a : agents) {
              Directive d;
              d.agent_id = a.state.agent_id;
              if (!orch->corrections.add_exploration_focus.empty()) {
                d.kind = Directive::Kind::ExplorationFocus;
                d.cells = orch->corrections.add_exploration_focus;
              }
              const auto text = parsed.guidance_text.find(a.state.agent_id);
              if (text != parsed.guidance_text.end()) {
                d.rationale = text->second;
              }
              orch->guidance[a.state.agent_id] = d;
            }
            result.orchestrator_log.push_back(reply.body);
          }
        }
      }
      if (!llm_cycle) {
        if (config.orchestrator_transport) {
          // Snapshots were already merged before the failed call.
          orch->corrections = Corrections{};
          orch->guidance.clear();
          orch->corrections.remove_dead_ends = validate_dead_ends(*orch);
          assign_exploration_focus(*orch);
          resolve_conflicts(*orch, latest_records);
          result.orchestrator_log.push_back(
              decision_json(*orch, "rule fallback"));
        } else {
          result.orchestrator_log.push_back(
              orchestrate(*orch, snapshots, latest_records));
        }
      }

      // Deliver corrections and guidance for the next iteration.
      for (const Cell removal : orch->corrections.remove_dead_ends) {
        for (AgentRuntime& a : agents) a.state.marked_dead_ends.erase(removal);
      }
      for (AgentRuntime& a : agents) {
        const auto it = orch->guidance.find(a.state.agent_id);
        a.directive =
            it == orch->guidance.end()
                ? std::nullopt
                : std::optional<Directive>(it->second);
      }
    }
    t += 1;
  }

  result.iterations = t;
  result.success = target_found;
  result.termination = target_found      ? TerminationReason::ExitReached
                       : timed_out       ? TerminationReason::Timeout
                                         : TerminationReason::BudgetExhausted;
  result.wall_seconds = elapsed_seconds();
  for (AgentRuntime& a : agents) {
    result.failed_moves += a.state.counters.failed_moves;
    result.final_agents.push_back(std::move(a.state));
  }
  return result;
}

}  // namespace aimaze
