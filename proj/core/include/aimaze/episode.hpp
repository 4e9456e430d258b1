#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aimaze/llm_adapter.hpp"
#include "aimaze/maze.hpp"
#include "aimaze/orchestration.hpp"
#include "aimaze/policies.hpp"

namespace aimaze {

/// Ablation configurations: Solo runs one agent with no free-energy
/// records and no orchestrator; FEOnly adds the free-energy loop and
/// weight modulation; FEPlusOrchestration adds the orchestrator node.
enum class Configuration { Solo, FEOnly, FEPlusOrchestration };

enum class PolicyKind { RandomWalk, Heuristic, Llm };

enum class TerminationReason { ExitReached, BudgetExhausted, Timeout };

std::string to_string(Configuration c);
std::string to_string(PolicyKind p);
std::string to_string(TerminationReason r);
std::optional<Configuration> configuration_from_string(std::string_view s);
std::optional<PolicyKind> policy_kind_from_string(std::string_view s);

struct RunConfig {
  Configuration configuration = Configuration::FEOnly;
  PolicyKind policy = PolicyKind::Heuristic;
  int num_execution_agents = 2;
  double step_budget_multiplier = 2.5;
  double timeout_seconds = 7200.0;
  std::uint64_t seed = 0;
  Thresholds thresholds;
  Plan plan = Plan::standard();

  /// When set, replaces ceil(multiplier * n^2); lets tests run degenerate
  /// budgets such as zero.
  std::optional<int> step_budget_override;

  /// When set, used instead of the built-in policy kinds. The LLM policy
  /// is always injected this way (built by the caller with its transport).
  std::shared_ptr<Policy> policy_override;

  /// When set (and orchestration is enabled), the orchestrator cycle asks
  /// this chat endpoint instead of the rule engine and parses the strict
  /// JSON response contract; a failed call falls back to the rule engine
  /// for that iteration.
  std::shared_ptr<LlmTransport> orchestrator_transport;
  LlmConfig orchestrator_llm;
};

struct RunResult {
  bool success = false;
  int steps_taken = 0;   // decision steps consumed against the budget
  int failed_moves = 0;  // wall/boundary hits across all agents
  double wall_seconds = 0.0;
  TerminationReason termination = TerminationReason::BudgetExhausted;
  int iterations = 0;
  int policy_failures = 0;
  int contract_violations = 0;
  std::vector<std::string> trace;             // one line per tool call
  std::vector<FreeEnergyRecord> fe_trace;
  std::vector<std::string> orchestrator_log;  // one JSON object per cycle
  std::vector<AgentState> final_agents;
};

/// Tool-call trace line: `t,k,agent_id,tool,args,result,position` with
/// cells rendered row:col. A skipped step logs tool `none` with the
/// failure reason.
std::string trace_line(int t, int k, int agent_id, std::string_view tool,
                       std::string_view args, std::string_view result,
                       Cell position);

std::string fe_trace_header();
std::string fe_trace_row(const FreeEnergyRecord& record);

/// Nested iteration/plan-step loop: per iteration each agent observes,
/// decides, acts, and (outside Solo) gets a free-energy record and weight
/// update; the orchestrator cycle runs between iterations when enabled.
/// Stops on exit reached, step budget exhausted, or wall timeout.
RunResult run_episode(const MazeGrid& grid, const RunConfig& config);

}  // namespace aimaze
