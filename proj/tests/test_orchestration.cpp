#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>
#include <set>

#include "aimaze/episode.hpp"
#include "aimaze/llm_adapter.hpp"
#include "aimaze/orchestration.hpp"
#include "support/fixtures.hpp"

using namespace aimaze;
using namespace aimaze::testsupport;

namespace {

AgentSnapshot snapshot(int id, Cell position) {
  AgentSnapshot snap;
  snap.agent_id = id;
  snap.position = position;
  snap.visited.insert(position);
  snap.observed.emplace_back(position, CellKind::Open);
  return snap;
}

void discover_open(OrchestratorState& orch, std::initializer_list<Cell> cells) {
  for (const Cell c : cells) orch.discovered[c] = CellKind::Open;
}

void discover_wall(OrchestratorState& orch, std::initializer_list<Cell> cells) {
  for (const Cell c : cells) orch.discovered[c] = CellKind::Wall;
}

}  // namespace

TEST_CASE("update_global_state grows discovery monotonically") {
  OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
  const std::size_t initial = orch.discovered.size();

  // No movement, same snapshot: nothing new.
  update_global_state(orch, {snapshot(0, {3, 3})});
  CHECK(orch.discovered.size() == initial);

  // A new 3x3 patch appears after a move.
  AgentSnapshot moved = snapshot(0, {3, 4});
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      moved.observed.emplace_back(Cell{3 + dr, 4 + dc}, CellKind::Open);
    }
  }
  update_global_state(orch, {moved});
  CHECK(orch.discovered.size() > initial);
  CHECK(orch.discovered.count({2, 5}) == 1);

  // Union oracle over everything reported so far.
  std::set<Cell> expected;
  expected.insert({3, 3});
  for (int dr = -1; dr <= 1; ++dr) {
    for (int dc = -1; dc <= 1; ++dc) {
      expected.insert({3 + dr, 4 + dc});
    }
  }
  CHECK(orch.discovered.size() == expected.size());
}

TEST_CASE("update_global_state rejects unknown agent ids") {
  OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
  CHECK_THROWS_AS(update_global_state(orch, {snapshot(9, {1, 1})}),
                  std::invalid_argument);
}

TEST_CASE("validate_dead_ends keeps cul-de-sac marks and flags junctions") {
  OrchestratorState orch =
      init_orchestrator(7, {snapshot(0, {3, 3}), snapshot(1, {5, 5})});

  SUBCASE("empty marked set yields empty corrections") {
    CHECK(validate_dead_ends(orch).empty());
  }

  SUBCASE("a true cul-de-sac marking survives") {
    discover_open(orch, {{1, 3}, {2, 3}});
    discover_wall(orch, {{1, 2}, {1, 4}, {0, 3}});
    AgentSnapshot& a = orch.agents[0];
    a.visited.insert({1, 3});
    a.visited.insert({2, 3});
    a.marked_dead_ends.insert({1, 3});
    CHECK(validate_dead_ends(orch).empty());
  }

  SUBCASE("a marking later revealed as a junction is flagged") {
    // Agent 0 marked (3,3) knowing only its own corridor; agent 1 later
    // discovered two more open neighbors.
    discover_open(orch, {{3, 3}, {2, 3}, {4, 3}, {3, 4}});
    AgentSnapshot& a = orch.agents[0];
    a.visited.insert({3, 3});
    a.visited.insert({2, 3});
    a.marked_dead_ends.insert({3, 3});
    const std::vector<Cell> flagged = validate_dead_ends(orch);
    REQUIRE(flagged.size() == 1);
    CHECK(flagged.front() == Cell{3, 3});
  }
}

TEST_CASE("assign_exploration_focus splits the frontier by distance") {
  SUBCASE("single agent receives up to three nearest frontier cells") {
    OrchestratorState orch = init_orchestrator(9, {snapshot(0, {4, 1})});
    discover_open(orch, {{4, 1}, {4, 2}, {4, 3}, {4, 4}, {4, 5}});
    discover_wall(orch, {{3, 1}, {3, 2}, {3, 3}, {3, 4}, {3, 5},
                         {5, 1}, {5, 2}, {5, 3}, {5, 4}, {5, 5}});
    assign_exploration_focus(orch);
    REQUIRE(orch.guidance.count(0) == 1);
    const Directive& d = orch.guidance[0];
    CHECK(d.kind == Directive::Kind::ExplorationFocus);
    CHECK(d.cells.size() <= 3);
    CHECK_FALSE(d.cells.empty());
    CHECK(orch.corrections.add_exploration_focus == d.cells);
  }

  SUBCASE("two distant agents get disjoint focus sets") {
    OrchestratorState orch =
        init_orchestrator(9, {snapshot(0, {4, 1}), snapshot(1, {4, 7})});
    // Shared corridor, undiscovered in the middle (column 4).
    discover_open(orch, {{4, 1}, {4, 2}, {4, 3}});
    discover_open(orch, {{4, 5}, {4, 6}, {4, 7}});
    discover_wall(orch, {{3, 1}, {3, 2}, {3, 3}, {5, 1}, {5, 2}, {5, 3}});
    discover_wall(orch, {{3, 5}, {3, 6}, {3, 7}, {5, 5}, {5, 6}, {5, 7}});
    assign_exploration_focus(orch);
    REQUIRE(orch.guidance.count(0) == 1);
    REQUIRE(orch.guidance.count(1) == 1);
    const auto& left = orch.guidance[0].cells;
    const auto& right = orch.guidance[1].cells;
    CHECK_FALSE(left.empty());
    CHECK_FALSE(right.empty());
    for (const Cell c : left) {
      CHECK(std::find(right.begin(), right.end(), c) == right.end());
    }
    // Oracle: each assigned cell is nearer to its owner than the other
    // agent (distance over discovered passable cells equals Manhattan on
    // this corridor).
    for (const Cell c : left) CHECK(c.col <= 4);
    for (const Cell c : right) CHECK(c.col >= 4);
  }

  SUBCASE("a fully discovered map produces NoOp guidance") {
    OrchestratorState orch = init_orchestrator(5, {snapshot(0, {2, 2})});
    for (int r = 0; r < 5; ++r) {
      for (int c = 0; c < 5; ++c) {
        const bool boundary = r == 0 || c == 0 || r == 4 || c == 4;
        orch.discovered[{r, c}] = boundary ? CellKind::Frame
                                  : (r == 2 && c == 2) ? CellKind::Open
                                                       : CellKind::Wall;
      }
    }
    assign_exploration_focus(orch);
    REQUIRE(orch.guidance.count(0) == 1);
    CHECK(orch.guidance[0].kind == Directive::Kind::NoOp);
    CHECK(orch.corrections.add_exploration_focus.empty());
  }
}

TEST_CASE("resolve_conflicts emits overrides and relaxations") {
  SUBCASE("no suppressed direction, no overrides") {
    OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
    discover_open(orch, {{3, 3}, {3, 4}, {3, 5}});
    AgentSnapshot& snap = orch.agents[0];
    snap.last_features[Direction::East] = {1.0, 0.0, 0.0, 0.0};
    snap.last_scores[Direction::East] = 1.0;
    resolve_conflicts(orch, {});
    CHECK(orch.guidance.empty());
  }

  SUBCASE("penalty on the frontier route is overridden") {
    OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
    discover_open(orch, {{3, 3}, {3, 4}, {3, 5}});
    discover_wall(orch, {{2, 3}, {2, 4}, {4, 3}, {4, 4}, {3, 2}});
    // (3,5) borders undiscovered (2,5): it is the frontier.
    AgentSnapshot& snap = orch.agents[0];
    snap.last_features[Direction::East] = {1.0, 0.5, -1.0, 0.0};
    snap.last_features[Direction::West] = {-0.5, -1.0, 0.0, 0.0};
    snap.last_scores[Direction::East] = -0.2;
    snap.last_scores[Direction::West] = -0.4;
    resolve_conflicts(orch, {});
    REQUIRE(orch.guidance.count(0) == 1);
    const Directive& d = orch.guidance[0];
    CHECK(d.kind == Directive::Kind::OverridePenalty);
    REQUIRE(d.direction.has_value());
    CHECK(*d.direction == Direction::East);
    // The override never names a wall: its target is discovered passable.
    const Cell target = step(orch.agents[0].position, *d.direction);
    REQUIRE(orch.discovered.count(target) == 1);
    CHECK(orch.discovered[target] == CellKind::Open);
  }

  SUBCASE("three consecutive low-drive/high-cost iterations relax weights") {
    OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
    FreeEnergyRecord record;
    record.agent_id = 0;
    record.category = Category::LowDriveHighCost;
    std::map<int, FreeEnergyRecord> latest{{0, record}};
    resolve_conflicts(orch, latest);
    CHECK(orch.guidance.count(0) == 0);
    resolve_conflicts(orch, latest);
    CHECK(orch.guidance.count(0) == 0);
    resolve_conflicts(orch, latest);
    REQUIRE(orch.guidance.count(0) == 1);
    CHECK(orch.guidance[0].kind == Directive::Kind::RelaxWeights);
    CHECK(orch.guidance[0].factor == doctest::Approx(0.5));

    // A healthier record resets the streak.
    record.category = Category::HighDriveLowCost;
    latest[0] = record;
    orch.guidance.clear();
    resolve_conflicts(orch, latest);
    CHECK(orch.low_high_streak[0] == 0);
  }
}

TEST_CASE("decision log follows the response contract") {
  OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
  discover_open(orch, {{3, 3}, {3, 4}});
  orch.corrections.remove_dead_ends = {{3, 4}};
  Directive d;
  d.agent_id = 0;
  d.kind = Directive::Kind::ExplorationFocus;
  d.cells = {{3, 4}};
  orch.guidance[0] = d;

  const auto parsed = nlohmann::json::parse(decision_json(orch, "steady"));
  CHECK(parsed.contains("analysis"));
  CHECK(parsed.contains("corrections"));
  CHECK(parsed.contains("guidance_for_agents"));
  CHECK(parsed["corrections"]["remove_dead_ends"][0] ==
        nlohmann::json::array({3, 4}));
  CHECK(parsed["guidance_for_agents"].contains("0"));
}

TEST_CASE("run_episode wins immediately from an exit-adjacent start") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXXXXX",
      "XWWWWWWX",
      "XWSEWWWX",
      "XWWWWWWX",
      "XWWWWWWX",
      "XWWWWWWX",
      "XWWWWWWX",
      "XXXXXXXX",
  });
  RunConfig config;
  config.configuration = Configuration::Solo;
  config.policy = PolicyKind::Heuristic;
  config.seed = 1;
  const RunResult result = run_episode(grid, config);
  CHECK(result.success);
  CHECK(result.termination == TerminationReason::ExitReached);
  CHECK(result.iterations == 1);
  CHECK(result.steps_taken == 1);
}

TEST_CASE("run_episode with budget zero fails with zero steps") {
  const MazeGrid grid = generate_maze(12, 0.05, 2);
  RunConfig config;
  config.configuration = Configuration::FEOnly;
  config.policy = PolicyKind::Heuristic;
  config.step_budget_override = 0;
  const RunResult result = run_episode(grid, config);
  CHECK_FALSE(result.success);
  CHECK(result.termination == TerminationReason::BudgetExhausted);
  CHECK(result.steps_taken == 0);
  CHECK(result.trace.empty());
}

TEST_CASE("run_episode replays identically for a fixed seed") {
  const MazeGrid grid = generate_maze(12, 0.10, 8);
  for (const Configuration c :
       {Configuration::Solo, Configuration::FEOnly,
        Configuration::FEPlusOrchestration}) {
    RunConfig config;
    config.configuration = c;
    config.policy = PolicyKind::Heuristic;
    config.seed = 33;
    const RunResult a = run_episode(grid, config);
    const RunResult b = run_episode(grid, config);
    CHECK(a.trace == b.trace);
    CHECK(a.orchestrator_log == b.orchestrator_log);
    CHECK(a.steps_taken == b.steps_taken);
    CHECK(a.success == b.success);
    REQUIRE(a.fe_trace.size() == b.fe_trace.size());
    for (std::size_t i = 0; i < a.fe_trace.size(); ++i) {
      CHECK(fe_trace_row(a.fe_trace[i]) == fe_trace_row(b.fe_trace[i]));
    }
  }
}

TEST_CASE("configuration purity: Solo and FEOnly stay clean") {
  const MazeGrid grid = generate_maze(12, 0.10, 8);

  RunConfig solo;
  solo.configuration = Configuration::Solo;
  solo.policy = PolicyKind::RandomWalk;
  solo.seed = 4;
  const RunResult solo_result = run_episode(grid, solo);
  CHECK(solo_result.fe_trace.empty());
  CHECK(solo_result.orchestrator_log.empty());
  CHECK(solo_result.final_agents.size() == 1);

  RunConfig fe;
  fe.configuration = Configuration::FEOnly;
  fe.policy = PolicyKind::Heuristic;
  fe.seed = 4;
  const RunResult fe_result = run_episode(grid, fe);
  CHECK_FALSE(fe_result.fe_trace.empty());
  CHECK(fe_result.orchestrator_log.empty());
  CHECK(fe_result.final_agents.size() == 2);

  RunConfig orch;
  orch.configuration = Configuration::FEPlusOrchestration;
  orch.policy = PolicyKind::Heuristic;
  orch.seed = 4;
  const RunResult orch_result = run_episode(grid, orch);
  CHECK_FALSE(orch_result.fe_trace.empty());
  if (orch_result.iterations > 1) {
    CHECK_FALSE(orch_result.orchestrator_log.empty());
  }
}

TEST_CASE("orchestrator log entries are valid contract JSON") {
  const MazeGrid grid = generate_maze(12, 0.10, 15);
  RunConfig config;
  config.configuration = Configuration::FEPlusOrchestration;
  config.policy = PolicyKind::Heuristic;
  config.seed = 10;
  const RunResult result = run_episode(grid, config);
  REQUIRE_FALSE(result.orchestrator_log.empty());

  std::size_t last_discovered = 0;
  for (const std::string& line : result.orchestrator_log) {
    const auto parsed = nlohmann::json::parse(line);
    REQUIRE(parsed.contains("analysis"));
    REQUIRE(parsed.contains("corrections"));
    REQUIRE(parsed.contains("guidance_for_agents"));
    // discovered=<n> inside the analysis string grows monotonically.
    const std::string analysis = parsed["analysis"].get<std::string>();
    const std::size_t at = analysis.find("discovered=");
    REQUIRE(at != std::string::npos);
    const std::size_t discovered =
        std::stoul(analysis.substr(at + 11));
    CHECK(discovered >= last_discovered);
    last_discovered = discovered;
  }
}

namespace {

class FixedReplyTransport final : public LlmTransport {
 public:
  explicit FixedReplyTransport(TransportResult reply)
      : reply_(std::move(reply)) {}
  TransportResult complete(const std::string& request) override {
    last_request = request;
    return reply_;
  }
  std::string last_request;

 private:
  TransportResult reply_;
};

}  // namespace

TEST_CASE("llm-backed orchestrator cycle parses the response contract") {
  const MazeGrid grid = generate_maze(12, 0.10, 19);
  RunConfig config;
  config.configuration = Configuration::FEPlusOrchestration;
  config.policy = PolicyKind::Heuristic;
  config.seed = 6;
  config.step_budget_override = 12;

  SUBCASE("a valid reply is logged verbatim and its guidance lands") {
    // Focus the agents on the first start cell; it is always discovered.
    const Cell focus = grid.starts.front();
    const std::string reply =
        std::string("{\"analysis\":\"keep moving\",\"corrections\":") +
        "{\"remove_dead_ends\":[],\"add_exploration_focus\":[[" +
        std::to_string(focus.row) + "," + std::to_string(focus.col) +
        "]]},\"guidance_for_agents\":{\"0\":\"push on\"}}";
    auto transport =
        std::make_shared<FixedReplyTransport>(TransportResult{true, reply, ""});
    config.orchestrator_transport = transport;
    const RunResult result = run_episode(grid, config);
    REQUIRE_FALSE(result.orchestrator_log.empty());
    CHECK(result.orchestrator_log.front() == reply);
    CHECK(transport->last_request.find("\"messages\"") != std::string::npos);
  }

  SUBCASE("garbage replies fall back to the rule engine") {
    config.orchestrator_transport = std::make_shared<FixedReplyTransport>(
        TransportResult{true, "mangled{", ""});
    const RunResult result = run_episode(grid, config);
    REQUIRE_FALSE(result.orchestrator_log.empty());
    const auto parsed = nlohmann::json::parse(result.orchestrator_log.front());
    CHECK(parsed["analysis"] == "rule fallback");
  }

  SUBCASE("transport errors also fall back") {
    config.orchestrator_transport = std::make_shared<FixedReplyTransport>(
        TransportResult{false, "", "offline"});
    const RunResult result = run_episode(grid, config);
    REQUIRE_FALSE(result.orchestrator_log.empty());
    CHECK(result.orchestrator_log.front().find("rule fallback") !=
          std::string::npos);
  }
}

TEST_CASE("orchestrator reply parsing drops unknown ids and cells") {
  OrchestratorState orch = init_orchestrator(7, {snapshot(0, {3, 3})});
  discover_open(orch, {{3, 3}, {3, 4}});
  const std::string body =
      "{\"analysis\":\"a\",\"corrections\":{\"remove_dead_ends\":[[3,4],"
      "[6,6]],\"add_exploration_focus\":[[3,3]]},\"guidance_for_agents\":"
      "{\"0\":\"go east\",\"9\":\"bogus\"}}";
  const OrchestratorReply reply = parse_orchestrator_reply(body, orch);
  REQUIRE(reply.ok);
  CHECK(reply.analysis == "a");
  REQUIRE(reply.corrections.remove_dead_ends.size() == 1);
  CHECK(reply.corrections.remove_dead_ends.front() == Cell{3, 4});
  CHECK(reply.guidance_text.count(0) == 1);
  CHECK(reply.guidance_text.count(9) == 0);
}

TEST_CASE("directives reference only known agents and discovered cells") {
  Rng rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    // Random discovered blob around two agents.
    OrchestratorState orch = init_orchestrator(
        11, {snapshot(0, {3, 3}), snapshot(1, {7, 7})});
    for (int i = 0; i < 40; ++i) {
      const Cell c{1 + static_cast<int>(rng.below(9)),
                   1 + static_cast<int>(rng.below(9))};
      orch.discovered[c] = rng.below(3) == 0 ? CellKind::Wall : CellKind::Open;
    }
    orch.discovered[{3, 3}] = CellKind::Open;
    orch.discovered[{7, 7}] = CellKind::Open;
    for (auto& [id, snap] : orch.agents) {
      if (rng.below(2)) {
        const Cell mark{1 + static_cast<int>(rng.below(9)),
                        1 + static_cast<int>(rng.below(9))};
        snap.marked_dead_ends.insert(mark);
        orch.discovered.emplace(mark, CellKind::Open);
      }
      snap.last_features[Direction::East] = {1.0, 0.0,
                                             rng.below(2) ? -1.0 : 0.0, 0.0};
      snap.last_scores[Direction::East] = rng.unit();
    }

    std::map<int, FreeEnergyRecord> latest;
    if (rng.below(2)) {
      FreeEnergyRecord r;
      r.agent_id = 0;
      r.category = Category::LowDriveHighCost;
      latest[0] = r;
    }
    (void)orchestrate(orch, {orch.agents[0], orch.agents[1]}, latest);

    for (const auto& [id, directive] : orch.guidance) {
      CHECK(orch.knows_agent(id));
      for (const Cell c : directive.cells) {
        CHECK(orch.discovered.count(c) == 1);
      }
      if (directive.direction) {
        const Cell target =
            step(orch.agents[id].position, *directive.direction);
        CHECK(orch.discovered.count(target) == 1);
        CHECK(orch.discovered[target] != CellKind::Wall);
      }
    }
    for (const Cell c : orch.corrections.remove_dead_ends) {
      CHECK(orch.discovered.count(c) == 1);
    }
    for (const Cell c : orch.corrections.add_exploration_focus) {
      CHECK(orch.discovered.count(c) == 1);
    }
  }
}

TEST_CASE("episodes terminate within the budget for every policy") {
  const MazeGrid grid = generate_maze(12, 0.10, 5);
  for (const PolicyKind kind :
       {PolicyKind::RandomWalk, PolicyKind::Heuristic}) {
    RunConfig config;
    config.configuration = kind == PolicyKind::RandomWalk
                               ? Configuration::Solo
                               : Configuration::FEOnly;
    config.policy = kind;
    config.seed = 77;
    const RunResult result = run_episode(grid, config);
    CHECK(result.steps_taken <= step_budget(grid));
  }
}
