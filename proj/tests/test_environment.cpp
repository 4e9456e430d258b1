#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "aimaze/environment.hpp"
#include "aimaze/rng.hpp"
#include "support/fixtures.hpp"

using namespace aimaze;
using namespace aimaze::testsupport;

namespace {

const std::vector<std::string> kTMaze = {
    "XXXXXXX",
    "XWWOWWX",  // top of the stem at (1,3)
    "XWWOWWX",
    "XOOOOOX",  // corridor row 3: (3,1)..(3,5)
    "XWWWWWX",
    "XWWWWWX",
    "XXXXXXX",
};

}  // namespace

TEST_CASE("apply_move follows the matrix convention") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXXXX",
      "XWWOWWX",
      "XWWOWWX",
      "XWWSWWX",
      "XWWWWWX",
      "XWWWWWX",
      "XXXXXXX",
  });
  AgentState agent = make_agent(0, {3, 3});
  const MoveResult north = apply_move(agent, grid, Direction::North);
  CHECK(north.success);
  CHECK(*north.new_position == Cell{2, 3});
  CHECK(agent.position == Cell{2, 3});
  CHECK(agent.previous_position == Cell{3, 3});
  CHECK(agent.counters.total_moves == 1);
  CHECK(agent.counters.total_move_attempts == 1);

  const MoveResult blocked = apply_move(agent, grid, Direction::East);
  CHECK_FALSE(blocked.success);
  CHECK(*blocked.failure == MoveResult::Failure::BlockedByWall);
  CHECK(agent.counters.failed_moves == 1);
  CHECK(agent.counters.total_move_attempts == 2);
  CHECK(agent.position == Cell{2, 3});
}

TEST_CASE("boundary moves fail without changing position") {
  const MazeGrid grid = grid_from_ascii({
      "XXXX",
      "XSOX",
      "XWWX",
      "XXXX",
  });
  AgentState agent = make_agent(0, {1, 1});
  const MoveResult result = apply_move(agent, grid, Direction::North);
  CHECK_FALSE(result.success);
  CHECK(*result.failure == MoveResult::Failure::BoundaryViolation);
  CHECK(agent.counters.failed_moves == 1);
}

TEST_CASE("lock mode rejects off-plan moves without any state change") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {3, 1});
  agent.backtrack.mode = BacktrackState::Mode::Lock;
  agent.backtrack.plan.target = {3, 3};
  agent.backtrack.plan.steps = {{3, 2}, {3, 3}};
  agent.backtrack.cursor = 0;

  const Counters before = agent.counters;
  const MoveResult halted = apply_move(agent, grid, Direction::West);
  CHECK_FALSE(halted.success);
  CHECK(*halted.failure == MoveResult::Failure::LockViolation);
  CHECK(agent.counters == before);
  CHECK(agent.position == Cell{3, 1});

  // Planned steps execute and the lock clears on arrival.
  CHECK(apply_move(agent, grid, Direction::East).success);
  CHECK(agent.backtrack.mode == BacktrackState::Mode::Lock);
  CHECK(apply_move(agent, grid, Direction::East).success);
  CHECK(agent.backtrack.mode == BacktrackState::Mode::Inactive);
}

TEST_CASE("lock plans shrink by one step per move") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {3, 1});
  agent.backtrack.mode = BacktrackState::Mode::Lock;
  agent.backtrack.plan.target = {3, 5};
  agent.backtrack.plan.steps = {{3, 2}, {3, 3}, {3, 4}, {3, 5}};

  std::size_t remaining = agent.backtrack.plan.steps.size();
  while (agent.backtrack.mode == BacktrackState::Mode::Lock) {
    const auto next = agent.backtrack.next_cell();
    REQUIRE(next.has_value());
    const auto dir = direction_between(agent.position, *next);
    REQUIRE(dir.has_value());
    CHECK(apply_move(agent, grid, *dir).success);
    const std::size_t left =
        agent.backtrack.mode == BacktrackState::Mode::Inactive
            ? 0
            : agent.backtrack.plan.steps.size() - agent.backtrack.cursor;
    CHECK(left == remaining - 1);
    remaining = left;
  }
  CHECK(agent.position == Cell{3, 5});
}

TEST_CASE("get_current_view reports moves, patch, and exit proximity") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXXXX",
      "XWWWWWX",
      "XWWEWWX",
      "XWWSOWX",
      "XWWWWWX",
      "XWWWWWX",
      "XXXXXXX",
  });
  AgentState agent = make_agent(0, {3, 3});
  const Observation obs = get_current_view(agent, grid);
  CHECK(obs.position == Cell{3, 3});
  CHECK(obs.exit_adjacent);
  CHECK(obs.view_center() == CellKind::Open);
  CHECK(obs.view_at(Direction::North) == CellKind::Exit);
  REQUIRE(obs.available_moves.size() == 2);  // exit above, open east
  CHECK(obs.available_moves[0] == Direction::North);
  CHECK(obs.available_moves[1] == Direction::East);
  CHECK(obs.unexplored_directions.size() == 2);
}

TEST_CASE("a diagonal exit sets exit_adjacent without a direct move") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXXXX",
      "XWWWWWX",
      "XWWWEWX",
      "XWWSWWX",
      "XWWOWWX",
      "XWWWWWX",
      "XXXXXXX",
  });
  const AgentState agent = make_agent(0, {3, 3});
  const Observation obs = get_current_view(agent, grid);
  CHECK(obs.exit_adjacent);
  for (const Direction d : obs.available_moves) {
    CHECK(obs.view_at(d) != CellKind::Exit);
  }
}

TEST_CASE("single opening yields a singleton move set") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXX",
      "XWOWX",
      "XWSWX",
      "XWWWX",
      "XXXXX",
  });
  const AgentState agent = make_agent(0, {2, 2});
  const Observation obs = get_current_view(agent, grid);
  REQUIRE(obs.available_moves.size() == 1);
  CHECK(obs.available_moves.front() == Direction::North);
}

TEST_CASE("unexplored directions exclude visited targets after a walk") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {3, 1});
  // Walk east to the junction, up the stem, and back down: 6 moves.
  REQUIRE(apply_move(agent, grid, Direction::East).success);
  REQUIRE(apply_move(agent, grid, Direction::East).success);
  REQUIRE(apply_move(agent, grid, Direction::North).success);
  REQUIRE(apply_move(agent, grid, Direction::North).success);
  REQUIRE(apply_move(agent, grid, Direction::South).success);
  REQUIRE(apply_move(agent, grid, Direction::South).success);

  // Back at the junction (3,3): north and west are visited, east is not.
  const Observation obs = get_current_view(agent, grid);
  CHECK(agent.position == Cell{3, 3});
  REQUIRE(obs.available_moves.size() == 3);
  CHECK(obs.unexplored_directions == std::vector<Direction>{Direction::East});
}

TEST_CASE("mark_dead_end criteria") {
  const MazeGrid grid = grid_from_ascii(kTMaze);

  SUBCASE("cul-de-sac entered from its only opening is marked") {
    AgentState agent = make_agent(0, {2, 3});
    REQUIRE(apply_move(agent, grid, Direction::North).success);  // to (1,3)
    const MarkOutcome outcome = mark_dead_end(agent, grid);
    CHECK(outcome.marked);
    CHECK(agent.marked_dead_ends.count({1, 3}) == 1);
  }

  SUBCASE("junction with multiple openings is skipped") {
    AgentState agent = make_agent(0, {3, 2});
    REQUIRE(apply_move(agent, grid, Direction::East).success);  // to (3,3)
    const MarkOutcome outcome = mark_dead_end(agent, grid);
    CHECK_FALSE(outcome.marked);
    CHECK(outcome.skip_reason == "multiple paths");
  }

  SUBCASE("marking is refused while backtracking") {
    AgentState agent = make_agent(0, {2, 3});
    REQUIRE(apply_move(agent, grid, Direction::North).success);
    agent.backtrack.mode = BacktrackState::Mode::Active;
    agent.backtrack.plan.steps = {{2, 3}};
    const MarkOutcome outcome = mark_dead_end(agent, grid);
    CHECK_FALSE(outcome.marked);
    CHECK(outcome.skip_reason == "backtracking");
  }

  SUBCASE("unexplored neighbor blocks the mark") {
    AgentState agent = make_agent(0, {1, 3});  // spawned at the stem top
    const MarkOutcome outcome = mark_dead_end(agent, grid);
    CHECK_FALSE(outcome.marked);
    CHECK(outcome.skip_reason == "only move leads to unvisited cell");
  }
}

TEST_CASE("dead-end revisits are counted") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {2, 3});
  REQUIRE(apply_move(agent, grid, Direction::North).success);
  REQUIRE(mark_dead_end(agent, grid).marked);
  REQUIRE(apply_move(agent, grid, Direction::South).success);
  CHECK(agent.counters.dead_end_revisits == 0);
  REQUIRE(apply_move(agent, grid, Direction::North).success);  // back in
  CHECK(agent.counters.dead_end_revisits == 1);
}

TEST_CASE("start_backtracking plans through visited cells to an opening") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {3, 1});
  // Explore east to the junction, then up the stem to its top.
  REQUIRE(apply_move(agent, grid, Direction::East).success);
  REQUIRE(apply_move(agent, grid, Direction::East).success);
  REQUIRE(apply_move(agent, grid, Direction::North).success);
  REQUIRE(apply_move(agent, grid, Direction::North).success);

  const BacktrackResult result = start_backtracking(agent, grid);
  REQUIRE(result.ok());
  CHECK(result.plan.target == Cell{3, 3});  // junction borders the east arm
  REQUIRE(result.plan.steps.size() == 2);
  CHECK(result.plan.steps[0] == Cell{2, 3});
  CHECK(result.plan.steps[1] == Cell{3, 3});
  CHECK(agent.backtrack.mode == BacktrackState::Mode::Lock);

  // Every planned cell was already visited.
  for (const Cell c : result.plan.steps) {
    CHECK(agent.visited.count(c) == 1);
  }

  SUBCASE("second call reports AlreadyBacktracking") {
    const BacktrackResult again = start_backtracking(agent, grid);
    CHECK(again.error == BacktrackResult::Error::AlreadyBacktracking);
  }
}

TEST_CASE("start_backtracking with no opening reports exhaustion") {
  const MazeGrid grid = grid_from_ascii({
      "XXXXX",
      "XSOWX",
      "XWWWX",
      "XWWWX",
      "XXXXX",
  });
  AgentState agent = make_agent(0, {1, 1});
  REQUIRE(apply_move(agent, grid, Direction::East).success);
  const BacktrackResult result = start_backtracking(agent, grid);
  CHECK(result.error == BacktrackResult::Error::NoUnexploredOpening);
  CHECK(agent.backtrack.mode == BacktrackState::Mode::Inactive);
}

TEST_CASE("start_backtracking from a qualifying cell yields an empty plan") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  AgentState agent = make_agent(0, {3, 3});
  const BacktrackResult result = start_backtracking(agent, grid);
  REQUIRE(result.ok());
  CHECK(result.plan.target == Cell{3, 3});
  CHECK(result.plan.steps.empty());
  CHECK(agent.backtrack.mode == BacktrackState::Mode::Inactive);
}

TEST_CASE("step budget is 2.5x the tile count, rounded up") {
  MazeGrid grid;
  grid.size = 12;
  CHECK(step_budget(grid) == 360);
  grid.size = 18;
  CHECK(step_budget(grid) == 810);
  grid.size = 25;
  CHECK(step_budget(grid) == 1563);
  CHECK(step_budget_for(25, 2.5) == 1563);
  CHECK(step_budget_for(8, 1.0) == 64);
}

TEST_CASE("counter identity holds under random operation sequences") {
  const MazeGrid grid = grid_from_ascii(kTMaze);
  Rng rng(12345);
  AgentState agent = make_agent(0, {3, 1});
  for (int i = 0; i < 500; ++i) {
    const Direction d = kDirections[rng.below(4)];
    (void)apply_move(agent, grid, d);
    if (rng.below(8) == 0) (void)mark_dead_end(agent, grid);
    if (rng.below(16) == 0 && !agent.backtrack.active()) {
      const BacktrackResult bt = start_backtracking(agent, grid);
      if (bt.ok()) {
        // Plans may only traverse cells the agent has already visited.
        for (const Cell c : bt.plan.steps) {
          CHECK(agent.visited.count(c) == 1);
        }
      }
    }
    CHECK(agent.counters.failed_moves ==
          agent.counters.total_move_attempts - agent.counters.total_moves);
    CHECK(agent.visited.count(agent.position) == 1);
    CHECK(agent.path_history.back() == agent.position);
    CHECK(agent.recent_moves.size() <= kRecentWindow);
  }
}

TEST_CASE("backtracking plans stay on visited cells in generated mazes") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const MazeGrid grid = generate_maze(12, 0.10, seed);
    Rng rng(seed * 31);
    AgentState agent = make_agent(0, grid.starts.front());
    for (int i = 0; i < 200; ++i) {
      const Observation obs = get_current_view(agent, grid);
      if (!obs.available_moves.empty()) {
        (void)apply_move(
            agent, grid,
            obs.available_moves[rng.below(
                static_cast<std::uint32_t>(obs.available_moves.size()))]);
      }
      if (rng.below(6) == 0 && !agent.backtrack.active()) {
        const BacktrackResult bt = start_backtracking(agent, grid);
        if (bt.ok()) {
          for (const Cell c : bt.plan.steps) {
            CHECK(agent.visited.count(c) == 1);
          }
        }
      }
    }
  }
}

TEST_CASE("replaying the same action sequence reproduces the state") {
  const MazeGrid grid = generate_maze(12, 0.10, 4);

  const auto run = [&grid]() {
    Rng rng(777);
    AgentState agent = make_agent(0, grid.starts.front());
    for (int i = 0; i < 300; ++i) {
      const Direction d = kDirections[rng.below(4)];
      (void)apply_move(agent, grid, d);
      if (rng.below(10) == 0) (void)mark_dead_end(agent, grid);
    }
    return debug_string(agent);
  };
  CHECK(run() == run());
}
