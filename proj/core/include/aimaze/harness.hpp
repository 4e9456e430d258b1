#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aimaze/episode.hpp"
#include "aimaze/maze_io.hpp"

namespace aimaze {

/// Two-sided normal quantile (Acklam's rational approximation, refined by
/// one Halley step; relative error well under 1e-9).
double normal_quantile(double p);

struct WilsonInterval {
  double rate_pct = 0.0;
  double low_pct = 0.0;
  double high_pct = 0.0;
  double half_width_pp = 0.0;
};

/// Wilson score interval in percent. Full precision is kept here; callers
/// round to two decimals for reporting. Throws for runs < 1 or counts out
/// of range.
WilsonInterval wilson_ci(int successes, int runs, double confidence = 0.95);

struct BatchConfig {
  std::string name;
  std::string difficulty;
  std::vector<std::filesystem::path> maze_files;  // round-robin assignment
  std::vector<MazeGrid> mazes;  // used instead of files when non-empty
  RunConfig run;                // per-run seeds derive from the master seed
  bool keep_fe_traces = false;
};

struct RunRow {
  int index = 0;
  std::string batch;
  std::string maze;
  std::uint64_t seed = 0;
  bool success = false;
  int steps = 0;
  int failed_moves = 0;
  double wall_seconds = 0.0;
  TerminationReason termination = TerminationReason::BudgetExhausted;
};

struct BatchResult {
  std::string name;
  std::string difficulty;
  int runs = 0;
  int successes = 0;
  WilsonInterval interval;
  std::vector<RunRow> rows;
  std::vector<FreeEnergyRecord> fe_rows;  // only when keep_fe_traces
  bool aborted = false;
  std::string abort_reason;
};

struct BatchSummary {
  std::vector<BatchResult> batches;
};

/// Precision-targeted batch execution: every batch runs at least min_runs
/// episodes and stops at the first count whose Wilson half-width meets the
/// target, or at max_runs. Runs spread round-robin over the batch's mazes;
/// per-run seeds derive deterministically from the master seed, so any
/// worker count yields the same summary. A maze load failure aborts that
/// batch only.
BatchSummary run_batch(const std::vector<BatchConfig>& configs,
                       int parallelism, std::uint64_t master_seed,
                       double precision_target_pp = 15.0, int min_runs = 10,
                       int max_runs = 200);

struct GridCell {
  double theta1 = 0.0;
  double theta2 = 0.0;
  std::string tier;
  int runs = 0;
  int successes = 0;
  double mean_steps = 0.0;  // over all runs; failures carry the full budget
};

struct GridSearchResult {
  std::vector<GridCell> table;
  std::map<std::string, GridCell> argmin_per_tier;  // fewest mean steps
};

/// Sweeps (theta1, theta2) cells per tier with runs_per_cell episodes per
/// cell using the base configuration.
GridSearchResult grid_search(
    const std::map<std::string, std::vector<MazeGrid>>& mazes_by_tier,
    const std::vector<double>& theta1_values,
    const std::vector<double>& theta2_values, int runs_per_cell,
    const RunConfig& base, std::uint64_t master_seed);

std::string grid_search_table(const GridSearchResult& result);

/// Writes summary.tsv (configuration table), runs.tsv (per-run ledger),
/// steps_distribution.tsv (successful-run step counts), ci_convergence.tsv
/// (half-width after each cumulative run), summary.json, and fe_trace.tsv
/// when any batch kept traces. Output is a pure function of the summary,
/// so re-emission is byte-identical.
void emit_reports(const BatchSummary& summary,
                  const std::filesystem::path& out_dir);

}  // namespace aimaze
