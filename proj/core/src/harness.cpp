#include "aimaze/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aimaze/text.hpp"

namespace aimaze {
namespace {

using nlohmann::json;

double round2(double v) { return std::round(v * 100.0) / 100.0; }

struct PreparedBatch {
  const BatchConfig* config = nullptr;
  std::vector<MazeGrid> mazes;
  std::vector<std::string> labels;
  bool aborted = false;
  std::string abort_reason;
};

PreparedBatch prepare(const BatchConfig& config) {
  PreparedBatch prepared;
  prepared.config = &config;
  if (!config.mazes.empty()) {
    prepared.mazes = config.mazes;
    for (std::size_t i = 0; i < config.mazes.size(); ++i) {
      prepared.labels.push_back(config.name + "/maze" + std::to_string(i));
    }
    return prepared;
  }
  for (const auto& file : config.maze_files) {
    try {
      prepared.mazes.push_back(load_maze(file).grid);
      prepared.labels.push_back(file.filename().string());
    } catch (const MazeIoError& e) {
      prepared.aborted = true;
      prepared.abort_reason = file.string() + ": " + e.what();
      return prepared;
    }
  }
  if (prepared.mazes.empty()) {
    prepared.aborted = true;
    prepared.abort_reason = "no mazes configured";
  }
  return prepared;
}

struct RunOutcome {
  RunRow row;
  std::vector<FreeEnergyRecord> fe_rows;
};

RunOutcome execute_run(const PreparedBatch& prepared, int run_index,
                       std::uint64_t master_seed, std::size_t batch_index) {
  const BatchConfig& config = *prepared.config;
  const std::size_t maze_index = run_index % prepared.mazes.size();

  RunConfig run = config.run;
  run.seed = Rng::mix(Rng::mix(master_seed, batch_index),
                      static_cast<std::uint64_t>(run_index));

  const RunResult result = run_episode(prepared.mazes[maze_index], run);

  RunOutcome outcome;
  outcome.row.index = run_index;
  outcome.row.batch = config.name;
  outcome.row.maze = prepared.labels[maze_index];
  outcome.row.seed = run.seed;
  outcome.row.success = result.success;
  outcome.row.steps = result.steps_taken;
  outcome.row.failed_moves = result.failed_moves;
  outcome.row.wall_seconds = result.wall_seconds;
  outcome.row.termination = result.termination;
  if (config.keep_fe_traces) outcome.fe_rows = result.fe_trace;
  return outcome;
}

}  // namespace

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) {
    throw std::invalid_argument("normal_quantile: p must be in (0,1)");
  }
  // Acklam's coefficients.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // One Halley refinement against erfc.
  const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(x * x / 2.0);
  x = x - u / (1.0 + x * u / 2.0);
  return x;
}

WilsonInterval wilson_ci(int successes, int runs, double confidence) {
  if (runs < 1) throw std::invalid_argument("wilson_ci: runs must be >= 1");
  if (successes < 0 || successes > runs) {
    throw std::invalid_argument("wilson_ci: successes out of range");
  }
  const double z = normal_quantile(1.0 - (1.0 - confidence) / 2.0);
  const double n = runs;
  const double p_hat = successes / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p_hat + z2 / (2.0 * n)) / denom;
  const double margin =
      z * std::sqrt(p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)) / denom;

  WilsonInterval out;
  out.rate_pct = 100.0 * p_hat;
  out.low_pct = 100.0 * std::max(0.0, center - margin);
  out.high_pct = 100.0 * std::min(1.0, center + margin);
  out.half_width_pp = (out.high_pct - out.low_pct) / 2.0;
  return out;
}

BatchSummary run_batch(const std::vector<BatchConfig>& configs,
                       int parallelism, std::uint64_t master_seed,
                       double precision_target_pp, int min_runs,
                       int max_runs) {
  if (configs.empty()) throw std::invalid_argument("run_batch: no configs");
  if (parallelism < 1) parallelism = 1;
  min_runs = std::max(1, min_runs);

  BatchSummary summary;
  for (std::size_t batch_index = 0; batch_index < configs.size();
       ++batch_index) {
    const BatchConfig& config = configs[batch_index];
    BatchResult batch;
    batch.name = config.name;
    batch.difficulty = config.difficulty;

    const PreparedBatch prepared = prepare(config);
    if (prepared.aborted) {
      batch.aborted = true;
      batch.abort_reason = prepared.abort_reason;
      summary.batches.push_back(std::move(batch));
      continue;
    }

    // Waves of `parallelism` runs; afterwards results are truncated to the
    // first count that meets the precision target, so the stop rule is
    // identical to a purely sequential loop.
    std::vector<RunOutcome> outcomes;
    int next_run = 0;
    bool stop = false;
    while (!stop && next_run < max_runs) {
      const int wave =
          std::min(parallelism, max_runs - next_run);
      std::vector<std::future<RunOutcome>> futures;
      for (int i = 0; i < wave; ++i) {
        futures.push_back(std::async(std::launch::async, execute_run,
                                     std::cref(prepared), next_run + i,
                                     master_seed, batch_index));
      }
      for (auto& f : futures) outcomes.push_back(f.get());
      next_run += wave;

      int successes = 0;
      for (int n = 1; n <= static_cast<int>(outcomes.size()); ++n) {
        if (outcomes[n - 1].row.success) ++successes;
        if (n < min_runs) continue;
        if (wilson_ci(successes, n).half_width_pp <= precision_target_pp) {
          outcomes.resize(n);
          stop = true;
          break;
        }
      }
    }

    batch.runs = static_cast<int>(outcomes.size());
    for (const RunOutcome& o : outcomes) {
      batch.rows.push_back(o.row);
      if (o.row.success) ++batch.successes;
      batch.fe_rows.insert(batch.fe_rows.end(), o.fe_rows.begin(),
                           o.fe_rows.end());
    }
    batch.interval = wilson_ci(batch.successes, batch.runs);
    summary.batches.push_back(std::move(batch));
  }
  return summary;
}

GridSearchResult grid_search(
    const std::map<std::string, std::vector<MazeGrid>>& mazes_by_tier,
    const std::vector<double>& theta1_values,
    const std::vector<double>& theta2_values, int runs_per_cell,
    const RunConfig& base, std::uint64_t master_seed) {
  if (theta1_values.empty() || theta2_values.empty()) {
    throw std::invalid_argument("grid_search: empty threshold grid");
  }
  if (runs_per_cell < 1) {
    throw std::invalid_argument("grid_search: runs_per_cell must be >= 1");
  }

  GridSearchResult result;
  std::uint64_t cell_counter = 0;
  for (const auto& [tier, mazes] : mazes_by_tier) {
    if (mazes.empty()) continue;
    for (const double theta1 : theta1_values) {
      for (const double theta2 : theta2_values) {
        GridCell cell;
        cell.theta1 = theta1;
        cell.theta2 = theta2;
        cell.tier = tier;
        cell.runs = runs_per_cell;

        double total_steps = 0.0;
        for (int run_index = 0; run_index < runs_per_cell; ++run_index) {
          RunConfig run = base;
          run.thresholds = {theta1, theta2};
          run.seed = Rng::mix(Rng::mix(master_seed, cell_counter),
                              static_cast<std::uint64_t>(run_index));
          const MazeGrid& maze = mazes[run_index % mazes.size()];
          const RunResult episode = run_episode(maze, run);
          total_steps += episode.steps_taken;
          if (episode.success) ++cell.successes;
        }
        cell.mean_steps = total_steps / runs_per_cell;
        result.table.push_back(cell);
        ++cell_counter;
      }
    }
    bool have = false;
    GridCell best;
    for (const GridCell& cell : result.table) {
      if (cell.tier != tier) continue;
      if (!have || cell.mean_steps < best.mean_steps) {
        best = cell;
        have = true;
      }
    }
    if (have) result.argmin_per_tier[tier] = best;
  }
  return result;
}

std::string grid_search_table(const GridSearchResult& result) {
  std::string out = "tier\ttheta1\ttheta2\truns\tsuccesses\tmean_steps\n";
  for (const GridCell& cell : result.table) {
    out += cell.tier + '\t' + format_double(cell.theta1) + '\t' +
           format_double(cell.theta2) + '\t' + std::to_string(cell.runs) +
           '\t' + std::to_string(cell.successes) + '\t' +
           format_double(cell.mean_steps) + '\n';
  }
  for (const auto& [tier, cell] : result.argmin_per_tier) {
    out += "argmin\t" + tier + "\ttheta1=" + format_double(cell.theta1) +
           "\ttheta2=" + format_double(cell.theta2) +
           "\tmean_steps=" + format_double(cell.mean_steps) + '\n';
  }
  return out;
}

void emit_reports(const BatchSummary& summary,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto write_file = [&](const char* name, const std::string& content) {
    const auto path = out_dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
  };

  // (a) Configuration summary shaped like the results table.
  std::string table =
      "configuration\tdifficulty\truns\tsuccesses\tsuccess_rate\tci_lower\t"
      "ci_upper\thalf_width_pp\tstatus\n";
  for (const BatchResult& b : summary.batches) {
    if (b.aborted) {
      table += b.name + '\t' + b.difficulty + "\t0\t0\t-\t-\t-\t-\taborted:" +
               b.abort_reason + '\n';
      continue;
    }
    table += b.name + '\t' + b.difficulty + '\t' + std::to_string(b.runs) +
             '\t' + std::to_string(b.successes) + '\t' +
             format_double(round2(b.interval.rate_pct)) + '\t' +
             format_double(round2(b.interval.low_pct)) + '\t' +
             format_double(round2(b.interval.high_pct)) + '\t' +
             format_double(round2(b.interval.half_width_pp)) + "\tok\n";
  }
  write_file("summary.tsv", table);

  // (b) Per-run ledger.
  std::string ledger =
      "batch\tdifficulty\trun\tmaze\tseed\tsuccess\tsteps\tfailed_moves\t"
      "termination\n";
  for (const BatchResult& b : summary.batches) {
    for (const RunRow& r : b.rows) {
      ledger += b.name + '\t' + b.difficulty + '\t' +
                std::to_string(r.index) + '\t' + r.maze + '\t' +
                std::to_string(r.seed) + '\t' + (r.success ? "1" : "0") +
                '\t' + std::to_string(r.steps) + '\t' +
                std::to_string(r.failed_moves) + '\t' +
                to_string(r.termination) + '\n';
    }
  }
  write_file("runs.tsv", ledger);

  // (c) Steps distribution over successful runs.
  std::string dist = "configuration\tdifficulty\tsteps\n";
  for (const BatchResult& b : summary.batches) {
    std::vector<int> steps;
    for (const RunRow& r : b.rows) {
      if (r.success) steps.push_back(r.steps);
    }
    std::sort(steps.begin(), steps.end());
    for (const int s : steps) {
      dist += b.name + '\t' + b.difficulty + '\t' + std::to_string(s) + '\n';
    }
  }
  write_file("steps_distribution.tsv", dist);

  // (d) CI half-width convergence per batch.
  std::string convergence = "configuration\truns\thalf_width_pp\n";
  for (const BatchResult& b : summary.batches) {
    int successes = 0;
    for (int n = 1; n <= static_cast<int>(b.rows.size()); ++n) {
      if (b.rows[n - 1].success) ++successes;
      convergence += b.name + '\t' + std::to_string(n) + '\t' +
                     format_double(round2(wilson_ci(successes, n).half_width_pp)) +
                     '\n';
    }
  }
  write_file("ci_convergence.tsv", convergence);

  // Machine-readable summary.
  json doc;
  doc["batches"] = json::array();
  for (const BatchResult& b : summary.batches) {
    json entry;
    entry["name"] = b.name;
    entry["difficulty"] = b.difficulty;
    if (b.aborted) {
      entry["aborted"] = true;
      entry["reason"] = b.abort_reason;
    } else {
      entry["runs"] = b.runs;
      entry["successes"] = b.successes;
      entry["success_rate"] = round2(b.interval.rate_pct);
      entry["ci_lower"] = round2(b.interval.low_pct);
      entry["ci_upper"] = round2(b.interval.high_pct);
      entry["half_width_pp"] = round2(b.interval.half_width_pp);
    }
    doc["batches"].push_back(entry);
  }
  write_file("summary.json", doc.dump(2) + "\n");

  // FE traces, when kept.
  bool any_fe = false;
  for (const BatchResult& b : summary.batches) {
    if (!b.fe_rows.empty()) any_fe = true;
  }
  if (any_fe) {
    std::string fe = "batch," + fe_trace_header() + '\n';
    for (const BatchResult& b : summary.batches) {
      for (const FreeEnergyRecord& r : b.fe_rows) {
        fe += b.name + ',' + fe_trace_row(r) + '\n';
      }
    }
    write_file("fe_trace.csv", fe);
  }
}

}  // namespace aimaze
