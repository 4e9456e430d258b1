#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "aimaze/complexity.hpp"
#include "aimaze/episode.hpp"
#include "aimaze/harness.hpp"
#include "aimaze/llm_adapter.hpp"
#include "aimaze/maze_io.hpp"
#include "aimaze/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

struct Tier {
  const char* name;
  int size;
  double dead_end_factor;
};

constexpr Tier kTiers[] = {
    {"easy", 12, 0.03},
    {"medium", 18, 0.10},
    {"hard", 25, 0.25},
    {"very-hard", 30, 0.35},
};

const Tier* tier_by_name(const std::string& name) {
  for (const Tier& t : kTiers) {
    if (name == t.name) return &t;
  }
  return nullptr;
}

int tier_index(const std::string& name) {
  for (int i = 0; i < 4; ++i) {
    if (name == kTiers[i].name) return i;
  }
  return -1;
}

int run_generate(const std::string& out_dir, std::uint64_t seed,
                 int per_tier, const std::vector<std::string>& tiers) {
  int failures = 0;
  for (const std::string& tier_name : tiers) {
    const Tier* tier = tier_by_name(tier_name);
    if (!tier) {
      std::cerr << "unknown tier: " << tier_name << "\n";
      return kExitConfig;
    }
    const fs::path dir = fs::path(out_dir) / tier->name;
    fs::create_directories(dir);
    for (int k = 0; k < per_tier; ++k) {
      const std::uint64_t maze_seed = aimaze::Rng::mix(
          aimaze::Rng::mix(seed, static_cast<std::uint64_t>(
                                     tier_index(tier_name))),
          static_cast<std::uint64_t>(k));
      try {
        const aimaze::MazeGrid grid =
            aimaze::generate_maze(tier->size, tier->dead_end_factor, maze_seed);
        const aimaze::MazeComplexity complexity =
            aimaze::compute_complexity(grid);
        const fs::path file = dir / ("maze_" + std::to_string(k) + ".maze");
        aimaze::save_maze(grid, complexity, file);
        const aimaze::ValidationReport report = aimaze::validate_maze(grid);
        std::cout << file.string() << " size=" << grid.size
                  << " starts=" << grid.starts.size()
                  << " rho=" << aimaze::format_double(report.connectivity_ratio)
                  << " path=" << report.optimal_path_length
                  << " surprisingness="
                  << aimaze::format_double(complexity.surprisingness)
                  << " deceptiveness="
                  << aimaze::format_double(complexity.deceptiveness)
                  << " traps=" << complexity.traps.size() << "\n";
      } catch (const std::exception& e) {
        std::cerr << tier_name << "[" << k << "]: " << e.what() << "\n";
        ++failures;
      }
    }
  }
  return failures == 0 ? kExitOk : kExitPartial;
}

aimaze::LlmConfig llm_config_from(const std::string& model,
                                  const std::string& base_url,
                                  const std::string& api_key_env,
                                  int timeout_ms, int retries) {
  aimaze::LlmConfig config;
  if (!model.empty()) config.model = model;
  if (!base_url.empty()) config.base_url = base_url;
  if (!api_key_env.empty()) config.api_key_env = api_key_env;
  config.timeout_ms = timeout_ms;
  config.max_retries = retries;
  return config;
}

void write_lines(const fs::path& file, const std::vector<std::string>& lines) {
  std::ofstream out(file, std::ios::binary);
  for (const std::string& line : lines) out << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent maze benchmark engine"};
  app.require_subcommand(1);

  // generate
  auto* generate = app.add_subcommand(
      "generate", "Generate the tiered maze corpus");
  std::string gen_out = "corpus";
  std::uint64_t gen_seed = 42;
  int per_tier = 5;
  std::vector<std::string> gen_tiers = {"easy", "medium", "hard", "very-hard"};
  generate->add_option("--out", gen_out, "Output directory");
  generate->add_option("--seed", gen_seed, "Master seed");
  generate->add_option("--per-tier", per_tier, "Mazes per tier")
      ->check(CLI::PositiveNumber);
  generate->add_option("--tiers", gen_tiers,
                       "Tiers: easy medium hard very-hard")
      ->delimiter(',');

  // solve
  auto* solve = app.add_subcommand("solve", "Run one episode with a trace");
  std::string solve_maze;
  std::string solve_policy = "heuristic";
  std::string solve_configuration = "fe_only";
  std::uint64_t solve_seed = 0;
  int solve_agents = 2;
  double solve_multiplier = 2.5;
  double solve_timeout = 7200.0;
  double theta1 = 0.6;
  double theta2 = 0.4;
  std::string trace_file;
  std::string fe_trace_file;
  std::string orch_log_file;
  bool quiet = false;
  std::string llm_model;
  std::string llm_base_url;
  std::string llm_api_key_env;
  int llm_timeout_ms = 30000;
  int llm_retries = 2;
  bool llm_orchestrator = false;
  solve->add_option("--maze", solve_maze, "Maze file")->required();
  solve->add_option("--policy", solve_policy,
                    "random_walk | heuristic | llm");
  solve->add_option("--config", solve_configuration,
                    "solo | fe_only | fe_orchestration");
  solve->add_option("--seed", solve_seed, "Episode seed");
  solve->add_option("--agents", solve_agents, "Execution agents");
  solve->add_option("--budget-multiplier", solve_multiplier,
                    "Step budget = ceil(multiplier * n^2)");
  solve->add_option("--timeout", solve_timeout, "Wall timeout in seconds");
  solve->add_option("--theta1", theta1, "Epistemic drive threshold");
  solve->add_option("--theta2", theta2, "Accuracy cost threshold");
  solve->add_option("--trace", trace_file, "Write the tool-call trace here");
  solve->add_option("--fe-trace", fe_trace_file, "Write FE rows here");
  solve->add_option("--orch-log", orch_log_file,
                    "Write orchestrator JSON lines here");
  solve->add_flag("--quiet", quiet, "Suppress the stdout trace");
  solve->add_option("--model", llm_model, "Chat model name");
  solve->add_option("--base-url", llm_base_url, "Chat endpoint base URL");
  solve->add_option("--api-key-env", llm_api_key_env,
                    "Environment variable holding the API key");
  solve->add_option("--llm-timeout-ms", llm_timeout_ms, "Per-call timeout");
  solve->add_option("--llm-retries", llm_retries, "Per-call retries");
  solve->add_flag("--llm-orchestrator", llm_orchestrator,
                  "Back the orchestrator cycle with the chat endpoint");

  // bench
  auto* bench = app.add_subcommand("bench", "Run configured batches");
  std::string bench_config;
  std::string bench_out = "results";
  int jobs = 2;
  bench->add_option("--config", bench_config, "Batch config JSON")->required();
  bench->add_option("--out", bench_out, "Report directory");
  bench->add_option("--jobs", jobs, "Parallel episodes");

  // grid-search
  auto* grid = app.add_subcommand("grid-search",
                                  "Threshold sweep over maze tiers");
  std::vector<std::string> grid_mazes;  // tier:file1,file2
  std::vector<double> theta1_values{0.6};
  std::vector<double> theta2_values{0.4};
  int runs_per_cell = 3;
  std::uint64_t grid_seed = 7;
  std::string grid_out;
  grid->add_option("--tier", grid_mazes,
                   "tier:file1,file2 (repeatable)")
      ->required();
  grid->add_option("--theta1", theta1_values, "Drive thresholds")
      ->delimiter(',');
  grid->add_option("--theta2", theta2_values, "Cost thresholds")
      ->delimiter(',');
  grid->add_option("--runs-per-cell", runs_per_cell, "Episodes per cell");
  grid->add_option("--seed", grid_seed, "Master seed");
  grid->add_option("--out", grid_out, "Write the table here (default stdout)");

  // report
  auto* report = app.add_subcommand(
      "report", "Rebuild report files from a per-run ledger");
  std::string ledger_file;
  std::string report_out = "results";
  report->add_option("--runs", ledger_file, "runs.tsv ledger")->required();
  report->add_option("--out", report_out, "Report directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) {
      return run_generate(gen_out, gen_seed, per_tier, gen_tiers);
    }

    if (solve->parsed()) {
      const auto configuration =
          aimaze::configuration_from_string(solve_configuration);
      const auto policy = aimaze::policy_kind_from_string(solve_policy);
      if (!configuration || !policy) {
        std::cerr << "unknown policy or configuration\n";
        return kExitConfig;
      }
      const aimaze::LoadedMaze loaded = aimaze::load_maze(solve_maze);

      aimaze::RunConfig config;
      config.configuration = *configuration;
      config.policy = *policy;
      config.num_execution_agents = solve_agents;
      config.step_budget_multiplier = solve_multiplier;
      config.timeout_seconds = solve_timeout;
      config.seed = solve_seed;
      config.thresholds = {theta1, theta2};
      const aimaze::LlmConfig llm = llm_config_from(
          llm_model, llm_base_url, llm_api_key_env, llm_timeout_ms,
          llm_retries);
      if (*policy == aimaze::PolicyKind::Llm) {
        config.policy_override = std::make_shared<aimaze::LlmPolicy>(
            std::make_shared<aimaze::HttpChatTransport>(llm), llm);
      }
      if (llm_orchestrator) {
        config.orchestrator_transport =
            std::make_shared<aimaze::HttpChatTransport>(llm);
        config.orchestrator_llm = llm;
      }

      const aimaze::RunResult result = aimaze::run_episode(loaded.grid, config);
      if (!quiet) {
        for (const std::string& line : result.trace) {
          std::cout << line << '\n';
        }
      }
      std::cout << "success=" << (result.success ? 1 : 0)
                << " termination=" << aimaze::to_string(result.termination)
                << " steps=" << result.steps_taken
                << " failed_moves=" << result.failed_moves
                << " iterations=" << result.iterations
                << " policy_failures=" << result.policy_failures << "\n";
      if (!trace_file.empty()) write_lines(trace_file, result.trace);
      if (!fe_trace_file.empty()) {
        std::vector<std::string> rows{aimaze::fe_trace_header()};
        for (const auto& record : result.fe_trace) {
          rows.push_back(aimaze::fe_trace_row(record));
        }
        write_lines(fe_trace_file, rows);
      }
      if (!orch_log_file.empty()) {
        write_lines(orch_log_file, result.orchestrator_log);
      }
      return result.success ? kExitOk : kExitPartial;
    }

    if (bench->parsed()) {
      std::ifstream in(bench_config);
      if (!in) {
        std::cerr << "cannot open " << bench_config << "\n";
        return kExitConfig;
      }
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return kExitConfig;
      }

      const std::uint64_t master_seed = doc.value("master_seed", 42ULL);
      const int parallelism = doc.value("parallelism", jobs);
      const double target = doc.value("precision_target_pp", 15.0);
      const int min_runs = doc.value("min_runs", 10);
      const int max_runs = doc.value("max_runs", 200);

      std::vector<aimaze::BatchConfig> batches;
      if (!doc.contains("batches") || !doc["batches"].is_array() ||
          doc["batches"].empty()) {
        std::cerr << "config has no batches\n";
        return kExitConfig;
      }
      for (const json& b : doc["batches"]) {
        aimaze::BatchConfig batch;
        batch.name = b.value("name", "batch");
        batch.difficulty = b.value("difficulty", "unspecified");
        for (const auto& m : b.value("mazes", std::vector<std::string>{})) {
          batch.maze_files.emplace_back(m);
        }
        const auto configuration = aimaze::configuration_from_string(
            b.value("configuration", "fe_only"));
        const auto policy =
            aimaze::policy_kind_from_string(b.value("policy", "heuristic"));
        if (!configuration || !policy) {
          std::cerr << batch.name << ": unknown policy or configuration\n";
          return kExitConfig;
        }
        if (*policy == aimaze::PolicyKind::Llm) {
          std::cerr << batch.name
                    << ": llm batches are not supported offline\n";
          return kExitConfig;
        }
        batch.run.configuration = *configuration;
        batch.run.policy = *policy;
        batch.run.num_execution_agents = b.value("agents", 2);
        batch.run.step_budget_multiplier = b.value("budget_multiplier", 2.5);
        batch.run.timeout_seconds = b.value("timeout_seconds", 7200.0);
        batch.run.thresholds = {b.value("theta1", 0.6), b.value("theta2", 0.4)};
        batch.keep_fe_traces = b.value("keep_fe_traces", false);
        batches.push_back(std::move(batch));
      }

      const aimaze::BatchSummary summary = aimaze::run_batch(
          batches, parallelism, master_seed, target, min_runs, max_runs);
      aimaze::emit_reports(summary, bench_out);

      bool aborted = false;
      for (const auto& b : summary.batches) {
        std::cout << b.name << " (" << b.difficulty << "): ";
        if (b.aborted) {
          aborted = true;
          std::cout << "aborted: " << b.abort_reason << "\n";
          continue;
        }
        std::cout << b.successes << "/" << b.runs << " rate="
                  << aimaze::format_double(b.interval.rate_pct) << "% ["
                  << aimaze::format_double(b.interval.low_pct) << ", "
                  << aimaze::format_double(b.interval.high_pct) << "] hw="
                  << aimaze::format_double(b.interval.half_width_pp) << "pp\n";
      }
      std::cout << "reports: " << bench_out << "\n";
      return aborted ? kExitPartial : kExitOk;
    }

    if (grid->parsed()) {
      std::map<std::string, std::vector<aimaze::MazeGrid>> mazes_by_tier;
      for (const std::string& entry : grid_mazes) {
        const std::size_t colon = entry.find(':');
        if (colon == std::string::npos) {
          std::cerr << "expected tier:file1,file2 in --tier\n";
          return kExitConfig;
        }
        const std::string tier = entry.substr(0, colon);
        for (const auto part :
             aimaze::split(std::string_view(entry).substr(colon + 1), ',')) {
          mazes_by_tier[tier].push_back(
              aimaze::load_maze(fs::path(std::string(part))).grid);
        }
      }
      aimaze::RunConfig base;
      base.configuration = aimaze::Configuration::FEOnly;
      base.policy = aimaze::PolicyKind::Heuristic;
      const aimaze::GridSearchResult result =
          aimaze::grid_search(mazes_by_tier, theta1_values, theta2_values,
                              runs_per_cell, base, grid_seed);
      const std::string table = aimaze::grid_search_table(result);
      if (grid_out.empty()) {
        std::cout << table;
      } else {
        std::ofstream out(grid_out, std::ios::binary);
        out << table;
        std::cout << "table: " << grid_out << "\n";
      }
      return kExitOk;
    }

    if (report->parsed()) {
      std::ifstream in(ledger_file);
      if (!in) {
        std::cerr << "cannot open " << ledger_file << "\n";
        return kExitConfig;
      }
      std::map<std::string, aimaze::BatchResult> batches;
      std::vector<std::string> order;
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto fields = aimaze::split(line, '\t');
        if (fields.size() != 9) {
          std::cerr << "malformed ledger row: " << line << "\n";
          return kExitConfig;
        }
        aimaze::RunRow row;
        row.batch = std::string(fields[0]);
        row.index = static_cast<int>(aimaze::parse_int(fields[2]).value_or(0));
        row.maze = std::string(fields[3]);
        row.seed = aimaze::parse_u64(fields[4]).value_or(0);
        row.success = fields[5] == "1";
        row.steps = static_cast<int>(aimaze::parse_int(fields[6]).value_or(0));
        row.failed_moves =
            static_cast<int>(aimaze::parse_int(fields[7]).value_or(0));
        if (!batches.count(row.batch)) {
          order.push_back(row.batch);
          batches[row.batch].name = row.batch;
          batches[row.batch].difficulty = std::string(fields[1]);
        }
        aimaze::BatchResult& batch = batches[row.batch];
        batch.rows.push_back(row);
        batch.runs += 1;
        if (row.success) batch.successes += 1;
      }
      aimaze::BatchSummary summary;
      for (const std::string& name : order) {
        aimaze::BatchResult& batch = batches[name];
        batch.interval = aimaze::wilson_ci(batch.successes, batch.runs);
        summary.batches.push_back(std::move(batch));
      }
      aimaze::emit_reports(summary, report_out);
      std::cout << "reports: " << report_out << "\n";
      return kExitOk;
    }
  } catch (const aimaze::MazeIoError& e) {
    std::cerr << "maze i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}
