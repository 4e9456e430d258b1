#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "aimaze/cell.hpp"

namespace aimaze {

struct AgentState;   // environment.hpp
struct Observation;  // environment.hpp

/// Behavioral weights plus the two prompt-level thresholds. The four
/// weights are clamped to [0, 3]; the thresholds pass through modulation
/// unchanged.
struct WeightVector {
  double explore = 1.0;
  double exploit = 1.0;
  double coordinate = 1.0;
  double backtrack = 1.0;
  double backtrack_threshold = 0.7;
  double dead_end_confidence = 0.8;

  bool operator==(const WeightVector&) const = default;
};

WeightVector clamp_weights(WeightVector w);

/// Category cut points: drive is High above theta1, cost is High above
/// theta2 (strict inequalities; the boundary classifies Low).
struct Thresholds {
  double theta1 = 0.6;
  double theta2 = 0.4;
};

enum class Category {
  HighDriveLowCost,
  HighDriveHighCost,
  LowDriveLowCost,
  LowDriveHighCost,
};

std::string to_string(Category c);

struct FreeEnergyRecord {
  int agent_id = 0;
  int t = 0;  // iteration
  int k = 0;  // plan step
  double u_epistemic = 0.0;  // scaled drive in [0, 2]
  double u_signed = 0.0;     // -H form, logged alongside the drive
  double c_accuracy = 0.0;   // capped cost in [0, 2]
  double free_energy = 0.0;  // u - c
  double gradient = 0.0;     // F(t) - F(t-1) on this agent's chain, 0 first
  Category category = Category::LowDriveLowCost;
  std::array<double, 5> risk{};  // R1..R5
  WeightVector weights;          // weights after modulation
};

struct EntropyResult {
  double normalized = 0.0;  // in [0, 1]
  bool empty_warning = false;
};

/// Shannon entropy over token frequencies divided by log2(distinct count);
/// 0 when fewer than two distinct tokens. Empty input yields 0 with the
/// warning flag set.
EntropyResult token_entropy(std::span<const std::string> tokens);

/// The per-step decision signal: message tokens for an LLM policy, or the
/// per-direction score distribution (softmax) for scripted policies.
struct DecisionSignal {
  static DecisionSignal from_tokens(std::vector<std::string> tokens);
  static DecisionSignal from_scores(std::vector<double> scores);

  double normalized_entropy() const;  // in [0, 1]

  std::vector<std::string> tokens;
  std::vector<double> probabilities;
  bool token_based = false;
};

/// Scaled drive in [0, 2]: 2x the normalized entropy of the current
/// signal. The previous signal is accepted for the consecutive-state form
/// of the definition but does not enter the operational value.
double epistemic_drive(const DecisionSignal& current,
                       const DecisionSignal* previous = nullptr);

/// Cumulative counters plus the recent-movement window that feed the risk
/// components.
struct BehaviorWindow {
  int total_moves = 0;
  int total_move_attempts = 0;
  int dead_end_revisits = 0;
  int unique_entered = 0;          // distinct cells entered by moves
  std::vector<Cell> recent;        // last <= 8 entered cells, oldest first
  std::vector<Cell> path_tail;     // last <= 10 path cells, oldest first
};

/// R1 movement efficiency, R2 exploration redundancy, R3 backtracking
/// (ratio + 1.5 * oscillation penalty, clamped to [0, 2]), R4 dead-end
/// revisit rate, R5 recent-position redundancy.
std::array<double, 5> risk_components(const BehaviorWindow& window);

/// 0.20-weighted sum of the five components, capped at 2.0.
double accuracy_cost(const std::array<double, 5>& components);

double free_energy(double u_capped, double c_capped);

Category categorize(double u, double c, const Thresholds& th);

/// Eq-style update from the base vector: category delta (exploit +0.3 on
/// HighDrive/HighCost; explore +0.3 on LowDrive/LowCost; backtrack +0.3
/// and coordinate +0.2 on LowDrive/HighCost) plus a 0.1 gradient term on
/// the primary boosted weight: a worsening F amplifies the boost, an
/// improving F dampens it. Result clamped to [0, 3].
WeightVector modulate_weights(const WeightVector& base,
                              const FreeEnergyRecord& record);

/// Teammate and orchestrator context feeding the coordination feature.
struct CoordinationContext {
  std::vector<Cell> teammate_recent;      // last 10 positions per teammate
  std::vector<Cell> teammate_dead_ends;
  std::vector<Cell> teammate_junctions;
  std::vector<Cell> exploration_focus;    // orchestrator focus cells
};

struct MovementFeatures {
  double explore = 0.0;
  double exploit = 0.0;
  double coordinate = 0.0;
  double backtrack = 0.0;
};

std::map<Direction, MovementFeatures> movement_features(
    const AgentState& state, const Observation& obs,
    const CoordinationContext& ctx);

/// M(d) = w_explore*phi_explore + w_exploit*phi_exploit +
///        w_coordinate*phi_coordinate + w_backtrack*phi_backtrack
/// over the feasible directions, using the agent's current weights.
std::map<Direction, double> movement_scores(const AgentState& state,
                                            const Observation& obs,
                                            const CoordinationContext& ctx);

inline constexpr double kSignalCap = 2.0;

}  // namespace aimaze
