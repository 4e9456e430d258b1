#include "aimaze/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "aimaze/environment.hpp"

namespace aimaze {
namespace {

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

double entropy_bits(std::span<const double> probabilities) {
  double h = 0.0;
  for (const double p : probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace

WeightVector clamp_weights(WeightVector w) {
  w.explore = clamp(w.explore, 0.0, 3.0);
  w.exploit = clamp(w.exploit, 0.0, 3.0);
  w.coordinate = clamp(w.coordinate, 0.0, 3.0);
  w.backtrack = clamp(w.backtrack, 0.0, 3.0);
  return w;
}

std::string to_string(Category c) {
  switch (c) {
    case Category::HighDriveLowCost: return "high_drive_low_cost";
    case Category::HighDriveHighCost: return "high_drive_high_cost";
    case Category::LowDriveLowCost: return "low_drive_low_cost";
    case Category::LowDriveHighCost: return "low_drive_high_cost";
  }
  return "?";
}

EntropyResult token_entropy(std::span<const std::string> tokens) {
  if (tokens.empty()) return {0.0, true};

  std::map<std::string_view, int> counts;
  for (const std::string& t : tokens) counts[t] += 1;
  if (counts.size() < 2) return {0.0, false};

  const double total = static_cast<double>(tokens.size());
  double h = 0.0;
  for (const auto& [token, n] : counts) {
    const double p = n / total;
    h -= p * std::log2(p);
  }
  return {h / std::log2(static_cast<double>(counts.size())), false};
}

DecisionSignal DecisionSignal::from_tokens(std::vector<std::string> tokens) {
  DecisionSignal s;
  s.tokens = std::move(tokens);
  s.token_based = true;
  return s;
}

DecisionSignal DecisionSignal::from_scores(std::vector<double> scores) {
  DecisionSignal s;
  s.token_based = false;
  if (scores.empty()) return s;
  const double peak = *std::max_element(scores.begin(), scores.end());
  double sum = 0.0;
  s.probabilities.reserve(scores.size());
  for (const double v : scores) {
    const double e = std::exp(v - peak);
    s.probabilities.push_back(e);
    sum += e;
  }
  for (double& p : s.probabilities) p /= sum;
  return s;
}

double DecisionSignal::normalized_entropy() const {
  if (token_based) return token_entropy(tokens).normalized;
  if (probabilities.size() < 2) return 0.0;
  int support = 0;
  for (const double p : probabilities) {
    if (p > 0.0) ++support;
  }
  if (support < 2) return 0.0;
  return entropy_bits(probabilities) / std::log2(static_cast<double>(support));
}

double epistemic_drive(const DecisionSignal& current,
                       const DecisionSignal* /*previous*/) {
  return clamp(kSignalCap * current.normalized_entropy(), 0.0, kSignalCap);
}

std::array<double, 5> risk_components(const BehaviorWindow& w) {
  std::array<double, 5> r{};

  // R1: movement efficiency.
  if (w.total_move_attempts > 0) {
    r[0] = 1.0 - static_cast<double>(w.total_moves) / w.total_move_attempts;
  }

  // R2: exploration redundancy over cells entered by moves.
  if (w.total_moves > 0) {
    r[1] = 1.0 - static_cast<double>(w.unique_entered) / w.total_moves;
  }

  // R3: backtrack ratio plus oscillation penalty. A window move is a
  // backtrack when it returns to the cell occupied two steps earlier.
  double backtrack_ratio = 0.0;
  const std::size_t tail = w.path_tail.size();
  const std::size_t window_moves =
      std::min<std::size_t>(tail > 0 ? tail - 1 : 0, kRecentWindow);
  if (window_moves > 0) {
    int backs = 0;
    for (std::size_t i = tail - window_moves; i < tail; ++i) {
      if (i >= 2 && w.path_tail[i] == w.path_tail[i - 2]) ++backs;
    }
    backtrack_ratio = static_cast<double>(backs) / window_moves;
  }
  double oscillation = 0.0;
  {
    std::map<Cell, int> seen;
    for (const Cell c : w.recent) {
      if (++seen[c] >= 3) oscillation = 1.0;
    }
  }
  r[2] = clamp(backtrack_ratio + 1.5 * oscillation, 0.0, 2.0);

  // R4: dead-end revisit rate.
  if (w.total_moves > 0) {
    r[3] = static_cast<double>(w.dead_end_revisits) / w.total_moves;
  }

  // R5: recent-position redundancy.
  if (!w.recent.empty()) {
    const std::set<Cell> unique(w.recent.begin(), w.recent.end());
    r[4] = 1.0 - static_cast<double>(unique.size()) / w.recent.size();
  }
  return r;
}

double accuracy_cost(const std::array<double, 5>& components) {
  double c = 0.0;
  for (const double r : components) c += 0.20 * r;
  return std::min(c, kSignalCap);
}

double free_energy(double u_capped, double c_capped) {
  return u_capped - c_capped;
}

Category categorize(double u, double c, const Thresholds& th) {
  const bool high_drive = u > th.theta1;
  const bool high_cost = c > th.theta2;
  if (high_drive) {
    return high_cost ? Category::HighDriveHighCost
                     : Category::HighDriveLowCost;
  }
  return high_cost ? Category::LowDriveHighCost : Category::LowDriveLowCost;
}

WeightVector modulate_weights(const WeightVector& base,
                              const FreeEnergyRecord& record) {
  WeightVector w = base;
  const double g = 0.1 * (record.gradient < 0.0  ? 1.0
                          : record.gradient > 0.0 ? -1.0
                                                  : 0.0);
  switch (record.category) {
    case Category::HighDriveLowCost:
      break;  // effective behavior: no correction
    case Category::HighDriveHighCost:
      w.exploit += 0.3 + g;
      break;
    case Category::LowDriveLowCost:
      w.explore += 0.3 + g;
      break;
    case Category::LowDriveHighCost:
      w.backtrack += 0.3 + g;
      w.coordinate += 0.2;
      break;
  }
  return clamp_weights(w);
}

std::map<Direction, MovementFeatures> movement_features(
    const AgentState& state, const Observation& obs,
    const CoordinationContext& ctx) {
  const std::set<Cell> teammate_recent(ctx.teammate_recent.begin(),
                                       ctx.teammate_recent.end());
  const std::set<Cell> teammate_dead(ctx.teammate_dead_ends.begin(),
                                     ctx.teammate_dead_ends.end());
  const std::set<Cell> focus(ctx.exploration_focus.begin(),
                             ctx.exploration_focus.end());

  std::optional<Direction> heading;
  if (state.previous_position) {
    heading = direction_between(*state.previous_position, state.position);
  }

  std::map<Direction, MovementFeatures> out;
  for (const Direction d : obs.available_moves) {
    const Cell target = step(state.position, d);
    MovementFeatures f;

    f.explore = state.visited.count(target) ? -0.5 : 1.0;

    if (heading) {
      if (d == *heading) {
        f.exploit = 1.0;
      } else if (d == reverse(*heading)) {
        f.exploit = -1.0;
      }
    }

    if (teammate_recent.count(target) || teammate_dead.count(target)) {
      f.coordinate = -1.0;
    } else if (focus.count(target)) {
      f.coordinate = 0.5;
    }

    if (state.marked_dead_ends.count(target)) f.backtrack = -1.0;

    out[d] = f;
  }
  return out;
}

std::map<Direction, double> movement_scores(const AgentState& state,
                                            const Observation& obs,
                                            const CoordinationContext& ctx) {
  std::map<Direction, double> scores;
  for (const auto& [d, f] : movement_features(state, obs, ctx)) {
    scores[d] = state.weights.explore * f.explore +
                state.weights.exploit * f.exploit +
                state.weights.coordinate * f.coordinate +
                state.weights.backtrack * f.backtrack;
  }
  return scores;
}

}  // namespace aimaze
