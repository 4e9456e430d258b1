#include "aimaze/llm_adapter.hpp"

#include <cstdlib>
#include <sstream>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "aimaze/prompts.hpp"
#include "aimaze/text.hpp"

namespace aimaze {
namespace {

using nlohmann::json;

std::string cells_text(const std::vector<Cell>& cells) {
  if (cells.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ", ";
    out += "(" + std::to_string(cells[i].row) + "," +
           std::to_string(cells[i].col) + ")";
  }
  return out;
}

std::string directions_text(const std::vector<Direction>& dirs) {
  if (dirs.empty()) return "none";
  std::string out;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (i) out += ", ";
    out += to_string(dirs[i]);
  }
  return out;
}

json tool_entry(const char* name, const char* description) {
  return {
      {"type", "function"},
      {"function",
       {{"name", name},
        {"description", description},
        {"parameters",
         {{"type", "object"},
          {"properties", json::object()},
          {"required", json::array()}}}}},
  };
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> tokens;
  std::istringstream in(text);
  std::string token;
  while (in >> token) tokens.push_back(token);
  return tokens;
}

}  // namespace

HttpChatTransport::HttpChatTransport(LlmConfig config)
    : config_(std::move(config)) {}

TransportResult HttpChatTransport::complete(const std::string& request_body) {
  const char* key = std::getenv(config_.api_key_env.c_str());
  if (!key || !*key) {
    return {false, "", "missing credential: set " + config_.api_key_env};
  }

  httplib::Client client(config_.base_url);
  client.set_connection_timeout(config_.timeout_ms / 1000,
                                (config_.timeout_ms % 1000) * 1000);
  client.set_read_timeout(config_.timeout_ms / 1000,
                          (config_.timeout_ms % 1000) * 1000);
  httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    auto res = client.Post(config_.path, headers, request_body,
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "http status " + std::to_string(res->status);
      continue;
    }
    return {true, res->body, ""};
  }
  return {false, "", last_error};
}

std::string render_execution_system_prompt(const PolicyContext& ctx) {
  std::string out = prompts::kExecutionSystem;
  out = replace_all(out, "{agent_id}", std::to_string(ctx.agent_id));
  out = replace_all(out, "{exploration_weight}",
                    format_double(ctx.weights.explore));
  out = replace_all(out, "{efficiency_weight}",
                    format_double(ctx.weights.exploit));
  out = replace_all(out, "{dead_end_confidence}",
                    format_double(ctx.weights.dead_end_confidence));
  return out;
}

std::string render_execution_context_message(const PolicyContext& ctx) {
  std::string out = prompts::kExecutionContext;
  out = replace_all(out, "{step_index}", std::to_string(ctx.iteration));
  out = replace_all(out, "{current_step}", "select a direction and move");
  out = replace_all(out, "{current_position}",
                    "(" + std::to_string(ctx.observation.position.row) + "," +
                        std::to_string(ctx.observation.position.col) + ")");
  out = replace_all(out, "{possible_moves}",
                    directions_text(ctx.observation.available_moves));
  out = replace_all(out, "{agent_unexplored_directions}",
                    directions_text(ctx.observation.unexplored_directions));

  std::string modifiers = "No extra modifiers.";
  if (!ctx.dynamic_modifiers.empty()) {
    modifiers.clear();
    for (std::size_t i = 0; i < ctx.dynamic_modifiers.size(); ++i) {
      if (i) modifiers += "; ";
      modifiers += ctx.dynamic_modifiers[i];
    }
  }
  out = replace_all(out, "{dynamic_modifiers}", modifiers);

  std::string scores = "none";
  if (!ctx.scores.empty()) {
    scores.clear();
    for (const auto& [d, s] : ctx.scores) {
      if (!scores.empty()) scores += ", ";
      scores += to_string(d) + "=" + format_double(s);
    }
  }
  out = replace_all(out, "{score_details}", scores);
  out = replace_all(out, "{backtrack_threshold}",
                    format_double(ctx.weights.backtrack_threshold));
  out = replace_all(out, "{dead_end_confidence_threshold}",
                    format_double(ctx.weights.dead_end_confidence));
  out = replace_all(out, "{dead_end_confidence}",
                    format_double(ctx.dead_end_confidence));
  out = replace_all(
      out, "{is_backtracking}",
      ctx.backtrack_mode == BacktrackState::Mode::Inactive ? "NO" : "YES");
  out = replace_all(
      out, "{lock_mode}",
      ctx.backtrack_mode == BacktrackState::Mode::Lock ? "YES" : "NO");
  out = replace_all(out, "{visited_count}",
                    std::to_string(ctx.recent_positions.size()));
  out = replace_all(out, "{marked_dead_end_count}",
                    std::to_string(ctx.marked_dead_end_count));
  out = replace_all(out, "{recent_positions}",
                    cells_text(ctx.recent_positions));
  out = replace_all(out, "{previous_position}",
                    ctx.previous_position
                        ? "(" + std::to_string(ctx.previous_position->row) +
                              "," + std::to_string(ctx.previous_position->col) +
                              ")"
                        : "none");
  out = replace_all(out, "{teammate_recent}",
                    cells_text(ctx.coordination.teammate_recent));
  std::vector<Cell> waypoints = ctx.coordination.teammate_junctions;
  waypoints.insert(waypoints.end(), ctx.coordination.teammate_dead_ends.begin(),
                   ctx.coordination.teammate_dead_ends.end());
  out = replace_all(out, "{teammate_waypoints}", cells_text(waypoints));

  std::string guidance = "none";
  if (ctx.override_direction) {
    guidance = "override penalty, go " + to_string(*ctx.override_direction);
  } else if (ctx.relax_factor) {
    guidance = "weights temporarily relaxed by factor " +
               format_double(*ctx.relax_factor);
  } else if (!ctx.coordination.exploration_focus.empty()) {
    guidance = "focus exploration on " +
               cells_text(ctx.coordination.exploration_focus);
  }
  out = replace_all(out, "{agent_guidance}", guidance);
  out = replace_all(out, "{exploration_weight}",
                    format_double(ctx.weights.explore));
  out = replace_all(out, "{efficiency_weight}",
                    format_double(ctx.weights.exploit));
  return out;
}

std::string render_orchestrator_system_prompt() {
  return prompts::kOrchestratorSystem;
}

std::string render_orchestrator_context_message(
    const OrchestratorState& orch) {
  json data;
  data["iteration"] = orch.iteration;
  json agents = json::object();
  for (const auto& [id, snap] : orch.agents) {
    json a;
    a["position"] = {snap.position.row, snap.position.col};
    a["visited"] = snap.visited.size();
    a["marked_dead_ends"] = json::array();
    for (const Cell c : snap.marked_dead_ends) {
      a["marked_dead_ends"].push_back({c.row, c.col});
    }
    json scores = json::object();
    for (const auto& [d, s] : snap.last_scores) scores[to_string(d)] = s;
    a["scores"] = scores;
    agents[std::to_string(id)] = a;
  }
  data["agents"] = agents;

  std::string out = prompts::kOrchestratorContext;
  out = replace_all(out, "{orchestration_data}", data.dump());
  out = replace_all(out, "{movement_conflicts}", "see per-agent scores");
  out = replace_all(out, "{exploration_coordination}",
                    "assign nearest frontier cells");
  out = replace_all(out, "{dead_end_analysis}",
                    "markings listed per agent above");
  out = replace_all(out, "{agent_summaries}", agents.dump());
  out = replace_all(out, "{discovered_cells_count}",
                    std::to_string(orch.discovered.size()));
  out = replace_all(out, "{num_agents_with_context}",
                    std::to_string(orch.agents.size()));
  return out;
}

std::string render_orchestrator_request(const OrchestratorState& orch,
                                        const LlmConfig& config) {
  json request;
  request["model"] = config.model;
  request["messages"] = json::array({
      {{"role", "system"}, {"content", render_orchestrator_system_prompt()}},
      {{"role", "user"},
       {"content", render_orchestrator_context_message(orch)}},
  });
  return request.dump();
}

std::string tool_definitions_json() {
  json tools = json::array();
  tools.push_back(tool_entry("move_north", "Step one cell north (row - 1)."));
  tools.push_back(tool_entry("move_south", "Step one cell south (row + 1)."));
  tools.push_back(tool_entry("move_east", "Step one cell east (col + 1)."));
  tools.push_back(tool_entry("move_west", "Step one cell west (col - 1)."));
  tools.push_back(
      tool_entry("get_current_view", "Observe the 3x3 surroundings."));
  tools.push_back(tool_entry(
      "mark_dead_end", "Mark the current cell as a dead end (optional)."));
  tools.push_back(tool_entry(
      "start_backtracking",
      "Walk back to the nearest unexplored opening through visited cells."));
  tools.push_back(
      tool_entry("finish", "Declare the exit reached."));
  return tools.dump();
}

LlmPolicy::LlmPolicy(std::shared_ptr<LlmTransport> transport, LlmConfig config)
    : transport_(std::move(transport)), config_(std::move(config)) {}

std::string LlmPolicy::render_request(const PolicyContext& ctx) const {
  json request;
  request["model"] = config_.model;
  request["messages"] = json::array({
      {{"role", "system"}, {"content", render_execution_system_prompt(ctx)}},
      {{"role", "user"}, {"content", render_execution_context_message(ctx)}},
  });
  request["tools"] = json::parse(tool_definitions_json());
  request["tool_choice"] = "required";
  return request.dump();
}

PolicyDecision LlmPolicy::parse_response(const std::string& body,
                                         int agent_id) {
  PolicyDecision decision;
  decision.primary.issued_by = agent_id;

  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception&) {
    decision.failed = true;
    decision.failure_reason = "malformed json";
    return decision;
  }

  const json* message = nullptr;
  if (parsed.contains("choices") && parsed["choices"].is_array() &&
      !parsed["choices"].empty() &&
      parsed["choices"][0].contains("message")) {
    message = &parsed["choices"][0]["message"];
  }
  if (!message) {
    decision.failed = true;
    decision.failure_reason = "no message in response";
    return decision;
  }

  // Token stream for the entropy signal: message content plus the
  // serialized tool calls, whitespace-tokenized.
  std::string token_source;
  if (message->contains("content") && (*message)["content"].is_string()) {
    token_source = (*message)["content"].get<std::string>();
  }
  if (message->contains("tool_calls")) {
    token_source += " " + (*message)["tool_calls"].dump();
  }
  decision.signal = DecisionSignal::from_tokens(
      whitespace_tokens(token_source));

  if (!message->contains("tool_calls") ||
      !(*message)["tool_calls"].is_array() ||
      (*message)["tool_calls"].empty()) {
    decision.failed = true;
    decision.failure_reason = "no tool call";
    return decision;
  }

  bool primary_set = false;
  for (const json& call : (*message)["tool_calls"]) {
    if (!call.contains("function") || !call["function"].contains("name")) {
      decision.failed = true;
      decision.failure_reason = "malformed tool call";
      return decision;
    }
    const std::string name = call["function"]["name"].get<std::string>();
    const auto kind = tool_from_name(name);
    if (!kind) {
      decision.failed = true;
      decision.failure_reason = "unknown tool: " + name;
      return decision;
    }
    if (*kind == ToolKind::MarkDeadEnd && primary_set) {
      decision.mark_dead_end = true;  // the permitted optional second call
      continue;
    }
    if (!primary_set) {
      decision.primary.kind = *kind;
      primary_set = true;
      continue;
    }
    decision.contract_violations += 1;  // extra primary: first one wins
  }
  if (!primary_set) {
    decision.failed = true;
    decision.failure_reason = "no primary tool call";
  }
  return decision;
}

PolicyDecision LlmPolicy::decide(const PolicyContext& ctx, Rng&) {
  const std::string request = render_request(ctx);
  audit_log_.push_back(request);
  const TransportResult result = transport_->complete(request);
  if (!result.ok) {
    audit_log_.push_back("error: " + result.error);
    PolicyDecision decision;
    decision.primary.issued_by = ctx.agent_id;
    decision.failed = true;
    decision.failure_reason = result.error;
    return decision;
  }
  audit_log_.push_back(result.body);
  PolicyDecision decision = parse_response(result.body, ctx.agent_id);
  violations_ += decision.contract_violations;
  return decision;
}

OrchestratorReply parse_orchestrator_reply(const std::string& body,
                                           const OrchestratorState& orch) {
  OrchestratorReply reply;
  json parsed;
  try {
    parsed = json::parse(body);
  } catch (const json::exception&) {
    reply.error = "malformed json";
    return reply;
  }
  if (!parsed.is_object()) {
    reply.error = "reply is not an object";
    return reply;
  }
  if (parsed.contains("analysis") && parsed["analysis"].is_string()) {
    reply.analysis = parsed["analysis"].get<std::string>();
  }

  const auto read_cells = [&](const json& arr, std::vector<Cell>& out) {
    if (!arr.is_array()) return;
    for (const json& pair : arr) {
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
          !pair[1].is_number_integer()) {
        continue;
      }
      const Cell c{pair[0].get<int>(), pair[1].get<int>()};
      if (orch.discovered.count(c)) out.push_back(c);  // guardrail
    }
  };
  if (parsed.contains("corrections") && parsed["corrections"].is_object()) {
    const json& corr = parsed["corrections"];
    if (corr.contains("remove_dead_ends")) {
      read_cells(corr["remove_dead_ends"], reply.corrections.remove_dead_ends);
    }
    if (corr.contains("add_exploration_focus")) {
      read_cells(corr["add_exploration_focus"],
                 reply.corrections.add_exploration_focus);
    }
  }
  if (parsed.contains("guidance_for_agents") &&
      parsed["guidance_for_agents"].is_object()) {
    for (const auto& [key, value] : parsed["guidance_for_agents"].items()) {
      const auto id = parse_int(key);
      if (!id || !orch.knows_agent(static_cast<int>(*id))) continue;
      if (value.is_string()) {
        reply.guidance_text[static_cast<int>(*id)] = value.get<std::string>();
      }
    }
  }
  reply.ok = true;
  return reply;
}

}  // namespace aimaze
