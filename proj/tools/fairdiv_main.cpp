// Copyright 2026 The fairdiv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "fairdiv/auditor.hpp"
#include "fairdiv/json_io.hpp"
#include "fairdiv/protocols.hpp"
#include "fairdiv/solver.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;
using namespace fairdiv;

constexpr const char* kVersion = "0.1.0";
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Thrown for failures that should exit with code 1 (validation findings,
// failed audits, infeasible searches) as opposed to usage/IO problems.
struct DomainFailure {
  std::string message;
};

struct UsageFailure {
  std::string message;
};

std::string must_read(const std::string& path) {
  if (!std::filesystem::exists(path))
    throw UsageFailure{"no such file: " + path};
  return read_file(path);
}

json input_stamp(const std::string& path, const std::string& content) {
  std::ostringstream hex;
  hex << "0x" << std::hex << content_hash(content);
  return json{{"path", path}, {"fnv64", hex.str()}};
}

int solver_threads() {
  const char* env = std::getenv("FAIRDIV_THREADS");
  if (env == nullptr) return 1;
  const int threads = std::atoi(env);
  return threads > 1 ? threads : 1;
}

json rational_list(const std::vector<Rational>& values) {
  json out = json::array();
  for (const Rational& value : values) out.push_back(rational_string(value));
  return out;
}

json outcome_to_json(const Outcome& outcome) {
  json utilities = json::object();
  json allocation = json::object();
  for (std::size_t i = 0; i < outcome.utilities.size(); ++i) {
    const std::string agent = std::to_string(i + 1);
    utilities[agent] = rational_string(outcome.utilities[i]);
    json intervals = json::array();
    for (const Interval& iv : outcome.allocation[i].intervals)
      intervals.push_back({rational_string(iv.lo), rational_string(iv.hi)});
    allocation[agent] = intervals;
  }
  return json{{"utilities", utilities}, {"allocation", allocation}};
}

json fairness_to_json(const FairnessReport& report) {
  json envy = json::array();
  for (const auto& row : report.envy) envy.push_back(rational_list(row));
  return json{{"eps", rational_string(report.eps_used)},
              {"proportional_margin", rational_list(report.proportional_margin)},
              {"envy_matrix", envy},
              {"proportional", report.proportional},
              {"eps_proportional", report.eps_proportional},
              {"envy_free", report.envy_free},
              {"eps_envy_free", report.eps_envy_free}};
}

json action_to_json(const Action& action) {
  if (action.kind == Action::Kind::kCutAt)
    return json{{"cut_at", rational_string(action.coordinate)}};
  return json{{"index", action.index}};
}

Action action_from_json(const json& value) {
  if (value.contains("cut_at"))
    return Action::cut_at(parse_rational(value["cut_at"].get<std::string>()));
  return Action::choose(value.at("index").get<int>());
}

json regret_to_json(const RegretReport& report) {
  json per_agent = json::array();
  for (const RegretEntry& entry : report.per_agent) {
    json row{{"max_gain", rational_string(entry.max_gain)}};
    if (entry.witness)
      row["witness"] = {{"node", entry.witness->node_key},
                        {"action", entry.witness->action}};
    per_agent.push_back(std::move(row));
  }
  return json{{"per_agent", per_agent},
              {"audited_roots", report.audited_roots},
              {"nodes_expanded", report.nodes_expanded},
              {"deviation_grid_size", report.deviation_grid_size},
              {"depth", report.depth}};
}

void emit(const json& report, const std::string& out_path) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty())
    std::cout << text;
  else
    write_file(out_path, text);
}

// Strategies read back from an exported table: every decision is looked up
// by its canonical node key.
std::vector<Strategy> table_strategies(
    std::shared_ptr<const ProtocolProgram> program,
    std::shared_ptr<const ProgramLayout> layout, const json& table) {
  auto actions = std::make_shared<std::map<std::string, Action>>();
  for (const auto& [key, value] : table.items())
    actions->emplace(key, action_from_json(value));
  std::vector<Strategy> out;
  for (int agent = 1; agent <= program->n_agents; ++agent) {
    out.push_back([program, layout, actions](const DecisionNode& node) {
      const std::string key = canonical_node_key(*layout, *node.state);
      auto it = actions->find(key);
      if (it == actions->end())
        throw Error("strategy table has no entry for node " + key);
      return it->second;
    });
  }
  return out;
}

// Programs written by `generate` carry their origin in the first line so
// that --honest can rebuild the bundled honest strategies.
std::optional<GeneratedProtocol> protocol_from_header(
    const std::string& text) {
  const std::string prefix = "// protocol: ";
  if (text.rfind(prefix, 0) != 0) return std::nullopt;
  std::istringstream line(text.substr(prefix.size(), text.find('\n')));
  std::string name, n_field, eps_field;
  line >> name >> n_field;
  int n = 2;
  if (n_field.rfind("n=", 0) == 0) n = std::stoi(n_field.substr(2));
  std::optional<Rational> eps;
  if (line >> eps_field && eps_field.rfind("eps=", 0) == 0)
    eps = parse_rational(eps_field.substr(4));
  return generate_protocol(name, n, eps);
}

std::string header_comment(const GeneratedProtocol& proto) {
  std::string line = "// protocol: " + proto.name + " n=" +
                     std::to_string(proto.n);
  if (proto.eps) line += " eps=" + rational_string(*proto.eps);
  return line + "\n";
}

json program_metadata(const ProtocolProgram& program) {
  const OperationCounts counts = count_operations(program);
  return json{{"agents", program.n_agents},
              {"max_ops", counts.max_ops},
              {"max_cuts", counts.max_cuts},
              {"oblivious", is_oblivious(program)}};
}

long long elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - start)
      .count();
}

int cmd_validate(const std::string& path) {
  const std::string text = must_read(path);
  ProtocolProgram program;
  try {
    program = parse_program(text);
  } catch (const ParseError& e) {
    std::cerr << path << ":" << e.what() << "\n";
    return kExitDomain;
  }
  const std::vector<Violation> violations = validate(program);
  for (const Violation& violation : violations) {
    std::cerr << path << ":" << violation.pos.line << ":"
              << violation.pos.column << ": " << violation.code << ": "
              << violation.message << "\n";
  }
  return violations.empty() ? 0 : kExitDomain;
}

int cmd_generate(const std::string& name, int n, const std::string& eps_text,
                 const std::string& out, const std::string& profile_path,
                 const std::string& honest_out) {
  std::optional<Rational> eps;
  if (!eps_text.empty()) eps = parse_rational(eps_text);
  const GeneratedProtocol proto = generate_protocol(name, n, eps);
  const std::string text = header_comment(proto) + pretty_print(*proto.program);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);

  if (!honest_out.empty()) {
    if (profile_path.empty())
      throw UsageFailure{"--emit-honest needs --profile to place the marks"};
    const ValuationProfile profile = load_profile(profile_path);
    const std::vector<Strategy> honest = proto.honest(profile);
    const ProgramLayout layout(*proto.program);
    json table = json::object();
    ExecutionState state = initial_state(*proto.program);
    while (!state.terminated) {
      const DecisionNode node = *decision_node(*proto.program, state);
      const Action action =
          honest[static_cast<std::size_t>(node.agent - 1)](node);
      table[canonical_node_key(layout, state)] = action_to_json(action);
      state = step(*proto.program, state, action, &node);
    }
    write_file(honest_out, table.dump(2) + "\n");
  }
  return 0;
}

int cmd_random_profile(int n, std::uint64_t seed, const std::string& out) {
  const ValuationProfile profile = random_rational_profile(n, seed);
  const std::string text = profile_to_json(profile);
  if (out.empty())
    std::cout << text;
  else
    write_file(out, text);
  return 0;
}

int cmd_run(const std::string& program_path, const std::string& profile_path,
            bool honest, const std::string& strategies_path,
            const std::string& eps_text, const std::string& out,
            const std::string& trace_out) {
  const auto start = std::chrono::steady_clock::now();
  const std::string program_text = must_read(program_path);
  const std::string profile_text = must_read(profile_path);
  auto program = std::make_shared<const ProtocolProgram>(
      parse_program(program_text));
  {
    const std::vector<Violation> violations = validate(*program);
    if (!violations.empty())
      throw DomainFailure{"program fails validation: " +
                          violations.front().code};
  }
  const ValuationProfile profile = profile_from_json(profile_text);
  if (profile.size() != program->n_agents)
    throw DomainFailure{"profile has " + std::to_string(profile.size()) +
                        " agents, program needs " +
                        std::to_string(program->n_agents)};

  std::vector<Strategy> strategies;
  json strategy_stamp;
  if (honest) {
    std::optional<GeneratedProtocol> proto = protocol_from_header(program_text);
    if (!proto)
      throw UsageFailure{
          "--honest needs a program written by `generate` (missing protocol "
          "header)"};
    if (!equivalent(*proto->program, *program))
      throw DomainFailure{
          "program text does not match its protocol header; honest "
          "strategies unavailable"};
    strategies = proto->honest(profile);
    strategy_stamp = "honest";
  } else {
    const std::string table_text = must_read(strategies_path);
    auto layout = std::make_shared<const ProgramLayout>(*program);
    strategies =
        table_strategies(program, layout, json::parse(table_text));
    strategy_stamp = input_stamp(strategies_path, table_text);
  }

  const RunResult result = run(*program, profile, strategies);
  const Rational eps =
      eps_text.empty() ? Rational(0) : parse_rational(eps_text);
  const FairnessReport fairness =
      check_fairness(result.outcome.allocation, profile, eps);

  if (!trace_out.empty())
    write_file(trace_out, trace_to_json(*program, result.final_state.trace));

  json report{{"command", "run"},
              {"version", kVersion},
              {"inputs",
               {{"program", input_stamp(program_path, program_text)},
                {"profile", input_stamp(profile_path, profile_text)},
                {"strategies", strategy_stamp}}},
              {"program", program_metadata(*program)},
              {"outcome", outcome_to_json(result.outcome)},
              {"fairness", fairness_to_json(fairness)},
              {"trace", json::parse(trace_to_json(*program,
                                                  result.final_state.trace))},
              {"wall_time_ms", elapsed_ms(start)}};
  emit(report, out);
  return 0;
}

int cmd_solve(const std::string& program_path, const std::string& profile_path,
              const std::string& eps_text, std::uint64_t budget, bool audit,
              int depth, const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::string program_text = must_read(program_path);
  const std::string profile_text = must_read(profile_path);
  const ProtocolProgram program = parse_program(program_text);
  const ValuationProfile profile = profile_from_json(profile_text);
  const Rational eps = parse_rational(eps_text);

  const OperationCounts counts = count_operations(program);
  const GridFamily grids = build_grids(
      profile, eps, std::max(counts.max_ops, 1), counts.max_cuts);

  SolveOptions options;
  options.budget = budget;
  options.threads = solver_threads();
  SolveResult solved;
  try {
    solved = backward_induction(program, profile, grids, options);
  } catch (const BudgetExceeded& e) {
    throw DomainFailure{std::string(e.what()) +
                        "; raise --budget or use a larger eps"};
  }

  json table = json::object();
  for (const auto& [key, action] : solved.profile->cut_action_table())
    table[key] = action_to_json(action);

  const RunResult equilibrium_path =
      run(program, profile, lifted_strategies(solved.profile));
  const FairnessReport fairness =
      check_fairness(equilibrium_path.outcome.allocation, profile, eps);

  json grid_sizes = json::array();
  for (std::size_t size : solved.certificate.grid_sizes)
    grid_sizes.push_back(size);

  json report{
      {"command", "solve"},
      {"version", kVersion},
      {"inputs",
       {{"program", input_stamp(program_path, program_text)},
        {"profile", input_stamp(profile_path, profile_text)}}},
      {"program", program_metadata(program)},
      {"certificate",
       {{"utilities", rational_list(solved.certificate.utilities)},
        {"eps", rational_string(solved.certificate.eps)},
        {"per_agent_regret_bound",
         rational_list(solved.certificate.per_agent_regret_bound)},
        {"grid_sizes", grid_sizes},
        {"node_count", solved.certificate.node_count},
        {"tiebreak_id", solved.certificate.tiebreak_id}}},
      {"strategy_table", table},
      {"equilibrium_path",
       {{"outcome", outcome_to_json(equilibrium_path.outcome)},
        {"fairness", fairness_to_json(fairness)}}},
      {"wall_time_ms", 0}};

  bool pass = true;
  if (audit) {
    const RegretReport regret =
        audit_equilibrium(program, profile, solved.profile, depth);
    report["audit"] = regret_to_json(regret);
    for (const RegretEntry& entry : regret.per_agent)
      if (entry.max_gain > eps) pass = false;
    report["audit"]["pass"] = pass;
  }
  report["wall_time_ms"] = elapsed_ms(start);
  emit(report, out);
  if (!pass) throw DomainFailure{"audited regret exceeds eps"};
  return 0;
}

int cmd_audit(const std::string& program_path, const std::string& profile_path,
              const std::string& replay_path, const std::string& eps_text,
              int depth, int refine_levels, const std::string& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::string program_text = must_read(program_path);
  const std::string profile_text = must_read(profile_path);
  const ProtocolProgram program = parse_program(program_text);
  const ValuationProfile profile = profile_from_json(profile_text);
  const Rational eps =
      eps_text.empty() ? Rational(0) : parse_rational(eps_text);

  json report{{"command", "audit"},
              {"version", kVersion},
              {"inputs",
               {{"program", input_stamp(program_path, program_text)},
                {"profile", input_stamp(profile_path, profile_text)}}}};

  if (!replay_path.empty()) {
    const std::string trace_text = must_read(replay_path);
    const std::vector<TraceEvent> trace =
        trace_from_json(program, trace_text);
    const ExecutionState state = replay(program, trace);
    if (!state.terminated)
      throw DomainFailure{"trace replay stops before termination"};
    const Outcome outcome = outcome_of(program, profile, state);
    report["mode"] = "replay";
    report["inputs"]["trace"] = input_stamp(replay_path, trace_text);
    report["outcome"] = outcome_to_json(outcome);
    report["fairness"] =
        fairness_to_json(check_fairness(outcome.allocation, profile, eps));
    report["wall_time_ms"] = elapsed_ms(start);
    emit(report, out);
    return 0;
  }

  if (eps_text.empty())
    throw UsageFailure{"equilibrium audit needs --eps (or use --replay)"};
  const OperationCounts counts = count_operations(program);
  const GridFamily grids = build_grids(
      profile, eps, std::max(counts.max_ops, 1), counts.max_cuts);
  SolveOptions options;
  options.threads = solver_threads();
  const SolveResult solved =
      backward_induction(program, profile, grids, options);
  const RegretReport regret = audit_equilibrium(
      program, profile, solved.profile, depth, refine_levels);
  bool pass = true;
  for (const RegretEntry& entry : regret.per_agent)
    if (entry.max_gain > eps) pass = false;
  report["mode"] = "equilibrium";
  report["eps"] = rational_string(eps);
  report["regret"] = regret_to_json(regret);
  report["pass"] = pass;
  report["wall_time_ms"] = elapsed_ms(start);
  emit(report, out);
  if (!pass) throw DomainFailure{"audited regret exceeds eps"};
  return 0;
}

int cmd_oracle(const std::string& profile_path, long resolution,
               const std::string& bound_text, const std::string& out) {
  const std::string profile_text = must_read(profile_path);
  const ValuationProfile profile = profile_from_json(profile_text);
  std::optional<Rational> bound;
  if (!bound_text.empty()) bound = parse_rational(bound_text);
  EfSearchResult result;
  try {
    result = find_envy_free_contiguous(profile, resolution, bound);
  } catch (const InfeasibleResolution& e) {
    throw DomainFailure{e.what()};
  }
  json allocation = json::object();
  for (std::size_t i = 0; i < result.allocation.size(); ++i)
    allocation[std::to_string(i + 1)] = {
        rational_string(result.allocation[i].lo),
        rational_string(result.allocation[i].hi)};
  json report{{"command", "oracle"},
              {"version", kVersion},
              {"inputs", {{"profile", input_stamp(profile_path, profile_text)}}},
              {"resolution", resolution},
              {"allocation", allocation},
              {"max_envy", rational_string(result.max_envy)},
              {"envy_free", result.envy_free}};
  emit(report, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fair cake-cutting protocols: validate, generate, run, solve, audit"};
  app.require_subcommand(1);

  // validate
  std::string v_path;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "check a protocol file");
  validate_cmd->add_option("file", v_path, "protocol file")->required();

  // generate
  std::string g_name, g_eps, g_out, g_profile, g_honest;
  int g_n = 2;
  bool g_random = false;
  std::uint64_t g_seed = 0;
  CLI::App* generate_cmd = app.add_subcommand(
      "generate", "emit a protocol program or a random profile");
  generate_cmd->add_option("--protocol", g_name,
                           "cc|ds|ep|sc|thieves|orr");
  generate_cmd->add_flag("--random-profile", g_random,
                         "emit a random valuation profile instead");
  generate_cmd->add_option("--n", g_n, "number of agents");
  generate_cmd->add_option("--eps", g_eps, "epsilon p/q (orr)");
  generate_cmd->add_option("--seed", g_seed,
                           "seed for --random-profile only");
  generate_cmd->add_option("-o,--out", g_out, "output file");
  generate_cmd->add_option("--profile", g_profile,
                           "valuation profile (for --emit-honest)");
  generate_cmd->add_option("--emit-honest", g_honest,
                           "write the honest strategy table here");

  // run
  std::string r_program, r_profile, r_strategies, r_eps, r_out, r_trace;
  bool r_honest = false;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a protocol");
  run_cmd->add_option("file", r_program, "protocol file")->required();
  run_cmd->add_option("--profile", r_profile, "valuation profile")->required();
  run_cmd->add_flag("--honest", r_honest, "use the bundled honest strategies");
  run_cmd->add_option("--strategies", r_strategies, "strategy table JSON");
  run_cmd->add_option("--eps", r_eps, "epsilon for the fairness report");
  run_cmd->add_option("-o,--out", r_out, "report file (default stdout)");
  run_cmd->add_option("--trace", r_trace, "also write the trace here");

  // solve
  std::string s_program, s_profile, s_eps, s_out;
  std::uint64_t s_budget = std::uint64_t{1} << 42;
  bool s_audit = false;
  int s_depth = 2;
  CLI::App* solve_cmd =
      app.add_subcommand("solve", "compute an eps-SPNE by backward induction");
  solve_cmd->add_option("file", s_program, "protocol file")->required();
  solve_cmd->add_option("--profile", s_profile, "valuation profile")->required();
  solve_cmd->add_option("--eps", s_eps, "epsilon p/q")->required();
  solve_cmd->add_option("--budget", s_budget, "node estimate budget");
  solve_cmd->add_flag("--audit", s_audit, "audit regret after solving");
  solve_cmd->add_option("--depth", s_depth, "subtree audit depth");
  solve_cmd->add_option("-o,--out", s_out, "certificate file");

  // audit
  std::string a_program, a_profile, a_replay, a_eps, a_out;
  int a_depth = 2;
  int a_refine = 1;
  CLI::App* audit_cmd = app.add_subcommand(
      "audit", "replay a trace or audit equilibrium regret");
  audit_cmd->add_option("file", a_program, "protocol file")->required();
  audit_cmd->add_option("--profile", a_profile, "valuation profile")->required();
  audit_cmd->add_option("--replay", a_replay, "trace JSON to replay");
  audit_cmd->add_option("--eps", a_eps, "epsilon p/q");
  audit_cmd->add_option("--depth", a_depth, "subtree audit depth");
  audit_cmd->add_option("--refine", a_refine,
                        "extra deviation-grid refinements");
  audit_cmd->add_option("-o,--out", a_out, "report file");

  // oracle
  std::string o_profile, o_bound, o_out;
  long o_resolution = 12;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "search oracles");
  CLI::App* ef_cmd = oracle_cmd->add_subcommand(
      "ef-search", "brute-force contiguous envy-free search");
  ef_cmd->add_option("--profile", o_profile, "valuation profile")->required();
  ef_cmd->add_option("--resolution", o_resolution, "uniform cut grid size");
  ef_cmd->add_option("--bound", o_bound, "required max-envy bound p/q");
  ef_cmd->add_option("-o,--out", o_out, "report file");
  oracle_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*validate_cmd) return cmd_validate(v_path);
    if (*generate_cmd) {
      if (g_random) return cmd_random_profile(g_n, g_seed, g_out);
      if (g_name.empty())
        throw UsageFailure{"generate needs --protocol or --random-profile"};
      return cmd_generate(g_name, g_n, g_eps, g_out, g_profile, g_honest);
    }
    if (*run_cmd) {
      if (r_honest ? !r_strategies.empty() : r_strategies.empty())
        throw UsageFailure{"run needs exactly one of --honest/--strategies"};
      return cmd_run(r_program, r_profile, r_honest, r_strategies, r_eps,
                     r_out, r_trace);
    }
    if (*solve_cmd)
      return cmd_solve(s_program, s_profile, s_eps, s_budget, s_audit, s_depth,
                       s_out);
    if (*audit_cmd)
      return cmd_audit(a_program, a_profile, a_replay, a_eps, a_depth,
                       a_refine, a_out);
    if (*oracle_cmd)
      return cmd_oracle(o_profile, o_resolution, o_bound, o_out);
    throw UsageFailure{"no subcommand"};
  } catch (const UsageFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitUsage;
  } catch (const DomainFailure& e) {
    std::cerr << "error: " << e.message << "\n";
    return kExitDomain;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  }
}
