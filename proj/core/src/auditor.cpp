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

#include "fairdiv/auditor.hpp"

#include <algorithm>
#include <unordered_map>
#include <utility>

namespace fairdiv {

FairnessReport check_fairness(const std::vector<Piece>& allocation,
                              const ValuationProfile& profile,
                              const Rational& eps) {
  const int n = profile.size();
  if (static_cast<int>(allocation.size()) != n)
    throw Error("allocation size does not match the profile");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (pieces_overlap(allocation[static_cast<std::size_t>(i)],
                         allocation[static_cast<std::size_t>(j)]))
        throw Error("allocation pieces overlap");

  FairnessReport report;
  report.eps_used = eps;
  report.proportional = true;
  report.eps_proportional = true;
  report.envy_free = true;
  report.eps_envy_free = true;
  const Rational share = Rational(1) / n;
  for (int i = 0; i < n; ++i) {
    const PiecewiseDensity& density = profile.agents[static_cast<std::size_t>(i)];
    const Rational own = value_of_piece(density, allocation[static_cast<std::size_t>(i)]);
    report.proportional_margin.push_back(Rational(own - share));
    if (own < share) report.proportional = false;
    if (own < share - eps) report.eps_proportional = false;
    std::vector<Rational> row;
    for (int j = 0; j < n; ++j) {
      const Rational other =
          value_of_piece(density, allocation[static_cast<std::size_t>(j)]);
      row.push_back(Rational(other - own));
      if (i != j) {
        if (other > own) report.envy_free = false;
        if (other - own > eps) report.eps_envy_free = false;
      }
    }
    report.envy.push_back(std::move(row));
  }
  return report;
}

namespace {

Rational allocated_value(const ValuationProfile& profile, int agent,
                         const ExecutionState& state) {
  const PiecewiseDensity& density =
      profile.agents[static_cast<std::size_t>(agent - 1)];
  Rational total(0);
  for (const auto& [owner, interval] : state.allocation)
    if (owner == agent) total += eval(density, interval);
  return total;
}

std::string describe_action(const Action& action) {
  if (action.kind == Action::Kind::kCutAt)
    return "cut@" + rational_string(action.coordinate);
  return "choose#" + std::to_string(action.index);
}

}  // namespace

struct RegretAuditor::Impl {
  const ProtocolProgram& program;
  ValuationProfile profile;
  std::vector<Strategy> strategies;
  std::vector<Rational> deviation_cuts;  // sorted
  ProgramLayout layout;
  // Per deviating agent: canonical node key -> best achievable future value.
  std::vector<std::unordered_map<std::string, Rational>> memo;
  std::uint64_t expanded = 0;

  Impl(const ProtocolProgram& program_in, const ValuationProfile& profile_in,
       std::vector<Strategy> strategies_in, std::vector<Rational> cuts_in)
      : program(program_in),
        profile(profile_in),
        strategies(std::move(strategies_in)),
        deviation_cuts(std::move(cuts_in)),
        layout(program_in),
        memo(static_cast<std::size_t>(program_in.n_agents)) {
    std::sort(deviation_cuts.begin(), deviation_cuts.end());
    deviation_cuts.erase(
        std::unique(deviation_cuts.begin(), deviation_cuts.end()),
        deviation_cuts.end());
  }

  // Deviation actions at a cut node: grid points inside the feasible set,
  // the feasible endpoints, bound coordinates that fall inside, and the
  // profile's own prescription.
  std::vector<Rational> cut_actions(const DecisionNode& node) {
    std::vector<Rational> actions;
    for (const Interval& region : node.feasible) {
      auto begin = std::lower_bound(deviation_cuts.begin(),
                                    deviation_cuts.end(), region.lo);
      auto end = std::upper_bound(begin, deviation_cuts.end(), region.hi);
      actions.insert(actions.end(), begin, end);
      actions.push_back(region.lo);
      actions.push_back(region.hi);
      for (const auto& [label, coordinate] : node.state->bindings)
        if (region.lo <= coordinate && coordinate <= region.hi)
          actions.push_back(coordinate);
    }
    // The prescription itself, when it is still feasible here (the agent's
    // own earlier deviations can rule it out).
    const Action prescribed =
        strategies[static_cast<std::size_t>(node.agent - 1)](node);
    for (const Interval& region : node.feasible)
      if (region.lo <= prescribed.coordinate &&
          prescribed.coordinate <= region.hi) {
        actions.push_back(prescribed.coordinate);
        break;
      }
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    return actions;
  }

  // Maximum value the agent can still collect from `state` on, deviating
  // freely at its own nodes while everyone else follows the profile.
  Rational best_response(int agent, const ExecutionState& state) {
    if (state.terminated) return Rational(0);
    std::optional<DecisionNode> node = decision_node(program, state);
    if (node->agent != agent) {
      const Action action =
          strategies[static_cast<std::size_t>(node->agent - 1)](*node);
      return best_response(agent, step(program, state, action, &*node));
    }
    auto& table = memo[static_cast<std::size_t>(agent - 1)];
    const std::string key = canonical_node_key(layout, state);
    auto hit = table.find(key);
    if (hit != table.end()) return hit->second;
    ++expanded;

    const PiecewiseDensity& density =
        profile.agents[static_cast<std::size_t>(agent - 1)];
    std::optional<Rational> best;
    if (node->kind == DecisionNode::Kind::kCut) {
      for (const Rational& coordinate : cut_actions(*node)) {
        Rational value = best_response(
            agent,
            step(program, state, Action::cut_at(coordinate), &*node));
        if (!best || value > *best) best = std::move(value);
      }
    } else {
      for (int option = 1; option <= static_cast<int>(node->options.size());
           ++option) {
        Rational value =
            value_of_piece(density,
                           node->options[static_cast<std::size_t>(option - 1)]) +
            best_response(agent,
                          step(program, state, Action::choose(option), &*node));
        if (!best || value > *best) best = std::move(value);
      }
    }
    if (!best) throw Error("decision node with no actions");
    table.emplace(key, *best);
    return *best;
  }

  // Future value of following the profile itself.
  Rational prescribed_value(int agent, const ExecutionState& root) {
    ExecutionState state = root;
    while (!state.terminated) {
      std::optional<DecisionNode> node = decision_node(program, state);
      const Action action =
          strategies[static_cast<std::size_t>(node->agent - 1)](*node);
      state = step(program, state, action, &*node);
    }
    return Rational(allocated_value(profile, agent, state) -
                    allocated_value(profile, agent, root));
  }

  // First own node on the best-response path whose optimal action differs
  // from the prescription.
  std::optional<DeviationWitness> witness(int agent,
                                          const ExecutionState& root) {
    ExecutionState state = root;
    while (!state.terminated) {
      std::optional<DecisionNode> node = decision_node(program, state);
      const Action prescribed =
          strategies[static_cast<std::size_t>(node->agent - 1)](*node);
      if (node->agent != agent) {
        state = step(program, state, prescribed, &*node);
        continue;
      }
      const PiecewiseDensity& density =
          profile.agents[static_cast<std::size_t>(agent - 1)];
      std::optional<Rational> best;
      Action best_action = prescribed;
      if (node->kind == DecisionNode::Kind::kCut) {
        for (const Rational& coordinate : cut_actions(*node)) {
          Action action = Action::cut_at(coordinate);
          Rational value =
              best_response(agent, step(program, state, action, &*node));
          if (!best || value > *best) {
            best = std::move(value);
            best_action = action;
          }
        }
      } else {
        for (int option = 1;
             option <= static_cast<int>(node->options.size()); ++option) {
          Action action = Action::choose(option);
          Rational value =
              value_of_piece(
                  density, node->options[static_cast<std::size_t>(option - 1)]) +
              best_response(agent, step(program, state, action, &*node));
          if (!best || value > *best) {
            best = std::move(value);
            best_action = action;
          }
        }
      }
      if (!(best_action == prescribed))
        return DeviationWitness{canonical_node_key(layout, state),
                                describe_action(best_action)};
      state = step(program, state, best_action, &*node);
    }
    return std::nullopt;
  }
};

RegretAuditor::RegretAuditor(const ProtocolProgram& program,
                             const ValuationProfile& profile,
                             std::vector<Strategy> profile_strategies,
                             std::vector<Rational> deviation_cuts)
    : impl_(std::make_unique<Impl>(program, profile,
                                   std::move(profile_strategies),
                                   std::move(deviation_cuts))) {}

RegretAuditor::~RegretAuditor() = default;

std::uint64_t RegretAuditor::nodes_expanded() const { return impl_->expanded; }

RegretEntry RegretAuditor::audit(int agent, const ExecutionState& root) {
  RegretEntry entry;
  if (root.terminated) {
    entry.max_gain = Rational(0);
    return entry;
  }
  const Rational best = impl_->best_response(agent, root);
  const Rational prescribed = impl_->prescribed_value(agent, root);
  entry.max_gain = Rational(best - prescribed);
  if (entry.max_gain > 0) entry.witness = impl_->witness(agent, root);
  return entry;
}

RegretEntry best_response_regret(
    const ProtocolProgram& program, const ValuationProfile& profile,
    const std::vector<Strategy>& profile_strategies, int agent,
    const std::vector<Rational>& deviation_cuts,
    const std::optional<ExecutionState>& at_subtree) {
  RegretAuditor auditor(program, profile, profile_strategies, deviation_cuts);
  const ExecutionState root =
      at_subtree ? *at_subtree : initial_state(program);
  return auditor.audit(agent, root);
}

std::vector<ExecutionState> enumerate_subtree_roots(
    const ProtocolProgram& program, const GridFamily& grids, int max_depth) {
  std::vector<ExecutionState> out;
  std::vector<ExecutionState> level;
  level.push_back(initial_state(program));
  if (!level.front().terminated) out.push_back(level.front());
  for (int depth = 1; depth <= max_depth; ++depth) {
    std::vector<ExecutionState> next;
    for (const ExecutionState& state : level) {
      if (state.terminated) continue;
      std::optional<DecisionNode> node = decision_node(program, state);
      if (node->kind == DecisionNode::Kind::kCut) {
        const std::vector<Rational>& grid = grids.grid(state.cuts_done + 1);
        for (const Rational& point : grid) {
          const bool inside = std::any_of(
              node->feasible.begin(), node->feasible.end(),
              [&](const Interval& iv) {
                return iv.lo <= point && point <= iv.hi;
              });
          if (inside)
            next.push_back(step(program, state, Action::cut_at(point), &*node));
        }
      } else {
        for (int option = 1; option <= static_cast<int>(node->options.size());
             ++option)
          next.push_back(step(program, state, Action::choose(option), &*node));
      }
    }
    for (const ExecutionState& state : next)
      if (!state.terminated) out.push_back(state);
    level = std::move(next);
  }
  return out;
}

RegretReport audit_equilibrium(
    const ProtocolProgram& program, const ValuationProfile& profile,
    std::shared_ptr<const DiscreteStrategyProfile> solved, int depth,
    int grid_refinements) {
  GridFamily deviation_family = solved->grids();
  for (int r = 0; r < grid_refinements; ++r)
    deviation_family = refine(deviation_family);
  std::vector<Rational> deviation_cuts;
  if (deviation_family.K > 0)
    deviation_cuts = deviation_family.grids.back();

  RegretAuditor auditor(program, profile, lifted_strategies(solved),
                        deviation_cuts);
  std::vector<ExecutionState> roots =
      enumerate_subtree_roots(program, solved->grids(), depth);

  RegretReport report;
  report.depth = depth;
  report.deviation_grid_size = deviation_cuts.size();
  report.audited_roots = roots.size();
  report.per_agent.resize(static_cast<std::size_t>(program.n_agents));
  for (auto& entry : report.per_agent) entry.max_gain = Rational(0);
  for (const ExecutionState& root : roots) {
    for (int agent = 1; agent <= program.n_agents; ++agent) {
      RegretEntry entry = auditor.audit(agent, root);
      RegretEntry& worst =
          report.per_agent[static_cast<std::size_t>(agent - 1)];
      if (entry.max_gain > worst.max_gain) worst = std::move(entry);
    }
  }
  report.nodes_expanded = auditor.nodes_expanded();
  return report;
}

EfSearchResult find_envy_free_contiguous(
    const ValuationProfile& profile, long resolution,
    const std::optional<Rational>& required_bound) {
  const int n = profile.size();
  if (n < 1 || n > 3)
    throw Error("contiguous search supports 1 to 3 agents");
  if (resolution < n) throw Error("resolution must be at least n");

  std::vector<std::vector<int>> assignments;  // position -> agent index
  {
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    do {
      assignments.push_back(order);
    } while (std::next_permutation(order.begin(), order.end()));
  }

  std::optional<EfSearchResult> best;
  auto consider = [&](const std::vector<Rational>& cuts) {
    std::vector<Interval> slots;
    Rational prev(0);
    for (const Rational& cut : cuts) {
      slots.emplace_back(prev, cut);
      prev = cut;
    }
    slots.emplace_back(prev, Rational(1));
    for (const std::vector<int>& assignment : assignments) {
      std::vector<Interval> allocation(static_cast<std::size_t>(n));
      for (int position = 0; position < n; ++position)
        allocation[static_cast<std::size_t>(
            assignment[static_cast<std::size_t>(position)])] =
            slots[static_cast<std::size_t>(position)];
      // Maximum positive envy: the epsilon for which this allocation is
      // eps-envy-free. Zero means exactly envy-free.
      Rational worst(0);
      for (int i = 0; i < n; ++i) {
        const PiecewiseDensity& density =
            profile.agents[static_cast<std::size_t>(i)];
        const Rational own =
            eval(density, allocation[static_cast<std::size_t>(i)]);
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          Rational envy = Rational(
              eval(density, allocation[static_cast<std::size_t>(j)]) - own);
          if (envy > worst) worst = std::move(envy);
        }
      }
      if (!best || worst < best->max_envy) {
        EfSearchResult candidate;
        candidate.allocation = allocation;
        candidate.max_envy = worst;
        candidate.envy_free = worst == 0;
        best = std::move(candidate);
      }
    }
  };

  if (n == 1) {
    consider({});
  } else if (n == 2) {
    for (long c = 0; c <= resolution; ++c)
      consider({make_rational(c, resolution)});
  } else {
    for (long c1 = 0; c1 <= resolution; ++c1)
      for (long c2 = c1; c2 <= resolution; ++c2)
        consider({make_rational(c1, resolution),
                  make_rational(c2, resolution)});
  }

  if (required_bound && best->max_envy > *required_bound)
    throw InfeasibleResolution(
        "no allocation at resolution " + std::to_string(resolution) +
        " has maximum envy within " + rational_string(*required_bound) +
        " (best found " + rational_string(best->max_envy) + ")");
  return *best;
}

}  // namespace fairdiv
