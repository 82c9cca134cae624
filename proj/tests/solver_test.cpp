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

#include <algorithm>
#include <random>

#include "doctest.h"
#include "fairdiv/json_io.hpp"
#include "fairdiv/protocols.hpp"
#include "fairdiv/solver.hpp"

using namespace fairdiv;

namespace {

const char* kThreeCuts = R"(
agents 1;
cut 1 in {[0, 1]} as x;
cut 1 in {[0, 1]} as y;
cut 1 in {[0, 1]} as z;
if x < y and y < z {
  choose 1 from {[x, y], [y, z]} as c;
}
)";

ValuationProfile uniform_profile(int n) {
  ValuationProfile profile;
  for (int i = 0; i < n; ++i) profile.agents.push_back(uniform_density());
  return profile;
}

PiecewiseDensity two_slope() {
  return PiecewiseDensity({{make_rational(1, 2), make_rational(3, 2)},
                           {Rational(1), make_rational(1, 2)}},
                          true);
}

// Test-only oracle: plain engine-level enumeration of the discretized game
// with the same leftmost/lowest-index tie-break, sharing nothing with the
// compiled induction. Returns utilities collected from the state onward.
std::vector<Rational> oracle_solve(const ProtocolProgram& program,
                                   const ValuationProfile& profile,
                                   const GridFamily& grids,
                                   const ExecutionState& state) {
  const int n = program.n_agents;
  if (state.terminated) return std::vector<Rational>(static_cast<std::size_t>(n), Rational(0));
  const DecisionNode node = *decision_node(program, state);
  const std::size_t self = static_cast<std::size_t>(node.agent - 1);
  std::vector<Rational> best;
  if (node.kind == DecisionNode::Kind::kCut) {
    for (const Rational& point : grids.grid(state.cuts_done + 1)) {
      const bool inside =
          std::any_of(node.feasible.begin(), node.feasible.end(),
                      [&](const Interval& iv) {
                        return iv.lo <= point && point <= iv.hi;
                      });
      if (!inside) continue;
      std::vector<Rational> child = oracle_solve(
          program, profile, grids,
          step(program, state, Action::cut_at(point), &node));
      if (best.empty() || child[self] > best[self]) best = std::move(child);
    }
  } else {
    for (int option = 1; option <= static_cast<int>(node.options.size());
         ++option) {
      std::vector<Rational> child = oracle_solve(
          program, profile, grids,
          step(program, state, Action::choose(option), &node));
      child[self] += value_of_piece(
          profile.agents[self],
          node.options[static_cast<std::size_t>(option - 1)]);
      if (best.empty() || child[self] > best[self]) best = std::move(child);
    }
  }
  REQUIRE(!best.empty());
  return best;
}

std::vector<Rational> oracle_root(const ProtocolProgram& program,
                                  const ValuationProfile& profile,
                                  const GridFamily& grids) {
  return oracle_solve(program, profile, grids, initial_state(program));
}

}  // namespace

TEST_SUITE_BEGIN("solver");

TEST_CASE("grid construction for uniform agents") {
  const GridFamily family =
      build_grids(uniform_profile(2), make_rational(1, 2), 4, 3);
  CHECK(family.threshold == make_rational(1, 16));
  REQUIRE(family.K == 3);
  CHECK(family.grid(1).size() == 17);
  CHECK(family.grid(2).size() == 33);
  CHECK(family.grid(3).size() == 65);
  for (int k = 0; k <= 16; ++k)
    CHECK(family.grid(1)[static_cast<std::size_t>(k)] == make_rational(k, 16));
}

TEST_CASE("grid construction from exact value quantiles") {
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  const GridFamily family = build_grids(profile, Rational(1), 2, 1);
  CHECK(family.threshold == make_rational(1, 4));
  const std::vector<Rational> expected = {
      Rational(0), make_rational(1, 6), make_rational(1, 3),
      make_rational(1, 2), Rational(1)};
  CHECK(family.grid(1) == expected);
  for (std::size_t i = 0; i + 1 < expected.size(); ++i)
    CHECK(eval(profile.agents[0], Interval(expected[i], expected[i + 1])) <=
          family.threshold);
}

TEST_CASE("grid family edge cases") {
  CHECK(build_grids(uniform_profile(1), Rational(1), 1, 0).grids.empty());
  CHECK_THROWS_AS(build_grids(uniform_profile(1), Rational(0), 1, 1),
                  DegenerateEps);
  CHECK_THROWS_AS(build_grids(uniform_profile(1), Rational(1), 2, 3), Error);
}

TEST_CASE("grid invariants on random profiles") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const ValuationProfile profile = random_rational_profile(2, seed);
    const GridFamily family =
        build_grids(profile, make_rational(1, 2), 4, 3);
    CAPTURE(seed);
    for (int i = 1; i <= family.K; ++i) {
      const std::vector<Rational>& grid = family.grid(i);
      REQUIRE(grid.size() >= 2);
      CHECK(grid.front() == Rational(0));
      CHECK(grid.back() == Rational(1));
      CHECK(std::is_sorted(grid.begin(), grid.end()));
      // Per-agent cell bound.
      for (std::size_t j = 0; j + 1 < grid.size(); ++j)
        for (const PiecewiseDensity& density : profile.agents)
          CHECK(eval(density, Interval(grid[j], grid[j + 1])) <=
                family.threshold);
      if (i == family.K) continue;
      // Strict nesting with exactly one new point per cell.
      const std::vector<Rational>& next = family.grid(i + 1);
      CHECK(next.size() == 2 * grid.size() - 1);
      for (const Rational& point : grid)
        CHECK(std::binary_search(next.begin(), next.end(), point));
      for (std::size_t j = 0; j + 1 < grid.size(); ++j) {
        const auto begin = std::upper_bound(next.begin(), next.end(), grid[j]);
        const auto end = std::lower_bound(next.begin(), next.end(), grid[j + 1]);
        CHECK(end - begin == 1);
      }
    }
  }
}

TEST_CASE("map_history is the identity on grid-resident cuts") {
  const GridFamily family =
      build_grids(uniform_profile(2), make_rational(1, 2), 4, 3);
  const std::vector<Rational> cuts = {make_rational(1, 4),
                                      make_rational(9, 32),
                                      make_rational(5, 8)};
  CHECK(map_history(cuts, family) == cuts);
}

TEST_CASE("map_history separates near-collisions in order") {
  const GridFamily family =
      build_grids(uniform_profile(2), make_rational(1, 2), 4, 3);
  // Both cuts are nearest to 1/4; the second must move to the G_2 point
  // just above to keep the strict order.
  const std::vector<Rational> cuts = {make_rational(6, 25),
                                      make_rational(13, 50)};
  const std::vector<Rational> mapped = map_history(cuts, family);
  CHECK(mapped[0] == make_rational(1, 4));
  CHECK(mapped[1] == make_rational(9, 32));
}

TEST_CASE("map_history boundary and tie behavior") {
  const GridFamily family =
      build_grids(uniform_profile(2), make_rational(1, 2), 4, 3);
  const std::vector<Rational> cuts = {Rational(0), Rational(1),
                                      make_rational(1, 3),
                                      make_rational(1, 3)};
  const std::vector<Rational> mapped = map_history(cuts, family);
  CHECK(mapped[0] == Rational(0));
  CHECK(mapped[1] == Rational(1));
  CHECK(mapped[2] == mapped[3]);
  CHECK(mapped[2] != Rational(0));
}

TEST_CASE("map_history preserves the order pattern of random histories") {
  std::mt19937_64 rng(4242);
  const GridFamily family =
      build_grids(uniform_profile(2), make_rational(1, 2), 5, 4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Rational> cuts;
    const int k = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < k; ++i)
      cuts.push_back(make_rational(static_cast<long>(rng() % 1001), 1000));
    const std::vector<Rational> mapped = map_history(cuts, family);
    REQUIRE(mapped.size() == cuts.size());
    for (std::size_t i = 0; i < cuts.size(); ++i) {
      for (std::size_t j = 0; j < cuts.size(); ++j) {
        CHECK((cuts[i] < cuts[j]) == (mapped[i] < mapped[j]));
        CHECK((cuts[i] == cuts[j]) == (mapped[i] == mapped[j]));
      }
      CHECK((cuts[i] == 0) == (mapped[i] == 0));
      CHECK((cuts[i] == 1) == (mapped[i] == 1));
    }
  }
}

TEST_CASE("tree size estimates") {
  const ProtocolProgram three = parse_program(kThreeCuts);
  const GridFamily family =
      build_grids(uniform_profile(1), make_rational(1, 2), 4, 3);
  CHECK(estimate_tree_size(three, family) == 17ull * 33 * 65 * 2);

  const ProtocolProgram empty = parse_program("agents 2;");
  CHECK(estimate_tree_size(empty, family) == 1);

  const GeneratedProtocol cc = cut_and_choose();
  const GridFamily cc_family =
      build_grids(uniform_profile(2), make_rational(3, 8), 3, 1);
  REQUIRE(cc_family.grid(1).size() == 17);
  CHECK(estimate_tree_size(*cc.program, cc_family) == 17 * 2);
}

TEST_CASE("cut-and-choose solves to the exact half split") {
  const GeneratedProtocol cc = cut_and_choose();
  const ValuationProfile profile = uniform_profile(2);
  const GridFamily family = build_grids(profile, make_rational(1, 4), 3, 1);
  const SolveResult result = backward_induction(*cc.program, profile, family);
  CHECK(result.certificate.utilities[0] == make_rational(1, 2));
  CHECK(result.certificate.utilities[1] == make_rational(1, 2));
  CHECK(result.certificate.eps == make_rational(1, 4));
  CHECK(result.certificate.tiebreak_id == std::string(kTieBreakId));

  const Action root = result.profile->action_at(initial_state(*cc.program));
  CHECK(root.kind == Action::Kind::kCutAt);
  CHECK(root.coordinate == make_rational(1, 2));
}

TEST_CASE("three-cut program: grid play leaves a one-cell gap") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ValuationProfile profile = uniform_profile(1);
  const GridFamily family = build_grids(profile, make_rational(1, 4), 4, 3);
  const SolveResult result = backward_induction(program, profile, family);
  // G_2 has step 1/64; the best play pins one boundary cell.
  CHECK(result.certificate.utilities[0] == make_rational(63, 64));
  CHECK(result.certificate.utilities[0] >= 1 - family.eps);
  CHECK(result.certificate.utilities[0] < 1);
}

TEST_CASE("doubling the grid resolution never hurts the cutter") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ValuationProfile profile = uniform_profile(1);
  GridFamily family = build_grids(profile, make_rational(1, 2), 4, 3);
  Rational last(0);
  for (int level = 0; level < 3; ++level) {
    const SolveResult result = backward_induction(program, profile, family);
    CHECK(result.certificate.utilities[0] >= last);
    CHECK(result.certificate.utilities[0] < 1);
    last = result.certificate.utilities[0];
    family = refine(family);
  }
}

TEST_CASE("choose-only programs need no grids") {
  const ProtocolProgram program =
      parse_program("agents 1; choose 1 from {[0, 1]} as c;");
  const ValuationProfile profile = uniform_profile(1);
  const GridFamily family = build_grids(profile, make_rational(1, 4), 1, 0);
  const SolveResult result = backward_induction(program, profile, family);
  CHECK(result.certificate.utilities[0] == Rational(1));
  CHECK(result.certificate.node_count == 0);
  const Action action = result.profile->action_at(initial_state(program));
  CHECK(action.index == 1);
}

TEST_CASE("budget and ordinal guards") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ValuationProfile profile = uniform_profile(1);
  const GridFamily family = build_grids(profile, make_rational(1, 2), 4, 3);
  SolveOptions options;
  options.budget = 10;
  CHECK_THROWS_AS(backward_induction(program, profile, family, options),
                  BudgetExceeded);
  const GridFamily short_family =
      build_grids(profile, make_rational(1, 2), 4, 2);
  CHECK_THROWS_AS(backward_induction(program, profile, short_family),
                  CutOrdinalExceedsK);
}

TEST_CASE("induction matches the exhaustive oracle") {
  SUBCASE("cut and choose, asymmetric profile") {
    ValuationProfile profile;
    profile.agents.push_back(two_slope());
    profile.agents.push_back(uniform_density());
    const GeneratedProtocol cc = cut_and_choose();
    const GridFamily family = build_grids(profile, Rational(1), 3, 1);
    const SolveResult result =
        backward_induction(*cc.program, profile, family);
    CHECK(result.certificate.utilities == oracle_root(*cc.program, profile, family));
  }
  SUBCASE("three cuts, coarse grids") {
    const ProtocolProgram program = parse_program(kThreeCuts);
    const ValuationProfile profile = uniform_profile(1);
    const GridFamily family = build_grids(profile, Rational(1), 4, 3);
    const SolveResult result = backward_induction(program, profile, family);
    CHECK(result.certificate.utilities == oracle_root(program, profile, family));
  }
  SUBCASE("choose-any mini game") {
    const ProtocolProgram program = parse_program(R"(
agents 2;
cut 1 in {[0, 1]} as a;
cut 2 in {[0, 1]} as b;
choose 2 any as p;
choose 1 any as q;
choose 2 any as r;
)");
    ValuationProfile profile;
    profile.agents.push_back(two_slope());
    profile.agents.push_back(uniform_density());
    const GridFamily family = build_grids(profile, Rational(1), 5, 2);
    const SolveResult result = backward_induction(program, profile, family);
    CHECK(result.certificate.utilities == oracle_root(program, profile, family));
  }
  SUBCASE("large prime denominators use the exact value backend") {
    ValuationProfile profile;
    profile.agents.push_back(PiecewiseDensity(
        {{parse_rational("524287/1048573"), parse_rational("1048573/1048574")},
         {Rational(1), parse_rational("1048573/1048572")}},
        true));
    profile.agents.push_back(uniform_density());
    const GeneratedProtocol cc = cut_and_choose();
    const GridFamily family = build_grids(profile, Rational(1), 3, 1);
    const SolveResult result =
        backward_induction(*cc.program, profile, family);
    CHECK(result.certificate.utilities ==
          oracle_root(*cc.program, profile, family));
  }
}

TEST_CASE("solves are deterministic, sequential or parallel") {
  const GeneratedProtocol ds = dubins_spanier(2);
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  profile.agents.push_back(uniform_density());
  const GridFamily family = build_grids(profile, make_rational(1, 2), 5, 3);
  const SolveResult a = backward_induction(*ds.program, profile, family);
  const SolveResult b = backward_induction(*ds.program, profile, family);
  CHECK(a.certificate.utilities == b.certificate.utilities);
  CHECK(a.certificate.node_count == b.certificate.node_count);
  CHECK(a.profile->cut_action_table() == b.profile->cut_action_table());

  SolveOptions parallel;
  parallel.threads = 4;
  const SolveResult c =
      backward_induction(*ds.program, profile, family, parallel);
  CHECK(c.certificate.utilities == a.certificate.utilities);
  CHECK(c.certificate.node_count == a.certificate.node_count);
  CHECK(c.profile->cut_action_table() == a.profile->cut_action_table());
}

TEST_CASE("cut table actions live on the grid of their ordinal") {
  const GeneratedProtocol cc = cut_and_choose();
  const ValuationProfile profile = uniform_profile(2);
  const GridFamily family = build_grids(profile, make_rational(1, 4), 3, 1);
  const SolveResult result = backward_induction(*cc.program, profile, family);
  const auto table = result.profile->cut_action_table();
  CHECK(!table.empty());
  for (const auto& [key, action] : table) {
    CHECK(action.kind == Action::Kind::kCutAt);
    CHECK(std::binary_search(family.grid(1).begin(), family.grid(1).end(),
                             action.coordinate));
  }
}

TEST_CASE("lifted strategies replay the solved profile") {
  const GeneratedProtocol cc = cut_and_choose();
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  profile.agents.push_back(uniform_density());
  const GridFamily family = build_grids(profile, make_rational(1, 4), 3, 1);
  const SolveResult result = backward_induction(*cc.program, profile, family);
  const RunResult played =
      run(*cc.program, profile, lifted_strategies(result.profile));
  CHECK(played.outcome.utilities == result.certificate.utilities);
}

TEST_SUITE_END();
