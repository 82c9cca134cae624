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

#include "doctest.h"
#include "fairdiv/auditor.hpp"
#include "fairdiv/json_io.hpp"
#include "fairdiv/protocols.hpp"

using namespace fairdiv;

namespace {

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

std::vector<Rational> sixtyfourths() {
  std::vector<Rational> grid;
  for (long k = 0; k <= 64; ++k) grid.push_back(make_rational(k, 64));
  return grid;
}

}  // namespace

TEST_SUITE_BEGIN("auditor");

TEST_CASE("fairness of the half split") {
  const std::vector<Piece> halves = {
      make_piece({Interval(Rational(0), make_rational(1, 2))}),
      make_piece({Interval(make_rational(1, 2), Rational(1))})};
  const FairnessReport report =
      check_fairness(halves, uniform_profile(2), make_rational(1, 4));
  CHECK(report.proportional);
  CHECK(report.envy_free);
  CHECK(report.eps_envy_free);
  CHECK(report.proportional_margin[0] == Rational(0));
  CHECK(report.envy[0][1] == Rational(0));
}

TEST_CASE("fairness of an uneven three-way split") {
  const std::vector<Piece> skewed = {
      make_piece({Interval(Rational(0), make_rational(1, 2))}),
      make_piece({Interval(make_rational(1, 2), make_rational(3, 4))}),
      make_piece({Interval(make_rational(3, 4), Rational(1))})};
  const FairnessReport report =
      check_fairness(skewed, uniform_profile(3), make_rational(1, 24));
  CHECK(!report.proportional);
  CHECK(!report.envy_free);
  CHECK(report.envy[1][0] == make_rational(1, 4));
  CHECK(report.proportional_margin[1] == make_rational(-1, 12));
  CHECK(report.proportional_margin[2] == make_rational(-1, 12));
  // The shortfall 1/12 exceeds eps = 1/24.
  CHECK(!report.eps_proportional);
  // envy-free implies proportional on full-cake allocations: contrapositive
  // check on the flags.
  CHECK((!report.proportional ? !report.envy_free : true));
}

TEST_CASE("eps-proportionality holds with equality at the boundary") {
  // utility exactly 1/n - eps counts as eps-proportional.
  const std::vector<Piece> tight = {
      make_piece({Interval(Rational(0), make_rational(1, 12))}),
      make_piece({Interval(make_rational(1, 12), make_rational(13, 24))}),
      make_piece({Interval(make_rational(13, 24), Rational(1))})};
  const FairnessReport report =
      check_fairness(tight, uniform_profile(3), make_rational(1, 4));
  CHECK(report.proportional_margin[0] == make_rational(-1, 4));
  CHECK(report.eps_proportional);
}

TEST_CASE("overlapping allocations are rejected") {
  const std::vector<Piece> overlap = {
      make_piece({Interval(Rational(0), make_rational(2, 3))}),
      make_piece({Interval(make_rational(1, 3), Rational(1))})};
  CHECK_THROWS_AS(check_fairness(overlap, uniform_profile(2), Rational(0)),
                  Error);
}

TEST_CASE("best response against honest cut-and-choose") {
  const GeneratedProtocol cc = cut_and_choose();
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  profile.agents.push_back(uniform_density());
  const std::vector<Strategy> honest = cc.honest(profile);

  // Agent 2 best-responds already (it picks its favorite piece).
  const RegretEntry chooser = best_response_regret(
      *cc.program, profile, honest, 2, sixtyfourths());
  CHECK(chooser.max_gain == Rational(0));

  // Agent 1 can cut just below 1/2 and keep nearly 3/4 of its value: the
  // best grid deviation is 31/64, worth 93/128 against the honest 1/2.
  const RegretEntry cutter = best_response_regret(
      *cc.program, profile, honest, 1, sixtyfourths());
  CHECK(cutter.max_gain == make_rational(93, 128) - make_rational(1, 2));
  REQUIRE(cutter.witness.has_value());
  CHECK(cutter.witness->action == "cut@31/64");
}

TEST_CASE("best response matches brute-force deviation enumeration") {
  const GeneratedProtocol cc = cut_and_choose();
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  profile.agents.push_back(uniform_density());
  const std::vector<Strategy> honest = cc.honest(profile);

  // Brute force: agent 1's only decisions are the cut (the final choose is
  // forced), so enumerate exactly the auditor's action set by hand.
  std::vector<Rational> actions = sixtyfourths();
  actions.push_back(make_rational(1, 2));
  Rational best(-1);
  for (const Rational& x : actions) {
    ExecutionState state = initial_state(*cc.program);
    state = step(*cc.program, state, Action::cut_at(x));
    while (!state.terminated) {
      const DecisionNode node = *decision_node(*cc.program, state);
      const Action action =
          honest[static_cast<std::size_t>(node.agent - 1)](node);
      state = step(*cc.program, state, action, &node);
    }
    const Outcome outcome = outcome_of(*cc.program, profile, state);
    if (outcome.utilities[0] > best) best = outcome.utilities[0];
  }
  const RegretEntry entry =
      best_response_regret(*cc.program, profile, honest, 1, sixtyfourths());
  CHECK(entry.max_gain == best - make_rational(1, 2));
}

TEST_CASE("thieves equilibrium strategies have zero regret") {
  const GeneratedProtocol proto = thieves(2);
  const ValuationProfile profile = uniform_profile(2);
  const std::vector<Interval> z = {
      Interval(Rational(0), make_rational(1, 2)),
      Interval(make_rational(1, 2), Rational(1))};
  const std::vector<Strategy> strategies = thieves_ne_strategies(proto, z);
  for (int agent = 1; agent <= 2; ++agent) {
    const RegretEntry entry = best_response_regret(
        *proto.program, profile, strategies, agent, sixtyfourths());
    CAPTURE(agent);
    CHECK(entry.max_gain == Rational(0));
  }
}

TEST_CASE("a non-envy-free demarcation invites a profitable steal") {
  const GeneratedProtocol proto = thieves(2);
  const ValuationProfile profile = uniform_profile(2);
  const std::vector<Interval> z = {
      Interval(Rational(0), make_rational(3, 4)),
      Interval(make_rational(3, 4), Rational(1))};
  const std::vector<Strategy> strategies = thieves_ne_strategies(proto, z);
  const RegretEntry entry = best_response_regret(
      *proto.program, profile, strategies, 2, sixtyfourths());
  CHECK(entry.max_gain > Rational(0));
  REQUIRE(entry.witness.has_value());
  // The thief cuts strictly inside agent 1's piece.
  CHECK(entry.witness->action.substr(0, 4) == "cut@");
}

TEST_CASE("subtree enumeration counts discrete decision nodes") {
  const GeneratedProtocol cc = cut_and_choose();
  const ValuationProfile profile = uniform_profile(2);
  const GridFamily family = build_grids(profile, make_rational(1, 4), 3, 1);
  REQUIRE(family.grid(1).size() == 25);
  const std::vector<ExecutionState> roots =
      enumerate_subtree_roots(*cc.program, family, 2);
  // Root, 25 states after the cut, 25*2 after the choose (the final choose
  // is forced but still a decision node).
  CHECK(roots.size() == 1 + 25 + 50);
}

TEST_CASE("solved cut-and-choose passes the subtree audit") {
  const GeneratedProtocol cc = cut_and_choose();
  ValuationProfile profile;
  profile.agents.push_back(two_slope());
  profile.agents.push_back(uniform_density());
  const GridFamily family = build_grids(profile, make_rational(1, 4), 3, 1);
  const SolveResult solved = backward_induction(*cc.program, profile, family);
  const RegretReport report =
      audit_equilibrium(*cc.program, profile, solved.profile, 2);
  CHECK(report.audited_roots > 1);
  for (const RegretEntry& entry : report.per_agent) {
    CHECK(entry.max_gain >= Rational(0));
    CHECK(entry.max_gain <= family.eps);
  }
}

TEST_CASE("envy-free search oracle") {
  SUBCASE("uniform two agents cut at 1/2") {
    const EfSearchResult result =
        find_envy_free_contiguous(uniform_profile(2), 2);
    CHECK(result.envy_free);
    CHECK(result.max_envy <= Rational(0));
    CHECK(result.allocation[0] == Interval(Rational(0), make_rational(1, 2)));
  }
  SUBCASE("two-slope against uniform cuts at 1/3") {
    ValuationProfile profile;
    profile.agents.push_back(two_slope());
    profile.agents.push_back(uniform_density());
    const EfSearchResult result = find_envy_free_contiguous(profile, 12);
    CHECK(result.envy_free);
    CHECK(result.allocation[0] == Interval(Rational(0), make_rational(1, 3)));
    CHECK(result.allocation[1] == Interval(make_rational(1, 3), Rational(1)));
  }
  SUBCASE("uniform three agents find exact thirds") {
    const EfSearchResult result =
        find_envy_free_contiguous(uniform_profile(3), 12);
    CHECK(result.envy_free);
    CHECK(result.allocation[0] == Interval(Rational(0), make_rational(1, 3)));
  }
  SUBCASE("coarse grids can be infeasible") {
    CHECK_THROWS_AS(
        find_envy_free_contiguous(uniform_profile(2), 3, Rational(0)),
        InfeasibleResolution);
    CHECK_THROWS_AS(find_envy_free_contiguous(uniform_profile(2), 1), Error);
  }
}

TEST_SUITE_END();
