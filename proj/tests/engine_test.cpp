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
#include "fairdiv/engine.hpp"
#include "fairdiv/json_io.hpp"
#include "fairdiv/protocols.hpp"

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

ExecutionState play(const ProtocolProgram& program,
                    std::initializer_list<Action> actions) {
  ExecutionState state = initial_state(program, /*record_trace=*/true);
  for (const Action& action : actions) state = step(program, state, action);
  return state;
}

}  // namespace

TEST_SUITE_BEGIN("engine");

TEST_CASE("three-cut program: ordered cuts reach the choose") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ExecutionState state =
      play(program, {Action::cut_at(Rational(0)),
                     Action::cut_at(make_rational(1, 2)),
                     Action::cut_at(Rational(1)), Action::choose(1)});
  REQUIRE(state.terminated);
  const Outcome outcome = outcome_of(program, uniform_profile(1), state);
  CHECK(outcome.utilities[0] == make_rational(1, 2));
  CHECK(outcome.allocation[0] ==
        make_piece({Interval(Rational(0), make_rational(1, 2))}));
}

TEST_CASE("three-cut program: unordered cuts end with nothing") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ExecutionState state =
      play(program, {Action::cut_at(make_rational(1, 2)),
                     Action::cut_at(make_rational(1, 4)),
                     Action::cut_at(make_rational(3, 4))});
  REQUIRE(state.terminated);
  const Outcome outcome = outcome_of(program, uniform_profile(1), state);
  CHECK(outcome.utilities[0] == Rational(0));
  CHECK(outcome.allocation[0].empty());
}

TEST_CASE("illegal actions are rejected") {
  const ProtocolProgram program = parse_program(kThreeCuts);
  const ExecutionState state = initial_state(program);
  CHECK_THROWS_AS(step(program, state, Action::cut_at(Rational(2))),
                  IllegalAction);
  CHECK_THROWS_AS(step(program, state, Action::choose(1)), IllegalAction);

  // A cut restricted to a subinterval rejects coordinates outside it.
  const ProtocolProgram narrow = parse_program(R"(
agents 1;
cut 1 in {[0, 1]} as x;
cut 1 in {[x, 1]} as y;
)");
  ExecutionState mid = step(narrow, initial_state(narrow),
                            Action::cut_at(make_rational(1, 2)));
  CHECK_THROWS_AS(step(narrow, mid, Action::cut_at(make_rational(1, 4))),
                  IllegalAction);
  CHECK_THROWS_AS(
      step(narrow, mid, Action::choose(1)), IllegalAction);
}

TEST_CASE("resolve_piece orders endpoints by bound coordinate") {
  const ProtocolProgram program = parse_program(R"(
agents 1;
cut 1 in {[0, 1]} as x;
cut 1 in {[0, 1]} as y;
)");
  ExecutionState state = step(program, initial_state(program),
                              Action::cut_at(make_rational(3, 4)));
  SUBCASE("single binding") {
    CHECK(resolve_piece(program, state,
                        {EndpointExpr::zero(), EndpointExpr::cut("x")}) ==
          Interval(Rational(0), make_rational(3, 4)));
    CHECK(resolve_piece(program, state,
                        {EndpointExpr::cut("x"), EndpointExpr::cut("x")}) ==
          Interval(make_rational(3, 4), make_rational(3, 4)));
    CHECK_THROWS_AS(resolve_piece(program, state,
                                  {EndpointExpr::cut("y"),
                                   EndpointExpr::one()}),
                    UnboundLabel);
  }
  SUBCASE("reversed endpoints normalize") {
    state = step(program, state, Action::cut_at(make_rational(1, 4)));
    CHECK(resolve_piece(program, state,
                        {EndpointExpr::cut("x"), EndpointExpr::cut("y")}) ==
          Interval(make_rational(1, 4), make_rational(3, 4)));
  }
}

TEST_CASE("trace records replay to the identical outcome") {
  const GeneratedProtocol cc = cut_and_choose();
  ValuationProfile profile = uniform_profile(2);
  const RunResult first =
      run(*cc.program, profile, cc.honest(profile), /*record_trace=*/true);
  REQUIRE(first.final_state.trace.size() == 3);

  const std::string json = trace_to_json(*cc.program, first.final_state.trace);
  const std::vector<TraceEvent> decoded = trace_from_json(*cc.program, json);
  const ExecutionState replayed = replay(*cc.program, decoded);
  const Outcome outcome = outcome_of(*cc.program, profile, replayed);
  CHECK(outcome.utilities == first.outcome.utilities);
  CHECK(outcome.allocation == first.outcome.allocation);
}

TEST_CASE("overlapping allocations are an engine error") {
  const ProtocolProgram program = parse_program(R"(
agents 2;
cut 1 in {[0, 1]} as x;
choose 1 from {[0, x]} as p;
choose 2 from {[0, x]} as q;
)");
  ExecutionState state = step(program, initial_state(program),
                              Action::cut_at(make_rational(1, 2)));
  state = step(program, state, Action::choose(1));
  CHECK_THROWS_AS(step(program, state, Action::choose(1)),
                  OverlappingAllocation);
}

TEST_CASE("choose-any pieces come from the cut multiset") {
  const ProtocolProgram program = parse_program(R"(
agents 2;
cut 1 in {[0, 1]} as a;
cut 2 in {[0, 1]} as b;
choose 1 any as p;
choose 2 any as q;
)");
  SUBCASE("coincident cuts keep their empty cell") {
    ExecutionState state = play(program, {Action::cut_at(make_rational(1, 2)),
                                          Action::cut_at(make_rational(1, 2))});
    const DecisionNode node = *decision_node(program, state);
    REQUIRE(node.options.size() == 3);
    CHECK(node.options[1].empty());
    // Taking cell 0 leaves cells 1 and 2 for the next round.
    state = step(program, state, Action::choose(1), &node);
    const DecisionNode next = *decision_node(program, state);
    CHECK(next.options.size() == 2);
  }
  SUBCASE("empty choose-any set is an error") {
    const ProtocolProgram starve = parse_program(R"(
agents 2;
choose 1 any as p;
choose 2 any as q;
)");
    ExecutionState state =
        step(starve, initial_state(starve), Action::choose(1));
    CHECK_THROWS_AS(decision_node(starve, state), EmptyChooseSet);
  }
}

TEST_CASE("chose and allocated predicates read the history") {
  const ProtocolProgram program = parse_program(R"(
agents 2;
cut 1 in {[0, 1]} as x;
choose 2 from {[0, x], [x, 1]} as c;
if chose(c, 2) and allocated(2) {
  choose 1 from {[0, x]} as r;
}
)");
  ExecutionState state = play(program, {Action::cut_at(make_rational(1, 3)),
                                        Action::choose(2)});
  const DecisionNode node = *decision_node(program, state);
  CHECK(node.agent == 1);
  state = step(program, state, Action::choose(1), &node);
  const Outcome outcome = outcome_of(program, uniform_profile(2), state);
  CHECK(outcome.utilities[0] == make_rational(1, 3));
  CHECK(outcome.utilities[1] == make_rational(2, 3));
}

TEST_CASE("canonical keys collapse dead coordinates only") {
  const ProtocolProgram program = parse_program(R"(
agents 2;
cut 1 in {[0, 1]} as x;
choose 1 from {[0, x]} as p;
cut 2 in {[0, 1]} as y;
choose 2 from {[y, 1]} as q;
)");
  const ProgramLayout layout(program);
  // After agent 1's choose, x no longer matters for anything downstream.
  const ExecutionState a = play(program, {Action::cut_at(make_rational(1, 4)),
                                          Action::choose(1)});
  const ExecutionState b = play(program, {Action::cut_at(make_rational(1, 3)),
                                          Action::choose(1)});
  CHECK(canonical_node_key(layout, a) == canonical_node_key(layout, b));

  // But while x is still referenced, different coordinates differ.
  const ExecutionState c = play(program, {Action::cut_at(make_rational(1, 4))});
  const ExecutionState d = play(program, {Action::cut_at(make_rational(1, 3))});
  CHECK(canonical_node_key(layout, c) != canonical_node_key(layout, d));
}

TEST_CASE("determinism: identical runs produce identical traces") {
  const GeneratedProtocol ds = dubins_spanier(3);
  ValuationProfile profile = random_rational_profile(3, 99);
  const RunResult r1 = run(*ds.program, profile, ds.honest(profile));
  const RunResult r2 = run(*ds.program, profile, ds.honest(profile));
  CHECK(r1.outcome.utilities == r2.outcome.utilities);
  CHECK(trace_to_json(*ds.program, r1.final_state.trace) ==
        trace_to_json(*ds.program, r2.final_state.trace));
}

TEST_SUITE_END();
