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

Outcome honest_outcome(const GeneratedProtocol& proto,
                       const ValuationProfile& profile) {
  return run(*proto.program, profile, proto.honest(profile)).outcome;
}

}  // namespace

TEST_SUITE_BEGIN("protocols");

TEST_CASE("every generator emits a validating program") {
  for (int n = 2; n <= 4; ++n) {
    CAPTURE(n);
    CHECK(validate(*dubins_spanier(n).program).empty());
    CHECK(validate(*thieves(n).program).empty());
    for (long d : {2L, 4L}) {
      CHECK(validate(*oblivious_round_robin(n, make_rational(1, d)).program)
                .empty());
    }
  }
  CHECK(validate(*cut_and_choose().program).empty());
  CHECK(validate(*even_paz(2).program).empty());
  CHECK(validate(*even_paz(4).program).empty());
  CHECK(validate(*selfridge_conway().program).empty());
  CHECK_THROWS_AS(even_paz(3), UnsupportedN);
  CHECK_THROWS_AS(dubins_spanier(1), UnsupportedN);
}

TEST_CASE("cut and choose, honest play") {
  const GeneratedProtocol cc = cut_and_choose();
  SUBCASE("uniform agents split in half") {
    const Outcome outcome = honest_outcome(cc, uniform_profile(2));
    CHECK(outcome.utilities[0] == make_rational(1, 2));
    CHECK(outcome.utilities[1] == make_rational(1, 2));
  }
  SUBCASE("left-heavy cutter marks 1/3, chooser takes the long piece") {
    ValuationProfile profile;
    profile.agents.push_back(two_slope());
    profile.agents.push_back(uniform_density());
    const Outcome outcome = honest_outcome(cc, profile);
    CHECK(outcome.allocation[0] ==
          make_piece({Interval(Rational(0), make_rational(1, 3))}));
    CHECK(outcome.utilities[0] == make_rational(1, 2));
    CHECK(outcome.utilities[1] == make_rational(2, 3));
  }
}

TEST_CASE("dubins-spanier honest play sweeps left to right") {
  SUBCASE("two uniform agents") {
    const Outcome outcome =
        honest_outcome(dubins_spanier(2), uniform_profile(2));
    CHECK(outcome.allocation[0] ==
          make_piece({Interval(Rational(0), make_rational(1, 2))}));
    CHECK(outcome.allocation[1] ==
          make_piece({Interval(make_rational(1, 2), Rational(1))}));
  }
  SUBCASE("three uniform agents get thirds in index order") {
    const Outcome outcome =
        honest_outcome(dubins_spanier(3), uniform_profile(3));
    CHECK(outcome.allocation[0] ==
          make_piece({Interval(Rational(0), make_rational(1, 3))}));
    CHECK(outcome.allocation[1] ==
          make_piece({Interval(make_rational(1, 3), make_rational(2, 3))}));
    CHECK(outcome.allocation[2] ==
          make_piece({Interval(make_rational(2, 3), Rational(1))}));
    for (const Rational& u : outcome.utilities)
      CHECK(u == make_rational(1, 3));
  }
  SUBCASE("honest play is exactly proportional on random profiles") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const ValuationProfile profile = random_rational_profile(3, seed);
      const Outcome outcome = honest_outcome(dubins_spanier(3), profile);
      const FairnessReport report =
          check_fairness(outcome.allocation, profile, make_rational(1, 4));
      CAPTURE(seed);
      CHECK(report.proportional);
    }
  }
}

TEST_CASE("even-paz honest play") {
  SUBCASE("n=2 reduces to a half split") {
    const Outcome outcome = honest_outcome(even_paz(2), uniform_profile(2));
    CHECK(outcome.utilities[0] == make_rational(1, 2));
    CHECK(outcome.utilities[1] == make_rational(1, 2));
  }
  SUBCASE("n=4 uniform gives quarters in order") {
    const Outcome outcome = honest_outcome(even_paz(4), uniform_profile(4));
    for (int i = 0; i < 4; ++i) {
      CHECK(outcome.allocation[static_cast<std::size_t>(i)] ==
            make_piece({Interval(make_rational(i, 4),
                                 make_rational(i + 1, 4))}));
    }
  }
  SUBCASE("honest play is proportional on random profiles") {
    for (std::uint64_t seed = 20; seed <= 26; ++seed) {
      const ValuationProfile profile = random_rational_profile(4, seed);
      const Outcome outcome = honest_outcome(even_paz(4), profile);
      const FairnessReport report =
          check_fairness(outcome.allocation, profile, make_rational(1, 4));
      CAPTURE(seed);
      CHECK(report.proportional);
    }
  }
}

TEST_CASE("selfridge-conway honest play") {
  SUBCASE("uniform agents take a third each") {
    const Outcome outcome =
        honest_outcome(selfridge_conway(), uniform_profile(3));
    for (const Rational& u : outcome.utilities)
      CHECK(u == make_rational(1, 3));
  }
  SUBCASE("honest play is exactly envy-free on random profiles") {
    for (std::uint64_t seed = 40; seed <= 49; ++seed) {
      const ValuationProfile profile = random_rational_profile(3, seed);
      const Outcome outcome = honest_outcome(selfridge_conway(), profile);
      const FairnessReport report =
          check_fairness(outcome.allocation, profile, Rational(0));
      CAPTURE(seed);
      CHECK(report.envy_free);
      CHECK(report.proportional);
    }
  }
}

TEST_CASE("thieves protocol") {
  SUBCASE("honest play demarcates agent 1's equal split and nobody steals") {
    const Outcome outcome = honest_outcome(thieves(2), uniform_profile(2));
    CHECK(outcome.allocation[0] ==
          make_piece({Interval(Rational(0), make_rational(1, 2))}));
    CHECK(outcome.allocation[1] ==
          make_piece({Interval(make_rational(1, 2), Rational(1))}));
  }
  SUBCASE("equilibrium strategies reproduce any contiguous partition") {
    const GeneratedProtocol proto = thieves(3);
    // Pieces deliberately out of positional order by agent.
    const std::vector<Interval> z = {
        Interval(make_rational(1, 2), Rational(1)),
        Interval(Rational(0), make_rational(1, 6)),
        Interval(make_rational(1, 6), make_rational(1, 2))};
    const Outcome outcome =
        run(*proto.program, uniform_profile(3), thieves_ne_strategies(proto, z))
            .outcome;
    for (int i = 0; i < 3; ++i)
      CHECK(outcome.allocation[static_cast<std::size_t>(i)] ==
            make_piece({z[static_cast<std::size_t>(i)]}));
  }
  SUBCASE("a deviating verifier steals and everyone else gets nothing") {
    const GeneratedProtocol proto = thieves(2);
    const std::vector<Interval> z = {
        Interval(Rational(0), make_rational(1, 2)),
        Interval(make_rational(1, 2), Rational(1))};
    std::vector<Strategy> strategies = thieves_ne_strategies(proto, z);
    strategies[1] = [](const DecisionNode& node) {
      if (node.kind != DecisionNode::Kind::kCut) return Action::choose(1);
      return node.label == "w2" ? Action::cut_at(make_rational(1, 8))
                                : Action::cut_at(make_rational(3, 8));
    };
    const Outcome outcome =
        run(*proto.program, uniform_profile(2), strategies).outcome;
    CHECK(outcome.utilities[0] == Rational(0));
    CHECK(outcome.utilities[1] == make_rational(1, 4));
    CHECK(outcome.allocation[1] ==
          make_piece({Interval(make_rational(1, 8), make_rational(3, 8))}));
  }
  SUBCASE("invalid partitions are rejected") {
    const GeneratedProtocol proto = thieves(2);
    CHECK_THROWS_AS(
        thieves_ne_strategies(
            proto, {Interval(Rational(0), make_rational(1, 3)),
                    Interval(make_rational(1, 2), Rational(1))}),
        InvalidAllocation);
    CHECK_THROWS_AS(
        thieves_ne_strategies(proto,
                              {Interval(Rational(0), Rational(0)),
                               Interval(Rational(0), Rational(1))}),
        InvalidAllocation);
    CHECK_THROWS_AS(
        thieves_ne_strategies(proto, {Interval(Rational(0), Rational(1))}),
        InvalidAllocation);
  }
  SUBCASE("honest play requires strictly positive valuations") {
    const GeneratedProtocol proto = thieves(2);
    ValuationProfile profile;
    profile.agents.push_back(PiecewiseDensity(
        {{make_rational(1, 2), Rational(2)}, {Rational(1), Rational(0)}},
        false));
    profile.agents.push_back(uniform_density());
    CHECK_THROWS_AS(proto.honest(profile), Error);
  }
}

TEST_CASE("oblivious round robin") {
  SUBCASE("uniform two-agent run: alternating fifths") {
    const GeneratedProtocol proto =
        oblivious_round_robin(2, make_rational(1, 2));
    const Outcome outcome = honest_outcome(proto, uniform_profile(2));
    CHECK(outcome.utilities[0] == make_rational(3, 5));
    CHECK(outcome.utilities[1] == make_rational(2, 5));
    const FairnessReport report = check_fairness(
        outcome.allocation, uniform_profile(2), make_rational(1, 2));
    CHECK(report.eps_envy_free);
  }
  SUBCASE("every pairwise envy stays within eps on random profiles") {
    const Rational eps = make_rational(1, 4);
    const GeneratedProtocol proto = oblivious_round_robin(3, eps);
    for (std::uint64_t seed = 60; seed <= 62; ++seed) {
      const ValuationProfile profile = random_rational_profile(3, seed);
      const Outcome outcome = honest_outcome(proto, profile);
      const FairnessReport report =
          check_fairness(outcome.allocation, profile, eps);
      CAPTURE(seed);
      CHECK(report.eps_envy_free);
    }
  }
  SUBCASE("all pieces are allocated") {
    const GeneratedProtocol proto =
        oblivious_round_robin(2, make_rational(1, 2));
    const ValuationProfile profile = uniform_profile(2);
    const RunResult result =
        run(*proto.program, profile, proto.honest(profile));
    CHECK(result.final_state.taken_cells.size() == 9);  // 2*4 cuts + 1
    Rational total(0);
    for (const Rational& u : result.outcome.utilities) total += u;
    CHECK(total == Rational(1));
  }
}

TEST_CASE("registry resolves short names") {
  CHECK(generate_protocol("cc", 2, {}).name == "cut_and_choose");
  CHECK(generate_protocol("ds", 3, {}).name == "dubins_spanier");
  CHECK(generate_protocol("orr", 2, make_rational(1, 2)).name ==
        "oblivious_round_robin");
  CHECK_THROWS_AS(generate_protocol("nope", 2, {}), Error);
  CHECK_THROWS_AS(generate_protocol("orr", 2, {}), Error);
}

TEST_SUITE_END();
