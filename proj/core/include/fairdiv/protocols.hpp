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

#ifndef FAIRDIV_PROTOCOLS_HPP_
#define FAIRDIV_PROTOCOLS_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairdiv/engine.hpp"

namespace fairdiv {

enum class FairnessClass { kProportional, kEnvyFree, kEpsEnvyFree };

// A generated protocol bundles the program with honest strategies. Honest
// play depends on the agents' valuations (marks are value queries), so the
// honest profile is built per valuation profile.
struct GeneratedProtocol {
  std::shared_ptr<const ProtocolProgram> program;
  std::string name;
  int n = 0;
  std::optional<Rational> eps;
  FairnessClass fairness_class = FairnessClass::kProportional;
  std::function<std::vector<Strategy>(const ValuationProfile&)> honest;
};

// The two-agent protocol: agent 1 cuts, agent 2 picks its preferred piece,
// agent 1 keeps the remainder.
GeneratedProtocol cut_and_choose();

// n moving-knife rounds made discrete: every remaining agent cuts, the
// leftmost cut (ties to the smallest index) wins that round's piece.
GeneratedProtocol dubins_spanier(int n);

// Divide and conquer halving; n must be a power of two.
GeneratedProtocol even_paz(int n);

// Three agents, trim-based, envy-free under honest play.
GeneratedProtocol selfridge_conway();

// Agent 1 demarcates a contiguous allocation and every agent may steal a
// strict subpiece of someone else's piece during its verification round;
// a steal ends the protocol with everyone else empty-handed.
GeneratedProtocol thieves(int n);

// Every agent makes ceil(n/eps) cuts anywhere, then agents take their
// favorite remaining piece in round-robin order until none are left.
GeneratedProtocol oblivious_round_robin(int n, const Rational& eps);

// The equilibrium strategy profile supporting a given contiguous allocation
// z (z[i] is agent i+1's piece) in the thieves protocol: agent 1 demarcates
// z and every agent cuts its own piece's endpoints in its verification
// round, at every node of the game tree. Throws InvalidAllocation unless z
// partitions [0,1] into n nonempty intervals.
std::vector<Strategy> thieves_ne_strategies(const GeneratedProtocol& protocol,
                                            const std::vector<Interval>& z);

// Lookup by the short names used on the command line:
// cc, ds, ep, sc, thieves, orr.
GeneratedProtocol generate_protocol(const std::string& name, int n,
                                    const std::optional<Rational>& eps);

// Best available option by own value, lowest index on ties.
Action pick_best_option(const PiecewiseDensity& density,
                        const DecisionNode& node);

}  // namespace fairdiv

#endif  // FAIRDIV_PROTOCOLS_HPP_
