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

#ifndef FAIRDIV_AUDITOR_HPP_
#define FAIRDIV_AUDITOR_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fairdiv/solver.hpp"

namespace fairdiv {

// Everything here recomputes from first principles: fairness from the
// valuations and the allocation, regret by explicit best-response search
// with the other agents' strategies held fixed.

struct FairnessReport {
  std::vector<Rational> proportional_margin;      // u_i - 1/n
  std::vector<std::vector<Rational>> envy;        // envy[i][j] = V_i(X_j) - V_i(X_i)
  Rational eps_used;
  bool proportional = false;
  bool eps_proportional = false;
  bool envy_free = false;
  bool eps_envy_free = false;
};

FairnessReport check_fairness(const std::vector<Piece>& allocation,
                              const ValuationProfile& profile,
                              const Rational& eps);

struct DeviationWitness {
  std::string node_key;
  std::string action;
};

struct RegretEntry {
  Rational max_gain;
  std::optional<DeviationWitness> witness;
};

// Best-response search for one agent with every other agent playing the
// given profile. Cut deviations range over `deviation_cuts` plus the
// feasible-set endpoints, every currently bound coordinate inside the
// feasible set, and the profile's own prescribed cut (so max_gain >= 0);
// choose deviations are unrestricted. Values are memoized across audit()
// calls, so auditing many subtree roots shares work.
class RegretAuditor {
 public:
  RegretAuditor(const ProtocolProgram& program, const ValuationProfile& profile,
                std::vector<Strategy> profile_strategies,
                std::vector<Rational> deviation_cuts);
  ~RegretAuditor();

  RegretEntry audit(int agent, const ExecutionState& root);
  std::uint64_t nodes_expanded() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot form of the search above, from the root or a given state.
RegretEntry best_response_regret(
    const ProtocolProgram& program, const ValuationProfile& profile,
    const std::vector<Strategy>& profile_strategies, int agent,
    const std::vector<Rational>& deviation_cuts,
    const std::optional<ExecutionState>& at_subtree = {});

// All decision nodes of the discretized game at decision depth <= max_depth
// (cut actions range over the grid of their ordinal).
std::vector<ExecutionState> enumerate_subtree_roots(
    const ProtocolProgram& program, const GridFamily& grids, int max_depth);

struct RegretReport {
  std::vector<RegretEntry> per_agent;  // worst case over audited roots
  std::uint64_t audited_roots = 0;
  std::uint64_t nodes_expanded = 0;
  std::size_t deviation_grid_size = 0;
  int depth = 0;
};

// Audits a solved profile: per-agent regret maximized over every subtree
// root of decision depth <= depth, with cut deviations on the solver's
// finest grid refined `grid_refinements` more times.
RegretReport audit_equilibrium(
    const ProtocolProgram& program, const ValuationProfile& profile,
    std::shared_ptr<const DiscreteStrategyProfile> solved, int depth,
    int grid_refinements = 1);

// Brute-force search for a contiguous envy-free allocation on a uniform
// cut grid of the given resolution, over all piece-to-agent assignments.
// Returns the allocation minimizing maximum pairwise envy (n <= 3).
struct EfSearchResult {
  std::vector<Interval> allocation;  // allocation[i] is agent i+1's piece
  Rational max_envy;
  bool envy_free = false;
};

EfSearchResult find_envy_free_contiguous(
    const ValuationProfile& profile, long resolution,
    const std::optional<Rational>& required_bound = {});

}  // namespace fairdiv

#endif  // FAIRDIV_AUDITOR_HPP_
