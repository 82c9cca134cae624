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

#ifndef FAIRDIV_SOLVER_HPP_
#define FAIRDIV_SOLVER_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "fairdiv/engine.hpp"

namespace fairdiv {

// Nested discretization grids G_1 .. G_K. Every consecutive pair of points
// on any grid is worth at most eps/(2 f_n) to every agent, and G_{i+1} adds
// exactly the midpoint of every G_i cell.
struct GridFamily {
  std::vector<std::vector<Rational>> grids;  // grids[i] is G_{i+1}
  Rational threshold;                        // eps / (2 * f_n)
  long f_n = 0;
  int K = 0;
  Rational eps;

  const std::vector<Rational>& grid(int ordinal) const;  // 1-based
};

// G_1 is the union over agents of that agent's exact value quantiles at
// steps of eps/(2 f_n), plus {0,1}; each further grid inserts midpoints.
// Throws DegenerateEps when eps <= 0.
GridFamily build_grids(const ValuationProfile& profile, const Rational& eps,
                       long f_n, int K);

// One extra midpoint-insertion level on every grid; all family invariants
// are preserved.
GridFamily refine(const GridFamily& family);

// Order-preserving, injective, boundary-fixing map of a cut history onto
// the grids: cuts[i] (the (i+1)-th cut made) maps to the closest feasible
// point of G_{i+1}. Equal inputs map to equal outputs, 0 and 1 map to
// themselves and to nothing else.
std::vector<Rational> map_history(const std::vector<Rational>& cuts,
                                  const GridFamily& family);

// Product upper bound on the discrete game size, maximized over branches.
std::uint64_t estimate_tree_size(const ProtocolProgram& program,
                                 const GridFamily& family);

inline constexpr const char* kTieBreakId = "lowest-action-index";

struct EquilibriumCertificate {
  std::vector<Rational> utilities;
  Rational eps;
  std::vector<Rational> per_agent_regret_bound;  // eps for every agent
  std::vector<std::size_t> grid_sizes;
  std::uint64_t node_count = 0;
  std::string tiebreak_id = kTieBreakId;
};

struct SolveOptions {
  std::uint64_t budget = std::uint64_t{1} << 42;
  int threads = 1;  // >1 splits the root action set, result is identical
};

namespace internal {
class CompiledGame;
class InductionEngine;
}  // namespace internal

// The solved discrete profile: the optimal action at every reachable node
// of the discretized game, materialized lazily from the induction memo.
// Keeps references into the program/profile/grids given to
// backward_induction; they must outlive it.
class DiscreteStrategyProfile {
 public:
  ~DiscreteStrategyProfile();

  // Prescribed action at the pending decision node of a state whose cut
  // coordinates already lie on the grids.
  Action action_at_discrete(const ExecutionState& state) const;

  // Maps the state's cut history onto the grids first; this is the
  // continuous lift used when auditing deviations off the grid.
  Action action_at(const ExecutionState& state) const;

  // Canonical-key -> action rows for every cut node the induction expanded.
  std::map<std::string, Action> cut_action_table() const;

  const GridFamily& grids() const;
  const ProgramLayout& layout() const;

 private:
  DiscreteStrategyProfile() = default;
  struct Impl;
  std::unique_ptr<Impl> impl_;
  friend struct SolveAccess;
};

struct SolveResult {
  EquilibriumCertificate certificate;
  std::shared_ptr<DiscreteStrategyProfile> profile;
};

// Exact optimal play of the discretized game, leaves to root, the i-th cut
// restricted to G_i, ties broken to the lowest action index. Throws
// CutOrdinalExceedsK if the program can cut more than K times on some path
// and BudgetExceeded when the size estimate exceeds options.budget.
SolveResult backward_induction(const ProtocolProgram& program,
                               const ValuationProfile& profile,
                               const GridFamily& grids,
                               const SolveOptions& options = {});

// Strategies that follow the discrete profile from any reachable state.
std::vector<Strategy> lifted_strategies(
    std::shared_ptr<const DiscreteStrategyProfile> profile);

}  // namespace fairdiv

#endif  // FAIRDIV_SOLVER_HPP_
