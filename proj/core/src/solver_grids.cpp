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
#include <limits>

#include "fairdiv/solver.hpp"

namespace fairdiv {

const std::vector<Rational>& GridFamily::grid(int ordinal) const {
  if (ordinal < 1 || ordinal > K)
    throw CutOrdinalExceedsK("cut ordinal " + std::to_string(ordinal) +
                             " exceeds K=" + std::to_string(K));
  return grids[static_cast<std::size_t>(ordinal - 1)];
}

namespace {

std::vector<Rational> insert_midpoints(const std::vector<Rational>& grid) {
  std::vector<Rational> finer;
  finer.reserve(grid.size() * 2 - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i) finer.push_back(midpoint(grid[i - 1], grid[i]));
    finer.push_back(grid[i]);
  }
  return finer;
}

}  // namespace

GridFamily build_grids(const ValuationProfile& profile, const Rational& eps,
                       long f_n, int K) {
  if (eps <= 0) throw DegenerateEps("eps must be positive");
  if (f_n < 1) throw Error("f_n must be at least 1");
  if (K < 0 || K > f_n) throw Error("K must be between 0 and f_n");

  GridFamily family;
  family.eps = eps;
  family.f_n = f_n;
  family.K = K;
  family.threshold = eps / (2 * Rational(f_n));
  if (K == 0) return family;

  // Guard against absurd grid sizes before allocating them.
  const Rational points_bound = 1 / family.threshold;
  if (points_bound > 2'000'000)
    throw BudgetExceeded("grid would need more than 2e6 points per agent",
                         std::numeric_limits<std::uint64_t>::max());

  std::vector<Rational> base;
  base.emplace_back(0);
  base.emplace_back(1);
  for (const PiecewiseDensity& density : profile.agents) {
    // Exact value quantiles: every cell between consecutive quantile points
    // is worth at most the threshold to this agent, and G_1 refines every
    // agent's quantile partition simultaneously.
    for (Rational level = family.threshold; level < 1;
         level += family.threshold)
      base.push_back(mark(density, Rational(0), level));
  }
  std::sort(base.begin(), base.end());
  base.erase(std::unique(base.begin(), base.end()), base.end());

  family.grids.push_back(std::move(base));
  for (int i = 1; i < K; ++i)
    family.grids.push_back(insert_midpoints(family.grids.back()));
  return family;
}

GridFamily refine(const GridFamily& family) {
  GridFamily finer = family;
  for (std::vector<Rational>& grid : finer.grids) grid = insert_midpoints(grid);
  return finer;
}

std::vector<Rational> map_history(const std::vector<Rational>& cuts,
                                  const GridFamily& family) {
  std::vector<Rational> mapped;
  mapped.reserve(cuts.size());
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const Rational& x = cuts[i];
    if (x < 0 || x > 1) throw Error("cut history leaves the cake");
    if (x == 0 || x == 1) {
      mapped.push_back(x);
      continue;
    }
    // Repeated coordinates share an image (ties must stay ties).
    bool duplicate = false;
    for (std::size_t j = 0; j < i; ++j) {
      if (cuts[j] == x) {
        mapped.push_back(mapped[j]);
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;

    const std::vector<Rational>& grid =
        family.grid(static_cast<int>(i) + 1);
    // The image must fall strictly between the images of the neighbors of x
    // among earlier cuts (and strictly inside (0,1)).
    Rational lower(0);
    Rational upper(1);
    for (std::size_t j = 0; j < i; ++j) {
      if (cuts[j] < x)
        lower = std::max(lower, mapped[j]);
      else
        upper = std::min(upper, mapped[j]);
    }
    auto begin = std::upper_bound(grid.begin(), grid.end(), lower);
    auto end = std::lower_bound(grid.begin(), grid.end(), upper);
    if (begin >= end)
      throw Error("no feasible grid point for cut " + rational_string(x));
    // Closest feasible point by absolute distance, ties to the left. Since
    // the window is sorted, only the two points bracketing x can win.
    auto right = std::lower_bound(begin, end, x);
    const Rational* best;
    if (right == end) {
      best = &*(end - 1);
    } else if (right == begin) {
      best = &*begin;
    } else {
      const Rational& lo = *(right - 1);
      const Rational& hi = *right;
      best = (Rational(x - lo) <= Rational(hi - x)) ? &lo : &hi;
    }
    mapped.push_back(*best);
  }
  return mapped;
}

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > kSaturated / b) return kSaturated;
  return a * b;
}

struct EstimateCont {
  const std::vector<Statement>* list;
  std::size_t index;
};

std::uint64_t estimate_from(std::vector<EstimateCont> stack, int cuts_done,
                            int chooseany_taken, const GridFamily& family) {
  while (!stack.empty()) {
    EstimateCont& top = stack.back();
    if (top.index >= top.list->size()) {
      stack.pop_back();
      continue;
    }
    const Statement& stmt = (*top.list)[top.index];
    ++top.index;
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      (void)cut;
      const std::uint64_t fanout =
          family.grid(cuts_done + 1).size();
      return saturating_mul(fanout, estimate_from(std::move(stack),
                                                  cuts_done + 1,
                                                  chooseany_taken, family));
    }
    if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
      return saturating_mul(choose->pieces.size(),
                            estimate_from(std::move(stack), cuts_done,
                                          chooseany_taken, family));
    }
    if (std::holds_alternative<ChooseAnyStmt>(stmt.node)) {
      const int cells = cuts_done + 1 - chooseany_taken;
      return saturating_mul(
          static_cast<std::uint64_t>(std::max(cells, 1)),
          estimate_from(std::move(stack), cuts_done, chooseany_taken + 1,
                        family));
    }
    if (std::holds_alternative<ExitStmt>(stmt.node)) return 1;
    const auto& branch = std::get<IfStmt>(stmt.node);
    std::vector<EstimateCont> then_stack = stack;
    then_stack.push_back({&branch.then_body, 0});
    const std::uint64_t for_then = estimate_from(
        std::move(then_stack), cuts_done, chooseany_taken, family);
    std::vector<EstimateCont> else_stack = std::move(stack);
    else_stack.push_back({&branch.else_body, 0});
    const std::uint64_t for_else = estimate_from(
        std::move(else_stack), cuts_done, chooseany_taken, family);
    return std::max(for_then, for_else);
  }
  return 1;
}

}  // namespace

std::uint64_t estimate_tree_size(const ProtocolProgram& program,
                                 const GridFamily& family) {
  return estimate_from({{&program.body, 0}}, 0, 0, family);
}

}  // namespace fairdiv
