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
#include <numeric>
#include <utility>

#include "fairdiv/protocols.hpp"

namespace fairdiv {

namespace {

struct SymbolicPiece {
  EndpointExpr lo;
  EndpointExpr hi;
};

std::string w_label(int agent) { return "w" + std::to_string(agent); }
std::string z_label(int agent) { return "z" + std::to_string(agent); }

// "[w_i, z_i] intersects X_j in a nonempty strict subset": all of
// max(w, a) < min(z, b) plus the subset being strictly smaller than [a, b].
Condition steal_condition(int agent, const SymbolicPiece& piece) {
  const EndpointExpr w = EndpointExpr::cut(w_label(agent));
  const EndpointExpr z = EndpointExpr::cut(z_label(agent));
  std::vector<Condition> atoms;
  atoms.push_back(Condition::order(w, RelOp::kLt, z));
  atoms.push_back(Condition::order(piece.lo, RelOp::kLt, piece.hi));
  atoms.push_back(Condition::order(w, RelOp::kLt, piece.hi));
  atoms.push_back(Condition::order(piece.lo, RelOp::kLt, z));
  atoms.push_back(Condition::any_of(
      {Condition::order(piece.lo, RelOp::kLt, w),
       Condition::order(z, RelOp::kLt, piece.hi)}));
  return Condition::all_of(std::move(atoms));
}

// The stolen piece is [max(w, a), min(z, b)], spelled out symbolically.
std::vector<Statement> steal_body(int agent, int victim,
                                  const SymbolicPiece& piece) {
  const EndpointExpr w = EndpointExpr::cut(w_label(agent));
  const EndpointExpr z = EndpointExpr::cut(z_label(agent));
  const std::string label =
      "s" + std::to_string(agent) + "_" + std::to_string(victim);
  auto take = [&](const EndpointExpr& lo, const EndpointExpr& hi) {
    return make_choose(agent, {{lo, hi}}, label);
  };
  std::vector<Statement> out;
  out.push_back(make_if(
      Condition::order(piece.lo, RelOp::kLt, w),
      {make_if(Condition::order(z, RelOp::kLt, piece.hi), {take(w, z)},
               {take(w, piece.hi)})},
      {make_if(Condition::order(z, RelOp::kLt, piece.hi), {take(piece.lo, z)},
               {take(piece.lo, piece.hi)})}));
  out.push_back(make_exit());
  return out;
}

std::vector<Statement> build_verification(const std::vector<int>& rounds,
                                          std::size_t round_index,
                                          const std::vector<SymbolicPiece>& x,
                                          int n) {
  if (round_index == rounds.size()) {
    std::vector<Statement> final_chooses;
    for (int i = 1; i <= n; ++i)
      final_chooses.push_back(
          make_choose(i,
                      {{x[static_cast<std::size_t>(i - 1)].lo,
                        x[static_cast<std::size_t>(i - 1)].hi}},
                      "f" + std::to_string(i)));
    return final_chooses;
  }
  const int agent = rounds[round_index];
  std::vector<Statement> out;
  out.push_back(make_cut(agent, {whole_cake()}, w_label(agent)));
  out.push_back(make_cut(
      agent, {{EndpointExpr::cut(w_label(agent)), EndpointExpr::one()}},
      z_label(agent)));

  // The first victim whose piece loses a nonempty strict subset is stolen
  // from; no match means this agent's verification passed.
  std::vector<Statement> tail = build_verification(rounds, round_index + 1, x, n);
  for (int victim = n; victim >= 1; --victim) {
    const SymbolicPiece& piece = x[static_cast<std::size_t>(victim - 1)];
    std::vector<Statement> wrapped;
    wrapped.push_back(make_if(steal_condition(agent, piece),
                              steal_body(agent, victim, piece),
                              std::move(tail)));
    tail = std::move(wrapped);
  }
  for (Statement& stmt : tail) out.push_back(std::move(stmt));
  return out;
}

}  // namespace

GeneratedProtocol thieves(int n) {
  if (n < 2) throw UnsupportedN("thieves needs n >= 2");

  auto d_label = [](int i) { return "d" + std::to_string(i); };

  std::vector<Statement> body;
  for (int i = 1; i <= n; ++i)
    body.push_back(make_cut(1, {whole_cake()}, d_label(i)));

  std::vector<int> rounds;
  for (int i = 2; i <= n; ++i) rounds.push_back(i);
  rounds.push_back(1);

  // One branch per demarcation order; ties among coincident cuts go to the
  // smallest agent index, whose cut counts as the leftmost.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 1);
  std::vector<std::vector<int>> perms;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<Statement> tail;
  for (int idx = static_cast<int>(perms.size()) - 1; idx >= 0; --idx) {
    const std::vector<int>& order = perms[static_cast<std::size_t>(idx)];
    // X_{order[0]} starts at 0; each other piece starts at its own cut and
    // ends at the next cut in demarcation order (or 1).
    std::vector<SymbolicPiece> x(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const int owner = order[static_cast<std::size_t>(k)];
      SymbolicPiece piece;
      piece.lo = k == 0 ? EndpointExpr::zero()
                        : EndpointExpr::cut(d_label(owner));
      piece.hi = k + 1 < n
                     ? EndpointExpr::cut(d_label(order[static_cast<std::size_t>(k + 1)]))
                     : EndpointExpr::one();
      x[static_cast<std::size_t>(owner - 1)] = piece;
    }
    std::vector<Statement> branch_body = build_verification(rounds, 0, x, n);
    if (idx == static_cast<int>(perms.size()) - 1) {
      tail = std::move(branch_body);
      continue;
    }
    std::vector<Condition> atoms;
    for (int k = 0; k + 1 < n; ++k) {
      const int first = order[static_cast<std::size_t>(k)];
      const int second = order[static_cast<std::size_t>(k + 1)];
      atoms.push_back(Condition::order(
          EndpointExpr::cut(d_label(first)),
          first < second ? RelOp::kLe : RelOp::kLt,
          EndpointExpr::cut(d_label(second))));
    }
    std::vector<Statement> wrapped;
    wrapped.push_back(make_if(Condition::all_of(std::move(atoms)),
                              std::move(branch_body), std::move(tail)));
    tail = std::move(wrapped);
  }
  for (Statement& stmt : tail) body.push_back(std::move(stmt));

  GeneratedProtocol proto;
  proto.program =
      std::make_shared<const ProtocolProgram>(make_program(n, std::move(body)));
  proto.name = "thieves";
  proto.n = n;
  proto.fairness_class = FairnessClass::kEnvyFree;

  std::shared_ptr<const ProtocolProgram> program = proto.program;
  proto.honest = [program, n](const ValuationProfile& profile) {
    for (const PiecewiseDensity& density : profile.agents)
      if (!density.strictly_positive())
        throw Error("thieves honest play needs strictly positive valuations");
    // Agent 1 demarcates its own equal split; verification never steals.
    const PiecewiseDensity& first = profile.agents.front();
    std::vector<Interval> z;
    Rational prev(0);
    for (int i = 1; i <= n; ++i) {
      Rational next = i == n ? Rational(1)
                             : mark(first, Rational(0), make_rational(i, n));
      z.emplace_back(prev, next);
      prev = std::move(next);
    }
    GeneratedProtocol view;
    view.program = program;
    view.name = "thieves";
    view.n = n;
    return thieves_ne_strategies(view, z);
  };
  return proto;
}

std::vector<Strategy> thieves_ne_strategies(const GeneratedProtocol& protocol,
                                            const std::vector<Interval>& z) {
  if (protocol.name != "thieves")
    throw Error("strategies require a thieves protocol");
  const int n = protocol.n;
  if (static_cast<int>(z.size()) != n)
    throw InvalidAllocation("need one piece per agent");
  std::vector<Interval> sorted = z;
  std::sort(sorted.begin(), sorted.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  Rational edge(0);
  for (const Interval& piece : sorted) {
    if (piece.lo != edge || piece.empty())
      throw InvalidAllocation(
          "pieces must be nonempty and tile [0,1] contiguously");
    edge = piece.hi;
  }
  if (edge != 1)
    throw InvalidAllocation("pieces must cover the cake up to 1");

  std::vector<Strategy> strategies;
  for (int agent = 1; agent <= n; ++agent) {
    std::vector<Interval> pieces = z;  // shared by every agent's strategy
    strategies.push_back([pieces](const DecisionNode& node) {
      if (node.kind != DecisionNode::Kind::kCut) return Action::choose(1);
      const char head = node.label.front();
      const int index = std::stoi(node.label.substr(1));
      const Interval& piece = pieces[static_cast<std::size_t>(index - 1)];
      // Demarcation cut i marks the left endpoint of piece i; verification
      // cuts land exactly on the agent's own endpoints, everywhere in the
      // game tree.
      if (head == 'd' || head == 'w') return Action::cut_at(piece.lo);
      return Action::cut_at(piece.hi);
    });
  }
  return strategies;
}

}  // namespace fairdiv
