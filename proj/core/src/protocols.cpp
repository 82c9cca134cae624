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
#include <functional>
#include <utility>

#include "fairdiv/protocols.hpp"

namespace fairdiv {

Action pick_best_option(const PiecewiseDensity& density,
                        const DecisionNode& node) {
  int best = 1;
  Rational best_value = value_of_piece(density, node.options.front());
  for (int i = 2; i <= static_cast<int>(node.options.size()); ++i) {
    Rational value = value_of_piece(density, node.options[i - 1]);
    if (value > best_value) {
      best = i;
      best_value = std::move(value);
    }
  }
  return Action::choose(best);
}

namespace {

EndpointExpr ep_cut(const std::string& label) { return EndpointExpr::cut(label); }

// Mark alpha of own value from the left edge of the node's feasible region,
// clamped so the strategy stays legal off the honest path.
Action mark_from_feasible(const PiecewiseDensity& density,
                          const DecisionNode& node, const Rational& alpha) {
  const Interval& region = node.feasible.front();
  const Rational available = eval(density, region);
  const Rational target = std::min(alpha, available);
  return Action::cut_at(mark(density, region.lo, target));
}

int label_suffix(const std::string& label) {
  std::size_t pos = label.find_last_of('_');
  return std::stoi(label.substr(pos == std::string::npos ? 1 : pos + 1));
}

}  // namespace

GeneratedProtocol cut_and_choose() {
  std::vector<Statement> body;
  body.push_back(make_cut(1, {whole_cake()}, "x"));
  body.push_back(make_choose(
      2, {{EndpointExpr::zero(), ep_cut("x")}, {ep_cut("x"), EndpointExpr::one()}},
      "c"));
  body.push_back(make_if(
      Condition::chose("c", 1),
      {make_choose(1, {{ep_cut("x"), EndpointExpr::one()}}, "r")},
      {make_choose(1, {{EndpointExpr::zero(), ep_cut("x")}}, "r")}));

  GeneratedProtocol proto;
  proto.program =
      std::make_shared<const ProtocolProgram>(make_program(2, std::move(body)));
  proto.name = "cut_and_choose";
  proto.n = 2;
  proto.fairness_class = FairnessClass::kEnvyFree;
  proto.honest = [](const ValuationProfile& profile) {
    std::vector<Strategy> out;
    for (int agent = 1; agent <= 2; ++agent) {
      PiecewiseDensity density = profile.agents[static_cast<std::size_t>(agent - 1)];
      out.push_back([density](const DecisionNode& node) {
        if (node.kind == DecisionNode::Kind::kCut)
          return mark_from_feasible(density, node, make_rational(1, 2));
        return pick_best_option(density, node);
      });
    }
    return out;
  };
  return proto;
}

GeneratedProtocol dubins_spanier(int n) {
  if (n < 2) throw UnsupportedN("dubins_spanier needs n >= 2");

  std::function<std::vector<Statement>(int, std::vector<int>, EndpointExpr)>
      build = [&](int round, std::vector<int> remaining,
                  EndpointExpr left) -> std::vector<Statement> {
    std::vector<Statement> out;
    const std::string round_text = std::to_string(round);
    if (remaining.size() == 1) {
      out.push_back(make_choose(remaining.front(),
                                {{left, EndpointExpr::one()}},
                                "take" + round_text));
      return out;
    }
    auto cut_label = [&](int agent) {
      return "c" + round_text + "_" + std::to_string(agent);
    };
    for (int agent : remaining)
      out.push_back(
          make_cut(agent, {{left, EndpointExpr::one()}}, cut_label(agent)));

    // Winner ladder: the leftmost cut wins, ties to the smallest index. The
    // last candidate needs no guard of its own.
    std::vector<Statement> tail;
    for (int idx = static_cast<int>(remaining.size()) - 1; idx >= 0; --idx) {
      const int winner = remaining[static_cast<std::size_t>(idx)];
      std::vector<Statement> body;
      body.push_back(make_choose(winner, {{left, ep_cut(cut_label(winner))}},
                                 "take" + round_text + "_" +
                                     std::to_string(winner)));
      std::vector<int> rest;
      for (int j : remaining)
        if (j != winner) rest.push_back(j);
      std::vector<Statement> sub =
          build(round + 1, std::move(rest), ep_cut(cut_label(winner)));
      for (Statement& stmt : sub) body.push_back(std::move(stmt));
      if (idx == static_cast<int>(remaining.size()) - 1) {
        tail = std::move(body);
        continue;
      }
      std::vector<Condition> atoms;
      for (int j : remaining) {
        if (j == winner) continue;
        atoms.push_back(Condition::order(ep_cut(cut_label(winner)),
                                         j < winner ? RelOp::kLt : RelOp::kLe,
                                         ep_cut(cut_label(j))));
      }
      std::vector<Statement> wrapped;
      wrapped.push_back(make_if(Condition::all_of(std::move(atoms)),
                                std::move(body), std::move(tail)));
      tail = std::move(wrapped);
    }
    for (Statement& stmt : tail) out.push_back(std::move(stmt));
    return out;
  };

  std::vector<int> agents(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) agents[static_cast<std::size_t>(i)] = i + 1;

  GeneratedProtocol proto;
  proto.program = std::make_shared<const ProtocolProgram>(
      make_program(n, build(1, std::move(agents), EndpointExpr::zero())));
  proto.name = "dubins_spanier";
  proto.n = n;
  proto.fairness_class = FairnessClass::kProportional;
  proto.honest = [n](const ValuationProfile& profile) {
    std::vector<Strategy> out;
    for (int agent = 1; agent <= n; ++agent) {
      PiecewiseDensity density = profile.agents[static_cast<std::size_t>(agent - 1)];
      const Rational share = make_rational(1, n);
      out.push_back([density, share](const DecisionNode& node) {
        if (node.kind == DecisionNode::Kind::kCut)
          return mark_from_feasible(density, node, share);
        return pick_best_option(density, node);
      });
    }
    return out;
  };
  return proto;
}

GeneratedProtocol even_paz(int n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw UnsupportedN("even_paz needs a power of two, got " +
                       std::to_string(n));

  int next_block = 0;
  std::function<std::vector<Statement>(std::vector<int>, EndpointExpr,
                                       EndpointExpr)>
      build = [&](std::vector<int> agents, EndpointExpr left,
                  EndpointExpr right) -> std::vector<Statement> {
    const int block = next_block++;
    const std::string block_text = std::to_string(block);
    std::vector<Statement> out;
    if (agents.size() == 1) {
      out.push_back(
          make_choose(agents.front(), {{left, right}}, "p" + block_text));
      return out;
    }
    auto cut_label = [&](int agent) {
      return "e" + block_text + "_" + std::to_string(agent);
    };
    for (int agent : agents)
      out.push_back(make_cut(agent, {{left, right}}, cut_label(agent)));

    const int half = static_cast<int>(agents.size()) / 2;
    // Enumerate (bottom half B, median m = latest of B in cut order); the
    // conditions pin the sorted-by-(cut, index) partition exactly.
    struct Case {
      std::vector<int> bottom;
      int median;
    };
    std::vector<Case> cases;
    std::vector<int> combo;
    std::function<void(std::size_t)> enumerate = [&](std::size_t start) {
      if (static_cast<int>(combo.size()) == half) {
        for (int median : combo) cases.push_back({combo, median});
        return;
      }
      for (std::size_t i = start; i < agents.size(); ++i) {
        combo.push_back(agents[i]);
        enumerate(i + 1);
        combo.pop_back();
      }
    };
    enumerate(0);

    std::vector<Statement> tail;
    for (int idx = static_cast<int>(cases.size()) - 1; idx >= 0; --idx) {
      const Case& c = cases[static_cast<std::size_t>(idx)];
      std::vector<int> top;
      for (int agent : agents)
        if (std::find(c.bottom.begin(), c.bottom.end(), agent) ==
            c.bottom.end())
          top.push_back(agent);

      std::vector<Statement> body =
          build(c.bottom, left, ep_cut(cut_label(c.median)));
      std::vector<Statement> right_body =
          build(std::move(top), ep_cut(cut_label(c.median)), right);
      for (Statement& stmt : right_body) body.push_back(std::move(stmt));

      if (idx == static_cast<int>(cases.size()) - 1) {
        tail = std::move(body);
        continue;
      }
      std::vector<Condition> atoms;
      for (int j : c.bottom) {
        if (j == c.median) continue;
        atoms.push_back(Condition::order(ep_cut(cut_label(j)),
                                         j < c.median ? RelOp::kLe : RelOp::kLt,
                                         ep_cut(cut_label(c.median))));
      }
      for (int agent : agents) {
        if (std::find(c.bottom.begin(), c.bottom.end(), agent) !=
            c.bottom.end())
          continue;
        atoms.push_back(Condition::order(ep_cut(cut_label(c.median)),
                                         c.median < agent ? RelOp::kLe
                                                          : RelOp::kLt,
                                         ep_cut(cut_label(agent))));
      }
      std::vector<Statement> wrapped;
      wrapped.push_back(make_if(Condition::all_of(std::move(atoms)),
                                std::move(body), std::move(tail)));
      tail = std::move(wrapped);
    }
    for (Statement& stmt : tail) out.push_back(std::move(stmt));
    return out;
  };

  std::vector<int> agents(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) agents[static_cast<std::size_t>(i)] = i + 1;

  GeneratedProtocol proto;
  proto.program = std::make_shared<const ProtocolProgram>(make_program(
      n, build(std::move(agents), EndpointExpr::zero(), EndpointExpr::one())));
  proto.name = "even_paz";
  proto.n = n;
  proto.fairness_class = FairnessClass::kProportional;
  proto.honest = [n](const ValuationProfile& profile) {
    std::vector<Strategy> out;
    for (int agent = 1; agent <= n; ++agent) {
      PiecewiseDensity density = profile.agents[static_cast<std::size_t>(agent - 1)];
      out.push_back([density](const DecisionNode& node) {
        if (node.kind == DecisionNode::Kind::kCut) {
          const Rational half_of_block =
              eval(density, node.feasible.front()) / 2;
          return Action::cut_at(
              mark(density, node.feasible.front().lo, half_of_block));
        }
        return pick_best_option(density, node);
      });
    }
    return out;
  };
  return proto;
}

namespace {

// Shares of the trimmings [elo, ehi]: the trimmed-main taker picks first,
// then agent 1, then the divider takes what is left.
std::vector<Statement> sc_trimmings(int divider, int taker,
                                    const EndpointExpr& elo,
                                    const EndpointExpr& ehi) {
  std::vector<Statement> out;
  out.push_back(make_cut(divider, {{elo, ehi}}, "u"));
  out.push_back(make_cut(divider, {{elo, ehi}}, "v"));

  auto picks = [&](const PieceExpr& s1, const PieceExpr& s2,
                   const PieceExpr& s3) {
    std::vector<Statement> body;
    body.push_back(make_choose(taker, {s1, s2, s3}, "e1"));
    auto second_and_last = [&](const PieceExpr& first_left,
                               const PieceExpr& second_left) {
      std::vector<Statement> inner;
      inner.push_back(make_choose(1, {first_left, second_left}, "e2"));
      inner.push_back(make_if(Condition::chose("e2", 1),
                              {make_choose(divider, {second_left}, "e3")},
                              {make_choose(divider, {first_left}, "e3")}));
      return inner;
    };
    body.push_back(make_if(
        Condition::chose("e1", 1), second_and_last(s2, s3),
        {make_if(Condition::chose("e1", 2), second_and_last(s1, s3),
                 second_and_last(s1, s2))}));
    return body;
  };

  const PieceExpr low{elo, ep_cut("u")};
  const PieceExpr mid{ep_cut("u"), ep_cut("v")};
  const PieceExpr high{ep_cut("v"), ehi};
  const PieceExpr low_v{elo, ep_cut("v")};
  const PieceExpr mid_v{ep_cut("v"), ep_cut("u")};
  const PieceExpr high_u{ep_cut("u"), ehi};
  out.push_back(make_if(Condition::order(ep_cut("u"), RelOp::kLe, ep_cut("v")),
                        picks(low, mid, high), picks(low_v, mid_v, high_u)));
  return out;
}

// One trim branch: agent 2 trims piece j (kept as [lo_j, t], trimmings
// [t, hi_j]), agent 3 picks a main, agent 2 must take the trimmed main if
// agent 3 left it, agent 1 takes the remaining one, then the trimmings are
// divided by whichever of {2,3} did not take the trimmed main.
std::vector<Statement> sc_trim_branch(int j,
                                      const std::vector<PieceExpr>& pieces) {
  std::vector<Statement> out;
  const PieceExpr& trimmed = pieces[static_cast<std::size_t>(j - 1)];
  out.push_back(make_cut(2, {trimmed}, "t"));

  std::vector<PieceExpr> mains = pieces;
  mains[static_cast<std::size_t>(j - 1)] = {trimmed.a, ep_cut("t")};
  out.push_back(make_choose(3, {mains[0], mains[1], mains[2]}, "c3"));

  std::vector<int> others;
  for (int k = 1; k <= 3; ++k)
    if (k != j) others.push_back(k);
  const PieceExpr& other_a = mains[static_cast<std::size_t>(others[0] - 1)];
  const PieceExpr& other_b = mains[static_cast<std::size_t>(others[1] - 1)];

  // Agent 3 took the trimmed main: agent 2 picks freely, agent 1 takes the
  // leftover, agent 2 divides the trimmings and agent 3 picks first.
  std::vector<Statement> taken_by_3;
  taken_by_3.push_back(make_choose(2, {other_a, other_b}, "c2"));
  taken_by_3.push_back(make_if(Condition::chose("c2", 1),
                               {make_choose(1, {other_b}, "c1")},
                               {make_choose(1, {other_a}, "c1")}));
  {
    std::vector<Statement> trimmings =
        sc_trimmings(2, 3, ep_cut("t"), trimmed.b);
    for (Statement& stmt : trimmings) taken_by_3.push_back(std::move(stmt));
  }

  // Agent 3 took a whole piece: agent 2 is committed to the trimmed main,
  // agent 1 takes the remaining whole piece, agent 3 divides the trimmings
  // and agent 2 picks first.
  std::vector<Statement> taken_other;
  taken_other.push_back(
      make_choose(2, {mains[static_cast<std::size_t>(j - 1)]}, "c2"));
  taken_other.push_back(make_if(Condition::chose("c3", others[0]),
                                {make_choose(1, {other_b}, "c1")},
                                {make_choose(1, {other_a}, "c1")}));
  {
    std::vector<Statement> trimmings =
        sc_trimmings(3, 2, ep_cut("t"), trimmed.b);
    for (Statement& stmt : trimmings) taken_other.push_back(std::move(stmt));
  }

  out.push_back(make_if(Condition::chose("c3", j), std::move(taken_by_3),
                        std::move(taken_other)));
  return out;
}

// After agent 1's two cuts the pieces are ([0,x], [x,y], [y,1]); agent 2
// signals the piece it will trim by cutting s anywhere inside it.
std::vector<Statement> sc_after_order(const std::string& x,
                                      const std::string& y) {
  const std::vector<PieceExpr> pieces = {
      {EndpointExpr::zero(), ep_cut(x)},
      {ep_cut(x), ep_cut(y)},
      {ep_cut(y), EndpointExpr::one()}};
  std::vector<Statement> out;
  out.push_back(make_cut(2, {whole_cake()}, "s"));
  out.push_back(make_if(
      Condition::order(ep_cut("s"), RelOp::kLe, ep_cut(x)),
      sc_trim_branch(1, pieces),
      {make_if(Condition::order(ep_cut("s"), RelOp::kLe, ep_cut(y)),
               sc_trim_branch(2, pieces), sc_trim_branch(3, pieces))}));
  return out;
}

struct ScPieceView {
  Rational lo;
  Rational hi;
  Rational value;
};

std::vector<ScPieceView> sc_pieces(const ProtocolProgram& program,
                                   const ExecutionState& state,
                                   const PiecewiseDensity& density) {
  const Rational* a = state.binding(program.label_id("a"));
  const Rational* b = state.binding(program.label_id("b"));
  if (a == nullptr || b == nullptr)
    throw EngineError("selfridge_conway cuts are not bound yet");
  Rational x = *a, y = *b;
  if (y < x) std::swap(x, y);
  std::vector<ScPieceView> views;
  const Rational bounds[4] = {Rational(0), x, y, Rational(1)};
  for (int i = 0; i < 3; ++i) {
    Interval iv(bounds[i], bounds[i + 1]);
    views.push_back({iv.lo, iv.hi, eval(density, iv)});
  }
  return views;
}

}  // namespace

GeneratedProtocol selfridge_conway() {
  std::vector<Statement> body;
  body.push_back(make_cut(1, {whole_cake()}, "a"));
  body.push_back(make_cut(1, {whole_cake()}, "b"));
  body.push_back(make_if(Condition::order(ep_cut("a"), RelOp::kLe, ep_cut("b")),
                         sc_after_order("a", "b"), sc_after_order("b", "a")));

  GeneratedProtocol proto;
  proto.program =
      std::make_shared<const ProtocolProgram>(make_program(3, std::move(body)));
  proto.name = "selfridge_conway";
  proto.n = 3;
  proto.fairness_class = FairnessClass::kEnvyFree;

  std::shared_ptr<const ProtocolProgram> program = proto.program;
  proto.honest = [program](const ValuationProfile& profile) {
    std::vector<Strategy> out;
    for (int agent = 1; agent <= 3; ++agent) {
      PiecewiseDensity density = profile.agents[static_cast<std::size_t>(agent - 1)];
      out.push_back([program, density](const DecisionNode& node) {
        if (node.kind != DecisionNode::Kind::kCut)
          return pick_best_option(density, node);
        if (node.label == "a")
          return Action::cut_at(mark(density, Rational(0), make_rational(1, 3)));
        if (node.label == "b")
          return Action::cut_at(mark(density, Rational(0), make_rational(2, 3)));
        if (node.label == "s") {
          // Signal the most valuable piece by cutting strictly inside it.
          std::vector<ScPieceView> views =
              sc_pieces(*program, *node.state, density);
          int best = 0;
          for (int i = 1; i < 3; ++i)
            if (views[static_cast<std::size_t>(i)].value >
                views[static_cast<std::size_t>(best)].value)
              best = i;
          return Action::cut_at(midpoint(views[static_cast<std::size_t>(best)].lo,
                                         views[static_cast<std::size_t>(best)].hi));
        }
        if (node.label == "t") {
          // Keep exactly the second-largest value in the trimmed main.
          std::vector<ScPieceView> views =
              sc_pieces(*program, *node.state, density);
          std::vector<Rational> values;
          for (const ScPieceView& view : views) values.push_back(view.value);
          std::sort(values.begin(), values.end());
          return mark_from_feasible(density, node, values[1]);
        }
        // u, v: split the trimmings into own-value thirds.
        const Rational total = eval(density, node.feasible.front());
        const Rational alpha =
            node.label == "u" ? Rational(total / 3) : Rational(2 * total / 3);
        return Action::cut_at(mark(density, node.feasible.front().lo, alpha));
      });
    }
    return out;
  };
  return proto;
}

GeneratedProtocol oblivious_round_robin(int n, const Rational& eps) {
  if (n < 2) throw UnsupportedN("oblivious_round_robin needs n >= 2");
  if (eps <= 0 || eps > 1)
    throw Error("eps must be in (0, 1], got " + rational_string(eps));
  const long cuts_per_agent = rational_ceil(Rational(n) / eps);
  const long rounds = static_cast<long>(n) * cuts_per_agent + 1;

  std::vector<Statement> body;
  for (int agent = 1; agent <= n; ++agent)
    for (long k = 1; k <= cuts_per_agent; ++k)
      body.push_back(make_cut(agent, {whole_cake()},
                              "c" + std::to_string(agent) + "_" +
                                  std::to_string(k)));
  for (long r = 1; r <= rounds; ++r)
    body.push_back(make_choose_any(static_cast<int>((r - 1) % n) + 1,
                                   "p" + std::to_string(r)));

  GeneratedProtocol proto;
  proto.program =
      std::make_shared<const ProtocolProgram>(make_program(n, std::move(body)));
  proto.name = "oblivious_round_robin";
  proto.n = n;
  proto.eps = eps;
  proto.fairness_class = FairnessClass::kEpsEnvyFree;
  proto.honest = [n, cuts_per_agent](const ValuationProfile& profile) {
    std::vector<Strategy> out;
    for (int agent = 1; agent <= n; ++agent) {
      PiecewiseDensity density = profile.agents[static_cast<std::size_t>(agent - 1)];
      out.push_back([density, cuts_per_agent](const DecisionNode& node) {
        if (node.kind == DecisionNode::Kind::kCut) {
          // k-th own-value quantile out of cuts_per_agent + 1 equal parts.
          const long k = label_suffix(node.label);
          return Action::cut_at(mark(density, Rational(0),
                                     make_rational(k, cuts_per_agent + 1)));
        }
        return pick_best_option(density, node);
      });
    }
    return out;
  };
  return proto;
}

GeneratedProtocol generate_protocol(const std::string& name, int n,
                                    const std::optional<Rational>& eps) {
  if (name == "cc" || name == "cut_and_choose") return cut_and_choose();
  if (name == "ds" || name == "dubins_spanier") return dubins_spanier(n);
  if (name == "ep" || name == "even_paz") return even_paz(n);
  if (name == "sc" || name == "selfridge_conway") return selfridge_conway();
  if (name == "thieves") return thieves(n);
  if (name == "orr" || name == "oblivious_round_robin") {
    if (!eps) throw Error("oblivious_round_robin needs --eps");
    return oblivious_round_robin(n, *eps);
  }
  throw Error("unknown protocol \"" + name + "\"");
}

}  // namespace fairdiv
