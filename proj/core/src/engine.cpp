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

#include "fairdiv/engine.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace fairdiv {

namespace {

void set_bit(std::vector<std::uint64_t>& bits, int index) {
  bits[static_cast<std::size_t>(index) / 64] |= std::uint64_t{1} << (index % 64);
}

bool get_bit(const std::vector<std::uint64_t>& bits, int index) {
  return bits[static_cast<std::size_t>(index) / 64] >> (index % 64) & 1;
}

void merge_bits(std::vector<std::uint64_t>& into,
                const std::vector<std::uint64_t>& from) {
  for (std::size_t i = 0; i < into.size(); ++i) into[i] |= from[i];
}

}  // namespace

const Rational* ExecutionState::binding(int label_id) const {
  for (const auto& [id, coordinate] : bindings)
    if (id == label_id) return &coordinate;
  return nullptr;
}

namespace {

Rational resolve_endpoint(const ProtocolProgram& program,
                          const ExecutionState& state, const EndpointExpr& e) {
  switch (e.kind) {
    case EndpointExpr::Kind::kZero: return Rational(0);
    case EndpointExpr::Kind::kOne: return Rational(1);
    case EndpointExpr::Kind::kLabel: {
      const Rational* bound = state.binding(program.label_id(e.label));
      if (bound == nullptr)
        throw UnboundLabel("label \"" + e.label + "\" is not bound");
      return *bound;
    }
  }
  throw EngineError("bad endpoint expression");
}

bool eval_order(const Rational& a, RelOp op, const Rational& b) {
  switch (op) {
    case RelOp::kLt: return a < b;
    case RelOp::kLe: return a <= b;
    case RelOp::kEq: return a == b;
    case RelOp::kGe: return a >= b;
    case RelOp::kGt: return a > b;
  }
  return false;
}

// Sorted multiset of all cut coordinates; cells are the intervals between
// consecutive entries of {0} + cuts + {1}, indexed from 0. Coincident cuts
// keep their empty cells so the cell count never depends on where the cuts
// landed, only on how many were made.
std::vector<Rational> cell_boundaries(const ExecutionState& state) {
  std::vector<Rational> cuts;
  cuts.reserve(state.bindings.size() + 2);
  cuts.emplace_back(0);
  for (const auto& [id, coordinate] : state.bindings)
    cuts.push_back(coordinate);
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.emplace_back(1);
  return cuts;
}

void advance(const ProtocolProgram& program, ExecutionState& state) {
  while (true) {
    if (state.pos.empty()) {
      state.terminated = true;
      return;
    }
    Frame& frame = state.pos.back();
    if (frame.index >= static_cast<int>(frame.list->size())) {
      state.pos.pop_back();
      continue;
    }
    const Statement& stmt = (*frame.list)[frame.index];
    if (std::holds_alternative<ExitStmt>(stmt.node)) {
      state.terminated = true;
      return;
    }
    if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
      ++frame.index;  // consume the if before descending
      const bool taken = eval_condition(program, state, branch->cond);
      const std::vector<Statement>* body =
          taken ? &branch->then_body : &branch->else_body;
      state.pos.push_back({body, 0});
      continue;
    }
    return;  // cut/choose: a decision point
  }
}

}  // namespace

bool eval_condition(const ProtocolProgram& program, const ExecutionState& state,
                    const Condition& cond) {
  switch (cond.kind) {
    case Condition::Kind::kOrder:
      return eval_order(resolve_endpoint(program, state, cond.lhs), cond.op,
                        resolve_endpoint(program, state, cond.rhs));
    case Condition::Kind::kChose: {
      const int label_id = program.label_id(cond.choose_label);
      for (const ChooseEvent& event : state.chooses)
        if (event.label_id == label_id) return event.index == cond.piece_index;
      return false;
    }
    case Condition::Kind::kAllocated:
      return (state.allocated_mask >> (cond.agent - 1)) & 1;
    case Condition::Kind::kAnd:
      for (const Condition& child : cond.children)
        if (!eval_condition(program, state, child)) return false;
      return true;
    case Condition::Kind::kOr:
      for (const Condition& child : cond.children)
        if (eval_condition(program, state, child)) return true;
      return false;
    case Condition::Kind::kNot:
      return !eval_condition(program, state, cond.children.front());
  }
  return false;
}

Interval resolve_piece(const ProtocolProgram& program,
                       const ExecutionState& state, const PieceExpr& piece) {
  Rational a = resolve_endpoint(program, state, piece.a);
  Rational b = resolve_endpoint(program, state, piece.b);
  if (b < a) std::swap(a, b);  // textual order need not match cake order
  return Interval(std::move(a), std::move(b));
}

ExecutionState initial_state(const ProtocolProgram& program,
                             bool record_trace) {
  ExecutionState state;
  state.record_trace = record_trace;
  state.pos.push_back({&program.body, 0});
  advance(program, state);
  return state;
}

std::optional<DecisionNode> decision_node(const ProtocolProgram& program,
                                          const ExecutionState& state) {
  if (state.terminated) return std::nullopt;
  const Frame& frame = state.pos.back();
  const Statement& stmt = (*frame.list)[frame.index];
  DecisionNode node;
  node.state = &state;
  if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
    node.kind = DecisionNode::Kind::kCut;
    node.agent = cut->agent;
    node.label = cut->label;
    node.label_id = program.label_id(cut->label);
    node.feasible.reserve(cut->pieces.size());
    for (const PieceExpr& piece : cut->pieces)
      node.feasible.push_back(resolve_piece(program, state, piece));
  } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
    node.kind = DecisionNode::Kind::kChoose;
    node.agent = choose->agent;
    node.label = choose->label;
    node.label_id = program.label_id(choose->label);
    node.options.reserve(choose->pieces.size());
    for (const PieceExpr& piece : choose->pieces) {
      Interval iv = resolve_piece(program, state, piece);
      node.options.push_back(make_piece({iv}));
    }
  } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
    node.kind = DecisionNode::Kind::kChooseAny;
    node.agent = any->agent;
    node.label = any->label;
    node.label_id = program.label_id(any->label);
    const std::vector<Rational> bounds = cell_boundaries(state);
    for (int cell = 0; cell + 1 < static_cast<int>(bounds.size()); ++cell) {
      if (std::binary_search(state.taken_cells.begin(),
                             state.taken_cells.end(), cell))
        continue;
      node.options.push_back(
          make_piece({Interval(bounds[cell], bounds[cell + 1])}));
      node.option_cells.push_back(cell);
    }
    if (node.options.empty())
      throw EmptyChooseSet("no available piece at choose-any \"" +
                           any->label + "\"");
  } else {
    throw EngineError("state is not positioned at a decision");
  }
  if (node.kind == DecisionNode::Kind::kChoose && node.options.empty())
    throw EmptyChooseSet("empty choose set at \"" + node.label + "\"");
  return node;
}

namespace {

void allocate(ExecutionState& state, int agent, const Piece& piece) {
  for (const auto& [other_agent, interval] : state.allocation) {
    for (const Interval& iv : piece.intervals) {
      const Rational lo = std::max(iv.lo, interval.lo);
      const Rational hi = std::min(iv.hi, interval.hi);
      if (lo < hi)
        throw OverlappingAllocation(
            "piece for agent " + std::to_string(agent) +
            " overlaps an earlier allocation");
    }
  }
  for (const Interval& iv : piece.intervals)
    state.allocation.emplace_back(agent, iv);
  state.allocated_mask |= std::uint32_t{1} << (agent - 1);
}

}  // namespace

ExecutionState step(const ProtocolProgram& program, const ExecutionState& state,
                    const Action& action, const DecisionNode* node) {
  if (state.terminated)
    throw IllegalAction("cannot act on a terminated execution");
  std::optional<DecisionNode> local;
  if (node == nullptr) {
    local = decision_node(program, state);
    node = &*local;
  }
  ExecutionState next = state;
  Frame& frame = next.pos.back();
  if (node->kind == DecisionNode::Kind::kCut) {
    if (action.kind != Action::Kind::kCutAt)
      throw IllegalAction("cut node expects a coordinate");
    if (action.coordinate < 0 || action.coordinate > 1)
      throw IllegalAction("cut at " + rational_string(action.coordinate) +
                          " is outside the cake");
    const bool inside =
        std::any_of(node->feasible.begin(), node->feasible.end(),
                    [&](const Interval& iv) {
                      return iv.lo <= action.coordinate &&
                             action.coordinate <= iv.hi;
                    });
    if (!inside)
      throw IllegalAction("cut at " + rational_string(action.coordinate) +
                          " is outside the feasible set of \"" + node->label +
                          "\"");
    next.bindings.emplace_back(node->label_id, action.coordinate);
    ++next.cuts_done;
    if (next.record_trace) {
      TraceEvent event;
      event.kind = TraceEvent::Kind::kCut;
      event.agent = node->agent;
      event.label_id = node->label_id;
      event.cut_at = action.coordinate;
      next.trace.push_back(std::move(event));
    }
  } else {
    if (action.kind != Action::Kind::kChooseIndex)
      throw IllegalAction("choose node expects an option index");
    if (action.index < 1 ||
        action.index > static_cast<int>(node->options.size()))
      throw IllegalAction("choose index " + std::to_string(action.index) +
                          " out of range at \"" + node->label + "\"");
    const Piece& piece = node->options[action.index - 1];
    allocate(next, node->agent, piece);
    next.chooses.push_back({node->label_id, action.index});
    if (node->kind == DecisionNode::Kind::kChooseAny) {
      const int cell = node->option_cells[action.index - 1];
      next.taken_cells.insert(
          std::lower_bound(next.taken_cells.begin(), next.taken_cells.end(),
                           cell),
          cell);
    }
    if (next.record_trace) {
      TraceEvent event;
      event.kind = node->kind == DecisionNode::Kind::kChooseAny
                       ? TraceEvent::Kind::kChooseAny
                       : TraceEvent::Kind::kChoose;
      event.agent = node->agent;
      event.label_id = node->label_id;
      event.index = action.index;
      event.allocated_iv =
          piece.intervals.empty() ? Interval() : piece.intervals.front();
      next.trace.push_back(std::move(event));
    }
  }
  ++frame.index;
  advance(program, next);
  return next;
}

Outcome outcome_of(const ProtocolProgram& program,
                   const ValuationProfile& profile,
                   const ExecutionState& state) {
  if (!state.terminated)
    throw EngineError("outcome requested before termination");
  if (profile.size() != program.n_agents)
    throw EngineError("profile size does not match the program");
  Outcome outcome;
  outcome.allocation.resize(static_cast<std::size_t>(program.n_agents));
  outcome.utilities.resize(static_cast<std::size_t>(program.n_agents),
                           Rational(0));
  std::vector<std::vector<Interval>> per_agent(
      static_cast<std::size_t>(program.n_agents));
  for (const auto& [agent, interval] : state.allocation)
    per_agent[static_cast<std::size_t>(agent - 1)].push_back(interval);
  for (int a = 0; a < program.n_agents; ++a) {
    outcome.allocation[a] = make_piece(std::move(per_agent[a]));
    outcome.utilities[a] =
        value_of_piece(profile.agents[a], outcome.allocation[a]);
  }
  return outcome;
}

RunResult run(const ProtocolProgram& program, const ValuationProfile& profile,
              const std::vector<Strategy>& strategies, bool record_trace) {
  if (static_cast<int>(strategies.size()) != program.n_agents)
    throw EngineError("one strategy per agent is required");
  ExecutionState state = initial_state(program, record_trace);
  // Any run visits each statement at most once, so this cannot loop.
  while (!state.terminated) {
    std::optional<DecisionNode> node = decision_node(program, state);
    const Action action = strategies[static_cast<std::size_t>(node->agent - 1)](*node);
    state = step(program, state, action, &*node);
  }
  return {outcome_of(program, profile, state), std::move(state)};
}

ExecutionState replay(const ProtocolProgram& program,
                      const std::vector<TraceEvent>& trace) {
  ExecutionState state = initial_state(program, /*record_trace=*/true);
  for (const TraceEvent& event : trace) {
    std::optional<DecisionNode> node = decision_node(program, state);
    if (!node)
      throw EngineError("trace continues past termination");
    if (node->label_id != event.label_id || node->agent != event.agent)
      throw EngineError("trace event does not match decision \"" +
                        node->label + "\"");
    const Action action = event.kind == TraceEvent::Kind::kCut
                              ? Action::cut_at(event.cut_at)
                              : Action::choose(event.index);
    state = step(program, state, action, &*node);
  }
  return state;
}

// --- ProgramLayout ---

ProgramLayout::ProgramLayout(const ProtocolProgram& program)
    : program_(&program) {
  compute(&program.body);
}

int ProgramLayout::register_list(const std::vector<Statement>* list) {
  order_.push_back(list);
  data_.emplace_back();
  data_.back().id = static_cast<int>(order_.size()) - 1;
  ids_.emplace(list, data_.back().id);
  return data_.back().id;
}

ProgramLayout::Suffix ProgramLayout::compute(
    const std::vector<Statement>* list) {
  const int id = register_list(list);
  const int n_words = (n_labels() + 63) / 64;
  auto empty_suffix = [n_words] {
    Suffix s;
    s.live_labels.assign(static_cast<std::size_t>(n_words), 0);
    s.live_chose.assign(static_cast<std::size_t>(n_words), 0);
    return s;
  };

  std::vector<Suffix> suffixes(list->size() + 1, empty_suffix());

  // Endpoint references of one condition, folded into a suffix.
  auto add_condition = [&](const Condition& cond, Suffix& sfx,
                           auto&& self) -> void {
    switch (cond.kind) {
      case Condition::Kind::kOrder:
        if (cond.lhs.kind == EndpointExpr::Kind::kLabel)
          set_bit(sfx.live_labels, program_->label_id(cond.lhs.label));
        if (cond.rhs.kind == EndpointExpr::Kind::kLabel)
          set_bit(sfx.live_labels, program_->label_id(cond.rhs.label));
        break;
      case Condition::Kind::kChose:
        set_bit(sfx.live_chose, program_->label_id(cond.choose_label));
        break;
      case Condition::Kind::kAllocated:
        sfx.live_allocated |= std::uint32_t{1} << (cond.agent - 1);
        break;
      default:
        for (const Condition& child : cond.children) self(child, sfx, self);
    }
  };
  auto add_pieces = [&](const std::vector<PieceExpr>& pieces, Suffix& sfx) {
    for (const PieceExpr& piece : pieces) {
      if (piece.a.kind == EndpointExpr::Kind::kLabel)
        set_bit(sfx.live_labels, program_->label_id(piece.a.label));
      if (piece.b.kind == EndpointExpr::Kind::kLabel)
        set_bit(sfx.live_labels, program_->label_id(piece.b.label));
    }
  };

  for (int i = static_cast<int>(list->size()) - 1; i >= 0; --i) {
    Suffix sfx = suffixes[static_cast<std::size_t>(i) + 1];
    const Statement& stmt = (*list)[i];
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      add_pieces(cut->pieces, sfx);
    } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
      add_pieces(choose->pieces, sfx);
    } else if (std::holds_alternative<ChooseAnyStmt>(stmt.node)) {
      sfx.chooseany_reachable = true;
    } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
      add_condition(branch->cond, sfx, add_condition);
      Suffix then_sfx = compute(&branch->then_body);
      Suffix else_sfx = compute(&branch->else_body);
      merge_bits(sfx.live_labels, then_sfx.live_labels);
      merge_bits(sfx.live_labels, else_sfx.live_labels);
      merge_bits(sfx.live_chose, then_sfx.live_chose);
      merge_bits(sfx.live_chose, else_sfx.live_chose);
      sfx.live_allocated |= then_sfx.live_allocated | else_sfx.live_allocated;
      sfx.chooseany_reachable |=
          then_sfx.chooseany_reachable || else_sfx.chooseany_reachable;
    }
    suffixes[static_cast<std::size_t>(i)] = std::move(sfx);
  }
  data_[static_cast<std::size_t>(id)].suffixes = std::move(suffixes);
  return data_[static_cast<std::size_t>(id)].suffixes.front();
}

int ProgramLayout::list_id(const std::vector<Statement>* list) const {
  auto it = ids_.find(list);
  if (it == ids_.end())
    throw EngineError("statement list does not belong to this program");
  return it->second;
}

const ProgramLayout::Suffix& ProgramLayout::suffix(
    const std::vector<Statement>* list, int index) const {
  return data_[static_cast<std::size_t>(list_id(list))]
      .suffixes[static_cast<std::size_t>(index)];
}

std::string canonical_node_key(const ProgramLayout& layout,
                               const ExecutionState& state) {
  const ProtocolProgram& program = layout.program();
  const int n_words = (layout.n_labels() + 63) / 64;
  std::vector<std::uint64_t> live_labels(static_cast<std::size_t>(n_words), 0);
  std::vector<std::uint64_t> live_chose(static_cast<std::size_t>(n_words), 0);
  std::uint32_t live_allocated = 0;
  bool chooseany = false;

  std::string key = "P:";
  for (const Frame& frame : state.pos) {
    key += std::to_string(layout.list_id(frame.list));
    key += '.';
    key += std::to_string(frame.index);
    key += '/';
    const ProgramLayout::Suffix& sfx = layout.suffix(frame.list, frame.index);
    merge_bits(live_labels, sfx.live_labels);
    merge_bits(live_chose, sfx.live_chose);
    live_allocated |= sfx.live_allocated;
    chooseany |= sfx.chooseany_reachable;
  }
  if (state.terminated) key += "end";

  key += "|C:";
  key += std::to_string(state.cuts_done);

  key += "|B:";
  for (const auto& [label_id, coordinate] : state.bindings) {
    if (chooseany || get_bit(live_labels, label_id)) {
      key += program.labels[static_cast<std::size_t>(label_id)];
      key += '=';
      key += rational_string(coordinate);
      key += ',';
    }
  }

  key += "|H:";
  for (const ChooseEvent& event : state.chooses) {
    if (get_bit(live_chose, event.label_id)) {
      key += program.labels[static_cast<std::size_t>(event.label_id)];
      key += '=';
      key += std::to_string(event.index);
      key += ',';
    }
  }

  key += "|A:";
  key += std::to_string(state.allocated_mask & live_allocated);

  if (chooseany) {
    key += "|T:";
    for (int cell : state.taken_cells) {
      key += std::to_string(cell);
      key += ',';
    }
  }
  return key;
}

}  // namespace fairdiv
