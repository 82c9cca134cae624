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
#include <set>
#include <string>

#include "fairdiv/dsl.hpp"

namespace fairdiv {

namespace {

class Validator {
 public:
  explicit Validator(const ProtocolProgram& program) : program_(program) {
    collect_choose_labels(program.body);
  }

  std::vector<Violation> run() {
    std::set<std::string> bound_cuts;
    std::set<std::string> bound_all;
    walk(program_.body, bound_cuts, bound_all);
    return std::move(violations_);
  }

 private:
  void collect_choose_labels(const std::vector<Statement>& body) {
    for (const Statement& stmt : body) {
      if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
        choose_labels_.insert(choose->label);
      } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
        choose_labels_.insert(any->label);
      } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
        collect_choose_labels(branch->then_body);
        collect_choose_labels(branch->else_body);
      }
    }
  }

  void report(const std::string& code, const std::string& message,
              SourcePos pos) {
    violations_.push_back({code, message, pos});
  }

  void check_agent(int agent, SourcePos pos) {
    if (agent < 1 || agent > program_.n_agents)
      report("AgentOutOfRange",
             "agent " + std::to_string(agent) + " not in 1.." +
                 std::to_string(program_.n_agents),
             pos);
  }

  void check_endpoint(const EndpointExpr& e,
                      const std::set<std::string>& bound_cuts, SourcePos pos) {
    if (e.kind != EndpointExpr::Kind::kLabel) return;
    if (!bound_cuts.count(e.label))
      report("UnboundLabelOnPath",
             "endpoint \"" + e.label +
                 "\" is not cut on every path reaching this statement",
             pos);
  }

  void check_pieces(const std::vector<PieceExpr>& pieces,
                    const std::set<std::string>& bound_cuts, SourcePos pos) {
    if (pieces.empty()) report("EmptyPieceSet", "piece set is empty", pos);
    for (const PieceExpr& piece : pieces) {
      check_endpoint(piece.a, bound_cuts, pos);
      check_endpoint(piece.b, bound_cuts, pos);
    }
  }

  void check_condition(const Condition& cond,
                       const std::set<std::string>& bound_cuts,
                       SourcePos pos) {
    switch (cond.kind) {
      case Condition::Kind::kOrder:
        check_endpoint(cond.lhs, bound_cuts, pos);
        check_endpoint(cond.rhs, bound_cuts, pos);
        break;
      case Condition::Kind::kChose:
        if (!choose_labels_.count(cond.choose_label))
          report("UnknownChooseLabel",
                 "\"" + cond.choose_label + "\" is not a choose label", pos);
        if (cond.piece_index < 1)
          report("BadPieceIndex", "piece index must be at least 1", pos);
        break;
      case Condition::Kind::kAllocated:
        check_agent(cond.agent, pos);
        break;
      case Condition::Kind::kNot:
        if (cond.children.size() != 1)
          report("MalformedCondition", "not takes exactly one operand", pos);
        for (const Condition& child : cond.children)
          check_condition(child, bound_cuts, pos);
        break;
      case Condition::Kind::kAnd:
      case Condition::Kind::kOr:
        if (cond.children.size() < 2)
          report("MalformedCondition",
                 "and/or need at least two operands", pos);
        for (const Condition& child : cond.children)
          check_condition(child, bound_cuts, pos);
        break;
    }
  }

  void bind_label(const std::string& label, std::set<std::string>& bound_all,
                  SourcePos pos) {
    if (!bound_all.insert(label).second)
      report("DuplicateLabelOnPath",
             "label \"" + label + "\" is bound twice on one path", pos);
  }

  // Walks one statement list, updating the per-path bound sets in place.
  void walk(const std::vector<Statement>& body,
            std::set<std::string>& bound_cuts,
            std::set<std::string>& bound_all) {
    for (const Statement& stmt : body) {
      if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
        check_agent(cut->agent, stmt.pos);
        check_pieces(cut->pieces, bound_cuts, stmt.pos);
        bind_label(cut->label, bound_all, stmt.pos);
        bound_cuts.insert(cut->label);
      } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
        check_agent(choose->agent, stmt.pos);
        check_pieces(choose->pieces, bound_cuts, stmt.pos);
        bind_label(choose->label, bound_all, stmt.pos);
      } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
        check_agent(any->agent, stmt.pos);
        bind_label(any->label, bound_all, stmt.pos);
      } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
        check_condition(branch->cond, bound_cuts, stmt.pos);
        std::set<std::string> then_cuts = bound_cuts;
        std::set<std::string> then_all = bound_all;
        walk(branch->then_body, then_cuts, then_all);
        std::set<std::string> else_cuts = bound_cuts;
        std::set<std::string> else_all = bound_all;
        walk(branch->else_body, else_cuts, else_all);
        // After the join, only labels bound on both branches stay bound.
        bound_cuts.clear();
        std::set_intersection(then_cuts.begin(), then_cuts.end(),
                              else_cuts.begin(), else_cuts.end(),
                              std::inserter(bound_cuts, bound_cuts.end()));
        bound_all.clear();
        std::set_intersection(then_all.begin(), then_all.end(),
                              else_all.begin(), else_all.end(),
                              std::inserter(bound_all, bound_all.end()));
      }
      // ExitStmt: anything after it on this path is dead code; it is still
      // validated against the current bindings.
    }
  }

  const ProtocolProgram& program_;
  std::set<std::string> choose_labels_;
  std::vector<Violation> violations_;
};

}  // namespace

std::vector<Violation> validate(const ProtocolProgram& program) {
  return Validator(program).run();
}

bool is_oblivious(const ProtocolProgram& program) {
  for (const Statement& stmt : program.body) {
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      if (cut->pieces.size() != 1 || cut->pieces.front() != whole_cake())
        return false;
    } else if (!std::holds_alternative<ChooseAnyStmt>(stmt.node)) {
      return false;
    }
  }
  return validate(program).empty();
}

namespace {

// Longest-path operation counts with the continuation made explicit so that
// if-branches are measured together with whatever follows the if.
struct Cont {
  const std::vector<Statement>* list;
  std::size_t index;
};

OperationCounts count_from(std::vector<Cont> stack) {
  while (!stack.empty()) {
    Cont& top = stack.back();
    if (top.index >= top.list->size()) {
      stack.pop_back();
      continue;
    }
    const Statement& stmt = (*top.list)[top.index];
    ++top.index;
    if (std::holds_alternative<CutStmt>(stmt.node)) {
      OperationCounts rest = count_from(stack);
      return {rest.max_ops + 1, rest.max_cuts + 1};
    }
    if (std::holds_alternative<ChooseStmt>(stmt.node) ||
        std::holds_alternative<ChooseAnyStmt>(stmt.node)) {
      OperationCounts rest = count_from(stack);
      return {rest.max_ops + 1, rest.max_cuts};
    }
    if (std::holds_alternative<ExitStmt>(stmt.node)) return {0, 0};
    const auto& branch = std::get<IfStmt>(stmt.node);
    std::vector<Cont> then_stack = stack;
    then_stack.push_back({&branch.then_body, 0});
    OperationCounts for_then = count_from(std::move(then_stack));
    std::vector<Cont> else_stack = std::move(stack);
    else_stack.push_back({&branch.else_body, 0});
    OperationCounts for_else = count_from(std::move(else_stack));
    return {std::max(for_then.max_ops, for_else.max_ops),
            std::max(for_then.max_cuts, for_else.max_cuts)};
  }
  return {0, 0};
}

}  // namespace

OperationCounts count_operations(const ProtocolProgram& program) {
  return count_from({{&program.body, 0}});
}

}  // namespace fairdiv
