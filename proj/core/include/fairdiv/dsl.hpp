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

#ifndef FAIRDIV_DSL_HPP_
#define FAIRDIV_DSL_HPP_

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "fairdiv/errors.hpp"

namespace fairdiv {

// Protocol programs are built from Cut, Choose and If-Else statements only.
// Piece endpoints are 0, 1 or the symbolic name of an earlier cut;
// conditions may inspect the ordering of cut points and the execution
// history but never numeric coordinates.

struct EndpointExpr {
  enum class Kind : std::uint8_t { kZero, kOne, kLabel };
  Kind kind = Kind::kZero;
  std::string label;

  static EndpointExpr zero() { return {Kind::kZero, {}}; }
  static EndpointExpr one() { return {Kind::kOne, {}}; }
  static EndpointExpr cut(std::string name) {
    return {Kind::kLabel, std::move(name)};
  }

  bool operator==(const EndpointExpr&) const = default;
};

struct PieceExpr {
  EndpointExpr a;
  EndpointExpr b;

  bool operator==(const PieceExpr&) const = default;
};

enum class RelOp : std::uint8_t { kLt, kLe, kEq, kGe, kGt };

struct Condition {
  enum class Kind : std::uint8_t { kOrder, kChose, kAllocated, kAnd, kOr, kNot };
  Kind kind = Kind::kOrder;

  // kOrder
  EndpointExpr lhs;
  RelOp op = RelOp::kLt;
  EndpointExpr rhs;
  // kChose
  std::string choose_label;
  int piece_index = 0;  // 1-based
  // kAllocated
  int agent = 0;
  // kAnd (children.size() >= 2), kOr (>= 2), kNot (exactly 1)
  std::vector<Condition> children;

  static Condition order(EndpointExpr a, RelOp op, EndpointExpr b);
  static Condition chose(std::string label, int piece_index);
  static Condition allocated(int agent);
  static Condition all_of(std::vector<Condition> children);
  static Condition any_of(std::vector<Condition> children);
  static Condition negate(Condition inner);

  bool operator==(const Condition&) const = default;
};

struct Statement;

struct CutStmt {
  int agent = 0;
  std::vector<PieceExpr> pieces;
  std::string label;
};

struct ChooseStmt {
  int agent = 0;
  std::vector<PieceExpr> pieces;
  std::string label;
};

// "choose i any": take any still-unclaimed interval between adjacent cuts.
struct ChooseAnyStmt {
  int agent = 0;
  std::string label;
};

struct IfStmt {
  Condition cond;
  std::vector<Statement> then_body;
  std::vector<Statement> else_body;
};

struct ExitStmt {};

struct Statement {
  std::variant<CutStmt, ChooseStmt, ChooseAnyStmt, IfStmt, ExitStmt> node;
  SourcePos pos;
};

Statement make_cut(int agent, std::vector<PieceExpr> pieces, std::string label);
Statement make_choose(int agent, std::vector<PieceExpr> pieces,
                      std::string label);
Statement make_choose_any(int agent, std::string label);
Statement make_if(Condition cond, std::vector<Statement> then_body,
                  std::vector<Statement> else_body = {});
Statement make_exit();

// Convenience for {[0,1]} cut sets.
PieceExpr whole_cake();

struct ProtocolProgram {
  int n_agents = 0;
  std::vector<Statement> body;
  // Interned statement labels in first-appearance (pre-order) order.
  std::vector<std::string> labels;

  int label_id(const std::string& name) const;  // -1 when unknown
};

// Interns labels and checks n_agents >= 1.
ProtocolProgram make_program(int n_agents, std::vector<Statement> body);

// Structural equality, ignoring source positions.
bool equivalent(const ProtocolProgram& a, const ProtocolProgram& b);
bool equivalent(const Statement& a, const Statement& b);

// --- parsing and printing ---

// Throws ParseError with line/column on malformed input.
ProtocolProgram parse_program(const std::string& text);

std::string pretty_print(const ProtocolProgram& program);
std::string print_condition(const Condition& cond);

// --- static validation ---

struct Violation {
  std::string code;
  std::string message;
  SourcePos pos;
};

// Empty result iff the program is a well-formed GCC protocol: every endpoint
// label is cut on every path reaching its use, labels are unique per path,
// agents are in range and cut/choose sets are nonempty.
std::vector<Violation> validate(const ProtocolProgram& program);

// True iff the program is a flat sequence of "cut i in {[0,1]}" and
// "choose i any" statements, so the acting agent and its action space at
// every depth are independent of the history.
bool is_oblivious(const ProtocolProgram& program);

struct OperationCounts {
  int max_ops = 0;   // longest root-to-leaf count of cut+choose statements
  int max_cuts = 0;  // maximum number of cut statements on any path
};

OperationCounts count_operations(const ProtocolProgram& program);

}  // namespace fairdiv

#endif  // FAIRDIV_DSL_HPP_
