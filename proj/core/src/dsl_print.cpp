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

#include <string>

#include "fairdiv/dsl.hpp"

namespace fairdiv {

namespace {

std::string endpoint_text(const EndpointExpr& e) {
  switch (e.kind) {
    case EndpointExpr::Kind::kZero: return "0";
    case EndpointExpr::Kind::kOne: return "1";
    case EndpointExpr::Kind::kLabel: return e.label;
  }
  return "?";
}

std::string piece_text(const PieceExpr& p) {
  return "[" + endpoint_text(p.a) + ", " + endpoint_text(p.b) + "]";
}

std::string piece_set_text(const std::vector<PieceExpr>& pieces) {
  std::string out = "{";
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (i) out += ", ";
    out += piece_text(pieces[i]);
  }
  return out + "}";
}

const char* rel_text(RelOp op) {
  switch (op) {
    case RelOp::kLt: return "<";
    case RelOp::kLe: return "<=";
    case RelOp::kEq: return "==";
    case RelOp::kGe: return ">=";
    case RelOp::kGt: return ">";
  }
  return "?";
}

int cond_precedence(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kOr: return 1;
    case Condition::Kind::kAnd: return 2;
    case Condition::Kind::kNot: return 3;
    default: return 4;
  }
}

std::string cond_text(const Condition& c, int parent_precedence) {
  std::string out;
  switch (c.kind) {
    case Condition::Kind::kOrder:
      out = endpoint_text(c.lhs) + " " + rel_text(c.op) + " " +
            endpoint_text(c.rhs);
      break;
    case Condition::Kind::kChose:
      out = "chose(" + c.choose_label + ", " + std::to_string(c.piece_index) +
            ")";
      break;
    case Condition::Kind::kAllocated:
      out = "allocated(" + std::to_string(c.agent) + ")";
      break;
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      const char* sep = c.kind == Condition::Kind::kAnd ? " and " : " or ";
      const int prec = cond_precedence(c);
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += sep;
        out += cond_text(c.children[i], prec);
      }
      break;
    }
    case Condition::Kind::kNot:
      out = "not " + cond_text(c.children.front(), cond_precedence(c));
      break;
  }
  if (cond_precedence(c) <= parent_precedence &&
      c.kind != Condition::Kind::kOrder &&
      c.kind != Condition::Kind::kChose &&
      c.kind != Condition::Kind::kAllocated)
    out = "(" + out + ")";
  return out;
}

void print_statements(const std::vector<Statement>& body, int depth,
                      std::string& out) {
  const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
  for (const Statement& stmt : body) {
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      out += indent + "cut " + std::to_string(cut->agent) + " in " +
             piece_set_text(cut->pieces) + " as " + cut->label + ";\n";
    } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
      out += indent + "choose " + std::to_string(choose->agent) + " from " +
             piece_set_text(choose->pieces) + " as " + choose->label + ";\n";
    } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
      out += indent + "choose " + std::to_string(any->agent) + " any as " +
             any->label + ";\n";
    } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
      out += indent + "if " + cond_text(branch->cond, 0) + " {\n";
      print_statements(branch->then_body, depth + 1, out);
      if (branch->else_body.empty()) {
        out += indent + "}\n";
      } else {
        out += indent + "} else {\n";
        print_statements(branch->else_body, depth + 1, out);
        out += indent + "}\n";
      }
    } else {
      out += indent + "exit;\n";
    }
  }
}

}  // namespace

std::string print_condition(const Condition& cond) {
  return cond_text(cond, 0);
}

std::string pretty_print(const ProtocolProgram& program) {
  std::string out = "agents " + std::to_string(program.n_agents) + ";\n";
  print_statements(program.body, 0, out);
  return out;
}

}  // namespace fairdiv
