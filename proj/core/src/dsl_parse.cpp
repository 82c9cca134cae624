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
#include <cctype>
#include <optional>
#include <set>
#include <utility>

#include "fairdiv/dsl.hpp"

namespace fairdiv {

Condition Condition::order(EndpointExpr a, RelOp op, EndpointExpr b) {
  Condition c;
  c.kind = Kind::kOrder;
  c.lhs = std::move(a);
  c.op = op;
  c.rhs = std::move(b);
  return c;
}

Condition Condition::chose(std::string label, int piece_index) {
  Condition c;
  c.kind = Kind::kChose;
  c.choose_label = std::move(label);
  c.piece_index = piece_index;
  return c;
}

Condition Condition::allocated(int agent) {
  Condition c;
  c.kind = Kind::kAllocated;
  c.agent = agent;
  return c;
}

Condition Condition::all_of(std::vector<Condition> children) {
  if (children.size() == 1) return std::move(children.front());
  Condition c;
  c.kind = Kind::kAnd;
  c.children = std::move(children);
  return c;
}

Condition Condition::any_of(std::vector<Condition> children) {
  if (children.size() == 1) return std::move(children.front());
  Condition c;
  c.kind = Kind::kOr;
  c.children = std::move(children);
  return c;
}

Condition Condition::negate(Condition inner) {
  Condition c;
  c.kind = Kind::kNot;
  c.children.push_back(std::move(inner));
  return c;
}

Statement make_cut(int agent, std::vector<PieceExpr> pieces,
                   std::string label) {
  return Statement{CutStmt{agent, std::move(pieces), std::move(label)}, {}};
}

Statement make_choose(int agent, std::vector<PieceExpr> pieces,
                      std::string label) {
  return Statement{ChooseStmt{agent, std::move(pieces), std::move(label)}, {}};
}

Statement make_choose_any(int agent, std::string label) {
  return Statement{ChooseAnyStmt{agent, std::move(label)}, {}};
}

Statement make_if(Condition cond, std::vector<Statement> then_body,
                  std::vector<Statement> else_body) {
  return Statement{
      IfStmt{std::move(cond), std::move(then_body), std::move(else_body)}, {}};
}

Statement make_exit() { return Statement{ExitStmt{}, {}}; }

PieceExpr whole_cake() { return {EndpointExpr::zero(), EndpointExpr::one()}; }

int ProtocolProgram::label_id(const std::string& name) const {
  auto it = std::find(labels.begin(), labels.end(), name);
  return it == labels.end() ? -1 : static_cast<int>(it - labels.begin());
}

namespace {

void collect_labels(const std::vector<Statement>& body,
                    std::vector<std::string>& out) {
  auto add = [&out](const std::string& name) {
    if (std::find(out.begin(), out.end(), name) == out.end())
      out.push_back(name);
  };
  for (const Statement& stmt : body) {
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      add(cut->label);
    } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
      add(choose->label);
    } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
      add(any->label);
    } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
      collect_labels(branch->then_body, out);
      collect_labels(branch->else_body, out);
    }
  }
}

}  // namespace

ProtocolProgram make_program(int n_agents, std::vector<Statement> body) {
  if (n_agents < 1) throw Error("program needs at least one agent");
  ProtocolProgram program;
  program.n_agents = n_agents;
  program.body = std::move(body);
  collect_labels(program.body, program.labels);
  return program;
}

bool equivalent(const Statement& a, const Statement& b) {
  if (a.node.index() != b.node.index()) return false;
  if (const auto* cut = std::get_if<CutStmt>(&a.node)) {
    const auto& other = std::get<CutStmt>(b.node);
    return cut->agent == other.agent && cut->pieces == other.pieces &&
           cut->label == other.label;
  }
  if (const auto* choose = std::get_if<ChooseStmt>(&a.node)) {
    const auto& other = std::get<ChooseStmt>(b.node);
    return choose->agent == other.agent && choose->pieces == other.pieces &&
           choose->label == other.label;
  }
  if (const auto* any = std::get_if<ChooseAnyStmt>(&a.node)) {
    const auto& other = std::get<ChooseAnyStmt>(b.node);
    return any->agent == other.agent && any->label == other.label;
  }
  if (const auto* branch = std::get_if<IfStmt>(&a.node)) {
    const auto& other = std::get<IfStmt>(b.node);
    auto bodies_equal = [](const std::vector<Statement>& x,
                           const std::vector<Statement>& y) {
      if (x.size() != y.size()) return false;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (!equivalent(x[i], y[i])) return false;
      return true;
    };
    return branch->cond == other.cond &&
           bodies_equal(branch->then_body, other.then_body) &&
           bodies_equal(branch->else_body, other.else_body);
  }
  return true;  // ExitStmt
}

bool equivalent(const ProtocolProgram& a, const ProtocolProgram& b) {
  if (a.n_agents != b.n_agents || a.body.size() != b.body.size()) return false;
  for (std::size_t i = 0; i < a.body.size(); ++i)
    if (!equivalent(a.body[i], b.body[i])) return false;
  return true;
}

// --- lexer ---

namespace {

enum class Tok : std::uint8_t {
  kIdent,
  kNumber,    // integer literal
  kNumeric,   // any other numeric literal: "p/q" or "p.q"
  kLBrace,
  kRBrace,
  kLBracket,
  kRBracket,
  kLParen,
  kRParen,
  kComma,
  kSemicolon,
  kLt,
  kLe,
  kEq,
  kGe,
  kGt,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  long value = 0;  // kNumber
  SourcePos pos;
};

const std::set<std::string> kKeywords = {
    "agents", "cut",  "in",  "as",  "choose", "from",     "any",
    "if",     "else", "exit", "and", "or",     "not",      "chose",
    "allocated"};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> tokens;
    while (true) {
      skip_space_and_comments();
      SourcePos pos{line_, col_};
      if (at_end()) {
        tokens.push_back({Tok::kEnd, "", 0, pos});
        return tokens;
      }
      char c = peek();
      if (std::isdigit(static_cast<unsigned char>(c))) {
        tokens.push_back(lex_number(pos));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string ident;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) ||
                             peek() == '_'))
          ident += advance();
        tokens.push_back({Tok::kIdent, std::move(ident), 0, pos});
      } else {
        tokens.push_back(lex_punct(pos));
      }
    }
  }

 private:
  bool at_end() const { return index_ >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return index_ + ahead < text_.size() ? text_[index_ + ahead] : '\0';
  }
  char advance() {
    char c = text_[index_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      char c = peek();
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && peek(1) == '/')) {
        while (!at_end() && peek() != '\n') advance();
      } else {
        return;
      }
    }
  }

  Token lex_number(SourcePos pos) {
    std::string digits;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
      digits += advance();
    // A slash or dot glues into a non-integer numeric literal, which the
    // parser rejects wherever an endpoint is expected.
    if (!at_end() && (peek() == '.' ||
                      (peek() == '/' && std::isdigit(static_cast<unsigned char>(
                                            peek(1)))))) {
      std::string rest;
      rest += advance();
      while (!at_end() && std::isdigit(static_cast<unsigned char>(peek())))
        rest += advance();
      return {Tok::kNumeric, digits + rest, 0, pos};
    }
    long value = 0;
    for (char d : digits) {
      if (value > 100000000) break;  // agents/indices are tiny; clamp safely
      value = value * 10 + (d - '0');
    }
    return {Tok::kNumber, std::move(digits), value, pos};
  }

  Token lex_punct(SourcePos pos) {
    char c = advance();
    switch (c) {
      case '{': return {Tok::kLBrace, "{", 0, pos};
      case '}': return {Tok::kRBrace, "}", 0, pos};
      case '[': return {Tok::kLBracket, "[", 0, pos};
      case ']': return {Tok::kRBracket, "]", 0, pos};
      case '(': return {Tok::kLParen, "(", 0, pos};
      case ')': return {Tok::kRParen, ")", 0, pos};
      case ',': return {Tok::kComma, ",", 0, pos};
      case ';': return {Tok::kSemicolon, ";", 0, pos};
      case '<':
        if (peek() == '=') { advance(); return {Tok::kLe, "<=", 0, pos}; }
        return {Tok::kLt, "<", 0, pos};
      case '>':
        if (peek() == '=') { advance(); return {Tok::kGe, ">=", 0, pos}; }
        return {Tok::kGt, ">", 0, pos};
      case '=':
        if (peek() == '=') advance();  // "=" and "==" both mean equality
        return {Tok::kEq, "==", 0, pos};
      default:
        throw ParseError(ParseErrorCode::kSyntaxError, pos,
                         std::string("unexpected character '") + c + "'");
    }
  }

  const std::string& text_;
  std::size_t index_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// --- parser ---

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ProtocolProgram run() {
    expect_keyword("agents");
    n_agents_ = expect_int();
    if (n_agents_ < 1)
      throw ParseError(ParseErrorCode::kAgentOutOfRange, prev().pos,
                       "agent count must be at least 1");
    expect(Tok::kSemicolon);
    std::vector<Statement> body = parse_statements(Tok::kEnd);
    expect(Tok::kEnd);
    return make_program(n_agents_, std::move(body));
  }

 private:
  const Token& cur() const { return tokens_[index_]; }
  const Token& prev() const { return tokens_[index_ == 0 ? 0 : index_ - 1]; }
  const Token& take() { return tokens_[index_++]; }

  bool at_keyword(const std::string& word) const {
    return cur().kind == Tok::kIdent && cur().text == word;
  }

  void expect_keyword(const std::string& word) {
    if (!at_keyword(word))
      throw ParseError(ParseErrorCode::kSyntaxError, cur().pos,
                       "expected \"" + word + "\"");
    take();
  }

  void expect(Tok kind) {
    if (cur().kind != kind)
      throw ParseError(ParseErrorCode::kSyntaxError, cur().pos,
                       "unexpected token \"" + cur().text + "\"");
    take();
  }

  long expect_int() {
    if (cur().kind != Tok::kNumber)
      throw ParseError(ParseErrorCode::kSyntaxError, cur().pos,
                       "expected an integer");
    return take().value;
  }

  int expect_agent() {
    SourcePos pos = cur().pos;
    long value = expect_int();
    if (value < 1 || value > n_agents_)
      throw ParseError(ParseErrorCode::kAgentOutOfRange, pos,
                       "agent " + std::to_string(value) + " not in 1.." +
                           std::to_string(n_agents_));
    return static_cast<int>(value);
  }

  std::string expect_label(bool declare) {
    if (cur().kind != Tok::kIdent || kKeywords.count(cur().text))
      throw ParseError(ParseErrorCode::kSyntaxError, cur().pos,
                       "expected a label identifier");
    std::string name = take().text;
    if (declare) declared_labels_.insert(name);
    return name;
  }

  std::vector<Statement> parse_statements(Tok stop) {
    std::vector<Statement> out;
    while (cur().kind != stop && cur().kind != Tok::kEnd)
      out.push_back(parse_statement());
    return out;
  }

  Statement parse_statement() {
    SourcePos pos = cur().pos;
    Statement stmt;
    if (at_keyword("cut")) {
      take();
      int agent = expect_agent();
      expect_keyword("in");
      std::vector<PieceExpr> pieces = parse_piece_set();
      expect_keyword("as");
      std::string label = expect_label(/*declare=*/true);
      expect(Tok::kSemicolon);
      stmt = make_cut(agent, std::move(pieces), std::move(label));
    } else if (at_keyword("choose")) {
      take();
      int agent = expect_agent();
      if (at_keyword("any")) {
        take();
        expect_keyword("as");
        std::string label = expect_label(/*declare=*/true);
        expect(Tok::kSemicolon);
        stmt = make_choose_any(agent, std::move(label));
      } else {
        expect_keyword("from");
        std::vector<PieceExpr> pieces = parse_piece_set();
        expect_keyword("as");
        std::string label = expect_label(/*declare=*/true);
        expect(Tok::kSemicolon);
        stmt = make_choose(agent, std::move(pieces), std::move(label));
      }
    } else if (at_keyword("if")) {
      take();
      Condition cond = parse_condition();
      expect(Tok::kLBrace);
      std::vector<Statement> then_body = parse_statements(Tok::kRBrace);
      expect(Tok::kRBrace);
      std::vector<Statement> else_body;
      if (at_keyword("else")) {
        take();
        expect(Tok::kLBrace);
        else_body = parse_statements(Tok::kRBrace);
        expect(Tok::kRBrace);
      }
      stmt = make_if(std::move(cond), std::move(then_body),
                     std::move(else_body));
    } else if (at_keyword("exit")) {
      take();
      expect(Tok::kSemicolon);
      stmt = make_exit();
    } else {
      throw ParseError(ParseErrorCode::kSyntaxError, pos,
                       "expected a statement");
    }
    stmt.pos = pos;
    return stmt;
  }

  std::vector<PieceExpr> parse_piece_set() {
    expect(Tok::kLBrace);
    std::vector<PieceExpr> pieces;
    pieces.push_back(parse_piece());
    while (cur().kind == Tok::kComma) {
      take();
      pieces.push_back(parse_piece());
    }
    expect(Tok::kRBrace);
    return pieces;
  }

  PieceExpr parse_piece() {
    expect(Tok::kLBracket);
    EndpointExpr a = parse_endpoint(/*in_condition=*/false);
    expect(Tok::kComma);
    EndpointExpr b = parse_endpoint(/*in_condition=*/false);
    expect(Tok::kRBracket);
    return {std::move(a), std::move(b)};
  }

  EndpointExpr parse_endpoint(bool in_condition) {
    const Token& tok = cur();
    if (tok.kind == Tok::kNumber) {
      take();
      if (tok.value == 0) return EndpointExpr::zero();
      if (tok.value == 1) return EndpointExpr::one();
      throw ParseError(in_condition
                           ? ParseErrorCode::kNumericLiteralInCondition
                           : ParseErrorCode::kSyntaxError,
                       tok.pos,
                       "endpoint must be 0, 1 or a cut label, got \"" +
                           tok.text + "\"");
    }
    if (tok.kind == Tok::kNumeric) {
      take();
      throw ParseError(in_condition
                           ? ParseErrorCode::kNumericLiteralInCondition
                           : ParseErrorCode::kSyntaxError,
                       tok.pos,
                       "endpoint must be 0, 1 or a cut label, got \"" +
                           tok.text + "\"");
    }
    if (tok.kind == Tok::kIdent && !kKeywords.count(tok.text)) {
      take();
      if (!declared_labels_.count(tok.text))
        throw ParseError(ParseErrorCode::kUnknownLabel, tok.pos,
                         "\"" + tok.text + "\" is not cut before this point");
      return EndpointExpr::cut(tok.text);
    }
    throw ParseError(ParseErrorCode::kSyntaxError, tok.pos,
                     "expected an endpoint");
  }

  Condition parse_condition() { return parse_or(); }

  Condition parse_or() {
    std::vector<Condition> children;
    children.push_back(parse_and());
    while (at_keyword("or")) {
      take();
      children.push_back(parse_and());
    }
    return Condition::any_of(std::move(children));
  }

  Condition parse_and() {
    std::vector<Condition> children;
    children.push_back(parse_primary());
    while (at_keyword("and")) {
      take();
      children.push_back(parse_primary());
    }
    return Condition::all_of(std::move(children));
  }

  Condition parse_primary() {
    if (at_keyword("not")) {
      take();
      return Condition::negate(parse_primary());
    }
    if (cur().kind == Tok::kLParen) {
      take();
      Condition inner = parse_condition();
      expect(Tok::kRParen);
      return inner;
    }
    if (at_keyword("chose")) {
      take();
      expect(Tok::kLParen);
      std::string label = expect_label(/*declare=*/false);
      if (!declared_labels_.count(label))
        throw ParseError(ParseErrorCode::kUnknownLabel, prev().pos,
                         "\"" + label + "\" is not a known choose label");
      expect(Tok::kComma);
      long index = expect_int();
      if (index < 1)
        throw ParseError(ParseErrorCode::kSyntaxError, prev().pos,
                         "piece index must be at least 1");
      expect(Tok::kRParen);
      return Condition::chose(std::move(label), static_cast<int>(index));
    }
    if (at_keyword("allocated")) {
      take();
      expect(Tok::kLParen);
      int agent = expect_agent();
      expect(Tok::kRParen);
      return Condition::allocated(agent);
    }
    // Order atom.
    EndpointExpr lhs = parse_endpoint(/*in_condition=*/true);
    RelOp op;
    switch (cur().kind) {
      case Tok::kLt: op = RelOp::kLt; break;
      case Tok::kLe: op = RelOp::kLe; break;
      case Tok::kEq: op = RelOp::kEq; break;
      case Tok::kGe: op = RelOp::kGe; break;
      case Tok::kGt: op = RelOp::kGt; break;
      default:
        throw ParseError(ParseErrorCode::kSyntaxError, cur().pos,
                         "expected a comparison operator");
    }
    take();
    EndpointExpr rhs = parse_endpoint(/*in_condition=*/true);
    return Condition::order(std::move(lhs), op, std::move(rhs));
  }

  std::vector<Token> tokens_;
  std::size_t index_ = 0;
  int n_agents_ = 0;
  std::set<std::string> declared_labels_;
};

}  // namespace

ProtocolProgram parse_program(const std::string& text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.run();
}

}  // namespace fairdiv
