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

#include "solver_compiled.hpp"

#include <algorithm>

namespace fairdiv::internal {

CompiledGame::CompiledGame(const ProtocolProgram& program,
                           const ValuationProfile& profile,
                           const GridFamily& grids,
                           const ProgramLayout& layout)
    : program_(&program),
      grids_(&grids),
      layout_(&layout),
      n_agents_(program.n_agents),
      n_labels_(static_cast<int>(program.labels.size())) {
  if (n_agents_ > kMaxSolverAgents)
    throw Error("solver supports at most " +
                std::to_string(kMaxSolverAgents) + " agents");
  if (profile.size() != n_agents_)
    throw Error("profile size does not match the program");

  if (grids.K > 0) {
    master_ = grids.grids.back();
    // Nesting sanity: |G_i| - 1 must divide |G_K| - 1 with the power-of-two
    // stride the midpoint construction produces.
    for (int i = 1; i <= grids.K; ++i) {
      const std::size_t expected =
          ((master_.size() - 1) >> (grids.K - i)) + 1;
      if (grids.grid(i).size() != expected)
        throw Error("grid family was not built by midpoint refinement");
    }
  } else {
    master_ = {Rational(0), Rational(1)};
  }
  master_strings_.reserve(master_.size());
  for (const Rational& point : master_)
    master_strings_.push_back(rational_string(point));

  prefix_rat_.resize(static_cast<std::size_t>(n_agents_));
  for (int a = 0; a < n_agents_; ++a) {
    auto& prefix = prefix_rat_[static_cast<std::size_t>(a)];
    prefix.reserve(master_.size());
    prefix.emplace_back(0);
    for (std::size_t j = 1; j < master_.size(); ++j)
      prefix.push_back(Rational(
          prefix.back() + eval(profile.agents[static_cast<std::size_t>(a)],
                               Interval(master_[j - 1], master_[j]))));
  }

  // 64-bit fast path: one shared denominator for every prefix value.
  common_denominator_ = 1;
  for (const auto& prefix : prefix_rat_)
    for (const Rational& value : prefix)
      mpz_lcm(common_denominator_.get_mpz_t(), common_denominator_.get_mpz_t(),
              value.get_den_mpz_t());
  if (common_denominator_ <= mpz_class(std::int64_t{1} << 40)) {
    use_int64_ = true;
    prefix_i64_.resize(static_cast<std::size_t>(n_agents_));
    for (int a = 0; a < n_agents_; ++a) {
      auto& out = prefix_i64_[static_cast<std::size_t>(a)];
      out.reserve(master_.size());
      for (const Rational& value : prefix_rat_[static_cast<std::size_t>(a)]) {
        mpz_class numerator = value.get_num() *
                              (common_denominator_ / value.get_den());
        if (!numerator.fits_slong_p()) {
          use_int64_ = false;
          break;
        }
        out.push_back(numerator.get_si());
      }
      if (!use_int64_) break;
    }
    if (!use_int64_) prefix_i64_.clear();
  }

  root_ = compile_list(program.body);
}

int CompiledGame::master_index(const Rational& coordinate) const {
  auto it = std::lower_bound(master_.begin(), master_.end(), coordinate);
  if (it == master_.end() || *it != coordinate)
    throw Error("coordinate " + rational_string(coordinate) +
                " is not a grid point");
  return static_cast<int>(it - master_.begin());
}

Rational CompiledGame::i64_to_rational(std::int64_t value) const {
  Rational out(mpz_class(value), common_denominator_);
  out.canonicalize();
  return out;
}

CEndpoint CompiledGame::compile_endpoint(const EndpointExpr& e) const {
  CEndpoint out;
  switch (e.kind) {
    case EndpointExpr::Kind::kZero: out.kind = 0; break;
    case EndpointExpr::Kind::kOne: out.kind = 1; break;
    case EndpointExpr::Kind::kLabel:
      out.kind = 2;
      out.label = static_cast<std::int16_t>(program_->label_id(e.label));
      break;
  }
  return out;
}

CCond CompiledGame::compile_condition(const Condition& cond) const {
  CCond out;
  out.kind = cond.kind;
  switch (cond.kind) {
    case Condition::Kind::kOrder:
      out.lhs = compile_endpoint(cond.lhs);
      out.rhs = compile_endpoint(cond.rhs);
      out.op = cond.op;
      break;
    case Condition::Kind::kChose:
      out.chose_label =
          static_cast<std::int16_t>(program_->label_id(cond.choose_label));
      out.chose_index = static_cast<std::int16_t>(cond.piece_index);
      break;
    case Condition::Kind::kAllocated:
      out.alloc_bit = std::uint32_t{1} << (cond.agent - 1);
      break;
    default:
      out.children.reserve(cond.children.size());
      for (const Condition& child : cond.children)
        out.children.push_back(compile_condition(child));
  }
  return out;
}

std::unique_ptr<CList> CompiledGame::compile_list(
    const std::vector<Statement>& body) {
  auto list = std::make_unique<CList>();
  list->src = &body;
  list->layout_id = layout_->list_id(&body);
  list->stmts.reserve(body.size());
  for (const Statement& stmt : body) {
    CStmt out;
    if (const auto* cut = std::get_if<CutStmt>(&stmt.node)) {
      out.kind = CStmt::Kind::kCut;
      out.agent = static_cast<std::int16_t>(cut->agent);
      out.label = static_cast<std::int16_t>(program_->label_id(cut->label));
      for (const PieceExpr& piece : cut->pieces)
        out.pieces.emplace_back(compile_endpoint(piece.a),
                                compile_endpoint(piece.b));
    } else if (const auto* choose = std::get_if<ChooseStmt>(&stmt.node)) {
      out.kind = CStmt::Kind::kChoose;
      out.agent = static_cast<std::int16_t>(choose->agent);
      out.label = static_cast<std::int16_t>(program_->label_id(choose->label));
      for (const PieceExpr& piece : choose->pieces)
        out.pieces.emplace_back(compile_endpoint(piece.a),
                                compile_endpoint(piece.b));
    } else if (const auto* any = std::get_if<ChooseAnyStmt>(&stmt.node)) {
      out.kind = CStmt::Kind::kChooseAny;
      out.agent = static_cast<std::int16_t>(any->agent);
      out.label = static_cast<std::int16_t>(program_->label_id(any->label));
    } else if (const auto* branch = std::get_if<IfStmt>(&stmt.node)) {
      out.kind = CStmt::Kind::kIf;
      out.cond = compile_condition(branch->cond);
      out.then_body = compile_list(branch->then_body);
      out.else_body = compile_list(branch->else_body);
    } else {
      out.kind = CStmt::Kind::kExit;
    }
    list->stmts.push_back(std::move(out));
  }
  list->tail_chooseany.assign(list->stmts.size() + 1, false);
  list->tail_chooseany[list->stmts.size()] = true;
  for (int i = static_cast<int>(list->stmts.size()) - 1; i >= 0; --i)
    list->tail_chooseany[static_cast<std::size_t>(i)] =
        list->stmts[static_cast<std::size_t>(i)].kind ==
            CStmt::Kind::kChooseAny &&
        list->tail_chooseany[static_cast<std::size_t>(i) + 1];
  return list;
}

}  // namespace fairdiv::internal
