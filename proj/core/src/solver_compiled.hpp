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

// Internal: integer-indexed mirror of a protocol program over the grid
// family. All grids are nested in G_K (the "master" point list), so a grid
// coordinate is a master index and G_i is every 2^(K-i)-th master point.
// Values are exact: either rational prefix sums, or 64-bit numerators over
// one common denominator when that fits.

#ifndef FAIRDIV_SOLVER_COMPILED_HPP_
#define FAIRDIV_SOLVER_COMPILED_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fairdiv/solver.hpp"

namespace fairdiv::internal {

inline constexpr int kMaxSolverAgents = 8;

struct CEndpoint {
  std::int8_t kind = 0;  // 0 -> coordinate 0, 1 -> coordinate 1, 2 -> label
  std::int16_t label = -1;
};

struct CCond {
  Condition::Kind kind = Condition::Kind::kOrder;
  CEndpoint lhs, rhs;
  RelOp op = RelOp::kLt;
  std::int16_t chose_label = -1;
  std::int16_t chose_index = 0;
  std::uint32_t alloc_bit = 0;
  std::vector<CCond> children;
};

struct CList;

struct CStmt {
  enum class Kind : std::uint8_t { kCut, kChoose, kChooseAny, kIf, kExit };
  Kind kind = Kind::kExit;
  std::int16_t agent = 0;
  std::int16_t label = -1;
  std::vector<std::pair<CEndpoint, CEndpoint>> pieces;
  CCond cond;
  std::unique_ptr<CList> then_body;
  std::unique_ptr<CList> else_body;
};

struct CList {
  const std::vector<Statement>* src = nullptr;
  int layout_id = -1;
  std::vector<CStmt> stmts;
  // tail_chooseany[i]: statements i..end are all choose-any.
  std::vector<bool> tail_chooseany;
};

class CompiledGame {
 public:
  CompiledGame(const ProtocolProgram& program, const ValuationProfile& profile,
               const GridFamily& grids, const ProgramLayout& layout);

  const CList& root() const { return *root_; }
  const ProgramLayout& layout() const { return *layout_; }
  const ProtocolProgram& program() const { return *program_; }
  const GridFamily& grids() const { return *grids_; }

  int n_agents() const { return n_agents_; }
  int n_labels() const { return n_labels_; }

  const std::vector<Rational>& master() const { return master_; }
  const std::string& master_string(int index) const {
    return master_strings_[static_cast<std::size_t>(index)];
  }
  int last_index() const { return static_cast<int>(master_.size()) - 1; }
  // Master-index stride of grid G_ordinal.
  int stride(int ordinal) const {
    return 1 << (grids_->K - ordinal);
  }
  int master_index(const Rational& coordinate) const;

  bool use_int64() const { return use_int64_; }
  std::int64_t value_i64(int agent, int lo, int hi) const {
    const auto& prefix = prefix_i64_[static_cast<std::size_t>(agent)];
    return prefix[static_cast<std::size_t>(hi)] -
           prefix[static_cast<std::size_t>(lo)];
  }
  Rational value_rat(int agent, int lo, int hi) const {
    return Rational(prefix_rat_[static_cast<std::size_t>(agent)]
                              [static_cast<std::size_t>(hi)] -
                    prefix_rat_[static_cast<std::size_t>(agent)]
                              [static_cast<std::size_t>(lo)]);
  }
  Rational i64_to_rational(std::int64_t value) const;

 private:
  std::unique_ptr<CList> compile_list(const std::vector<Statement>& body);
  CCond compile_condition(const Condition& cond) const;
  CEndpoint compile_endpoint(const EndpointExpr& e) const;

  const ProtocolProgram* program_;
  const GridFamily* grids_;
  const ProgramLayout* layout_;
  int n_agents_ = 0;
  int n_labels_ = 0;
  std::vector<Rational> master_;
  std::vector<std::string> master_strings_;
  std::vector<std::vector<Rational>> prefix_rat_;   // per agent, per index
  std::vector<std::vector<std::int64_t>> prefix_i64_;
  mpz_class common_denominator_;
  bool use_int64_ = false;
  std::unique_ptr<CList> root_;
};

}  // namespace fairdiv::internal

#endif  // FAIRDIV_SOLVER_COMPILED_HPP_
