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

#ifndef FAIRDIV_ENGINE_HPP_
#define FAIRDIV_ENGINE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fairdiv/dsl.hpp"
#include "fairdiv/valuation.hpp"

namespace fairdiv {

// Deterministic small-step interpreter. States are immutable values: step()
// returns a new state, so different branches can be explored from a shared
// state without interference.

struct Frame {
  const std::vector<Statement>* list = nullptr;
  int index = 0;  // next statement to execute in this list

  bool operator==(const Frame&) const = default;
};

struct ChooseEvent {
  int label_id = -1;
  int index = 0;  // 1-based option index that was taken

  bool operator==(const ChooseEvent&) const = default;
};

struct TraceEvent {
  enum class Kind : std::uint8_t { kCut, kChoose, kChooseAny };
  Kind kind = Kind::kCut;
  int agent = 0;
  int label_id = -1;
  Rational cut_at;        // kCut
  int index = 0;          // kChoose/kChooseAny, 1-based
  Interval allocated_iv;  // kChoose/kChooseAny
};

struct ExecutionState {
  std::vector<Frame> pos;
  // Cut bindings in binding order; the i-th entry is the i-th cut made.
  std::vector<std::pair<int, Rational>> bindings;
  std::vector<ChooseEvent> chooses;
  // Allocation in the order pieces were taken.
  std::vector<std::pair<int, Interval>> allocation;
  std::uint32_t allocated_mask = 0;
  std::vector<int> taken_cells;  // claimed choose-any cells, sorted
  int cuts_done = 0;
  bool terminated = false;
  bool record_trace = false;
  std::vector<TraceEvent> trace;

  const Rational* binding(int label_id) const;
};

struct DecisionNode {
  enum class Kind : std::uint8_t { kCut, kChoose, kChooseAny };
  Kind kind = Kind::kCut;
  int agent = 0;
  int label_id = -1;
  std::string label;
  // kCut: regions the cut may land in, in statement order.
  std::vector<Interval> feasible;
  // kChoose/kChooseAny: selectable pieces, in statement/cell order.
  std::vector<Piece> options;
  std::vector<int> option_cells;  // kChooseAny: cell ordinal per option
  const ExecutionState* state = nullptr;
};

struct Action {
  enum class Kind : std::uint8_t { kCutAt, kChooseIndex };
  Kind kind = Kind::kCutAt;
  Rational coordinate;
  int index = 0;  // 1-based

  static Action cut_at(Rational coordinate) {
    return {Kind::kCutAt, std::move(coordinate), 0};
  }
  static Action choose(int index) { return {Kind::kChooseIndex, Rational(0), index}; }

  bool operator==(const Action&) const = default;
};

struct Outcome {
  std::vector<Piece> allocation;   // index 0 is agent 1
  std::vector<Rational> utilities;
};

using Strategy = std::function<Action(const DecisionNode&)>;

ExecutionState initial_state(const ProtocolProgram& program,
                             bool record_trace = false);

// The pending cut/choose decision, or nullopt when the state is terminated.
std::optional<DecisionNode> decision_node(const ProtocolProgram& program,
                                          const ExecutionState& state);

// Applies one action at the current decision node and advances through any
// if/exit statements to the next decision (or termination). Callers that
// already built the DecisionNode can pass it to avoid re-resolving it.
ExecutionState step(const ProtocolProgram& program, const ExecutionState& state,
                    const Action& action, const DecisionNode* node = nullptr);

// Utilities and per-agent pieces of a terminated state.
Outcome outcome_of(const ProtocolProgram& program,
                   const ValuationProfile& profile,
                   const ExecutionState& state);

struct RunResult {
  Outcome outcome;
  ExecutionState final_state;
};

RunResult run(const ProtocolProgram& program, const ValuationProfile& profile,
              const std::vector<Strategy>& strategies,
              bool record_trace = true);

// Feeds a recorded trace back through step(); throws EngineError if any
// event does not match the decision it replays into.
ExecutionState replay(const ProtocolProgram& program,
                      const std::vector<TraceEvent>& trace);

// Interval between two symbolic endpoints, ordered by bound coordinate.
Interval resolve_piece(const ProtocolProgram& program,
                       const ExecutionState& state, const PieceExpr& piece);

bool eval_condition(const ProtocolProgram& program, const ExecutionState& state,
                    const Condition& cond);

// --- canonical node keys ---

// Per-program static layout: stable statement-list ids plus, for every
// suffix of every list, which labels / history facts remain observable.
// Canonical keys built from it identify a decision node by its AST position
// and exactly the state that can still influence play, so histories that
// differ only in dead coordinates share a key.
class ProgramLayout {
 public:
  explicit ProgramLayout(const ProtocolProgram& program);

  struct Suffix {
    std::vector<std::uint64_t> live_labels;  // endpoint labels still referenced
    std::vector<std::uint64_t> live_chose;   // choose labels still referenced
    std::uint32_t live_allocated = 0;        // agents still tested by allocated()
    bool chooseany_reachable = false;
  };

  int list_id(const std::vector<Statement>* list) const;
  const Suffix& suffix(const std::vector<Statement>* list, int index) const;
  const ProtocolProgram& program() const { return *program_; }
  int n_labels() const { return static_cast<int>(program_->labels.size()); }

 private:
  struct ListData {
    int id;
    std::vector<Suffix> suffixes;  // size() + 1 entries
  };
  int register_list(const std::vector<Statement>* list);
  Suffix compute(const std::vector<Statement>* list);

  const ProtocolProgram* program_;
  std::vector<const std::vector<Statement>*> order_;
  std::unordered_map<const std::vector<Statement>*, int> ids_;
  std::vector<ListData> data_;
};

// Stable text key of the pending decision node of `state`.
std::string canonical_node_key(const ProgramLayout& layout,
                               const ExecutionState& state);

}  // namespace fairdiv

#endif  // FAIRDIV_ENGINE_HPP_
