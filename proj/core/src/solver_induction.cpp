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
#include <array>
#include <thread>
#include <unordered_map>
#include <utility>

#include "solver_compiled.hpp"

namespace fairdiv {
namespace internal {

namespace {

struct CFrame {
  const CList* list;
  int index;
};

struct SolveState {
  std::vector<CFrame> pos;
  std::vector<std::int32_t> binding;    // label -> master index or -1
  std::vector<std::int16_t> chosen;     // label -> option index or 0
  std::vector<std::int16_t> cut_order;  // cut labels in binding order
  std::vector<std::pair<std::int16_t, std::int16_t>> choose_order;
  std::vector<std::pair<std::int32_t, std::int32_t>> allocated;
  std::uint32_t allocated_mask = 0;
  std::uint64_t taken_mask = 0;
  int cuts_done = 0;
  bool terminated = false;
};

struct Snapshot {
  std::vector<CFrame> pos;
  std::size_t cut_order_size = 0;
  std::size_t choose_order_size = 0;
  std::size_t allocated_size = 0;
  std::uint32_t allocated_mask = 0;
  std::uint64_t taken_mask = 0;
  int cuts_done = 0;
  bool terminated = false;
  std::int16_t touched_label = -1;
  bool touched_binding = false;
};

struct I64Backend {
  using Value = std::int64_t;
  const CompiledGame* game;
  Value piece_value(int agent0, int lo, int hi) const {
    return game->value_i64(agent0, lo, hi);
  }
  Rational to_rational(const Value& value) const {
    return game->i64_to_rational(value);
  }
};

struct RatBackend {
  using Value = Rational;
  const CompiledGame* game;
  Value piece_value(int agent0, int lo, int hi) const {
    return game->value_rat(agent0, lo, hi);
  }
  Rational to_rational(const Value& value) const { return value; }
};

}  // namespace

// Depth-first induction over the compiled game with one mutable state and
// per-child undo. Cut nodes are memoized under canonical keys; choose nodes
// are cheap and recomputed; all-choose-any tails run as a subset DP.
template <class B>
class InductionT {
 public:
  using Value = typename B::Value;
  using Vals = std::array<Value, kMaxSolverAgents>;
  struct Entry {
    Vals utils;
    std::int32_t action;
  };

  explicit InductionT(const CompiledGame& game)
      : game_(game), backend_{&game} {
    const int n_words = (game_.n_labels() + 63) / 64;
    live_labels_.assign(static_cast<std::size_t>(n_words), 0);
    live_chose_.assign(static_cast<std::size_t>(n_words), 0);
    reset();
  }

  void reset() {
    st_.pos.clear();
    st_.pos.push_back({&game_.root(), 0});
    st_.binding.assign(static_cast<std::size_t>(game_.n_labels()), -1);
    st_.chosen.assign(static_cast<std::size_t>(game_.n_labels()), 0);
    st_.cut_order.clear();
    st_.choose_order.clear();
    st_.allocated.clear();
    st_.allocated_mask = 0;
    st_.taken_mask = 0;
    st_.cuts_done = 0;
    st_.terminated = false;
    advance();
  }

  // Solves the game from the current state.
  void solve(Vals& out, int* action_out = nullptr) { induce(0, out, action_out); }

  // Applies one action permanently (no undo); used for replays.
  void commit_cut(std::int32_t master_index) {
    const CStmt& stmt = current();
    st_.binding[static_cast<std::size_t>(stmt.label)] = master_index;
    st_.cut_order.push_back(stmt.label);
    ++st_.cuts_done;
    ++st_.pos.back().index;
    advance();
  }

  void commit_choose(int option_index) {
    const CStmt& stmt = current();
    if (stmt.kind == CStmt::Kind::kChoose) {
      auto [lo, hi] = resolve_piece(stmt.pieces[static_cast<std::size_t>(option_index - 1)]);
      record_allocation(stmt, option_index, lo, hi);
    } else {
      const int cell = cell_of_rank(option_index);
      auto [lo, hi] = cell_interval(cell);
      st_.taken_mask |= std::uint64_t{1} << cell;
      record_allocation(stmt, option_index, lo, hi);
    }
    ++st_.pos.back().index;
    advance();
  }

  const CStmt& current() const {
    const CFrame& frame = st_.pos.back();
    return frame.list->stmts[static_cast<std::size_t>(frame.index)];
  }
  bool terminated() const { return st_.terminated; }

  // Parallel mode: pre-computes the memo by splitting the root action set
  // across workers with private engines, then merging. Backward-induction
  // values are a property of the node, so the merged memo is identical to
  // what a sequential solve builds, and the subsequent solve on this engine
  // just replays it.
  void prewarm_parallel(int threads) {
    reset();
    if (st_.terminated || current().kind != CStmt::Kind::kCut) return;
    const CStmt& stmt = current();
    const int stride = game_.stride(st_.cuts_done + 1);
    std::vector<std::int32_t> actions;
    for (const auto& piece : stmt.pieces) {
      auto [lo, hi] = resolve_piece(piece);
      int first = (lo + stride - 1) / stride * stride;
      for (int idx = first; idx <= hi; idx += stride) actions.push_back(idx);
    }
    std::sort(actions.begin(), actions.end());
    actions.erase(std::unique(actions.begin(), actions.end()), actions.end());
    threads = std::min<int>(threads, static_cast<int>(actions.size()));
    if (threads < 2) return;

    std::vector<std::unique_ptr<InductionT>> workers;
    for (int t = 0; t < threads; ++t)
      workers.push_back(std::make_unique<InductionT>(game_));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([this, t, threads, &workers, &actions] {
        InductionT& worker = *workers[static_cast<std::size_t>(t)];
        for (std::size_t i = static_cast<std::size_t>(t); i < actions.size();
             i += static_cast<std::size_t>(threads)) {
          worker.reset();
          worker.commit_cut(actions[i]);
          if (!worker.terminated()) {
            Vals out;
            worker.induce(1, out);
          }
        }
      });
    }
    for (std::thread& thread : pool) thread.join();
    for (auto& worker : workers) memo_.merge(std::move(worker->memo_));
    reset();
  }

  Rational to_rational(const Value& value) const {
    return backend_.to_rational(value);
  }

  std::unordered_map<std::string, Entry>& memo() { return memo_; }
  const CompiledGame& game() const { return game_; }

 private:
  int endpoint_index(const CEndpoint& e) const {
    switch (e.kind) {
      case 0: return 0;
      case 1: return game_.last_index();
      default: {
        const std::int32_t bound =
            st_.binding[static_cast<std::size_t>(e.label)];
        if (bound < 0) throw Error("unbound label in compiled game");
        return bound;
      }
    }
  }

  std::pair<int, int> resolve_piece(const std::pair<CEndpoint, CEndpoint>& p) const {
    int lo = endpoint_index(p.first);
    int hi = endpoint_index(p.second);
    if (hi < lo) std::swap(lo, hi);
    return {lo, hi};
  }

  bool cond_eval(const CCond& cond) const {
    switch (cond.kind) {
      case Condition::Kind::kOrder: {
        const int a = endpoint_index(cond.lhs);
        const int b = endpoint_index(cond.rhs);
        switch (cond.op) {
          case RelOp::kLt: return a < b;
          case RelOp::kLe: return a <= b;
          case RelOp::kEq: return a == b;
          case RelOp::kGe: return a >= b;
          case RelOp::kGt: return a > b;
        }
        return false;
      }
      case Condition::Kind::kChose:
        return st_.chosen[static_cast<std::size_t>(cond.chose_label)] ==
               cond.chose_index;
      case Condition::Kind::kAllocated:
        return st_.allocated_mask & cond.alloc_bit;
      case Condition::Kind::kAnd:
        for (const CCond& child : cond.children)
          if (!cond_eval(child)) return false;
        return true;
      case Condition::Kind::kOr:
        for (const CCond& child : cond.children)
          if (cond_eval(child)) return true;
        return false;
      case Condition::Kind::kNot:
        return !cond_eval(cond.children.front());
    }
    return false;
  }

  void advance() {
    while (true) {
      if (st_.pos.empty()) {
        st_.terminated = true;
        return;
      }
      CFrame& frame = st_.pos.back();
      if (frame.index >= static_cast<int>(frame.list->stmts.size())) {
        st_.pos.pop_back();
        continue;
      }
      const CStmt& stmt =
          frame.list->stmts[static_cast<std::size_t>(frame.index)];
      if (stmt.kind == CStmt::Kind::kExit) {
        st_.terminated = true;
        return;
      }
      if (stmt.kind == CStmt::Kind::kIf) {
        ++frame.index;
        const CList* body =
            cond_eval(stmt.cond) ? stmt.then_body.get() : stmt.else_body.get();
        st_.pos.push_back({body, 0});
        continue;
      }
      return;
    }
  }

  void record_allocation(const CStmt& stmt, int option_index, int lo, int hi) {
    if (lo < hi) {
      for (const auto& [alo, ahi] : st_.allocated)
        if (std::max(lo, alo) < std::min(hi, ahi))
          throw OverlappingAllocation("allocations overlap in solved game");
      st_.allocated.emplace_back(lo, hi);
    }
    st_.chosen[static_cast<std::size_t>(stmt.label)] =
        static_cast<std::int16_t>(option_index);
    st_.choose_order.emplace_back(stmt.label,
                                  static_cast<std::int16_t>(option_index));
    st_.allocated_mask |= std::uint32_t{1} << (stmt.agent - 1);
  }

  Snapshot& snap(int depth) {
    if (depth >= static_cast<int>(snaps_.size())) snaps_.resize(snaps_.size() + 16);
    return snaps_[static_cast<std::size_t>(depth)];
  }

  void save(int depth) {
    Snapshot& s = snap(depth);
    s.pos = st_.pos;
    s.cut_order_size = st_.cut_order.size();
    s.choose_order_size = st_.choose_order.size();
    s.allocated_size = st_.allocated.size();
    s.allocated_mask = st_.allocated_mask;
    s.taken_mask = st_.taken_mask;
    s.cuts_done = st_.cuts_done;
    s.terminated = st_.terminated;
    s.touched_label = -1;
  }

  void restore(int depth) {
    Snapshot& s = snap(depth);
    st_.pos = s.pos;
    st_.cut_order.resize(s.cut_order_size);
    st_.choose_order.resize(s.choose_order_size);
    st_.allocated.resize(s.allocated_size);
    st_.allocated_mask = s.allocated_mask;
    st_.taken_mask = s.taken_mask;
    st_.cuts_done = s.cuts_done;
    st_.terminated = s.terminated;
    if (s.touched_label >= 0) {
      if (s.touched_binding)
        st_.binding[static_cast<std::size_t>(s.touched_label)] = -1;
      else
        st_.chosen[static_cast<std::size_t>(s.touched_label)] = 0;
    }
  }

  // Cell machinery for choose-any: boundaries are 0, the sorted cut
  // multiset, and 1; cell i spans boundaries [i, i+1].
  void compute_boundaries(std::vector<std::int32_t>& bounds) const {
    bounds.clear();
    bounds.push_back(0);
    for (std::int16_t label : st_.cut_order)
      bounds.push_back(st_.binding[static_cast<std::size_t>(label)]);
    std::sort(bounds.begin() + 1, bounds.end());
    bounds.push_back(game_.last_index());
    if (bounds.size() - 1 > 64)
      throw Error("choose-any supports at most 64 pieces");
  }

  std::pair<int, int> cell_interval(int cell) const {
    std::vector<std::int32_t> bounds;
    compute_boundaries(bounds);
    return {bounds[static_cast<std::size_t>(cell)],
            bounds[static_cast<std::size_t>(cell) + 1]};
  }

  int cell_of_rank(int rank) const {
    std::vector<std::int32_t> bounds;
    compute_boundaries(bounds);
    int seen = 0;
    for (int cell = 0; cell + 1 < static_cast<int>(bounds.size()); ++cell) {
      if (st_.taken_mask >> cell & 1) continue;
      if (++seen == rank) return cell;
    }
    throw IllegalAction("choose-any rank out of range");
  }

  void build_key(std::string& key) {
    key.clear();
    key += "P:";
    std::fill(live_labels_.begin(), live_labels_.end(), 0);
    std::fill(live_chose_.begin(), live_chose_.end(), 0);
    std::uint32_t live_alloc = 0;
    bool chooseany = false;
    for (const CFrame& frame : st_.pos) {
      key += std::to_string(frame.list->layout_id);
      key += '.';
      key += std::to_string(frame.index);
      key += '/';
      const ProgramLayout::Suffix& sfx =
          game_.layout().suffix(frame.list->src, frame.index);
      for (std::size_t w = 0; w < live_labels_.size(); ++w) {
        live_labels_[w] |= sfx.live_labels[w];
        live_chose_[w] |= sfx.live_chose[w];
      }
      live_alloc |= sfx.live_allocated;
      chooseany |= sfx.chooseany_reachable;
    }
    key += "|C:";
    key += std::to_string(st_.cuts_done);
    key += "|B:";
    const auto& labels = game_.program().labels;
    for (std::int16_t label : st_.cut_order) {
      const std::size_t l = static_cast<std::size_t>(label);
      if (chooseany || (live_labels_[l / 64] >> (l % 64) & 1)) {
        key += labels[l];
        key += '=';
        key += game_.master_string(st_.binding[l]);
        key += ',';
      }
    }
    key += "|H:";
    for (const auto& [label, index] : st_.choose_order) {
      const std::size_t l = static_cast<std::size_t>(label);
      if (live_chose_[l / 64] >> (l % 64) & 1) {
        key += labels[l];
        key += '=';
        key += std::to_string(index);
        key += ',';
      }
    }
    key += "|A:";
    key += std::to_string(st_.allocated_mask & live_alloc);
    if (chooseany) {
      key += "|T:";
      for (int cell = 0; cell < 64; ++cell) {
        if (st_.taken_mask >> cell & 1) {
          key += std::to_string(cell);
          key += ',';
        }
      }
    }
  }

  struct DepthScratch {
    Vals child;
    Vals best;
    std::vector<std::int32_t> actions;
    std::string key;
  };

  DepthScratch& scratch(int depth) {
    if (depth >= static_cast<int>(scratch_.size()))
      scratch_.resize(scratch_.size() + 16);
    return scratch_[static_cast<std::size_t>(depth)];
  }

  void zero(Vals& v) const {
    for (int a = 0; a < game_.n_agents(); ++a)
      v[static_cast<std::size_t>(a)] = Value(0);
  }

  bool tail_chooseany_now() const {
    for (const CFrame& frame : st_.pos)
      if (!frame.list->tail_chooseany[static_cast<std::size_t>(frame.index)])
        return false;
    return true;
  }

  // Subset DP over the fixed cells of an all-choose-any tail.
  void tail_dp(Vals& out, int* action_out) {
    std::vector<std::int16_t> seq;
    for (auto it = st_.pos.rbegin(); it != st_.pos.rend(); ++it)
      for (std::size_t i = static_cast<std::size_t>(it->index);
           i < it->list->stmts.size(); ++i)
        seq.push_back(it->list->stmts[i].agent);

    std::vector<std::int32_t> bounds;
    compute_boundaries(bounds);
    const int cells = static_cast<int>(bounds.size()) - 1;

    std::vector<std::unordered_map<std::uint64_t, Vals>> memo(seq.size());
    auto cell_value = [&](int agent0, int cell) {
      return backend_.piece_value(agent0, bounds[static_cast<std::size_t>(cell)],
                                  bounds[static_cast<std::size_t>(cell) + 1]);
    };
    std::function<const Vals&(std::size_t, std::uint64_t)> dp =
        [&](std::size_t round, std::uint64_t mask) -> const Vals& {
      static thread_local Vals zeros{};
      if (round == seq.size()) {
        zero(zeros);
        return zeros;
      }
      auto [it, inserted] = memo[round].try_emplace(mask);
      if (!inserted) return it->second;
      const int agent0 = seq[round] - 1;
      bool found = false;
      Vals best{};
      for (int cell = 0; cell < cells; ++cell) {
        if (mask >> cell & 1) continue;
        Vals cand = dp(round + 1, mask | (std::uint64_t{1} << cell));
        cand[static_cast<std::size_t>(agent0)] =
            Value(cand[static_cast<std::size_t>(agent0)] +
                  cell_value(agent0, cell));
        if (!found ||
            cand[static_cast<std::size_t>(agent0)] >
                best[static_cast<std::size_t>(agent0)]) {
          best = cand;
          found = true;
        }
      }
      if (!found)
        throw EmptyChooseSet("no available piece left in choose-any tail");
      it->second = best;
      return it->second;
    };

    // Top level is unrolled so the chosen option rank can be reported.
    const int agent0 = seq.front() - 1;
    bool found = false;
    Vals best{};
    int best_rank = 0;
    int rank = 0;
    for (int cell = 0; cell < cells; ++cell) {
      if (st_.taken_mask >> cell & 1) continue;
      ++rank;
      Vals cand = dp(1, st_.taken_mask | (std::uint64_t{1} << cell));
      cand[static_cast<std::size_t>(agent0)] =
          Value(cand[static_cast<std::size_t>(agent0)] +
                cell_value(agent0, cell));
      if (!found || cand[static_cast<std::size_t>(agent0)] >
                        best[static_cast<std::size_t>(agent0)]) {
        best = cand;
        best_rank = rank;
        found = true;
      }
    }
    if (!found)
      throw EmptyChooseSet("no available piece left in choose-any tail");
    out = best;
    if (action_out != nullptr) *action_out = best_rank;
  }

  void induce(int depth, Vals& out, int* action_out = nullptr) {
    if (st_.terminated) {
      if (action_out != nullptr)
        throw Error("no action at a terminated state");
      zero(out);
      return;
    }
    const CStmt& stmt = current();
    const int agent0 = stmt.agent - 1;
    DepthScratch& sc = scratch(depth);

    switch (stmt.kind) {
      case CStmt::Kind::kCut: {
        build_key(sc.key);
        auto hit = memo_.find(sc.key);
        if (hit != memo_.end()) {
          out = hit->second.utils;
          if (action_out != nullptr) *action_out = hit->second.action;
          return;
        }
        const int stride = game_.stride(st_.cuts_done + 1);
        sc.actions.clear();
        for (const auto& piece : stmt.pieces) {
          auto [lo, hi] = resolve_piece(piece);
          int first = (lo + stride - 1) / stride * stride;
          for (int idx = first; idx <= hi; idx += stride)
            sc.actions.push_back(idx);
        }
        std::sort(sc.actions.begin(), sc.actions.end());
        sc.actions.erase(std::unique(sc.actions.begin(), sc.actions.end()),
                         sc.actions.end());

        bool found = false;
        std::int32_t best_action = -1;
        // sc.best / sc.child are stable across child calls at this depth.
        for (std::int32_t action : sc.actions) {
          save(depth);
          Snapshot& s = snap(depth);
          s.touched_label = stmt.label;
          s.touched_binding = true;
          st_.binding[static_cast<std::size_t>(stmt.label)] = action;
          st_.cut_order.push_back(stmt.label);
          ++st_.cuts_done;
          ++st_.pos.back().index;
          advance();
          induce(depth + 1, sc.child);
          restore(depth);
          if (!found || sc.child[static_cast<std::size_t>(agent0)] >
                            sc.best[static_cast<std::size_t>(agent0)]) {
            sc.best = sc.child;
            best_action = action;
            found = true;
          }
        }
        if (!found) throw Error("cut node with no feasible grid point");
        memo_.emplace(sc.key, Entry{sc.best, best_action});
        out = sc.best;
        if (action_out != nullptr) *action_out = best_action;
        return;
      }

      case CStmt::Kind::kChoose: {
        bool found = false;
        int best_option = 0;
        for (int option = 1; option <= static_cast<int>(stmt.pieces.size());
             ++option) {
          auto [lo, hi] =
              resolve_piece(stmt.pieces[static_cast<std::size_t>(option - 1)]);
          save(depth);
          Snapshot& s = snap(depth);
          s.touched_label = stmt.label;
          s.touched_binding = false;
          record_allocation(stmt, option, lo, hi);
          ++st_.pos.back().index;
          advance();
          induce(depth + 1, sc.child);
          restore(depth);
          sc.child[static_cast<std::size_t>(agent0)] =
              Value(sc.child[static_cast<std::size_t>(agent0)] +
                    backend_.piece_value(agent0, lo, hi));
          if (!found || sc.child[static_cast<std::size_t>(agent0)] >
                            sc.best[static_cast<std::size_t>(agent0)]) {
            sc.best = sc.child;
            best_option = option;
            found = true;
          }
        }
        if (!found) throw EmptyChooseSet("choose statement with no options");
        out = sc.best;
        if (action_out != nullptr) *action_out = best_option;
        return;
      }

      case CStmt::Kind::kChooseAny: {
        if (tail_chooseany_now()) {
          tail_dp(out, action_out);
          return;
        }
        std::vector<std::int32_t> bounds;
        compute_boundaries(bounds);
        const int cells = static_cast<int>(bounds.size()) - 1;
        bool found = false;
        int best_rank = 0;
        int rank = 0;
        for (int cell = 0; cell < cells; ++cell) {
          if (st_.taken_mask >> cell & 1) continue;
          ++rank;
          const int lo = bounds[static_cast<std::size_t>(cell)];
          const int hi = bounds[static_cast<std::size_t>(cell) + 1];
          save(depth);
          Snapshot& s = snap(depth);
          s.touched_label = stmt.label;
          s.touched_binding = false;
          st_.taken_mask |= std::uint64_t{1} << cell;
          record_allocation(stmt, rank, lo, hi);
          ++st_.pos.back().index;
          advance();
          induce(depth + 1, sc.child);
          restore(depth);
          sc.child[static_cast<std::size_t>(agent0)] =
              Value(sc.child[static_cast<std::size_t>(agent0)] +
                    backend_.piece_value(agent0, lo, hi));
          if (!found || sc.child[static_cast<std::size_t>(agent0)] >
                            sc.best[static_cast<std::size_t>(agent0)]) {
            sc.best = sc.child;
            best_rank = rank;
            found = true;
          }
        }
        if (!found)
          throw EmptyChooseSet("no available piece at choose-any");
        out = sc.best;
        if (action_out != nullptr) *action_out = best_rank;
        return;
      }

      default:
        throw Error("unexpected statement at a decision point");
    }
  }

  const CompiledGame& game_;
  B backend_;
  SolveState st_;
  std::vector<Snapshot> snaps_;
  std::vector<DepthScratch> scratch_;
  std::vector<std::uint64_t> live_labels_;
  std::vector<std::uint64_t> live_chose_;
  std::unordered_map<std::string, Entry> memo_;
};

using InductionI64 = InductionT<I64Backend>;
using InductionRat = InductionT<RatBackend>;

}  // namespace internal

// --- DiscreteStrategyProfile ---

struct DiscreteStrategyProfile::Impl {
  const ProtocolProgram* program = nullptr;
  ValuationProfile profile;
  GridFamily grids;
  std::unique_ptr<ProgramLayout> layout;
  std::unique_ptr<internal::CompiledGame> game;
  // Exactly one engine, depending on the value backend. Queries replay and
  // may lazily extend the memo, so they are serialized by the caller.
  mutable std::unique_ptr<internal::InductionI64> engine_i64;
  mutable std::unique_ptr<internal::InductionRat> engine_rat;

  template <class Fn>
  auto with_engine(Fn&& fn) const {
    if (engine_i64) return fn(*engine_i64);
    return fn(*engine_rat);
  }
};

DiscreteStrategyProfile::~DiscreteStrategyProfile() = default;

const GridFamily& DiscreteStrategyProfile::grids() const {
  return impl_->grids;
}
const ProgramLayout& DiscreteStrategyProfile::layout() const {
  return *impl_->layout;
}

namespace {

// Replays `state`'s actions into the compiled game, with cut coordinates
// taken from `mapped` (indexed like state.bindings), then asks the
// induction for the optimal action at the reached node.
template <class Engine>
Action prescribed_action(Engine& engine, const ProtocolProgram& program,
                         const ExecutionState& state,
                         const std::vector<Rational>& mapped) {
  const internal::CompiledGame& game = engine.game();
  std::vector<std::int32_t> cut_by_label(program.labels.size(), -1);
  for (std::size_t i = 0; i < state.bindings.size(); ++i)
    cut_by_label[static_cast<std::size_t>(state.bindings[i].first)] =
        game.master_index(mapped[i]);
  std::vector<std::int16_t> choice_by_label(program.labels.size(), 0);
  for (const ChooseEvent& event : state.chooses)
    choice_by_label[static_cast<std::size_t>(event.label_id)] =
        static_cast<std::int16_t>(event.index);

  engine.reset();
  const std::size_t n_actions = state.bindings.size() + state.chooses.size();
  for (std::size_t done = 0; done < n_actions; ++done) {
    if (engine.terminated())
      throw Error("history terminates before the queried node");
    const internal::CStmt& stmt = engine.current();
    if (stmt.kind == internal::CStmt::Kind::kCut) {
      const std::int32_t idx =
          cut_by_label[static_cast<std::size_t>(stmt.label)];
      if (idx < 0) throw Error("history is missing a cut binding");
      engine.commit_cut(idx);
    } else {
      const int option = choice_by_label[static_cast<std::size_t>(stmt.label)];
      if (option <= 0) throw Error("history is missing a choice");
      engine.commit_choose(option);
    }
  }
  if (engine.terminated())
    throw Error("queried state is terminal in the discrete game");

  typename Engine::Vals values;
  int action = 0;
  engine.solve(values, &action);
  if (engine.current().kind == internal::CStmt::Kind::kCut)
    return Action::cut_at(game.master()[static_cast<std::size_t>(action)]);
  return Action::choose(action);
}

}  // namespace

Action DiscreteStrategyProfile::action_at_discrete(
    const ExecutionState& state) const {
  std::vector<Rational> raw;
  raw.reserve(state.bindings.size());
  for (const auto& [label, coordinate] : state.bindings)
    raw.push_back(coordinate);
  return impl_->with_engine([&](auto& engine) {
    return prescribed_action(engine, *impl_->program, state, raw);
  });
}

Action DiscreteStrategyProfile::action_at(const ExecutionState& state) const {
  std::vector<Rational> raw;
  raw.reserve(state.bindings.size());
  for (const auto& [label, coordinate] : state.bindings)
    raw.push_back(coordinate);
  const std::vector<Rational> mapped = map_history(raw, impl_->grids);
  return impl_->with_engine([&](auto& engine) {
    return prescribed_action(engine, *impl_->program, state, mapped);
  });
}

std::map<std::string, Action> DiscreteStrategyProfile::cut_action_table()
    const {
  std::map<std::string, Action> table;
  impl_->with_engine([&](auto& engine) {
    for (const auto& [key, entry] : engine.memo())
      table.emplace(key,
                    Action::cut_at(engine.game().master()[static_cast<std::size_t>(
                        entry.action)]));
    return 0;
  });
  return table;
}

// --- backward induction entry point ---

struct SolveAccess {
  static std::shared_ptr<DiscreteStrategyProfile> make() {
    return std::shared_ptr<DiscreteStrategyProfile>(
        new DiscreteStrategyProfile());
  }
  static std::unique_ptr<DiscreteStrategyProfile::Impl>& impl(
      DiscreteStrategyProfile& p) {
    return p.impl_;
  }
  static std::unique_ptr<DiscreteStrategyProfile::Impl> new_impl() {
    return std::make_unique<DiscreteStrategyProfile::Impl>();
  }
};

namespace {

template <class Engine>
EquilibriumCertificate solve_with(Engine& engine, const GridFamily& grids,
                                  int n_agents, int threads) {
  typename Engine::Vals values;
  if (threads > 1) engine.prewarm_parallel(threads);
  engine.reset();
  if (engine.terminated()) {
    for (int a = 0; a < n_agents; ++a)
      values[static_cast<std::size_t>(a)] = typename Engine::Value(0);
  } else {
    engine.solve(values);
  }
  EquilibriumCertificate cert;
  cert.eps = grids.eps;
  for (int a = 0; a < n_agents; ++a) {
    cert.utilities.push_back(
        engine.to_rational(values[static_cast<std::size_t>(a)]));
    cert.per_agent_regret_bound.push_back(grids.eps);
  }
  for (const auto& grid : grids.grids) cert.grid_sizes.push_back(grid.size());
  cert.node_count = engine.memo().size();
  cert.tiebreak_id = kTieBreakId;
  return cert;
}

}  // namespace

SolveResult backward_induction(const ProtocolProgram& program,
                               const ValuationProfile& profile,
                               const GridFamily& grids,
                               const SolveOptions& options) {
  {
    std::vector<Violation> violations = validate(program);
    if (!violations.empty())
      throw Error("program fails validation: " + violations.front().code +
                  ": " + violations.front().message);
  }
  const OperationCounts counts = count_operations(program);
  if (counts.max_cuts > grids.K)
    throw CutOrdinalExceedsK("program cuts up to " +
                             std::to_string(counts.max_cuts) +
                             " times but K=" + std::to_string(grids.K));
  const std::uint64_t estimate = estimate_tree_size(program, grids);
  if (estimate > options.budget)
    throw BudgetExceeded("estimated discrete game size " +
                             std::to_string(estimate) + " exceeds budget " +
                             std::to_string(options.budget),
                         estimate);

  std::shared_ptr<DiscreteStrategyProfile> handle = SolveAccess::make();
  auto impl = SolveAccess::new_impl();
  impl->program = &program;
  impl->profile = profile;
  impl->grids = grids;
  impl->layout = std::make_unique<ProgramLayout>(program);
  impl->game = std::make_unique<internal::CompiledGame>(
      program, impl->profile, impl->grids, *impl->layout);

  SolveResult result;
  if (impl->game->use_int64()) {
    impl->engine_i64 = std::make_unique<internal::InductionI64>(*impl->game);
    result.certificate = solve_with(*impl->engine_i64, impl->grids,
                                    program.n_agents, options.threads);
  } else {
    impl->engine_rat = std::make_unique<internal::InductionRat>(*impl->game);
    result.certificate = solve_with(*impl->engine_rat, impl->grids,
                                    program.n_agents, options.threads);
  }
  SolveAccess::impl(*handle) = std::move(impl);
  result.profile = std::move(handle);
  return result;
}

std::vector<Strategy> lifted_strategies(
    std::shared_ptr<const DiscreteStrategyProfile> profile) {
  std::vector<Strategy> out;
  const int n = profile->layout().program().n_agents;
  for (int agent = 1; agent <= n; ++agent)
    out.push_back([profile](const DecisionNode& node) {
      return profile->action_at(*node.state);
    });
  return out;
}

}  // namespace fairdiv
