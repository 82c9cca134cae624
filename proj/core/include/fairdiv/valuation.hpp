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

#ifndef FAIRDIV_VALUATION_HPP_
#define FAIRDIV_VALUATION_HPP_

#include <cstddef>
#include <vector>

#include "fairdiv/rational.hpp"

namespace fairdiv {

// The cake is [0,1]. Agents value subintervals through piecewise-constant
// density functions with rational breakpoints and rational densities, so
// every Evaluate/Cut query below has an exact rational answer.

// Closed subinterval of the cake. lo == hi is the legal empty interval;
// boundaries carry no value.
struct Interval {
  Rational lo;
  Rational hi;

  Interval() : lo(0), hi(0) {}
  Interval(Rational low, Rational high);

  bool empty() const { return lo == hi; }
  Rational length() const { return Rational(hi - lo); }

  bool operator==(const Interval&) const = default;
};

// Finite union of intervals, kept sorted by lo; consecutive intervals may
// share endpoints but never overlap with positive length.
struct Piece {
  std::vector<Interval> intervals;

  bool empty() const;
  Rational length() const;

  bool operator==(const Piece&) const = default;
};

// Sorts, drops empty intervals, merges touching ones, and rejects
// positive-length overlap.
Piece make_piece(std::vector<Interval> intervals);

// True if p and q share a positive-length region.
bool pieces_overlap(const Piece& p, const Piece& q);

// One constant-density span; `to` is the right breakpoint of the span.
struct DensitySegment {
  Rational to;
  Rational density;

  bool operator==(const DensitySegment&) const = default;
};

// Value density of one agent. The first segment starts at 0, the last ends
// at 1 and the total integral is exactly 1.
class PiecewiseDensity {
 public:
  PiecewiseDensity(std::vector<DensitySegment> segments, bool strictly_positive);

  const std::vector<DensitySegment>& segments() const { return segments_; }
  bool strictly_positive() const { return strictly_positive_; }

  bool operator==(const PiecewiseDensity&) const = default;

 private:
  std::vector<DensitySegment> segments_;
  bool strictly_positive_;
};

struct ValuationProfile {
  std::vector<PiecewiseDensity> agents;

  int size() const { return static_cast<int>(agents.size()); }
};

// Evaluate query: exact integral of the density over `iv`.
Rational eval(const PiecewiseDensity& density, const Interval& iv);

// Cut query: leftmost y with integral of `density` over [from, y] equal to
// alpha. Throws AlphaOutOfRange when alpha < 0 or alpha exceeds the value of
// [from, 1].
Rational mark(const PiecewiseDensity& density, const Rational& from,
              const Rational& alpha);

Rational value_of_piece(const PiecewiseDensity& density, const Piece& piece);

PiecewiseDensity uniform_density();

}  // namespace fairdiv

#endif  // FAIRDIV_VALUATION_HPP_
