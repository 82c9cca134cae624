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

#include "fairdiv/valuation.hpp"

#include <algorithm>
#include <utility>

namespace fairdiv {

Rational parse_rational(const std::string& text) {
  if (text.empty()) throw Error("empty rational literal");
  std::size_t slash = text.find('/');
  const std::string num = text.substr(0, slash);
  const std::string den =
      slash == std::string::npos ? "1" : text.substr(slash + 1);
  auto is_int = [](const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
      if (s[i] < '0' || s[i] > '9') return false;
    return true;
  };
  if (!is_int(num) || !is_int(den) || den[0] == '-')
    throw Error("bad rational literal \"" + text + "\"");
  Rational r;
  if (mpq_set_str(r.get_mpq_t(), (num + "/" + den).c_str(), 10) != 0)
    throw Error("bad rational literal \"" + text + "\"");
  if (r.get_den() == 0) throw Error("zero denominator in \"" + text + "\"");
  r.canonicalize();
  return r;
}

std::string rational_string(const Rational& value) {
  std::string s = value.get_str();
  if (s.find('/') == std::string::npos) s += "/1";
  return s;
}

long rational_ceil(const Rational& value) {
  if (value <= 0) throw Error("rational_ceil requires a positive value");
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), value.get_num_mpz_t(), value.get_den_mpz_t());
  if (!q.fits_slong_p()) throw Error("ceil does not fit a machine integer");
  return q.get_si();
}

Interval::Interval(Rational low, Rational high)
    : lo(std::move(low)), hi(std::move(high)) {
  if (lo < 0 || hi > 1 || lo > hi)
    throw InvalidInterval("interval [" + rational_string(lo) + ", " +
                          rational_string(hi) + "] is not inside the cake");
}

bool Piece::empty() const {
  for (const Interval& iv : intervals)
    if (!iv.empty()) return false;
  return true;
}

Rational Piece::length() const {
  Rational total = 0;
  for (const Interval& iv : intervals) total += iv.length();
  return total;
}

Piece make_piece(std::vector<Interval> intervals) {
  std::erase_if(intervals, [](const Interval& iv) { return iv.empty(); });
  std::sort(intervals.begin(), intervals.end(),
            [](const Interval& a, const Interval& b) {
              return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
            });
  Piece piece;
  for (Interval& iv : intervals) {
    if (!piece.intervals.empty()) {
      Interval& last = piece.intervals.back();
      if (iv.lo < last.hi)
        throw InvalidInterval("piece intervals overlap with positive length");
      if (iv.lo == last.hi) {
        last.hi = iv.hi;
        continue;
      }
    }
    piece.intervals.push_back(std::move(iv));
  }
  return piece;
}

bool pieces_overlap(const Piece& p, const Piece& q) {
  for (const Interval& a : p.intervals) {
    for (const Interval& b : q.intervals) {
      const Rational lo = std::max(a.lo, b.lo);
      const Rational hi = std::min(a.hi, b.hi);
      if (lo < hi) return true;
    }
  }
  return false;
}

PiecewiseDensity::PiecewiseDensity(std::vector<DensitySegment> segments,
                                   bool strictly_positive)
    : segments_(std::move(segments)), strictly_positive_(strictly_positive) {
  if (segments_.empty()) throw InvalidDensity("density has no segments");
  Rational prev = 0;
  Rational total = 0;
  for (const DensitySegment& seg : segments_) {
    if (seg.to <= prev)
      throw InvalidDensity("breakpoints must increase strictly from 0");
    if (seg.density < 0) throw InvalidDensity("negative density");
    if (strictly_positive_ && seg.density == 0)
      throw InvalidDensity("zero density in a strictly positive valuation");
    total += seg.density * (seg.to - prev);
    prev = seg.to;
  }
  if (prev != 1) throw InvalidDensity("last breakpoint must be exactly 1");
  if (total != 1) {
    Rational deficit = 1 - total;
    throw InvalidDensity("density integrates to " + rational_string(total) +
                         ", off by " + rational_string(deficit));
  }
}

Rational eval(const PiecewiseDensity& density, const Interval& iv) {
  if (iv.empty()) return Rational(0);
  Rational total = 0;
  Rational left = 0;
  for (const DensitySegment& seg : density.segments()) {
    const Rational lo = std::max(left, iv.lo);
    const Rational hi = std::min(seg.to, iv.hi);
    if (lo < hi) total += seg.density * (hi - lo);
    left = seg.to;
    if (left >= iv.hi) break;
  }
  return total;
}

Rational mark(const PiecewiseDensity& density, const Rational& from,
              const Rational& alpha) {
  if (from < 0 || from > 1)
    throw InvalidInterval("mark origin outside the cake");
  if (alpha < 0) throw AlphaOutOfRange("negative cut value");
  if (alpha == 0) return from;
  Rational need = alpha;
  Rational left = 0;
  for (const DensitySegment& seg : density.segments()) {
    const Rational lo = std::max(left, from);
    const Rational hi = seg.to;
    if (lo < hi) {
      const Rational value = seg.density * (hi - lo);
      // need > 0 here, so value >= need implies a positive density.
      if (value >= need) return Rational(lo + need / seg.density);
      need -= value;
    }
    left = seg.to;
  }
  throw AlphaOutOfRange("cut value " + rational_string(alpha) +
                        " exceeds remaining value from " +
                        rational_string(from) + " by " +
                        rational_string(need));
}

Rational value_of_piece(const PiecewiseDensity& density, const Piece& piece) {
  Rational total = 0;
  for (const Interval& iv : piece.intervals) total += eval(density, iv);
  return total;
}

PiecewiseDensity uniform_density() {
  return PiecewiseDensity({{Rational(1), Rational(1)}}, true);
}

std::string ParseError::format(ParseErrorCode code, SourcePos pos,
                               const std::string& message) {
  const char* name = "";
  switch (code) {
    case ParseErrorCode::kSyntaxError: name = "syntax error"; break;
    case ParseErrorCode::kUnknownLabel: name = "unknown label"; break;
    case ParseErrorCode::kAgentOutOfRange: name = "agent out of range"; break;
    case ParseErrorCode::kNumericLiteralInCondition:
      name = "numeric literal in condition";
      break;
  }
  std::string out;
  if (pos.line > 0)
    out = std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": ";
  out += name;
  if (!message.empty()) out += ": " + message;
  return out;
}

}  // namespace fairdiv
