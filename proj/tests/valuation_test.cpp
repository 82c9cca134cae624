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

#include <cmath>
#include <random>

#include "doctest.h"
#include "fairdiv/json_io.hpp"
#include "fairdiv/valuation.hpp"

using namespace fairdiv;

namespace {

// Two-slope density used throughout the suite: 3/2 on [0,1/2], 1/2 on [1/2,1].
PiecewiseDensity two_slope() {
  return PiecewiseDensity({{make_rational(1, 2), make_rational(3, 2)},
                           {Rational(1), make_rational(1, 2)}},
                          true);
}

// Test-only numeric integration oracle, independent of eval's arithmetic.
double riemann(const PiecewiseDensity& density, double lo, double hi,
               int steps = 100000) {
  auto density_at = [&density](double x) {
    double left = 0.0;
    for (const DensitySegment& seg : density.segments()) {
      const double right = seg.to.get_d();
      if (x >= left && x < right) return seg.density.get_d();
      left = right;
    }
    return density.segments().back().density.get_d();
  };
  double total = 0.0;
  const double width = (hi - lo) / steps;
  for (int i = 0; i < steps; ++i)
    total += density_at(lo + (i + 0.5) * width) * width;
  return total;
}

PiecewiseDensity random_density(std::mt19937_64& rng) {
  ValuationProfile profile = random_rational_profile(1, rng());
  return profile.agents.front();
}

}  // namespace

TEST_SUITE_BEGIN("valuation");

TEST_CASE("eval on basic intervals") {
  const PiecewiseDensity u = uniform_density();
  CHECK(eval(u, Interval(Rational(0), make_rational(1, 2))) ==
        make_rational(1, 2));

  const PiecewiseDensity d = two_slope();
  const Rational mid = eval(d, Interval(make_rational(1, 4), make_rational(3, 4)));
  CHECK(mid == make_rational(1, 2));
  CHECK(std::abs(mid.get_d() - riemann(d, 0.25, 0.75)) < 1e-6);

  CHECK(eval(d, Interval(make_rational(1, 3), make_rational(1, 3))) ==
        Rational(0));
}

TEST_CASE("mark finds the leftmost point") {
  const PiecewiseDensity u = uniform_density();
  CHECK(mark(u, make_rational(1, 4), make_rational(1, 4)) ==
        make_rational(1, 2));

  const PiecewiseDensity d = two_slope();
  CHECK(mark(d, Rational(0), make_rational(7, 8)) == make_rational(3, 4));
  CHECK(mark(d, Rational(0), Rational(0)) == Rational(0));
  CHECK(mark(d, make_rational(2, 5), Rational(0)) == make_rational(2, 5));
}

TEST_CASE("mark on a zero-density plateau") {
  // 2 on [0,1/4], 0 on [1/4,1/2], 1 on [1/2,1].
  const PiecewiseDensity d(
      {{make_rational(1, 4), Rational(2)},
       {make_rational(1, 2), Rational(0)},
       {Rational(1), Rational(1)}},
      false);
  CHECK(mark(d, Rational(0), make_rational(1, 2)) == make_rational(1, 4));
  CHECK(mark(d, Rational(0), make_rational(3, 4)) == make_rational(3, 4));
}

TEST_CASE("mark range errors") {
  const PiecewiseDensity d = two_slope();
  CHECK_THROWS_AS(mark(d, make_rational(1, 2), make_rational(1, 3)),
                  AlphaOutOfRange);
  CHECK_THROWS_AS(mark(d, Rational(0), Rational(-1)), AlphaOutOfRange);
  CHECK(mark(d, make_rational(1, 2), make_rational(1, 4)) == Rational(1));
}

TEST_CASE("value_of_piece is additive over the piece") {
  const PiecewiseDensity u = uniform_density();
  const Piece ends = make_piece({Interval(Rational(0), make_rational(1, 4)),
                                 Interval(make_rational(3, 4), Rational(1))});
  CHECK(value_of_piece(u, ends) == make_rational(1, 2));

  const PiecewiseDensity d = two_slope();
  const Piece whole = make_piece({Interval(Rational(0), make_rational(1, 2)),
                                  Interval(make_rational(1, 2), Rational(1))});
  CHECK(value_of_piece(d, whole) == Rational(1));
  const Piece quarter =
      make_piece({Interval(make_rational(1, 4), make_rational(1, 2))});
  CHECK(value_of_piece(d, quarter) == make_rational(3, 8));
}

TEST_CASE("roundtrip, additivity and normalization properties") {
  std::mt19937_64 rng(20260801);
  for (int trial = 0; trial < 200; ++trial) {
    const PiecewiseDensity d = random_density(rng);
    CHECK(eval(d, Interval(Rational(0), Rational(1))) == Rational(1));

    const Rational x = make_rational(static_cast<long>(rng() % 97), 96);
    const Rational remaining = eval(d, Interval(x, Rational(1)));
    const Rational alpha =
        Rational(remaining * make_rational(static_cast<long>(rng() % 33), 32));
    const Rational y = mark(d, x, alpha);
    REQUIRE(y >= x);
    CHECK(eval(d, Interval(x, y)) == alpha);

    const Rational b = make_rational(static_cast<long>(rng() % 97), 96);
    const Rational lo = std::min(x, b);
    const Rational hi = std::max(x, b);
    const Rational via = midpoint(lo, hi);
    CHECK(eval(d, Interval(lo, hi)) ==
          eval(d, Interval(lo, via)) + eval(d, Interval(via, hi)));

    // Monotonicity under enlargement.
    CHECK(eval(d, Interval(lo, hi)) <= eval(d, Interval(Rational(0), hi)));
  }
}

TEST_CASE("divisibility: a lambda fraction of any interval is markable inside") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const PiecewiseDensity d = random_density(rng);
    const Rational a = make_rational(static_cast<long>(rng() % 17), 16);
    const Rational b = make_rational(static_cast<long>(rng() % 17), 16);
    const Interval iv(std::min(a, b), std::max(a, b));
    const Rational lambda = make_rational(static_cast<long>(rng() % 9), 8);
    const Rational target = Rational(lambda * eval(d, iv));
    const Rational point = mark(d, iv.lo, target);
    CHECK(point >= iv.lo);
    CHECK(point <= iv.hi);
  }
}

TEST_CASE("piece construction merges and rejects overlap") {
  const Piece merged =
      make_piece({Interval(make_rational(1, 2), Rational(1)),
                  Interval(Rational(0), make_rational(1, 2))});
  CHECK(merged.intervals.size() == 1);
  CHECK(merged.length() == Rational(1));

  CHECK_THROWS_AS(
      make_piece({Interval(Rational(0), make_rational(2, 3)),
                  Interval(make_rational(1, 3), Rational(1))}),
      InvalidInterval);
  CHECK(make_piece({Interval(make_rational(1, 3), make_rational(1, 3))})
            .empty());
}

TEST_CASE("density invariants are enforced") {
  CHECK_THROWS_AS(PiecewiseDensity({{Rational(1), make_rational(1, 2)}}, true),
                  InvalidDensity);
  CHECK_THROWS_AS(
      PiecewiseDensity({{make_rational(1, 2), Rational(1)}}, true),
      InvalidDensity);
  CHECK_THROWS_AS(
      PiecewiseDensity({{make_rational(1, 2), Rational(0)},
                        {Rational(1), Rational(2)}},
                       true),
      InvalidDensity);
}

TEST_CASE("profile json codec") {
  const std::string text = R"({"agents":[
    {"strictly_positive":true,
     "segments":[{"to":"1/2","density":"3/2"},{"to":"1/1","density":"1/2"}]},
    {"strictly_positive":true,
     "segments":[{"to":"1","density":"1"}]}]})";
  const ValuationProfile profile = profile_from_json(text);
  REQUIRE(profile.size() == 2);
  CHECK(profile.agents[0] == two_slope());
  const ValuationProfile again = profile_from_json(profile_to_json(profile));
  CHECK(again.agents == profile.agents);
}

TEST_CASE("loader reports the exact normalization deficit") {
  const std::string text = R"({"agents":[
    {"strictly_positive":true,
     "segments":[{"to":"1","density":"1/2"}]}]})";
  try {
    profile_from_json(text);
    FAIL("expected InvalidDensity");
  } catch (const InvalidDensity& e) {
    CHECK(std::string(e.what()).find("off by 1/2") != std::string::npos);
  }
}

TEST_CASE("rational helpers") {
  CHECK(rational_string(make_rational(2, 4)) == "1/2");
  CHECK(rational_string(Rational(0)) == "0/1");
  CHECK(parse_rational("7/8") == make_rational(7, 8));
  CHECK(parse_rational("3") == Rational(3));
  CHECK_THROWS_AS(parse_rational("1/0"), Error);
  CHECK_THROWS_AS(parse_rational("a/b"), Error);
  CHECK(rational_ceil(make_rational(7, 2)) == 4);
  CHECK(rational_ceil(Rational(4)) == 4);
}

TEST_SUITE_END();
