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

#ifndef FAIRDIV_RATIONAL_HPP_
#define FAIRDIV_RATIONAL_HPP_

#include <gmpxx.h>

#include <string>

#include "fairdiv/errors.hpp"

namespace fairdiv {

// All core arithmetic is exact; Rational is the only number type that ever
// touches cake coordinates or values.
using Rational = mpq_class;

inline Rational make_rational(long num, long den) {
  if (den == 0) throw Error("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

// Parses "p/q" or "p" (optional leading '-'). Throws Error on anything else.
Rational parse_rational(const std::string& text);

// Lowest-terms "p/q" with an explicit denominator ("0" prints as "0/1").
std::string rational_string(const Rational& value);

inline Rational midpoint(const Rational& a, const Rational& b) {
  Rational m = (a + b) / 2;
  return m;
}

// Smallest integer >= value; value must be > 0.
long rational_ceil(const Rational& value);

}  // namespace fairdiv

#endif  // FAIRDIV_RATIONAL_HPP_
