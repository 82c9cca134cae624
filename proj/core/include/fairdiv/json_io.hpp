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

#ifndef FAIRDIV_JSON_IO_HPP_
#define FAIRDIV_JSON_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fairdiv/engine.hpp"

namespace fairdiv {

// Valuation profiles: {"agents":[{"strictly_positive":bool,
// "segments":[{"to":"p/q","density":"p/q"},...]},...]}; rationals are
// strings in lowest terms. The loader reports the exact normalization
// deficit of a bad density.
ValuationProfile profile_from_json(const std::string& text);
std::string profile_to_json(const ValuationProfile& profile);
ValuationProfile load_profile(const std::string& path);

// Traces: ordered list of {node_kind, agent, label, action, bindings_delta}.
std::string trace_to_json(const ProtocolProgram& program,
                          const std::vector<TraceEvent>& trace);
std::vector<TraceEvent> trace_from_json(const ProtocolProgram& program,
                                        const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

// FNV-1a, used to fingerprint report inputs.
std::uint64_t content_hash(const std::string& content);

// Deterministic test profiles: piecewise-constant densities with small
// rational breakpoints and densities, normalized exactly.
ValuationProfile random_rational_profile(int n_agents, std::uint64_t seed,
                                         bool strictly_positive = true);

}  // namespace fairdiv

#endif  // FAIRDIV_JSON_IO_HPP_
