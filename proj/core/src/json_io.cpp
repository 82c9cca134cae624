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

#include "fairdiv/json_io.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace fairdiv {

using nlohmann::json;

ValuationProfile profile_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("profile is not valid JSON: ") + e.what());
  }
  if (!doc.contains("agents") || !doc["agents"].is_array() ||
      doc["agents"].empty())
    throw Error("profile needs a nonempty \"agents\" array");
  ValuationProfile profile;
  for (const json& agent : doc["agents"]) {
    const bool strictly_positive = agent.value("strictly_positive", false);
    if (!agent.contains("segments") || !agent["segments"].is_array())
      throw Error("agent needs a \"segments\" array");
    std::vector<DensitySegment> segments;
    for (const json& segment : agent["segments"]) {
      segments.push_back(
          {parse_rational(segment.at("to").get<std::string>()),
           parse_rational(segment.at("density").get<std::string>())});
    }
    profile.agents.emplace_back(std::move(segments), strictly_positive);
  }
  return profile;
}

std::string profile_to_json(const ValuationProfile& profile) {
  json agents = json::array();
  for (const PiecewiseDensity& density : profile.agents) {
    json segments = json::array();
    for (const DensitySegment& segment : density.segments())
      segments.push_back({{"to", rational_string(segment.to)},
                          {"density", rational_string(segment.density)}});
    agents.push_back({{"strictly_positive", density.strictly_positive()},
                      {"segments", segments}});
  }
  return json{{"agents", agents}}.dump(2) + "\n";
}

ValuationProfile load_profile(const std::string& path) {
  return profile_from_json(read_file(path));
}

namespace {

const char* trace_kind_name(TraceEvent::Kind kind) {
  switch (kind) {
    case TraceEvent::Kind::kCut: return "cut";
    case TraceEvent::Kind::kChoose: return "choose";
    case TraceEvent::Kind::kChooseAny: return "choose_any";
  }
  return "?";
}

}  // namespace

std::string trace_to_json(const ProtocolProgram& program,
                          const std::vector<TraceEvent>& trace) {
  json events = json::array();
  for (const TraceEvent& event : trace) {
    json row;
    row["node_kind"] = trace_kind_name(event.kind);
    row["agent"] = event.agent;
    row["label"] = program.labels[static_cast<std::size_t>(event.label_id)];
    if (event.kind == TraceEvent::Kind::kCut) {
      row["action"] = {{"cut_at", rational_string(event.cut_at)}};
      row["bindings_delta"] = {
          {program.labels[static_cast<std::size_t>(event.label_id)],
           rational_string(event.cut_at)}};
    } else {
      row["action"] = {{"index", event.index}};
      row["bindings_delta"] = json::object();
      row["allocated"] = {rational_string(event.allocated_iv.lo),
                          rational_string(event.allocated_iv.hi)};
    }
    events.push_back(std::move(row));
  }
  return events.dump(2) + "\n";
}

std::vector<TraceEvent> trace_from_json(const ProtocolProgram& program,
                                        const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("trace is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error("trace must be a JSON array");
  std::vector<TraceEvent> trace;
  for (const json& row : doc) {
    TraceEvent event;
    const std::string kind = row.at("node_kind").get<std::string>();
    if (kind == "cut")
      event.kind = TraceEvent::Kind::kCut;
    else if (kind == "choose")
      event.kind = TraceEvent::Kind::kChoose;
    else if (kind == "choose_any")
      event.kind = TraceEvent::Kind::kChooseAny;
    else
      throw Error("unknown trace node_kind \"" + kind + "\"");
    event.agent = row.at("agent").get<int>();
    event.label_id = program.label_id(row.at("label").get<std::string>());
    if (event.label_id < 0)
      throw Error("trace label \"" + row.at("label").get<std::string>() +
                  "\" is not in the program");
    if (event.kind == TraceEvent::Kind::kCut)
      event.cut_at =
          parse_rational(row.at("action").at("cut_at").get<std::string>());
    else
      event.index = row.at("action").at("index").get<int>();
    trace.push_back(std::move(event));
  }
  return trace;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write \"" + path + "\"");
  out << content;
}

std::uint64_t content_hash(const std::string& content) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : content) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

ValuationProfile random_rational_profile(int n_agents, std::uint64_t seed,
                                         bool strictly_positive) {
  if (n_agents < 1) throw Error("profile needs at least one agent");
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::uint64_t bound) {
    return static_cast<long>(rng() % bound);
  };

  ValuationProfile profile;
  for (int a = 0; a < n_agents; ++a) {
    // Breakpoints on the eighths grid, densities with small denominators;
    // the final segment absorbs the remainder so the integral is exactly 1.
    const int n_segments = 2 + static_cast<int>(draw(3));  // 2..4
    std::vector<long> breaks;
    while (static_cast<int>(breaks.size()) < n_segments - 1) {
      long candidate = 1 + draw(7);  // 1/8 .. 7/8
      if (std::find(breaks.begin(), breaks.end(), candidate) == breaks.end())
        breaks.push_back(candidate);
    }
    std::sort(breaks.begin(), breaks.end());

    std::vector<DensitySegment> segments;
    Rational prev(0);
    Rational mass(0);
    for (long b : breaks) {
      Rational to = make_rational(b, 8);
      long num = strictly_positive ? 1 + draw(6) : draw(7);
      Rational density = make_rational(num, 1 + draw(4));
      mass += density * (to - prev);
      segments.push_back({to, density});
      prev = to;
    }
    // Solve the last density so the total is exactly 1; re-randomize on the
    // rare draw that would need a nonpositive (or zero) last density.
    Rational last_len = 1 - prev;
    Rational last_density = Rational((1 - mass) / last_len);
    if (last_density < 0 || (strictly_positive && last_density == 0)) {
      profile.agents.push_back(uniform_density());
      continue;
    }
    segments.push_back({Rational(1), last_density});
    profile.agents.emplace_back(std::move(segments),
                                strictly_positive && last_density > 0);
  }
  return profile;
}

}  // namespace fairdiv
