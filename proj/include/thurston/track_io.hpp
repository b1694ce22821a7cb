#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "thurston/errors.hpp"
#include "thurston/straighten.hpp"
#include "thurston/traintrack.hpp"

namespace thurston {

using nlohmann::json;

// Track file schema:
//   {
//     "branches": [0, 1, ...],
//     "switches": [{"sideA": [[branch, end], ...], "sideB": [...]}, ...],
//     "marks": {"0": "STUMP" | "ISOLATED" | "COMPACT", ...}
//   }
// Weights are exact "p/q" strings keyed by branch id.

inline HalfBranch half_branch_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw InputError("half-branch must be [branch, end]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

inline json half_branch_to_json(const HalfBranch& h) { return json::array({h.branch, h.end}); }

inline BranchMark mark_from_string(const std::string& s) {
  if (s == "STUMP") return BranchMark::kStump;
  if (s == "ISOLATED") return BranchMark::kIsolated;
  if (s == "COMPACT") return BranchMark::kCompact;
  throw InputError("unknown branch mark '" + s + "'");
}

inline DecoratedTrack decorated_track_from_json(const json& j) {
  if (!j.is_object()) throw InputError("track file must be a JSON object");
  DecoratedTrack d;
  if (!j.contains("branches") || !j["branches"].is_array()) {
    throw InputError("track file needs a 'branches' array");
  }
  for (const auto& b : j["branches"]) {
    if (!b.is_number_integer()) throw InputError("branch ids must be integers");
    d.track.branches.push_back(b.get<int>());
  }
  if (!j.contains("switches") || !j["switches"].is_array()) {
    throw InputError("track file needs a 'switches' array");
  }
  for (const auto& sj : j["switches"]) {
    Switch sw;
    if (!sj.contains("sideA") || !sj.contains("sideB")) {
      throw InputError("each switch needs 'sideA' and 'sideB'");
    }
    for (const auto& h : sj["sideA"]) sw.side_a.push_back(half_branch_from_json(h));
    for (const auto& h : sj["sideB"]) sw.side_b.push_back(half_branch_from_json(h));
    d.track.switches.push_back(std::move(sw));
  }
  if (!j.contains("marks") || !j["marks"].is_object()) {
    throw InputError("track file needs a 'marks' object");
  }
  for (const auto& [key, value] : j["marks"].items()) {
    int id = 0;
    try {
      id = std::stoi(key);
    } catch (...) {
      throw InputError("mark key '" + key + "' is not a branch id");
    }
    d.marks[id] = mark_from_string(value.get<std::string>());
  }
  d.validate();
  return d;
}

inline json decorated_track_to_json(const DecoratedTrack& d) {
  json j;
  j["branches"] = d.track.branches;
  j["switches"] = json::array();
  for (const Switch& sw : d.track.switches) {
    json sj;
    sj["sideA"] = json::array();
    sj["sideB"] = json::array();
    for (const HalfBranch& h : sw.side_a) sj["sideA"].push_back(half_branch_to_json(h));
    for (const HalfBranch& h : sw.side_b) sj["sideB"].push_back(half_branch_to_json(h));
    j["switches"].push_back(std::move(sj));
  }
  j["marks"] = json::object();
  for (const auto& [b, m] : d.marks) j["marks"][std::to_string(b)] = mark_name(m);
  return j;
}

inline std::map<BranchId, Rational> weight_map_from_json(const json& j) {
  if (!j.is_object()) throw InputError("weights must be an object of 'p/q' strings");
  std::map<BranchId, Rational> out;
  for (const auto& [key, value] : j.items()) {
    int id = 0;
    try {
      id = std::stoi(key);
    } catch (...) {
      throw InputError("weight key '" + key + "' is not a branch id");
    }
    if (value.is_number_integer()) {
      out[id] = Rational(value.get<std::int64_t>());
    } else if (value.is_string()) {
      out[id] = Rational::parse(value.get<std::string>());
    } else {
      throw InputError("weight for branch " + key + " must be a 'p/q' string");
    }
  }
  return out;
}

inline json weight_map_to_json(const std::map<BranchId, Rational>& w) {
  json j = json::object();
  for (const auto& [b, r] : w) j[std::to_string(b)] = r.str();
  return j;
}

inline WeightSystem weight_system_from_json(const json& j) {
  return WeightSystem{weight_map_from_json(j)};
}

inline FarWeights far_weights_from_json(const json& j) {
  if (!j.is_object() || !j.contains("isolated")) {
    throw InputError("far weights file needs an 'isolated' object");
  }
  FarWeights f;
  f.isolated = weight_map_from_json(j["isolated"]);
  if (j.contains("compact")) f.compact.weights = weight_map_from_json(j["compact"]);
  return f;
}

inline json far_weights_to_json(const FarWeights& f) {
  json j;
  j["isolated"] = weight_map_to_json(f.isolated);
  j["compact"] = weight_map_to_json(f.compact.weights);
  return j;
}

}  // namespace thurston
