// Copyright (c) fixbound contributors.
// SPDX-License-Identifier: Apache-2.0
//
// JSON wire formats. All atom lists are sorted by universe index, so
// identical inputs serialize byte-identically.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixbound/bnb.hpp"
#include "fixbound/demo.hpp"
#include "fixbound/errors.hpp"
#include "fixbound/powerset.hpp"
#include "fixbound/specanalysis.hpp"

namespace fixbound {

using Json = nlohmann::json;

inline Json atoms_to_json(const AtomSet& s, const std::optional<AtomSet>& hidden = std::nullopt) {
  Json arr = Json::array();
  for (auto i : s.indices()) {
    if (hidden && hidden->test(i)) continue;
    arr.push_back(s.universe()->name(i));
  }
  return arr;
}

/// {"lower": [...], "upper": [...], "valid": bool}
inline Json interval_to_json(const PInterval& b, const std::optional<AtomSet>& hidden = std::nullopt) {
  return Json{{"lower", atoms_to_json(b.lo, hidden)},
              {"upper", atoms_to_json(b.hi, hidden)},
              {"valid", b.lo.subset_of(b.hi)}};
}

inline PInterval interval_from_json(const Json& j, const UniversePtr& universe) {
  AtomSet lo(universe), hi(universe);
  for (const auto& name : j.at("lower")) lo.set(universe->index_of(name.get<std::string>()));
  for (const auto& name : j.at("upper")) hi.set(universe->index_of(name.get<std::string>()));
  return {std::move(lo), std::move(hi)};
}

/// Bounds input file: {"lower": [atom...], "excluded": [atom...]} read as
/// the interval [lower, universe \ excluded].
inline PInterval bounds_file_to_interval(const Json& j, const UniversePtr& universe) {
  AtomSet lo(universe);
  AtomSet hi = AtomSet::full(universe);
  if (j.contains("lower"))
    for (const auto& name : j.at("lower")) lo.set(universe->index_of(name.get<std::string>()));
  if (j.contains("excluded"))
    for (const auto& name : j.at("excluded")) hi.set(universe->index_of(name.get<std::string>()), false);
  return {std::move(lo), std::move(hi)};
}

inline Json search_state_to_json(const SearchState& st,
                                 const std::optional<AtomSet>& hidden = std::nullopt) {
  Json j;
  j["final"] = Json::array();
  for (const auto& b : st.final_bounds) j["final"].push_back(interval_to_json(b, hidden));
  j["active"] = Json::array();
  for (const auto& b : st.active) j["active"].push_back(interval_to_json(b, hidden));
  j["fixed_points"] = Json::array();
  for (const auto& m : st.fixed_points) j["fixed_points"].push_back(atoms_to_json(m, hidden));
  j["stalled"] = Json::array();
  for (const auto& b : st.stalled) j["stalled"].push_back(interval_to_json(b, hidden));
  j["outer_iterations"] = st.outer_iterations;
  j["ir_calls"] = st.ir_calls;
  j["completed"] = st.completed;
  return j;
}

/// One refinement step as a trace line.
inline Json refine_step_to_json(std::size_t step, const PInterval& b,
                                const std::optional<AtomSet>& hidden = std::nullopt) {
  return Json{{"step", step},
              {"lower", atoms_to_json(b.lo, hidden)},
              {"upper", atoms_to_json(b.hi, hidden)},
              {"valid", b.lo.subset_of(b.hi)}};
}

inline Json rational_pair_to_json(const demo::RationalPair& p) {
  return Json::array({demo::to_string(p.x1), demo::to_string(p.x2)});
}

inline Json demo_step_to_json(const demo::TraceStep& s) {
  return Json{{"step", s.step},
              {"lower", rational_pair_to_json(s.bound.lo)},
              {"upper", rational_pair_to_json(s.bound.hi)},
              {"valid", s.valid}};
}

inline Json sign_state_to_json(const spec::MiniProgram& p, const spec::SignState& s) {
  Json j = Json::object();
  for (std::size_t l = 0; l < p.locations.size(); ++l) {
    Json row = Json::object();
    for (std::size_t v = 0; v < p.variables.size(); ++v)
      row[p.variables[v]] = std::string(1, spec::sign_char(s.rows[l][v]));
    j[p.locations[l]] = std::move(row);
  }
  return j;
}

inline Json stable_assumptions_to_json(const spec::MiniProgram& p,
                                       const spec::StableAssumptionReport& report) {
  Json j;
  j["assumptions"] = Json::array();
  for (const auto& name : report.universe->names()) j["assumptions"].push_back(name);
  j["search"] = search_state_to_json(report.search);
  j["stable_sets"] = Json::array();
  for (const auto& [sigma, state] : report.stable_sets)
    j["stable_sets"].push_back(
        Json{{"assumptions", atoms_to_json(sigma)}, {"analysis", sign_state_to_json(p, state)}});
  return j;
}

}  // namespace fixbound
