#pragma once

// Independent oracles shared by the unit tests and the acceptance run.

#include <algorithm>
#include <limits>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "capp/capp.hpp"

namespace capp::oracle {

inline bool eval_direct(const Check& c, const ValueMap& face, const ValueMap& tool) {
  ValueBindings b{&face, &tool, nullptr};
  return eval_check(c, b);
}

inline bool in_range(const IntervalMap& m, const std::string& name, double v) {
  auto it = m.find(name);
  return it != m.end() && it->second.min <= v && v <= it->second.max;
}

inline bool shares(const StringList& a, const StringList& b) {
  for (const auto& x : a)
    if (std::find(b.begin(), b.end(), x) != b.end()) return true;
  return false;
}

template <class T>
inline bool has(const std::vector<T>& v, const T& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

inline bool member(const CuttingSet& t, const CuttingSetType& type) {
  bool shared_type = false, shared_mode = false;
  for (auto m : t.capabilities.mfg_types) shared_type = shared_type || has(type.capabilities.mfg_types, m);
  for (auto m : t.capabilities.modes) shared_mode = shared_mode || has(type.capabilities.modes, m);
  return in_range(type.dimensions, "diameter", t.diameter) &&
         in_range(type.dimensions, "cutting_length", t.cutting_length) &&
         in_range(type.dimensions, "tool_length", t.tool_length) &&
         in_range(type.dimensions, "end_radius", t.end_radius) && t.cutting_material == type.cutting_material &&
         shared_type && shared_mode && shares(t.capabilities.tmcs, type.capabilities.tmcs);
}

/// Best feasible feed-rate upper bound over the shared TMCs, or nullopt.
inline std::optional<double> best_feed(const CuttingSet& t, const ExtendedCuttingConditions& cfg, const OSEDatabase& db) {
  std::optional<double> best;
  for (const auto& id : t.capabilities.tmcs) {
    if (!has(cfg.allowed_tmcs, id)) continue;
    const TMC* tmc = db.tmc(id);
    bool ok = true;
    for (const auto& [name, range] : t.conditions) {
      double lo = range.min, hi = range.max;
      if (tmc && tmc->constraints.count(name)) {
        lo = std::max(lo, tmc->constraints.at(name).min);
        hi = std::min(hi, tmc->constraints.at(name).max);
      }
      ok = ok && lo <= hi;
    }
    if (!ok) continue;
    double up = t.conditions.at("feed_rate").max;
    if (tmc && tmc->constraints.count("feed_rate")) up = std::min(up, tmc->constraints.at("feed_rate").max);
    if (!best || up > *best) best = up;
  }
  return best;
}

struct Expected {
  std::string id;
  bool feasible;
};

/// Candidates of one face by enumerating every (OSE, tool) pair with direct
/// check evaluation, in ranking order.
inline std::vector<Expected> brute_force_matches(const FaceAttributes& a, const OSEDatabase& db, const std::vector<CuttingSet>& tools) {
  const ValueMap fv = face_values(a);
  using Key = std::tuple<int, double, double, std::string, std::string>;
  std::vector<std::pair<Key, Expected>> rows;
  for (const auto& o : db.oses) {
    const auto& fam = *db.family(o.family);
    const auto& cfg = *db.config(o.config);
    const auto& type = *db.cutting_set_type(o.cutting_set_type);
    if (a.geometry_type != fam.required_type) continue;
    if (!std::all_of(fam.checks.begin(), fam.checks.end(), [&](const Check& c) { return eval_direct(c, fv, {}); })) continue;
    for (const auto& t : tools) {
      if (!member(t, type)) continue;
      const ValueMap tv = tool_values(t);
      if (!std::all_of(o.compliance_checks.begin(), o.compliance_checks.end(),
                       [&](const Check& c) { return eval_direct(c, fv, tv); }))
        continue;
      if (t.tool_length < a.global_accessibility + a.depth) continue;
      if (!has(t.capabilities.mfg_types, cfg.mfg_type) || !has(t.capabilities.modes, cfg.mode) ||
          !shares(t.capabilities.tmcs, cfg.allowed_tmcs))
        continue;
      auto feed = best_feed(t, cfg, db);
      const double up = feed ? *feed : -std::numeric_limits<double>::infinity();
      rows.push_back({{cfg.priority == Priority::Qmax ? 0 : 1, -up, t.diameter, t.id, o.id},
                      {o.id + "/" + t.id, feed.has_value()}});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Expected> out;
  for (const auto& r : rows) out.push_back(r.second);
  return out;
}

inline std::size_t direction_count(const std::vector<SetupFace>& faces) {
  std::vector<Vec3> dirs;
  for (const auto& f : faces)
    for (const auto& d : f.directions)
      if (std::none_of(dirs.begin(), dirs.end(), [&](const Vec3& x) { return directions_match(x, d); }))
        dirs.push_back(d);
  return dirs.size();
}

/// Minimum cover by enumerating direction subsets in increasing size.
inline std::size_t subset_min_cover(const std::vector<SetupFace>& faces) {
  std::vector<Vec3> dirs;
  for (const auto& f : faces)
    for (const auto& d : f.directions)
      if (std::none_of(dirs.begin(), dirs.end(), [&](const Vec3& x) { return (x - d.normalized()).norm() < 1e-9; }))
        dirs.push_back(d.normalized());
  if (dirs.size() >= 20) throw std::length_error("too many directions for subset enumeration");
  std::size_t best = dirs.size();
  for (std::uint32_t mask = 0; mask < (1u << dirs.size()); ++mask) {
    const auto k = static_cast<std::size_t>(__builtin_popcount(mask));
    if (k >= best) continue;
    bool ok = true;
    for (const auto& f : faces) {
      if (f.directions.empty()) continue;
      bool hit = false;
      for (std::size_t i = 0; i < dirs.size() && !hit; ++i)
        if (mask & (1u << i))
          for (const auto& d : f.directions) hit = hit || (d.normalized() - dirs[i]).norm() < 1e-9;
      ok = ok && hit;
    }
    if (ok) best = k;
  }
  return best;
}

}  // namespace capp::oracle
