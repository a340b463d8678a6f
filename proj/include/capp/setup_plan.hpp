#pragma once

// Setups by greedy direction cover, sequences by connected same-candidate
// faces, and the ordered process-plan skeleton.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "capp/conditions.hpp"
#include "capp/match_engine.hpp"

namespace capp {

inline constexpr double kSetupAngleTol = 1e-6;  // rad

inline bool directions_match(const Vec3& a, const Vec3& b, double angle_tol = kSetupAngleTol) {
  return a.normalized().dot(b.normalized()) >= std::cos(angle_tol);
}

/// Admissible directions of one face to be placed in a setup.
struct SetupFace {
  std::string id;
  std::vector<Vec3> directions;

  [[nodiscard]] bool admits(const Vec3& d) const {
    return std::any_of(directions.begin(), directions.end(), [&](const Vec3& x) { return directions_match(x, d); });
  }
  [[nodiscard]] bool compulsory() const { return directions.size() == 1; }
};

struct Setup {
  std::string id;
  Vec3 direction = Vec3::UnitZ();
  StringList faces;

  friend bool operator==(const Setup&, const Setup&) = default;
};

inline std::string padded(const std::string& prefix, std::size_t n) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02zu", n);
  return prefix + buf;
}

/// Distinct candidate directions in lexicographically descending order.
inline std::vector<Vec3> distinct_directions(const std::vector<SetupFace>& faces, bool compulsory_only = false) {
  std::vector<Vec3> all;
  for (const auto& f : faces) {
    if (compulsory_only && !f.compulsory()) continue;
    for (const auto& d : f.directions)
      if (std::none_of(all.begin(), all.end(), [&](const Vec3& x) { return directions_match(x, d); }))
        all.push_back(d.normalized());
  }
  std::sort(all.begin(), all.end(), [](const Vec3& a, const Vec3& b) { return detail::lex_greater(a, b); });
  return all;
}

/// Setup ordering: more faces first, then the lexicographically greater
/// direction.
inline bool setup_before(const Setup& a, const Setup& b) {
  if (a.faces.size() != b.faces.size()) return a.faces.size() > b.faces.size();
  return detail::lex_greater(a.direction, b.direction);
}

/// Greedy set cover over the faces' admissible directions. Directions of
/// faces with a single admissible direction are taken first, then the
/// direction covering the most unassigned faces is picked until every face
/// is assigned; ties go to the lexicographically greater direction. Faces
/// without directions are not assigned.
inline std::vector<Setup> build_setups(const std::vector<SetupFace>& faces) {
  std::vector<bool> assigned(faces.size(), false);
  for (std::size_t i = 0; i < faces.size(); ++i) assigned[i] = faces[i].directions.empty();
  std::vector<Setup> out;

  auto take = [&](std::vector<Vec3>& pool) {
    std::size_t best = pool.size(), best_n = 0;
    for (std::size_t k = 0; k < pool.size(); ++k) {
      std::size_t n = 0;
      for (std::size_t i = 0; i < faces.size(); ++i)
        if (!assigned[i] && faces[i].admits(pool[k])) ++n;
      if (n > best_n) best = k, best_n = n;  // pool is sorted, so ties keep the greater direction
    }
    if (best == pool.size()) return false;
    Setup s;
    s.direction = pool[best];
    for (std::size_t i = 0; i < faces.size(); ++i)
      if (!assigned[i] && faces[i].admits(s.direction)) {
        assigned[i] = true;
        s.faces.push_back(faces[i].id);
      }
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best));
    out.push_back(std::move(s));
    return true;
  };

  auto seeds = distinct_directions(faces, true);
  while (take(seeds)) {
  }
  auto pool = distinct_directions(faces);
  while (std::find(assigned.begin(), assigned.end(), false) != assigned.end() && take(pool)) {
  }

  std::stable_sort(out.begin(), out.end(), setup_before);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = padded("SETUP-", i + 1);
  return out;
}

/// Exact minimum number of directions covering every face with at least
/// one direction. Branch and bound on the first uncovered face; intended
/// for small instances.
inline std::size_t exact_min_cover(const std::vector<SetupFace>& faces) {
  std::vector<std::size_t> need;
  for (std::size_t i = 0; i < faces.size(); ++i)
    if (!faces[i].directions.empty()) need.push_back(i);
  std::size_t best = need.size();
  std::function<void(std::vector<std::size_t>, std::size_t)> search = [&](std::vector<std::size_t> open,
                                                                          std::size_t used) {
    if (open.empty()) {
      best = std::min(best, used);
      return;
    }
    if (used + 1 >= best) return;
    for (const auto& d : faces[open.front()].directions) {
      std::vector<std::size_t> rest;
      for (auto i : open)
        if (!faces[i].admits(d)) rest.push_back(i);
      search(std::move(rest), used + 1);
    }
  };
  search(need, 0);
  return best;
}

// ---------------------------------------------------------------- sequences

/// The selected process of one face, as needed for grouping and ordering.
struct FaceProcess {
  std::string face;
  std::string ose;
  std::string cutting_set;
  std::optional<Mode> mode;
};

struct SequenceGroup {
  StringList faces;  // part order
  std::string ose;
  std::string cutting_set;
  std::optional<Mode> mode;
};

inline int mode_rank(const std::optional<Mode>& m) { return m ? static_cast<int>(*m) : 3; }

/// Connected components of the setup's faces under adjacency edges kept only
/// between faces whose selected (OSE, cutting set) pair is the same. Groups
/// come out ordered by mode, then by their first face id.
inline std::vector<SequenceGroup> group_sequences(const Setup& setup, const std::vector<FaceProcess>& processes,
                                                  const std::map<std::string, std::set<std::string>>& adjacency) {
  std::map<std::string, const FaceProcess*> proc;
  for (const auto& p : processes) proc[p.face] = &p;
  std::set<std::string> in_setup(setup.faces.begin(), setup.faces.end());
  std::set<std::string> seen;
  std::vector<SequenceGroup> out;
  for (const auto& f : setup.faces) {
    if (seen.count(f) || !proc.count(f)) continue;
    const auto* p = proc.at(f);
    SequenceGroup g{{}, p->ose, p->cutting_set, p->mode};
    std::vector<std::string> stack{f};
    seen.insert(f);
    while (!stack.empty()) {
      auto cur = stack.back();
      stack.pop_back();
      g.faces.push_back(cur);
      auto it = adjacency.find(cur);
      if (it == adjacency.end()) continue;
      for (const auto& n : it->second) {
        if (seen.count(n) || !in_setup.count(n) || !proc.count(n)) continue;
        const auto* q = proc.at(n);
        if (q->ose != p->ose || q->cutting_set != p->cutting_set) continue;
        seen.insert(n);
        stack.push_back(n);
      }
    }
    std::sort(g.faces.begin(), g.faces.end(), [&](const std::string& a, const std::string& b) {
      auto ia = std::find(setup.faces.begin(), setup.faces.end(), a);
      auto ib = std::find(setup.faces.begin(), setup.faces.end(), b);
      return ia < ib;
    });
    out.push_back(std::move(g));
  }
  std::stable_sort(out.begin(), out.end(), [](const SequenceGroup& a, const SequenceGroup& b) {
    if (mode_rank(a.mode) != mode_rank(b.mode)) return mode_rank(a.mode) < mode_rank(b.mode);
    return *std::min_element(a.faces.begin(), a.faces.end()) < *std::min_element(b.faces.begin(), b.faces.end());
  });
  return out;
}

// ---------------------------------------------------------------- plan

struct FaceTrace {
  std::string face;
  std::string candidate;
  Trace trace;

  friend bool operator==(const FaceTrace&, const FaceTrace&) = default;
};

struct PlannedSequence {
  std::string id;
  std::string setup;
  StringList faces;
  std::string ose;
  std::string cutting_set;
  std::string config;
  std::string tmc;
  std::optional<MfgType> mfg_type;
  std::optional<Mode> mode;
  std::optional<Trajectory> trajectory_strategy;
  Priority priority = Priority::Default;
  Origin origin = Origin::Default;
  ResolvedConditions conditions;
  std::vector<FaceTrace> traces;

  friend bool operator==(const PlannedSequence&, const PlannedSequence&) = default;
};

struct PlannedSetup {
  std::string id;
  Vec3 direction = Vec3::UnitZ();
  StringList faces;
  std::vector<PlannedSequence> sequences;

  friend bool operator==(const PlannedSetup&, const PlannedSetup&) = default;
};

struct FaceException {
  std::string face;
  std::string reason;

  friend bool operator==(const FaceException&, const FaceException&) = default;
};

struct ProcessPlan {
  std::string part_id;
  std::vector<PlannedSetup> setups;
  std::vector<FaceException> unmatched;
  StringList inaccessible;
  StringList tensions;  // faces whose selection fails under the setup direction
  StringList notices;

  [[nodiscard]] bool complete() const { return unmatched.empty() && inaccessible.empty(); }

  friend bool operator==(const ProcessPlan&, const ProcessPlan&) = default;
};

/// Orders setups and their sequences and checks that every part face is in
/// exactly one setup or exception list.
inline ProcessPlan plan_skeleton(const Part& part, std::vector<PlannedSetup> setups,
                                 std::vector<FaceException> unmatched, StringList inaccessible) {
  std::stable_sort(setups.begin(), setups.end(), [](const PlannedSetup& a, const PlannedSetup& b) {
    if (a.faces.size() != b.faces.size()) return a.faces.size() > b.faces.size();
    return detail::lex_greater(a.direction, b.direction);
  });
  for (auto& s : setups)
    std::stable_sort(s.sequences.begin(), s.sequences.end(), [](const PlannedSequence& a, const PlannedSequence& b) {
      if (mode_rank(a.mode) != mode_rank(b.mode)) return mode_rank(a.mode) < mode_rank(b.mode);
      if (a.id.size() != b.id.size()) return a.id.size() < b.id.size();
      return a.id < b.id;
    });

  std::map<std::string, int> seen;
  for (const auto& s : setups)
    for (const auto& f : s.faces) ++seen[f];
  for (const auto& u : unmatched) ++seen[u.face];
  for (const auto& f : inaccessible) ++seen[f];
  for (const auto& f : part.faces) {
    int n = seen.count(f.id) ? seen[f.id] : 0;
    if (n != 1) throw Error("partition violation: face " + f.id + " placed " + std::to_string(n) + " times");
  }
  if (seen.size() != part.faces.size()) throw Error("partition violation: plan names faces outside the part");

  ProcessPlan plan;
  plan.part_id = part.id;
  plan.setups = std::move(setups);
  plan.unmatched = std::move(unmatched);
  plan.inaccessible = std::move(inaccessible);
  return plan;
}

}  // namespace capp
