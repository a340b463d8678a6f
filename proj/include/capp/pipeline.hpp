#pragma once

// Input loading and the transformation -> matching -> setups -> plan ->
// documentation pipeline.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "capp/automation_report.hpp"
#include "capp/json_io.hpp"
#include "capp/match_engine.hpp"
#include "capp/setup_plan.hpp"
#include "capp/transform.hpp"

namespace capp {

/// An error raised inside a pipeline stage, labelled with the stage name.
class StageError : public Error {
public:
  StageError(const std::string& stage, const std::string& what) : Error(stage + ": " + what), stage_(stage) {}
  [[nodiscard]] const std::string& stage() const { return stage_; }

private:
  std::string stage_;
};

struct Inputs {
  Part part;
  OSEDatabase db;
  std::vector<CuttingSet> tools;
  Tolerances tol;
};

struct InputReport {
  std::vector<Violation> part;
  std::vector<DbFinding> db;
  std::vector<DbFinding> tools;

  [[nodiscard]] bool ok() const { return part.empty() && db.empty() && tools.empty(); }
};

inline json to_json(const InputReport& r) {
  return {{"part", to_json(r.part)}, {"osedb", to_json(r.db)}, {"tools", to_json(r.tools)}};
}

/// Valid syntax and schema, but the inputs break domain invariants.
class ValidationError : public Error {
public:
  explicit ValidationError(InputReport r) : Error("validation findings"), report(std::move(r)) {}
  InputReport report;
};

inline InputReport validate_inputs(const Inputs& in) {
  return {validate_part(in.part), validate_db(in.db), validate_tools(in.tools, &in.db)};
}

/// Parsed and validated inputs. Malformed files raise InputError, invariant
/// violations raise ValidationError before any stage runs.
inline Inputs inputs_from_json(const json& part, const json& osedb, const json& tools,
                               const json* tolerances = nullptr) {
  Inputs in;
  in.part = part_from_json(part);
  in.db = osedb_from_json(osedb);
  in.tools = tools_from_json(tools);
  if (tolerances) in.tol = tolerances_from_json(*tolerances);
  auto report = validate_inputs(in);
  if (!report.ok()) throw ValidationError(std::move(report));
  return in;
}

inline Inputs parse_inputs(const std::string& part_path, const std::string& osedb_path, const std::string& tools_path,
                           const std::optional<std::string>& tolerances_path = std::nullopt) {
  auto p = read_json_file(part_path);
  auto d = read_json_file(osedb_path);
  auto t = read_json_file(tools_path);
  std::optional<json> tol;
  if (tolerances_path) tol = read_json_file(*tolerances_path);
  return inputs_from_json(p, d, t, tol ? &*tol : nullptr);
}

// ---------------------------------------------------------------- stages

template <class F>
auto stage(const char* name, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

inline std::vector<FaceMatch> match_all(const TransformResult& attrs, const OSEDatabase& db,
                                        const std::vector<CuttingSet>& tools) {
  const auto types = sort_tools(tools, db);
  std::vector<FaceMatch> out;
  for (const auto& a : attrs.faces) {
    FaceMatch fm;
    fm.face = a.id;
    fm.candidates = match_face(a, db, tools, types);
    select_default(fm);
    out.push_back(std::move(fm));
  }
  return out;
}

namespace detail {

inline std::string sequence_id(const std::string& setup, std::size_t n) { return setup + "." + padded("SEQ-", n); }

}  // namespace detail

/// Setups, sequences and resolved conditions from the current selections.
inline ProcessPlan build_plan(const Part& part, const TransformResult& attrs, const std::vector<FaceMatch>& matches,
                              const OSEDatabase& db, const std::vector<CuttingSet>& tools) {
  std::map<std::string, const FaceMatch*> by_face;
  for (const auto& m : matches) by_face[m.face] = &m;

  std::vector<FaceException> unmatched;
  StringList inaccessible, notices;
  std::map<std::string, const Candidate*> chosen;
  std::vector<SetupFace> setup_faces;

  for (const auto& a : attrs.faces) {
    if (a.inaccessible()) {
      inaccessible.push_back(a.id);
      continue;
    }
    auto it = by_face.find(a.id);
    const FaceMatch* fm = it == by_face.end() ? nullptr : it->second;
    if (fm)
      for (const auto& n : fm->notices) notices.push_back(a.id + ": " + n);
    const Candidate* c = fm ? fm->selection() : nullptr;
    if (c && c->origin != Origin::ExpertCustom && !c->feasible) {
      const Candidate* next = nullptr;
      for (const auto& alt : fm->candidates)
        if (alt.feasible) {
          next = &alt;
          break;
        }
      notices.push_back(a.id + ": " + c->id + " has infeasible cutting conditions" +
                        (next ? "; demoted in favour of " + next->id : ""));
      c = next;
    }
    if (!c) {
      bool none = !fm || fm->candidates.empty();
      unmatched.push_back({a.id, none ? "no capable process" : "no candidate with feasible cutting conditions"});
      continue;
    }
    chosen[a.id] = c;
    SetupFace sf{a.id, {}};
    for (const auto& d : a.access) sf.directions.push_back(d.direction);
    setup_faces.push_back(std::move(sf));
  }

  const auto setups = build_setups(setup_faces);
  const auto adjacency = adjacency_graph(part);
  std::vector<PlannedSetup> planned;
  StringList tensions;

  for (const auto& s : setups) {
    std::vector<FaceProcess> processes;
    for (const auto& f : s.faces) {
      const Candidate* c = chosen.at(f);
      const auto* cfg = db.config(c->config);
      std::string key = c->origin == Origin::ExpertCustom ? "custom:" + f : c->ose;
      processes.push_back({f, key, c->cutting_set, cfg ? std::optional<Mode>(cfg->mode) : std::nullopt});

      const auto* attrs_f = attrs.find(f);
      const auto* ose = db.ose(c->ose);
      const auto* tool = OSEDatabase::find_in(tools, c->cutting_set);
      if (c->origin != Origin::ExpertCustom && attrs_f && ose && tool &&
          !geometric_compliance(*attrs_f, *tool, *ose, nullptr, attrs_f->dims_for(s.direction)))
        tensions.push_back(f);
    }

    PlannedSetup ps{s.id, s.direction, s.faces, {}};
    const auto groups = group_sequences(s, processes, adjacency);
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& grp = groups[g];
      const Candidate* c = chosen.at(grp.faces.front());
      PlannedSequence q;
      q.id = detail::sequence_id(s.id, g + 1);
      q.setup = s.id;
      q.faces = grp.faces;
      q.ose = c->ose;
      q.cutting_set = c->cutting_set;
      q.config = c->config;
      q.tmc = c->tmc;
      q.priority = c->priority;
      q.origin = c->origin;
      if (const auto* cfg = db.config(c->config)) {
        q.mfg_type = cfg->mfg_type;
        q.mode = cfg->mode;
        q.trajectory_strategy = cfg->trajectory_strategy;
      }
      if (c->custom_conditions) {
        q.conditions = *c->custom_conditions;
      } else {
        const auto* tool = OSEDatabase::find_in(tools, c->cutting_set);
        if (!tool) throw Error("selected cutting set " + c->cutting_set + " is not in the tool list");
        q.conditions = optimize_conditions(c->priority, *tool, db.tmc(c->tmc));
      }
      for (const auto& f : grp.faces) {
        const Candidate* fc = chosen.at(f);
        q.traces.push_back({f, fc->id, fc->trace});
      }
      ps.sequences.push_back(std::move(q));
    }
    planned.push_back(std::move(ps));
  }

  auto plan = plan_skeleton(part, std::move(planned), std::move(unmatched), std::move(inaccessible));
  std::sort(tensions.begin(), tensions.end());
  plan.tensions = std::move(tensions);
  plan.notices = std::move(notices);
  return plan;
}

struct PipelineResult {
  TransformResult attributes;
  std::vector<FaceMatch> matches;
  ProcessPlan plan;
  PlanDocument document;
};

inline PipelineResult run_pipeline(const Inputs& in) {
  PipelineResult r;
  r.attributes = stage("transform", [&] { return transform_part(in.part, in.tol); });
  r.matches = stage("match", [&] { return match_all(r.attributes, in.db, in.tools); });
  r.plan = stage("plan", [&] { return build_plan(in.part, r.attributes, r.matches, in.db, in.tools); });
  r.document = stage("document", [&] { return generate_documentation(r.plan, in.db, in.tools); });
  return r;
}

// ---------------------------------------------------------------- documents

inline json attributes_document(const std::string& part_id, const TransformResult& tr) {
  json faces = json::array();
  for (const auto& a : tr.faces) faces.push_back(to_json(a));
  return {{"part", part_id},
          {"synthesis", to_json(report_statistics(tr.counts))},
          {"inaccessible", tr.inaccessible},
          {"faces", faces}};
}

inline json matches_document(const std::string& part_id, const std::vector<FaceMatch>& matches) {
  json faces = json::array();
  for (const auto& m : matches) faces.push_back(to_json(m));
  return {{"part", part_id}, {"faces", faces}};
}

}  // namespace capp
