#pragma once

// Check evaluation and ranked OSE candidates per face.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "capp/conditions.hpp"
#include "capp/ose_db.hpp"
#include "capp/transform.hpp"

namespace capp {

/// Face attribute values for check evaluation. When `dims` is given the
/// accessibility dimensions come from that direction instead of the stored
/// ones.
inline ValueMap face_values(const FaceAttributes& a, const DirectionalDims* dims = nullptr) {
  const double end = dims ? dims->end_accessibility : a.end_accessibility;
  const double flank = dims ? dims->flank_accessibility : a.flank_accessibility;
  const double global = dims ? dims->global_accessibility : a.global_accessibility;
  const double depth = dims ? dims->depth : a.depth;
  return {{"geometry_type", std::string(to_string(a.geometry_type))},
          {"openness", std::string(to_string(a.openness))},
          {"access_kind", std::string(a.access.empty() ? "" : to_string(a.access_kind()))},
          {"access_compulsory", a.access_compulsory()},
          {"access_count", double(a.access.size())},
          {"end_accessibility", end},
          {"flank_accessibility", flank},
          {"global_accessibility", global},
          {"depth", depth},
          {"min_fillet_radius", a.min_fillet_radius},
          {"fit_residual", a.fit_residual},
          {"potential_mfg_types", names(a.potential_mfg_types)}};
}

/// Face, tool and configuration bound for check evaluation. Namespaces left
/// unbound raise BindingError when a check refers to them.
struct Bindings {
  std::optional<ValueMap> face;
  std::optional<ValueMap> tool;
  std::optional<ValueMap> config;

  Bindings() = default;
  explicit Bindings(const FaceAttributes* f, const CuttingSet* t = nullptr,
                    const ExtendedCuttingConditions* c = nullptr) {
    if (f) face = face_values(*f);
    if (t) tool = tool_values(*t);
    if (c) config = config_values(*c);
  }

  [[nodiscard]] ValueBindings view() const {
    return {face ? &*face : nullptr, tool ? &*tool : nullptr, config ? &*config : nullptr};
  }
};

inline bool eval_check(const Check& c, const Bindings& b) { return eval_check(c, b.view()); }

struct TraceEntry {
  std::string check;
  bool passed = false;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};
using Trace = std::vector<TraceEntry>;

/// Family membership: the required geometry type, then every family check.
inline bool face_in_family(const FaceAttributes& attrs, const GeometryFamily& family, Trace* trace = nullptr) {
  const bool type_ok = attrs.geometry_type == family.required_type;
  if (trace)
    trace->push_back({"face.geometry_type eq " + std::string(to_string(family.required_type)), type_ok});
  if (!type_ok) return false;
  ValueMap fv = face_values(attrs);
  ValueBindings b{&fv, nullptr, nullptr};
  bool ok = true;
  for (const auto& c : family.checks) {
    bool p = eval_check(c, b);
    if (trace) trace->push_back({c.text(), p});
    ok = ok && p;
    if (!ok && !trace) return false;
  }
  return ok;
}

inline constexpr std::string_view kEnvelopeCheck = "tool.tool_length ge face.global_accessibility + face.depth";

/// The tool envelope clears the face: the tool reaches from the entry plane
/// down to the bottom of the face along the access direction.
inline bool envelope_fits(const CuttingSet& tool, double global, double depth) {
  return tool.tool_length >= global + depth;
}

/// Every compliance check of the OSE plus the envelope pre-filter.
inline bool geometric_compliance(const FaceAttributes& attrs, const CuttingSet& tool, const OSE& ose,
                                 Trace* trace = nullptr, const DirectionalDims* dims = nullptr) {
  ValueMap fv = face_values(attrs, dims);
  ValueMap tv = tool_values(tool);
  ValueBindings b{&fv, &tv, nullptr};
  bool ok = true;
  for (const auto& c : ose.compliance_checks) {
    bool p = eval_check(c, b);
    if (trace) trace->push_back({c.text(), p});
    ok = ok && p;
    if (!ok && !trace) return false;
  }
  const double global = dims ? dims->global_accessibility : attrs.global_accessibility;
  const double depth = dims ? dims->depth : attrs.depth;
  bool env = envelope_fits(tool, global, depth);
  if (trace) trace->push_back({std::string(kEnvelopeCheck), env});
  return ok && env;
}

struct ManufacturingCompliance {
  bool passed = false;
  Priority priority = Priority::Default;
};

/// The tool lists the configuration's type and mode and shares a TMC with it.
inline ManufacturingCompliance manufacturing_compliance(const CuttingSet& tool, const ExtendedCuttingConditions& config,
                                                        Trace* trace = nullptr) {
  const auto& cap = tool.capabilities;
  bool type_ok = std::find(cap.mfg_types.begin(), cap.mfg_types.end(), config.mfg_type) != cap.mfg_types.end();
  bool mode_ok = std::find(cap.modes.begin(), cap.modes.end(), config.mode) != cap.modes.end();
  bool tmc_ok = detail::intersects(cap.tmcs, config.allowed_tmcs);
  if (trace) {
    trace->push_back({"tool.mfg_types contains_any {" + std::string(to_string(config.mfg_type)) + "}", type_ok});
    trace->push_back({"tool.modes contains_any {" + std::string(to_string(config.mode)) + "}", mode_ok});
    trace->push_back({"tool.tmcs contains_any " + value_text(config.allowed_tmcs), tmc_ok});
  }
  bool ok = type_ok && mode_ok && tmc_ok;
  return {ok, ok ? config.priority : Priority::Default};
}

enum class Origin { Default, ExpertChoice, ExpertCustom };

inline std::string_view to_string(Origin o) {
  switch (o) {
    case Origin::Default: return "Default";
    case Origin::ExpertChoice: return "ExpertChoice";
    case Origin::ExpertCustom: return "ExpertCustom";
  }
  return "";
}

inline std::optional<Origin> origin_from_string(std::string_view s) {
  return enum_from_string(s, std::array{Origin::Default, Origin::ExpertChoice, Origin::ExpertCustom});
}

struct Candidate {
  std::string id;  // "<ose>/<cutting set>", or "custom"
  std::string face;
  std::string ose;  // empty for a custom candidate without OSE
  std::string cutting_set;
  std::string config;
  std::string tmc;
  int rank = 0;  // 0 for custom candidates
  Priority priority = Priority::Default;
  double feed_rate_upper = -std::numeric_limits<double>::infinity();
  bool feasible = false;
  Trace trace;
  bool selected = false;
  Origin origin = Origin::Default;
  std::optional<ResolvedConditions> custom_conditions;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline std::string candidate_id(const std::string& ose, const std::string& tool) { return ose + "/" + tool; }

struct TmcChoice {
  std::string tmc;
  bool feasible = false;
  double feed_rate_upper = -std::numeric_limits<double>::infinity();
};

/// TMC shared by the tool and the configuration with the largest feasible
/// feed-rate upper bound, ties by id. Falls back to the first shared TMC when
/// none yields feasible conditions.
inline TmcChoice choose_tmc(const CuttingSet& tool, const ExtendedCuttingConditions& config, const OSEDatabase& db) {
  StringList common;
  for (const auto& t : tool.capabilities.tmcs)
    if (std::find(config.allowed_tmcs.begin(), config.allowed_tmcs.end(), t) != config.allowed_tmcs.end())
      common.push_back(t);
  std::sort(common.begin(), common.end());
  common.erase(std::unique(common.begin(), common.end()), common.end());
  TmcChoice best;
  for (const auto& id : common) {
    const TMC* tmc = db.tmc(id);
    try {
      auto rc = optimize_conditions(config.priority, tool, tmc);
      double up = rc.sources.at("feed_rate").max;
      if (!best.feasible || up > best.feed_rate_upper) best = {id, true, up};
    } catch (const InfeasibleConditions&) {
    }
  }
  if (!best.feasible && !common.empty()) best.tmc = common.front();
  return best;
}

/// Ranking: Qmax before Default, larger feasible feed-rate upper bound,
/// smaller diameter, tool id, OSE id.
struct CandidateOrder {
  const std::map<std::string, const CuttingSet*>* tools;
  bool operator()(const Candidate& a, const Candidate& b) const {
    auto key = [&](const Candidate& c) {
      const double dia = tools->at(c.cutting_set)->diameter;
      return std::make_tuple(c.priority == Priority::Qmax ? 0 : 1, -c.feed_rate_upper, dia, c.cutting_set, c.ose);
    };
    return key(a) < key(b);
  }
};

/// Tool id -> cutting-set types, computed once per tool list.
using ToolTypes = std::map<std::string, StringList>;

inline ToolTypes sort_tools(const std::vector<CuttingSet>& tools, const OSEDatabase& db) {
  ToolTypes out;
  for (const auto& t : tools) out[t.id] = classify_tool(t, db);
  return out;
}

/// Ranked candidates of one face. An empty list means no capable process.
inline std::vector<Candidate> match_face(const FaceAttributes& attrs, const OSEDatabase& db,
                                         const std::vector<CuttingSet>& tools, const ToolTypes& types) {
  std::vector<Candidate> out;
  std::map<std::string, const CuttingSet*> by_id;
  for (const auto& t : tools) by_id[t.id] = &t;

  for (const auto& ose : db.oses) {
    const auto* fam = db.family(ose.family);
    const auto* cfg = db.config(ose.config);
    if (!fam || !cfg) continue;
    Trace fam_trace;
    if (!face_in_family(attrs, *fam, &fam_trace)) continue;
    for (const auto& tool : tools) {
      const auto& tt = types.at(tool.id);
      if (std::find(tt.begin(), tt.end(), ose.cutting_set_type) == tt.end()) continue;
      Trace trace = fam_trace;
      if (!geometric_compliance(attrs, tool, ose, &trace)) continue;
      auto mc = manufacturing_compliance(tool, *cfg, &trace);
      if (!mc.passed) continue;
      auto choice = choose_tmc(tool, *cfg, db);
      Candidate c;
      c.id = candidate_id(ose.id, tool.id);
      c.face = attrs.id;
      c.ose = ose.id;
      c.cutting_set = tool.id;
      c.config = cfg->id;
      c.tmc = choice.tmc;
      c.priority = mc.priority;
      c.feed_rate_upper = choice.feed_rate_upper;
      c.feasible = choice.feasible;
      c.trace = std::move(trace);
      out.push_back(std::move(c));
    }
  }
  std::sort(out.begin(), out.end(), CandidateOrder{&by_id});
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

inline std::vector<Candidate> match_face(const FaceAttributes& attrs, const OSEDatabase& db,
                                         const std::vector<CuttingSet>& tools) {
  return match_face(attrs, db, tools, sort_tools(tools, db));
}

// ---------------------------------------------------------------- selection

/// Expert-tailored configuration for one face.
struct CustomPayload {
  std::string cutting_set;
  std::optional<std::string> ose;
  std::map<std::string, double> conditions;  // all of kConditionNames

  friend bool operator==(const CustomPayload&, const CustomPayload&) = default;
};

class SelectionError : public Error {
public:
  using Error::Error;
};

/// Candidates of one face together with the current selection.
struct FaceMatch {
  std::string face;
  std::vector<Candidate> candidates;  // ranked
  std::optional<Candidate> custom;
  std::optional<CustomPayload> custom_payload;
  int level = 1;
  std::string selected;  // candidate id, empty when nothing is selectable
  std::vector<std::string> notices;

  [[nodiscard]] const Candidate* find(const std::string& id) const {
    if (custom && custom->id == id) return &*custom;
    for (const auto& c : candidates)
      if (c.id == id) return &c;
    return nullptr;
  }
  [[nodiscard]] const Candidate* selection() const { return selected.empty() ? nullptr : find(selected); }

  friend bool operator==(const FaceMatch&, const FaceMatch&) = default;
};

namespace detail {

inline void mark_selected(FaceMatch& fm) {
  for (auto& c : fm.candidates) {
    c.selected = c.id == fm.selected;
    c.origin = c.selected && fm.level == 2 ? Origin::ExpertChoice : Origin::Default;
  }
  if (fm.custom) fm.custom->selected = fm.custom->id == fm.selected;
}

}  // namespace detail

/// Level 1: the best-ranked candidate whose cutting conditions are feasible.
inline void select_default(FaceMatch& fm) {
  fm.level = 1;
  fm.selected.clear();
  for (const auto& c : fm.candidates)
    if (c.feasible) {
      fm.selected = c.id;
      break;
    }
  detail::mark_selected(fm);
}

/// Builds the ExpertCustom candidate of a level-3 payload. Values outside
/// the tool range or the TMC constraint are kept and flagged.
inline Candidate build_custom(const std::string& face, const CustomPayload& p, const OSEDatabase& db,
                              const std::vector<CuttingSet>& tools) {
  auto invalid = [](const std::string& why) { return SelectionError("invalid custom configuration: " + why); };
  const CuttingSet* tool = nullptr;
  for (const auto& t : tools)
    if (t.id == p.cutting_set) tool = &t;
  if (!tool) throw invalid("unknown cutting set " + p.cutting_set);
  const OSE* ose = nullptr;
  const ExtendedCuttingConditions* cfg = nullptr;
  if (p.ose) {
    ose = db.ose(*p.ose);
    if (!ose) throw invalid("unknown OSE " + *p.ose);
    cfg = db.config(ose->config);
    if (!cfg) throw invalid("OSE " + *p.ose + " has no configuration");
  }
  for (auto n : kConditionNames) {
    auto it = p.conditions.find(std::string(n));
    if (it == p.conditions.end()) throw invalid("missing condition " + std::string(n));
    if (!std::isfinite(it->second)) throw invalid("condition " + std::string(n) + " is not finite");
  }
  for (const auto& [k, v] : p.conditions)
    if (std::find(kConditionNames.begin(), kConditionNames.end(), k) == kConditionNames.end())
      throw invalid("unknown condition " + k);

  Candidate c;
  c.id = "custom";
  c.face = face;
  c.ose = ose ? ose->id : "";
  c.cutting_set = tool->id;
  c.config = cfg ? cfg->id : "";
  c.origin = Origin::ExpertCustom;
  c.feasible = true;
  if (cfg) {
    c.priority = cfg->priority;
    c.tmc = choose_tmc(*tool, *cfg, db).tmc;
  } else if (!tool->capabilities.tmcs.empty()) {
    c.tmc = *std::min_element(tool->capabilities.tmcs.begin(), tool->capabilities.tmcs.end());
  }
  const TMC* tmc = c.tmc.empty() ? nullptr : db.tmc(c.tmc);
  ResolvedConditions rc;
  for (auto n : kConditionNames) {
    const std::string name(n);
    const double v = p.conditions.at(name);
    rc.values[name] = v;
    auto tr = tool->conditions.find(name);
    if (tr != tool->conditions.end()) {
      auto iv = feasible_interval(*tool, tmc, name);
      rc.sources[name] = iv ? *iv : tr->second;
      if (!tr->second.contains(v)) rc.warnings.push_back(name + " outside cutting set range");
    }
    if (tmc) {
      auto cr = tmc->constraints.find(name);
      if (cr != tmc->constraints.end() && !cr->second.contains(v))
        rc.warnings.push_back(name + " outside " + tmc->id + " constraint");
    }
  }
  c.custom_conditions = std::move(rc);
  return c;
}

/// Applies a level 1, 2 or 3 selection. Alternatives are never removed.
inline void select_candidate(FaceMatch& fm, int level, const std::string& candidate,
                             const std::optional<CustomPayload>& payload, const OSEDatabase& db,
                             const std::vector<CuttingSet>& tools) {
  switch (level) {
    case 1:
      select_default(fm);
      return;
    case 2: {
      auto it = std::find_if(fm.candidates.begin(), fm.candidates.end(),
                             [&](const Candidate& c) { return c.id == candidate; });
      if (it == fm.candidates.end()) throw SelectionError("no such alternative: " + candidate);
      fm.level = 2;
      fm.selected = it->id;
      detail::mark_selected(fm);
      return;
    }
    case 3: {
      if (!payload) throw SelectionError("invalid custom configuration: missing payload");
      fm.custom = build_custom(fm.face, *payload, db, tools);
      fm.custom_payload = payload;
      fm.level = 3;
      fm.selected = fm.custom->id;
      detail::mark_selected(fm);
      return;
    }
    default:
      throw SelectionError("selection level must be 1, 2 or 3");
  }
}

/// Carries an expert selection over to a fresh candidate list. The selection
/// survives while its candidate exists; otherwise the face reverts to the
/// level-1 default with a notice.
inline FaceMatch rematch(const FaceMatch& previous, std::vector<Candidate> fresh, const OSEDatabase& db,
                         const std::vector<CuttingSet>& tools) {
  FaceMatch fm;
  fm.face = previous.face;
  fm.candidates = std::move(fresh);
  select_default(fm);
  if (previous.level == 2) {
    if (fm.find(previous.selected)) {
      fm.level = 2;
      fm.selected = previous.selected;
    } else {
      fm.notices.push_back("selection " + previous.selected + " no longer exists; reverted to default");
    }
  } else if (previous.level == 3 && previous.custom_payload) {
    try {
      fm.custom = build_custom(fm.face, *previous.custom_payload, db, tools);
      fm.custom_payload = previous.custom_payload;
      fm.level = 3;
      fm.selected = fm.custom->id;
    } catch (const SelectionError&) {
      fm.notices.push_back("custom configuration no longer valid; reverted to default");
    }
  }
  detail::mark_selected(fm);
  return fm;
}

}  // namespace capp
