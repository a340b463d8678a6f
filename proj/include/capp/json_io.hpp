#pragma once

// JSON formats for parts, OSE databases, tool lists, attributes, candidates
// and process plans.

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capp/match_engine.hpp"
#include "capp/ose_db.hpp"
#include "capp/part_model.hpp"
#include "capp/setup_plan.hpp"
#include "capp/transform.hpp"

namespace capp {

using json = nlohmann::ordered_json;

/// Malformed input: unreadable file, invalid JSON or a schema violation.
class InputError : public Error {
public:
  using Error::Error;
};

inline json parse_json_text(const std::string& text, const std::string& source = "input") {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw InputError(source + ": parse error at line " + std::to_string(line) + ", column " + std::to_string(col) +
                     ": " + e.what());
  }
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_json_text(ss.str(), path);
}

// ---------------------------------------------------------------- schema helpers

namespace io {

inline InputError schema(const std::string& path, const std::string& what) { return InputError(path + ": " + what); }

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw schema(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw schema(path + "." + key, "missing field");
  return *it;
}

inline const json* optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline std::string str(const json& j, const std::string& path) {
  if (!j.is_string()) throw schema(path, "expected a string");
  return j.get<std::string>();
}

inline double num(const json& j, const std::string& path) {
  if (!j.is_number()) throw schema(path, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) throw schema(path, "expected a finite number");
  return v;
}

inline double positive(const json& j, const std::string& path) {
  double v = num(j, path);
  if (!(v > 0.0)) throw schema(path, "must be positive");
  return v;
}

inline const json& array(const json& j, const std::string& path) {
  if (!j.is_array()) throw schema(path, "expected an array");
  return j;
}

inline std::string idx(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

inline StringList strings(const json& j, const std::string& path) {
  StringList out;
  const auto& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(str(a[i], idx(path, i)));
  return out;
}

template <class E, class F>
E enum_value(const json& j, const std::string& path, F&& parse) {
  auto s = str(j, path);
  auto v = parse(s);
  if (!v) throw schema(path, "unknown value \"" + s + "\"");
  return *v;
}

template <class E, class F>
std::vector<E> enum_list(const json& j, const std::string& path, F&& parse) {
  std::vector<E> out;
  const auto& a = array(j, path);
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(enum_value<E>(a[i], idx(path, i), parse));
  return out;
}

inline Interval interval(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) throw schema(path, "expected [min, max]");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]")};
}

inline IntervalMap intervals(const json& j, const std::string& path) {
  if (!j.is_object()) throw schema(path, "expected an object of [min, max] ranges");
  IntervalMap m;
  for (const auto& [k, v] : j.items()) m[k] = interval(v, path + "." + k);
  return m;
}

inline json to_json(const Interval& i) { return json::array({i.min, i.max}); }

inline json to_json(const IntervalMap& m) {
  json j = json::object();
  for (const auto& [k, v] : m) j[k] = to_json(v);
  return j;
}

inline json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

inline Vec3 vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) throw schema(path, "expected [x, y, z]");
  return {num(j[0], path + "[0]"), num(j[1], path + "[1]"), num(j[2], path + "[2]")};
}

// Unbounded lengths are written as the string "Unbounded".
inline json length(double v) { return std::isinf(v) ? json("Unbounded") : json(v); }

inline double length(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "Unbounded") return std::numeric_limits<double>::infinity();
  return num(j, path);
}

template <class E>
json enum_names(const std::vector<E>& v) {
  json a = json::array();
  for (auto x : v) a.push_back(std::string(to_string(x)));
  return a;
}

}  // namespace io

// ---------------------------------------------------------------- part

inline Part part_from_json(const json& j) {
  Part p;
  p.id = io::str(io::field(j, "id", "part"), "part.id");
  p.units = io::str(io::field(j, "units", "part"), "part.units");
  const auto& faces = io::array(io::field(j, "faces", "part"), "part.faces");
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::string fp = io::idx("part.faces", i);
    const auto& jf = faces[i];
    SampledFace f;
    f.id = io::str(io::field(jf, "id", fp), fp + ".id");
    const auto& rows = io::array(io::field(jf, "grid", fp), fp + ".grid");
    std::vector<std::vector<Point3>> pts;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto rp = io::idx(fp + ".grid", r);
      const auto& row = io::array(rows[r], rp);
      std::vector<Point3> line;
      for (std::size_t c = 0; c < row.size(); ++c) {
        const auto cp = io::idx(rp, c);
        if (!row[c].is_array() || row[c].size() != 3) throw io::schema(cp, "expected [x, y, z]");
        Point3 q;
        for (int k = 0; k < 3; ++k) {
          if (!row[c][k].is_number()) throw io::schema(io::idx(cp, k), "expected a number");
          q(k) = row[c][k].get<double>();
        }
        line.push_back(q);
      }
      if (!pts.empty() && line.size() != pts.front().size()) throw io::schema(rp, "grid is not rectangular");
      pts.push_back(std::move(line));
    }
    f.grid = Grid::from_rows(pts);
    if (const auto* adj = io::optional_field(jf, "adjacency")) {
      io::array(*adj, fp + ".adjacency");
      for (std::size_t k = 0; k < adj->size(); ++k) {
        const auto ap = io::idx(fp + ".adjacency", k);
        f.adjacency.push_back({io::str(io::field((*adj)[k], "face", ap), ap + ".face"),
                               io::num(io::field((*adj)[k], "material_angle_deg", ap), ap + ".material_angle_deg")});
      }
    }
    if (const auto* l = io::optional_field(jf, "label")) f.label = io::str(*l, fp + ".label");
    p.faces.push_back(std::move(f));
  }
  return p;
}

inline json to_json(const Part& p) {
  json faces = json::array();
  for (const auto& f : p.faces) {
    json grid = json::array();
    for (std::size_t r = 0; r < f.grid.rows(); ++r) {
      json row = json::array();
      for (std::size_t c = 0; c < f.grid.cols(); ++c) row.push_back(io::to_json(f.grid(r, c)));
      grid.push_back(std::move(row));
    }
    json adj = json::array();
    for (const auto& a : f.adjacency) adj.push_back({{"face", a.face}, {"material_angle_deg", a.material_angle_deg}});
    json jf = {{"id", f.id}, {"grid", std::move(grid)}, {"adjacency", std::move(adj)}};
    if (f.label) jf["label"] = *f.label;
    faces.push_back(std::move(jf));
  }
  return {{"id", p.id}, {"units", p.units}, {"faces", std::move(faces)}};
}

// ---------------------------------------------------------------- tolerances

inline Tolerances tolerances_from_json(const json& j) {
  Tolerances t;
  if (!j.is_object()) throw io::schema("tolerances", "expected an object");
  auto set = [&](const char* key, double& out) {
    if (const auto* v = io::optional_field(j, key)) out = io::positive(*v, std::string("tolerances.") + key);
  };
  set("plane", t.plane);
  set("cylinder", t.cylinder);
  set("cone", t.cone);
  set("ruled", t.ruled);
  set("sweep", t.sweep);
  set("normal_cone", t.normal_cone);
  set("direction", t.direction);
  set("clearance", t.clearance);
  set("sweep_min_radius", t.sweep_min_radius);
  set("sweep_max_radius", t.sweep_max_radius);
  set("fan_step_deg", t.fan_step_deg);
  if (const auto* v = io::optional_field(j, "iteration_budget"))
    t.iteration_budget = static_cast<int>(io::positive(*v, "tolerances.iteration_budget"));
  for (const auto& [k, _] : j.items()) {
    static const std::set<std::string> known{"plane",     "cylinder",         "cone",
                                             "ruled",     "sweep",            "normal_cone",
                                             "direction", "clearance",        "sweep_min_radius",
                                             "sweep_max_radius", "fan_step_deg", "iteration_budget"};
    if (!known.count(k)) throw io::schema("tolerances." + k, "unknown tolerance");
  }
  return t;
}

inline json to_json(const Tolerances& t) {
  return {{"plane", t.plane},
          {"cylinder", t.cylinder},
          {"cone", t.cone},
          {"ruled", t.ruled},
          {"sweep", t.sweep},
          {"normal_cone", t.normal_cone},
          {"direction", t.direction},
          {"clearance", t.clearance},
          {"sweep_min_radius", t.sweep_min_radius},
          {"sweep_max_radius", t.sweep_max_radius},
          {"fan_step_deg", t.fan_step_deg},
          {"iteration_budget", t.iteration_budget}};
}

// ---------------------------------------------------------------- checks and database

inline Check check_from_json(const json& j, const std::string& path) {
  Check c;
  auto lhs_text = io::str(io::field(j, "lhs", path), path + ".lhs");
  auto lhs = parse_ref(lhs_text);
  if (!lhs) throw io::schema(path + ".lhs", "expected namespace.attribute, got \"" + lhs_text + "\"");
  c.lhs = *lhs;
  c.op = io::enum_value<Op>(io::field(j, "op", path), path + ".op", op_from_string);
  const auto& rhs = io::field(j, "rhs", path);
  const std::string rp = path + ".rhs";
  if (!rhs.is_object() || rhs.size() != 1) throw io::schema(rp, "expected one of {ref}, {value}, {any_of}, {all_of}");
  if (const auto* r = io::optional_field(rhs, "ref")) {
    auto t = io::str(*r, rp + ".ref");
    auto ref = parse_ref(t);
    if (!ref) throw io::schema(rp + ".ref", "expected namespace.attribute, got \"" + t + "\"");
    c.rhs = RefOperand{*ref};
  } else if (const auto* v = io::optional_field(rhs, "value")) {
    if (v->is_boolean()) c.rhs = ConstOperand{v->get<bool>()};
    else if (v->is_number()) c.rhs = ConstOperand{io::num(*v, rp + ".value")};
    else if (v->is_string() && v->get<std::string>() == "Unbounded")
      c.rhs = ConstOperand{std::numeric_limits<double>::infinity()};
    else if (v->is_string()) c.rhs = ConstOperand{v->get<std::string>()};
    else throw io::schema(rp + ".value", "expected a number, boolean or string");
  } else if (const auto* a = io::optional_field(rhs, "any_of")) {
    c.rhs = AnyOf{io::strings(*a, rp + ".any_of")};
  } else if (const auto* a2 = io::optional_field(rhs, "all_of")) {
    c.rhs = AllOf{io::strings(*a2, rp + ".all_of")};
  } else {
    throw io::schema(rp, "expected one of {ref}, {value}, {any_of}, {all_of}");
  }
  return c;
}

inline json to_json(const Check& c) {
  json rhs;
  if (auto r = std::get_if<RefOperand>(&c.rhs)) {
    rhs = {{"ref", r->ref.key()}};
  } else if (auto k = std::get_if<ConstOperand>(&c.rhs)) {
    if (auto d = std::get_if<double>(&k->value)) rhs = {{"value", io::length(*d)}};
    else if (auto b = std::get_if<bool>(&k->value)) rhs = {{"value", *b}};
    else if (auto s = std::get_if<std::string>(&k->value)) rhs = {{"value", *s}};
    else rhs = {{"value", std::get<StringList>(k->value)}};
  } else if (auto a = std::get_if<AnyOf>(&c.rhs)) {
    rhs = {{"any_of", a->items}};
  } else {
    rhs = {{"all_of", std::get<AllOf>(c.rhs).items}};
  }
  return {{"lhs", c.lhs.key()}, {"op", std::string(to_string(c.op))}, {"rhs", rhs}};
}

inline std::vector<Check> checks_from_json(const json& j, const std::string& path) {
  std::vector<Check> out;
  io::array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(check_from_json(j[i], io::idx(path, i)));
  return out;
}

inline json to_json(const std::vector<Check>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(to_json(c));
  return a;
}

inline Capabilities capabilities_from_json(const json& j, const std::string& path) {
  return {io::enum_list<MfgType>(io::field(j, "mfg_types", path), path + ".mfg_types", mfg_type_from_string),
          io::enum_list<Mode>(io::field(j, "modes", path), path + ".modes", mode_from_string),
          io::strings(io::field(j, "tmcs", path), path + ".tmcs")};
}

inline void put_capabilities(json& j, const Capabilities& c) {
  j["mfg_types"] = io::enum_names(c.mfg_types);
  j["modes"] = io::enum_names(c.modes);
  j["tmcs"] = c.tmcs;
}

inline OSEDatabase osedb_from_json(const json& j) {
  OSEDatabase db;
  if (!j.is_object()) throw io::schema("osedb", "expected an object");
  const auto& fams = io::array(io::field(j, "families", "osedb"), "osedb.families");
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const auto p = io::idx("osedb.families", i);
    GeometryFamily f;
    f.id = io::str(io::field(fams[i], "id", p), p + ".id");
    f.required_type =
        io::enum_value<GeometryType>(io::field(fams[i], "required_type", p), p + ".required_type",
                                     geometry_type_from_string);
    f.checks = checks_from_json(io::field(fams[i], "checks", p), p + ".checks");
    db.families.push_back(std::move(f));
  }
  const auto& cfgs = io::array(io::field(j, "configs", "osedb"), "osedb.configs");
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    const auto p = io::idx("osedb.configs", i);
    ExtendedCuttingConditions c;
    c.id = io::str(io::field(cfgs[i], "id", p), p + ".id");
    c.mfg_type = io::enum_value<MfgType>(io::field(cfgs[i], "mfg_type", p), p + ".mfg_type", mfg_type_from_string);
    c.mode = io::enum_value<Mode>(io::field(cfgs[i], "mode", p), p + ".mode", mode_from_string);
    if (const auto* t = io::optional_field(cfgs[i], "trajectory_strategy"))
      c.trajectory_strategy = io::enum_value<Trajectory>(*t, p + ".trajectory_strategy", trajectory_from_string);
    c.allowed_tmcs = io::strings(io::field(cfgs[i], "allowed_tmcs", p), p + ".allowed_tmcs");
    c.priority = io::enum_value<Priority>(io::field(cfgs[i], "priority", p), p + ".priority", priority_from_string);
    db.configs.push_back(std::move(c));
  }
  const auto& types = io::array(io::field(j, "cutting_set_types", "osedb"), "osedb.cutting_set_types");
  for (std::size_t i = 0; i < types.size(); ++i) {
    const auto p = io::idx("osedb.cutting_set_types", i);
    CuttingSetType t;
    t.id = io::str(io::field(types[i], "id", p), p + ".id");
    t.dimensions = io::intervals(io::field(types[i], "dimensions", p), p + ".dimensions");
    t.conditions = io::intervals(io::field(types[i], "conditions", p), p + ".conditions");
    t.cutting_material = io::str(io::field(types[i], "cutting_material", p), p + ".cutting_material");
    t.capabilities = capabilities_from_json(types[i], p);
    db.cutting_set_types.push_back(std::move(t));
  }
  const auto& tmcs = io::array(io::field(j, "tmcs", "osedb"), "osedb.tmcs");
  for (std::size_t i = 0; i < tmcs.size(); ++i) {
    const auto p = io::idx("osedb.tmcs", i);
    TMC t;
    t.id = io::str(io::field(tmcs[i], "id", p), p + ".id");
    t.cut_material = io::str(io::field(tmcs[i], "cut_material", p), p + ".cut_material");
    t.cutting_material = io::str(io::field(tmcs[i], "cutting_material", p), p + ".cutting_material");
    t.constraints = io::intervals(io::field(tmcs[i], "constraints", p), p + ".constraints");
    t.lubrication = io::str(io::field(tmcs[i], "lubrication", p), p + ".lubrication");
    db.tmcs.push_back(std::move(t));
  }
  const auto& oses = io::array(io::field(j, "oses", "osedb"), "osedb.oses");
  for (std::size_t i = 0; i < oses.size(); ++i) {
    const auto p = io::idx("osedb.oses", i);
    OSE o;
    o.id = io::str(io::field(oses[i], "id", p), p + ".id");
    o.family = io::str(io::field(oses[i], "family", p), p + ".family");
    o.config = io::str(io::field(oses[i], "config", p), p + ".config");
    o.cutting_set_type = io::str(io::field(oses[i], "cutting_set_type", p), p + ".cutting_set_type");
    o.compliance_checks = checks_from_json(io::field(oses[i], "compliance_checks", p), p + ".compliance_checks");
    db.oses.push_back(std::move(o));
  }
  return db;
}

inline json to_json(const OSEDatabase& db) {
  json fams = json::array(), cfgs = json::array(), types = json::array(), tmcs = json::array(),
       oses = json::array();
  for (const auto& f : db.families)
    fams.push_back({{"id", f.id}, {"required_type", std::string(to_string(f.required_type))},
                    {"checks", to_json(f.checks)}});
  for (const auto& c : db.configs) {
    json jc = {{"id", c.id},
               {"mfg_type", std::string(to_string(c.mfg_type))},
               {"mode", std::string(to_string(c.mode))},
               {"allowed_tmcs", c.allowed_tmcs},
               {"priority", std::string(to_string(c.priority))}};
    if (c.trajectory_strategy) jc["trajectory_strategy"] = std::string(to_string(*c.trajectory_strategy));
    cfgs.push_back(std::move(jc));
  }
  for (const auto& t : db.cutting_set_types) {
    json jt = {{"id", t.id},
               {"dimensions", io::to_json(t.dimensions)},
               {"conditions", io::to_json(t.conditions)},
               {"cutting_material", t.cutting_material}};
    put_capabilities(jt, t.capabilities);
    types.push_back(std::move(jt));
  }
  for (const auto& t : db.tmcs)
    tmcs.push_back({{"id", t.id},
                    {"cut_material", t.cut_material},
                    {"cutting_material", t.cutting_material},
                    {"constraints", io::to_json(t.constraints)},
                    {"lubrication", t.lubrication}});
  for (const auto& o : db.oses)
    oses.push_back({{"id", o.id},
                    {"family", o.family},
                    {"config", o.config},
                    {"cutting_set_type", o.cutting_set_type},
                    {"compliance_checks", to_json(o.compliance_checks)}});
  return {{"families", fams}, {"configs", cfgs}, {"cutting_set_types", types}, {"tmcs", tmcs}, {"oses", oses}};
}

// ---------------------------------------------------------------- tools

inline CuttingSet tool_from_json(const json& j, const std::string& p) {
  CuttingSet t;
  t.id = io::str(io::field(j, "id", p), p + ".id");
  t.diameter = io::positive(io::field(j, "diameter", p), p + ".diameter");
  t.cutting_length = io::positive(io::field(j, "cutting_length", p), p + ".cutting_length");
  t.tool_length = io::positive(io::field(j, "tool_length", p), p + ".tool_length");
  t.end_radius = io::positive(io::field(j, "end_radius", p), p + ".end_radius");
  if (t.cutting_length > t.tool_length) throw io::schema(p + ".cutting_length", "exceeds tool_length");
  t.cutting_material = io::str(io::field(j, "cutting_material", p), p + ".cutting_material");
  t.capabilities = capabilities_from_json(j, p);
  t.conditions = io::intervals(io::field(j, "conditions", p), p + ".conditions");
  return t;
}

inline std::vector<CuttingSet> tools_from_json(const json& j) {
  std::vector<CuttingSet> out;
  const json& list = j.is_object() ? io::field(j, "tools", "tools") : j;
  io::array(list, "tools");
  for (std::size_t i = 0; i < list.size(); ++i) out.push_back(tool_from_json(list[i], io::idx("tools", i)));
  return out;
}

inline json to_json(const CuttingSet& t) {
  json j = {{"id", t.id},
            {"diameter", t.diameter},
            {"cutting_length", t.cutting_length},
            {"tool_length", t.tool_length},
            {"end_radius", t.end_radius},
            {"cutting_material", t.cutting_material},
            {"conditions", io::to_json(t.conditions)}};
  put_capabilities(j, t.capabilities);
  return j;
}

inline json to_json(const std::vector<CuttingSet>& tools) {
  json a = json::array();
  for (const auto& t : tools) a.push_back(to_json(t));
  return a;
}

// ---------------------------------------------------------------- attributes

inline json to_json(const DirectionalDims& d) {
  return {{"direction", io::to_json(d.direction)},
          {"end_accessibility", d.end_accessibility},
          {"flank_accessibility", d.flank_accessibility},
          {"global_accessibility", d.global_accessibility},
          {"depth", d.depth}};
}

inline json to_json(const FaceAttributes& a) {
  json access = json::array();
  for (const auto& d : a.access)
    access.push_back({{"direction", io::to_json(d.direction)},
                      {"kind", std::string(to_string(d.kind))},
                      {"compulsory", d.compulsory}});
  json edges = json::array();
  for (const auto& e : a.edge_openness) edges.push_back({{"face", e.face}, {"openness", std::string(to_string(e.openness))}});
  json per = json::array();
  for (const auto& d : a.per_direction) per.push_back(to_json(d));
  json j = {{"id", a.id},
            {"geometry_type", std::string(to_string(a.geometry_type))},
            {"fit_residual", a.fit_residual},
            {"openness", std::string(to_string(a.openness))},
            {"edge_openness", edges},
            {"access", access},
            {"inaccessible", a.inaccessible()},
            {"end_accessibility", a.end_accessibility},
            {"flank_accessibility", a.flank_accessibility},
            {"global_accessibility", a.global_accessibility},
            {"depth", a.depth},
            {"min_fillet_radius", io::length(a.min_fillet_radius)},
            {"dimension_box", {{"min", io::to_json(a.dimension_box.min)}, {"max", io::to_json(a.dimension_box.max)}}},
            {"potential_mfg_types", io::enum_names(a.potential_mfg_types)},
            {"per_direction", per}};
  if (a.axis) j["axis"] = io::to_json(*a.axis);
  if (a.ruling) j["ruling"] = io::to_json(*a.ruling);
  return j;
}

// ---------------------------------------------------------------- candidates

inline json to_json(const Trace& t) {
  json a = json::array();
  for (const auto& e : t) a.push_back({{"check", e.check}, {"passed", e.passed}});
  return a;
}

inline Trace trace_from_json(const json& j, const std::string& path) {
  Trace t;
  io::array(j, path);
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto p = io::idx(path, i);
    const auto& passed = io::field(j[i], "passed", p);
    if (!passed.is_boolean()) throw io::schema(p + ".passed", "expected a boolean");
    t.push_back({io::str(io::field(j[i], "check", p), p + ".check"), passed.get<bool>()});
  }
  return t;
}

inline json to_json(const ResolvedConditions& rc) {
  json sources = json::object();
  for (const auto& [k, v] : rc.sources) sources[k] = io::to_json(v);
  return {{"values", rc.values}, {"sources", sources}, {"warnings", rc.warnings}};
}

inline ResolvedConditions conditions_from_json(const json& j, const std::string& path) {
  ResolvedConditions rc;
  const auto& values = io::field(j, "values", path);
  if (!values.is_object()) throw io::schema(path + ".values", "expected an object");
  for (const auto& [k, v] : values.items()) rc.values[k] = io::num(v, path + ".values." + k);
  rc.sources = io::intervals(io::field(j, "sources", path), path + ".sources");
  rc.warnings = io::strings(io::field(j, "warnings", path), path + ".warnings");
  return rc;
}

inline json to_json(const Candidate& c) {
  json j = {{"id", c.id},
            {"face", c.face},
            {"ose", c.ose},
            {"cutting_set", c.cutting_set},
            {"config", c.config},
            {"tmc", c.tmc},
            {"rank", c.rank},
            {"priority", std::string(to_string(c.priority))},
            {"feed_rate_upper", std::isfinite(c.feed_rate_upper) ? json(c.feed_rate_upper) : json(nullptr)},
            {"feasible", c.feasible},
            {"selected", c.selected},
            {"origin", std::string(to_string(c.origin))},
            {"trace", to_json(c.trace)}};
  if (c.custom_conditions) j["conditions"] = to_json(*c.custom_conditions);
  return j;
}

inline CustomPayload custom_payload_from_json(const json& j) {
  auto bad = [](const std::string& why) { return SelectionError("invalid custom configuration: " + why); };
  if (!j.is_object()) throw bad("payload must be an object");
  CustomPayload p;
  auto cs = j.find("cutting_set");
  if (cs == j.end() || !cs->is_string()) throw bad("cutting_set must be a string");
  p.cutting_set = cs->get<std::string>();
  if (auto o = j.find("ose"); o != j.end() && !o->is_null()) {
    if (!o->is_string()) throw bad("ose must be a string");
    p.ose = o->get<std::string>();
  }
  auto cond = j.find("conditions");
  if (cond == j.end() || !cond->is_object()) throw bad("conditions must be an object");
  for (const auto& [k, v] : cond->items()) {
    if (!v.is_number()) throw bad("condition " + k + " must be a number");
    p.conditions[k] = v.get<double>();
  }
  for (const auto& [k, _] : j.items())
    if (k != "cutting_set" && k != "ose" && k != "conditions") throw bad("unknown field " + k);
  return p;
}

inline json to_json(const CustomPayload& p) {
  json j = {{"cutting_set", p.cutting_set}, {"conditions", p.conditions}};
  if (p.ose) j["ose"] = *p.ose;
  return j;
}

inline json to_json(const FaceMatch& fm) {
  json cands = json::array();
  for (const auto& c : fm.candidates) cands.push_back(to_json(c));
  json j = {{"face", fm.face},
            {"level", fm.level},
            {"selected", fm.selected.empty() ? json(nullptr) : json(fm.selected)},
            {"candidates", cands},
            {"notices", fm.notices}};
  j["custom"] = fm.custom ? to_json(*fm.custom) : json(nullptr);
  return j;
}

// ---------------------------------------------------------------- plan

inline json to_json(const ProcessPlan& plan) {
  json setups = json::array();
  for (const auto& s : plan.setups) {
    json seqs = json::array();
    for (const auto& q : s.sequences) {
      json traces = json::array();
      for (const auto& t : q.traces)
        traces.push_back({{"face", t.face}, {"candidate", t.candidate}, {"trace", to_json(t.trace)}});
      json jq = {{"id", q.id},
                 {"setup", q.setup},
                 {"faces", q.faces},
                 {"ose", q.ose},
                 {"cutting_set", q.cutting_set},
                 {"config", q.config},
                 {"tmc", q.tmc},
                 {"priority", std::string(to_string(q.priority))},
                 {"origin", std::string(to_string(q.origin))},
                 {"conditions", to_json(q.conditions)},
                 {"traces", traces}};
      jq["mfg_type"] = q.mfg_type ? json(std::string(to_string(*q.mfg_type))) : json(nullptr);
      jq["mode"] = q.mode ? json(std::string(to_string(*q.mode))) : json(nullptr);
      jq["trajectory_strategy"] =
          q.trajectory_strategy ? json(std::string(to_string(*q.trajectory_strategy))) : json(nullptr);
      seqs.push_back(std::move(jq));
    }
    setups.push_back(
        {{"id", s.id}, {"direction", io::to_json(s.direction)}, {"faces", s.faces}, {"sequences", std::move(seqs)}});
  }
  json unmatched = json::array();
  for (const auto& u : plan.unmatched) unmatched.push_back({{"face", u.face}, {"reason", u.reason}});
  return {{"part", plan.part_id},
          {"setups", setups},
          {"unmatched", unmatched},
          {"inaccessible", plan.inaccessible},
          {"tensions", plan.tensions},
          {"notices", plan.notices}};
}

inline ProcessPlan plan_from_json(const json& j) {
  ProcessPlan plan;
  plan.part_id = io::str(io::field(j, "part", "plan"), "plan.part");
  const auto& setups = io::array(io::field(j, "setups", "plan"), "plan.setups");
  for (std::size_t i = 0; i < setups.size(); ++i) {
    const auto sp = io::idx("plan.setups", i);
    PlannedSetup s;
    s.id = io::str(io::field(setups[i], "id", sp), sp + ".id");
    s.direction = io::vec3(io::field(setups[i], "direction", sp), sp + ".direction");
    s.faces = io::strings(io::field(setups[i], "faces", sp), sp + ".faces");
    const auto& seqs = io::array(io::field(setups[i], "sequences", sp), sp + ".sequences");
    for (std::size_t k = 0; k < seqs.size(); ++k) {
      const auto qp = io::idx(sp + ".sequences", k);
      const auto& jq = seqs[k];
      PlannedSequence q;
      q.id = io::str(io::field(jq, "id", qp), qp + ".id");
      q.setup = io::str(io::field(jq, "setup", qp), qp + ".setup");
      q.faces = io::strings(io::field(jq, "faces", qp), qp + ".faces");
      q.ose = io::str(io::field(jq, "ose", qp), qp + ".ose");
      q.cutting_set = io::str(io::field(jq, "cutting_set", qp), qp + ".cutting_set");
      q.config = io::str(io::field(jq, "config", qp), qp + ".config");
      q.tmc = io::str(io::field(jq, "tmc", qp), qp + ".tmc");
      q.priority = io::enum_value<Priority>(io::field(jq, "priority", qp), qp + ".priority", priority_from_string);
      q.origin = io::enum_value<Origin>(io::field(jq, "origin", qp), qp + ".origin", origin_from_string);
      if (const auto* v = io::optional_field(jq, "mfg_type"))
        q.mfg_type = io::enum_value<MfgType>(*v, qp + ".mfg_type", mfg_type_from_string);
      if (const auto* v = io::optional_field(jq, "mode")) q.mode = io::enum_value<Mode>(*v, qp + ".mode", mode_from_string);
      if (const auto* v = io::optional_field(jq, "trajectory_strategy"))
        q.trajectory_strategy = io::enum_value<Trajectory>(*v, qp + ".trajectory_strategy", trajectory_from_string);
      q.conditions = conditions_from_json(io::field(jq, "conditions", qp), qp + ".conditions");
      const auto& traces = io::array(io::field(jq, "traces", qp), qp + ".traces");
      for (std::size_t t = 0; t < traces.size(); ++t) {
        const auto tp = io::idx(qp + ".traces", t);
        q.traces.push_back({io::str(io::field(traces[t], "face", tp), tp + ".face"),
                            io::str(io::field(traces[t], "candidate", tp), tp + ".candidate"),
                            trace_from_json(io::field(traces[t], "trace", tp), tp + ".trace")});
      }
      s.sequences.push_back(std::move(q));
    }
    plan.setups.push_back(std::move(s));
  }
  const auto& unmatched = io::array(io::field(j, "unmatched", "plan"), "plan.unmatched");
  for (std::size_t i = 0; i < unmatched.size(); ++i) {
    const auto up = io::idx("plan.unmatched", i);
    plan.unmatched.push_back({io::str(io::field(unmatched[i], "face", up), up + ".face"),
                              io::str(io::field(unmatched[i], "reason", up), up + ".reason")});
  }
  plan.inaccessible = io::strings(io::field(j, "inaccessible", "plan"), "plan.inaccessible");
  plan.tensions = io::strings(io::field(j, "tensions", "plan"), "plan.tensions");
  plan.notices = io::strings(io::field(j, "notices", "plan"), "plan.notices");
  return plan;
}

inline json to_json(const std::vector<DbFinding>& findings) {
  json a = json::array();
  for (const auto& f : findings) a.push_back({{"kind", f.kind}, {"subject", f.subject}, {"message", f.message}});
  return a;
}

inline json to_json(const std::vector<Violation>& vs) {
  json a = json::array();
  for (const auto& v : vs) a.push_back({{"face", v.face}, {"reason", v.reason}});
  return a;
}

inline json to_json(const AuditReport& r) {
  auto list = [](const std::vector<AuditFinding>& fs) {
    json a = json::array();
    for (const auto& f : fs)
      a.push_back({{"kind", std::string(to_string(f.kind))}, {"oses", f.oses}, {"detail", f.detail}});
    return a;
  };
  return {{"shadowing", list(r.shadowing)},
          {"duplicates", list(r.duplicates)},
          {"unsatisfiable", list(r.unsatisfiable)},
          {"count", r.size()}};
}

inline json to_json(const std::vector<WhatIfVariant>& vs) {
  json a = json::array();
  for (const auto& v : vs)
    a.push_back({{"field", std::string(to_string(v.field))},
                 {"value", v.value},
                 {"covered", v.covered},
                 {"covering_oses", v.covering_oses}});
  return a;
}

}  // namespace capp
