#pragma once

// OSE knowledge base: geometry families, extended cutting conditions,
// cutting-set types, tool/material couples and the OSE triples linking them.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "capp/transform.hpp"

namespace capp {

enum class Mode { Roughing, SemiFinishing, Finishing };
enum class Trajectory { Forth, BackAndForth, InOutSpiral, OutInSpiral, NormalDrilling, Deburring, Flank, Sweeping };
enum class Priority { Qmax, Default };

inline constexpr std::array kModes = {Mode::Roughing, Mode::SemiFinishing, Mode::Finishing};
inline constexpr std::array kTrajectories = {Trajectory::Forth,          Trajectory::BackAndForth,
                                             Trajectory::InOutSpiral,    Trajectory::OutInSpiral,
                                             Trajectory::NormalDrilling, Trajectory::Deburring,
                                             Trajectory::Flank,          Trajectory::Sweeping};
inline constexpr std::array kPriorities = {Priority::Qmax, Priority::Default};

inline std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Roughing: return "Roughing";
    case Mode::SemiFinishing: return "SemiFinishing";
    case Mode::Finishing: return "Finishing";
  }
  return "";
}

inline std::string_view to_string(Trajectory t) {
  switch (t) {
    case Trajectory::Forth: return "Forth";
    case Trajectory::BackAndForth: return "BackAndForth";
    case Trajectory::InOutSpiral: return "InOutSpiral";
    case Trajectory::OutInSpiral: return "OutInSpiral";
    case Trajectory::NormalDrilling: return "NormalDrilling";
    case Trajectory::Deburring: return "Deburring";
    case Trajectory::Flank: return "Flank";
    case Trajectory::Sweeping: return "Sweeping";
  }
  return "";
}

inline std::string_view to_string(Priority p) { return p == Priority::Qmax ? "Qmax" : "Default"; }

inline std::optional<Mode> mode_from_string(std::string_view s) { return enum_from_string(s, kModes); }
inline std::optional<Trajectory> trajectory_from_string(std::string_view s) {
  return enum_from_string(s, kTrajectories);
}
inline std::optional<Priority> priority_from_string(std::string_view s) { return enum_from_string(s, kPriorities); }

/// Closed interval; bounds are inclusive everywhere.
struct Interval {
  double min = 0.0;
  double max = 0.0;

  [[nodiscard]] bool valid() const { return min <= max; }
  [[nodiscard]] bool contains(double v) const { return v >= min && v <= max; }
  [[nodiscard]] double mid() const { return 0.5 * (min + max); }

  [[nodiscard]] std::optional<Interval> intersect(const Interval& o) const {
    Interval r{std::max(min, o.min), std::min(max, o.max)};
    if (!r.valid()) return std::nullopt;
    return r;
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr std::array<std::string_view, 4> kDimensionNames = {"diameter", "cutting_length", "tool_length",
                                                                    "end_radius"};
inline constexpr std::array<std::string_view, 5> kConditionNames = {"cutting_speed", "feed_per_tooth", "advance_x",
                                                                    "advance_z", "feed_rate"};

using IntervalMap = std::map<std::string, Interval>;

// ---------------------------------------------------------------- checks

enum class Namespace { Face, Tool, Config };

inline std::string_view to_string(Namespace n) {
  switch (n) {
    case Namespace::Face: return "face";
    case Namespace::Tool: return "tool";
    case Namespace::Config: return "config";
  }
  return "";
}

enum class ValueKind { Number, Bool, Category, List };

struct AttributeSpec {
  Namespace ns;
  std::string_view name;
  ValueKind kind;
};

/// The fixed attribute vocabulary available to checks.
inline constexpr std::array kVocabulary = {
    AttributeSpec{Namespace::Face, "geometry_type", ValueKind::Category},
    AttributeSpec{Namespace::Face, "openness", ValueKind::Category},
    AttributeSpec{Namespace::Face, "access_kind", ValueKind::Category},
    AttributeSpec{Namespace::Face, "access_compulsory", ValueKind::Bool},
    AttributeSpec{Namespace::Face, "access_count", ValueKind::Number},
    AttributeSpec{Namespace::Face, "end_accessibility", ValueKind::Number},
    AttributeSpec{Namespace::Face, "flank_accessibility", ValueKind::Number},
    AttributeSpec{Namespace::Face, "global_accessibility", ValueKind::Number},
    AttributeSpec{Namespace::Face, "depth", ValueKind::Number},
    AttributeSpec{Namespace::Face, "min_fillet_radius", ValueKind::Number},
    AttributeSpec{Namespace::Face, "fit_residual", ValueKind::Number},
    AttributeSpec{Namespace::Face, "potential_mfg_types", ValueKind::List},
    AttributeSpec{Namespace::Tool, "diameter", ValueKind::Number},
    AttributeSpec{Namespace::Tool, "cutting_length", ValueKind::Number},
    AttributeSpec{Namespace::Tool, "tool_length", ValueKind::Number},
    AttributeSpec{Namespace::Tool, "end_radius", ValueKind::Number},
    AttributeSpec{Namespace::Tool, "cutting_material", ValueKind::Category},
    AttributeSpec{Namespace::Tool, "mfg_types", ValueKind::List},
    AttributeSpec{Namespace::Tool, "modes", ValueKind::List},
    AttributeSpec{Namespace::Tool, "tmcs", ValueKind::List},
    AttributeSpec{Namespace::Config, "mfg_type", ValueKind::Category},
    AttributeSpec{Namespace::Config, "mode", ValueKind::Category},
    AttributeSpec{Namespace::Config, "trajectory_strategy", ValueKind::Category},
    AttributeSpec{Namespace::Config, "allowed_tmcs", ValueKind::List},
    AttributeSpec{Namespace::Config, "priority", ValueKind::Category},
};

struct AttributeRef {
  Namespace ns = Namespace::Face;
  std::string name;

  [[nodiscard]] std::string key() const { return std::string(to_string(ns)) + "." + name; }

  friend bool operator==(const AttributeRef&, const AttributeRef&) = default;
  friend auto operator<=>(const AttributeRef&, const AttributeRef&) = default;
};

inline const AttributeSpec* find_attribute(const AttributeRef& ref) {
  for (const auto& a : kVocabulary)
    if (a.ns == ref.ns && a.name == ref.name) return &a;
  return nullptr;
}

/// Parses "face.end_accessibility" style references.
inline std::optional<AttributeRef> parse_ref(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return std::nullopt;
  auto ns = text.substr(0, dot);
  AttributeRef r;
  if (ns == "face") r.ns = Namespace::Face;
  else if (ns == "tool") r.ns = Namespace::Tool;
  else if (ns == "config") r.ns = Namespace::Config;
  else return std::nullopt;
  r.name = std::string(text.substr(dot + 1));
  return r;
}

using StringList = std::vector<std::string>;
using Value = std::variant<double, bool, std::string, StringList>;

inline std::string value_text(const Value& v) {
  std::ostringstream os;
  os.precision(12);
  if (auto d = std::get_if<double>(&v)) {
    if (std::isinf(*d)) os << (*d > 0 ? "Unbounded" : "-Unbounded");
    else os << *d;
  } else if (auto b = std::get_if<bool>(&v)) {
    os << (*b ? "true" : "false");
  } else if (auto s = std::get_if<std::string>(&v)) {
    os << *s;
  } else {
    const auto& l = std::get<StringList>(v);
    os << "{";
    for (std::size_t i = 0; i < l.size(); ++i) os << (i ? ", " : "") << l[i];
    os << "}";
  }
  return os.str();
}

enum class Op { Lt, Le, Gt, Ge, Eq, ContainsAny, ContainsAll };

inline constexpr std::array kOps = {Op::Lt, Op::Le, Op::Gt, Op::Ge, Op::Eq, Op::ContainsAny, Op::ContainsAll};

inline std::string_view to_string(Op op) {
  switch (op) {
    case Op::Lt: return "lt";
    case Op::Le: return "le";
    case Op::Gt: return "gt";
    case Op::Ge: return "ge";
    case Op::Eq: return "eq";
    case Op::ContainsAny: return "contains_any";
    case Op::ContainsAll: return "contains_all";
  }
  return "";
}

inline std::optional<Op> op_from_string(std::string_view s) { return enum_from_string(s, kOps); }

struct RefOperand {
  AttributeRef ref;
  friend bool operator==(const RefOperand&, const RefOperand&) = default;
};
struct ConstOperand {
  Value value;
  friend bool operator==(const ConstOperand&, const ConstOperand&) = default;
};
struct AnyOf {
  StringList items;
  friend bool operator==(const AnyOf&, const AnyOf&) = default;
};
struct AllOf {
  StringList items;
  friend bool operator==(const AllOf&, const AllOf&) = default;
};
using Operand = std::variant<RefOperand, ConstOperand, AnyOf, AllOf>;

/// Elementary pass/fail condition. There is no else branch.
struct Check {
  AttributeRef lhs;
  Op op = Op::Eq;
  Operand rhs;

  [[nodiscard]] std::string text() const {
    std::string s = lhs.key() + " " + std::string(to_string(op)) + " ";
    if (auto r = std::get_if<RefOperand>(&rhs)) return s + r->ref.key();
    if (auto c = std::get_if<ConstOperand>(&rhs)) return s + value_text(c->value);
    if (auto a = std::get_if<AnyOf>(&rhs)) return s + "any_of " + value_text(a->items);
    return s + "all_of " + value_text(std::get<AllOf>(rhs).items);
  }

  [[nodiscard]] std::vector<AttributeRef> refs() const {
    std::vector<AttributeRef> out{lhs};
    if (auto r = std::get_if<RefOperand>(&rhs)) out.push_back(r->ref);
    return out;
  }

  friend bool operator==(const Check&, const Check&) = default;
};

inline Check make_check(std::string_view lhs, Op op, Operand rhs) {
  auto l = parse_ref(lhs);
  if (!l) throw Error("bad attribute reference " + std::string(lhs));
  return {*l, op, std::move(rhs)};
}

inline Operand ref(std::string_view text) {
  auto r = parse_ref(text);
  if (!r) throw Error("bad attribute reference " + std::string(text));
  return RefOperand{*r};
}

/// Raised when a check names an attribute that the bindings cannot supply.
class BindingError : public Error {
public:
  using Error::Error;
};

/// Attribute values keyed by attribute name, one map per namespace.
using ValueMap = std::map<std::string, Value>;

struct ValueBindings {
  const ValueMap* face = nullptr;
  const ValueMap* tool = nullptr;
  const ValueMap* config = nullptr;

  [[nodiscard]] const Value& resolve(const AttributeRef& r) const {
    const ValueMap* m = r.ns == Namespace::Face ? face : r.ns == Namespace::Tool ? tool : config;
    if (!m) throw BindingError("binding error: namespace " + std::string(to_string(r.ns)) + " is not bound");
    auto it = m->find(r.name);
    if (it == m->end()) throw BindingError("binding error: unknown attribute " + r.key());
    return it->second;
  }
};

namespace detail {

inline StringList as_set(const Value& v, const Check& c) {
  if (auto s = std::get_if<std::string>(&v)) return {*s};
  if (auto l = std::get_if<StringList>(&v)) return *l;
  throw BindingError("binding error: " + c.text() + " needs a list or category operand");
}

inline double as_number(const Value& v, const Check& c) {
  if (auto d = std::get_if<double>(&v)) return *d;
  throw BindingError("binding error: " + c.text() + " needs numeric operands");
}

}  // namespace detail

inline bool eval_check(const Check& c, const ValueBindings& b) {
  const Value& lhs = b.resolve(c.lhs);
  Value rhs_storage;
  const Value* rhs = nullptr;
  StringList set;
  if (auto r = std::get_if<RefOperand>(&c.rhs)) {
    rhs = &b.resolve(r->ref);
  } else if (auto k = std::get_if<ConstOperand>(&c.rhs)) {
    rhs = &k->value;
  } else if (auto a = std::get_if<AnyOf>(&c.rhs)) {
    rhs_storage = a->items;
    rhs = &rhs_storage;
  } else {
    rhs_storage = std::get<AllOf>(c.rhs).items;
    rhs = &rhs_storage;
  }

  switch (c.op) {
    case Op::Lt: return detail::as_number(lhs, c) < detail::as_number(*rhs, c);
    case Op::Le: return detail::as_number(lhs, c) <= detail::as_number(*rhs, c);
    case Op::Gt: return detail::as_number(lhs, c) > detail::as_number(*rhs, c);
    case Op::Ge: return detail::as_number(lhs, c) >= detail::as_number(*rhs, c);
    case Op::Eq:
      if (std::holds_alternative<StringList>(lhs) || lhs.index() != rhs->index())
        throw BindingError("binding error: " + c.text() + " compares incompatible values");
      return lhs == *rhs;
    case Op::ContainsAny: {
      if (!std::holds_alternative<StringList>(lhs))
        throw BindingError("binding error: " + c.text() + " needs a list-valued left side");
      const auto& l = std::get<StringList>(lhs);
      auto want = detail::as_set(*rhs, c);
      return std::any_of(want.begin(), want.end(),
                         [&](const std::string& w) { return std::find(l.begin(), l.end(), w) != l.end(); });
    }
    case Op::ContainsAll: {
      if (!std::holds_alternative<StringList>(lhs))
        throw BindingError("binding error: " + c.text() + " needs a list-valued left side");
      const auto& l = std::get<StringList>(lhs);
      auto want = detail::as_set(*rhs, c);
      return std::all_of(want.begin(), want.end(),
                         [&](const std::string& w) { return std::find(l.begin(), l.end(), w) != l.end(); });
    }
  }
  return false;
}

// ---------------------------------------------------------------- database

struct GeometryFamily {
  std::string id;
  GeometryType required_type = GeometryType::Plan;
  std::vector<Check> checks;
  friend bool operator==(const GeometryFamily&, const GeometryFamily&) = default;
};

struct TMC {
  std::string id;
  std::string cut_material;
  std::string cutting_material;
  IntervalMap constraints;  // subset of kConditionNames
  std::string lubrication;
  friend bool operator==(const TMC&, const TMC&) = default;
};

struct ExtendedCuttingConditions {
  std::string id;
  MfgType mfg_type = MfgType::EndManufacturing;
  Mode mode = Mode::Roughing;
  std::optional<Trajectory> trajectory_strategy;
  StringList allowed_tmcs;
  Priority priority = Priority::Default;
  friend bool operator==(const ExtendedCuttingConditions&, const ExtendedCuttingConditions&) = default;
};

struct Capabilities {
  std::vector<MfgType> mfg_types;
  std::vector<Mode> modes;
  StringList tmcs;
  friend bool operator==(const Capabilities&, const Capabilities&) = default;
};

struct CuttingSetType {
  std::string id;
  IntervalMap dimensions;  // kDimensionNames
  IntervalMap conditions;  // kConditionNames
  std::string cutting_material;
  Capabilities capabilities;
  friend bool operator==(const CuttingSetType&, const CuttingSetType&) = default;
};

struct CuttingSet {
  std::string id;
  double diameter = 0.0;
  double cutting_length = 0.0;
  double tool_length = 0.0;
  double end_radius = 0.0;
  std::string cutting_material;
  Capabilities capabilities;
  IntervalMap conditions;  // kConditionNames

  [[nodiscard]] double dimension(std::string_view name) const {
    if (name == "diameter") return diameter;
    if (name == "cutting_length") return cutting_length;
    if (name == "tool_length") return tool_length;
    return end_radius;
  }

  friend bool operator==(const CuttingSet&, const CuttingSet&) = default;
};

struct OSE {
  std::string id;
  std::string family;
  std::string config;
  std::string cutting_set_type;
  std::vector<Check> compliance_checks;
  friend bool operator==(const OSE&, const OSE&) = default;
};

struct OSEDatabase {
  std::vector<GeometryFamily> families;
  std::vector<ExtendedCuttingConditions> configs;
  std::vector<CuttingSetType> cutting_set_types;
  std::vector<TMC> tmcs;
  std::vector<OSE> oses;

  template <class T>
  static const T* find_in(const std::vector<T>& v, const std::string& id) {
    for (const auto& x : v)
      if (x.id == id) return &x;
    return nullptr;
  }
  [[nodiscard]] const GeometryFamily* family(const std::string& id) const { return find_in(families, id); }
  [[nodiscard]] const ExtendedCuttingConditions* config(const std::string& id) const { return find_in(configs, id); }
  [[nodiscard]] const CuttingSetType* cutting_set_type(const std::string& id) const {
    return find_in(cutting_set_types, id);
  }
  [[nodiscard]] const TMC* tmc(const std::string& id) const { return find_in(tmcs, id); }
  [[nodiscard]] const OSE* ose(const std::string& id) const { return find_in(oses, id); }

  friend bool operator==(const OSEDatabase&, const OSEDatabase&) = default;
};

template <class E>
StringList names(const std::vector<E>& values) {
  StringList out;
  for (auto v : values) out.emplace_back(to_string(v));
  return out;
}

/// Attribute values of a cutting set for check evaluation.
inline ValueMap tool_values(const CuttingSet& t) {
  return {{"diameter", t.diameter},
          {"cutting_length", t.cutting_length},
          {"tool_length", t.tool_length},
          {"end_radius", t.end_radius},
          {"cutting_material", t.cutting_material},
          {"mfg_types", names(t.capabilities.mfg_types)},
          {"modes", names(t.capabilities.modes)},
          {"tmcs", t.capabilities.tmcs}};
}

inline ValueMap config_values(const ExtendedCuttingConditions& c) {
  return {{"mfg_type", std::string(to_string(c.mfg_type))},
          {"mode", std::string(to_string(c.mode))},
          {"trajectory_strategy", std::string(c.trajectory_strategy ? to_string(*c.trajectory_strategy) : "")},
          {"allowed_tmcs", c.allowed_tmcs},
          {"priority", std::string(to_string(c.priority))}};
}

// ---------------------------------------------------------------- validation

struct DbFinding {
  std::string kind;  // dangling-reference, inverted-interval, ill-typed-check, duplicate-id, ...
  std::string subject;
  std::string message;

  friend bool operator==(const DbFinding&, const DbFinding&) = default;
  friend auto operator<=>(const DbFinding&, const DbFinding&) = default;
};

namespace detail {

inline std::optional<StringList> category_vocabulary(const AttributeRef& r) {
  auto strs = [](auto values) {
    StringList out;
    for (auto v : values) out.emplace_back(to_string(v));
    return out;
  };
  const auto& n = r.name;
  if (n == "geometry_type") return strs(kGeometryTypes);
  if (n == "openness") return StringList{"Open", "Closed"};
  if (n == "access_kind") return StringList{"SingleVector", "TwoOppositeVectors", "NVectors"};
  if (n == "potential_mfg_types" || n == "mfg_types" || n == "mfg_type") return strs(kMfgTypes);
  if (n == "modes" || n == "mode") return strs(kModes);
  if (n == "trajectory_strategy") return strs(kTrajectories);
  if (n == "priority") return strs(kPriorities);
  return std::nullopt;
}

inline void check_items(const AttributeRef& lhs, const StringList& items, const std::string& subject,
                        const std::string& text, const OSEDatabase& db, std::vector<DbFinding>& out) {
  auto vocab = category_vocabulary(lhs);
  for (const auto& it : items) {
    bool known = vocab ? std::find(vocab->begin(), vocab->end(), it) != vocab->end()
                       : (lhs.name == "tmcs" || lhs.name == "allowed_tmcs") ? db.tmc(it) != nullptr : true;
    if (!known) out.push_back({"ill-typed-check", subject, text + ": unknown value " + it});
  }
}

}  // namespace detail

/// Type errors of one check, with the namespaces it may reference.
inline void validate_check(const Check& c, const std::set<Namespace>& allowed, const std::string& subject,
                           const OSEDatabase& db, std::vector<DbFinding>& out) {
  const std::string text = c.text();
  auto bad = [&](const std::string& why) { out.push_back({"ill-typed-check", subject, text + ": " + why}); };
  std::vector<const AttributeSpec*> specs;
  for (const auto& r : c.refs()) {
    const auto* s = find_attribute(r);
    if (!s) {
      bad("unknown attribute " + r.key());
      return;
    }
    if (!allowed.count(r.ns)) {
      bad("namespace " + std::string(to_string(r.ns)) + " not allowed here");
      return;
    }
    specs.push_back(s);
  }
  const ValueKind lk = specs[0]->kind;
  const auto* ref = std::get_if<RefOperand>(&c.rhs);
  const auto* cst = std::get_if<ConstOperand>(&c.rhs);
  std::optional<ValueKind> rk;
  if (ref) rk = specs[1]->kind;
  if (cst) {
    if (std::holds_alternative<double>(cst->value)) rk = ValueKind::Number;
    else if (std::holds_alternative<bool>(cst->value)) rk = ValueKind::Bool;
    else if (std::holds_alternative<std::string>(cst->value)) rk = ValueKind::Category;
    else rk = ValueKind::List;
  }

  switch (c.op) {
    case Op::Lt:
    case Op::Le:
    case Op::Gt:
    case Op::Ge:
      if (lk != ValueKind::Number || rk != ValueKind::Number) bad("ordering needs numeric operands");
      return;
    case Op::Eq:
      if (lk == ValueKind::List) bad("eq is not defined on list attributes");
      else if (!rk) bad("eq needs a scalar right side");
      else if (*rk != lk) bad("eq compares different kinds");
      else if (cst && lk == ValueKind::Category)
        detail::check_items(c.lhs, {std::get<std::string>(cst->value)}, subject, text, db, out);
      return;
    case Op::ContainsAny:
    case Op::ContainsAll: {
      if (lk != ValueKind::List) {
        bad("containment needs a list-valued left side");
        return;
      }
      if (ref) {
        if (rk != ValueKind::List && rk != ValueKind::Category) bad("containment needs a value set");
        return;
      }
      const auto* any = std::get_if<AnyOf>(&c.rhs);
      const auto* all = std::get_if<AllOf>(&c.rhs);
      if (c.op == Op::ContainsAny && !any) bad("contains_any needs an any_of set");
      else if (c.op == Op::ContainsAll && !all) bad("contains_all needs an all_of set");
      else {
        const auto& items = any ? any->items : all->items;
        if (items.empty()) bad("empty value set");
        detail::check_items(c.lhs, items, subject, text, db, out);
      }
      return;
    }
  }
}

namespace detail {

inline void validate_intervals(const IntervalMap& m, std::span<const std::string_view> required,
                               const std::string& subject, const std::string& what, std::vector<DbFinding>& out,
                               bool all_required = true) {
  for (auto n : required) {
    auto it = m.find(std::string(n));
    if (it == m.end()) {
      if (all_required) out.push_back({"missing-field", subject, what + "." + std::string(n) + " missing"});
      continue;
    }
    if (!std::isfinite(it->second.min) || !std::isfinite(it->second.max))
      out.push_back({"inverted-interval", subject, what + "." + std::string(n) + " is not finite"});
    else if (!it->second.valid())
      out.push_back({"inverted-interval", subject, what + "." + std::string(n) + " has min > max"});
  }
  for (const auto& [k, v] : m)
    if (std::find(required.begin(), required.end(), k) == required.end())
      out.push_back({"unknown-field", subject, what + "." + k + " is not a known parameter"});
}

template <class T>
void duplicate_ids(const std::vector<T>& v, const std::string& what, std::vector<DbFinding>& out) {
  std::set<std::string> seen;
  for (const auto& x : v) {
    if (x.id.empty()) out.push_back({"missing-field", what, "empty id"});
    if (!seen.insert(x.id).second) out.push_back({"duplicate-id", x.id, "duplicate " + what + " id"});
  }
}

inline void validate_capabilities(const Capabilities& c, const std::string& subject, const OSEDatabase* db,
                                  std::vector<DbFinding>& out) {
  if (c.mfg_types.empty()) out.push_back({"empty-list", subject, "mfg_types is empty"});
  if (c.modes.empty()) out.push_back({"empty-list", subject, "modes is empty"});
  if (c.tmcs.empty()) out.push_back({"empty-list", subject, "tmcs is empty"});
  if (db)
    for (const auto& t : c.tmcs)
      if (!db->tmc(t)) out.push_back({"dangling-reference", subject, "unknown TMC " + t});
}

}  // namespace detail

/// Dangling references, empty or inverted intervals and ill-typed checks.
inline std::vector<DbFinding> validate_db(const OSEDatabase& db) {
  std::vector<DbFinding> out;
  detail::duplicate_ids(db.families, "family", out);
  detail::duplicate_ids(db.configs, "config", out);
  detail::duplicate_ids(db.cutting_set_types, "cutting_set_type", out);
  detail::duplicate_ids(db.tmcs, "tmc", out);
  detail::duplicate_ids(db.oses, "ose", out);

  for (const auto& f : db.families)
    for (const auto& c : f.checks) validate_check(c, {Namespace::Face}, f.id, db, out);
  for (const auto& t : db.tmcs) detail::validate_intervals(t.constraints, kConditionNames, t.id, "constraints", out, false);
  for (const auto& c : db.configs) {
    if (c.allowed_tmcs.empty()) out.push_back({"empty-list", c.id, "allowed_tmcs is empty"});
    for (const auto& t : c.allowed_tmcs)
      if (!db.tmc(t)) out.push_back({"dangling-reference", c.id, "unknown TMC " + t});
  }
  for (const auto& t : db.cutting_set_types) {
    detail::validate_intervals(t.dimensions, kDimensionNames, t.id, "dimensions", out);
    detail::validate_intervals(t.conditions, kConditionNames, t.id, "conditions", out);
    detail::validate_capabilities(t.capabilities, t.id, &db, out);
  }
  for (const auto& o : db.oses) {
    if (!db.family(o.family)) out.push_back({"dangling-reference", o.id, "unknown family " + o.family});
    if (!db.config(o.config)) out.push_back({"dangling-reference", o.id, "unknown config " + o.config});
    if (!db.cutting_set_type(o.cutting_set_type))
      out.push_back({"dangling-reference", o.id, "unknown cutting_set_type " + o.cutting_set_type});
    if (o.compliance_checks.empty()) out.push_back({"empty-list", o.id, "compliance_checks is empty"});
    for (const auto& c : o.compliance_checks) validate_check(c, {Namespace::Face, Namespace::Tool}, o.id, db, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Invariant violations of a tool list. TMC references are checked when a
/// database is given.
inline std::vector<DbFinding> validate_tools(const std::vector<CuttingSet>& tools, const OSEDatabase* db = nullptr) {
  std::vector<DbFinding> out;
  detail::duplicate_ids(tools, "cutting_set", out);
  for (const auto& t : tools) {
    for (auto n : kDimensionNames) {
      double v = t.dimension(n);
      if (!(v > 0.0) || !std::isfinite(v))
        out.push_back({"invalid-value", t.id, std::string(n) + " must be positive"});
    }
    if (t.cutting_length > t.tool_length)
      out.push_back({"invalid-value", t.id, "cutting_length exceeds tool_length"});
    detail::validate_intervals(t.conditions, kConditionNames, t.id, "conditions", out);
    detail::validate_capabilities(t.capabilities, t.id, db, out);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- tool sorting

namespace detail {

template <class T>
bool intersects(const std::vector<T>& a, const std::vector<T>& b) {
  return std::any_of(a.begin(), a.end(), [&](const T& x) { return std::find(b.begin(), b.end(), x) != b.end(); });
}

}  // namespace detail

inline bool tool_in_type(const CuttingSet& tool, const CuttingSetType& type) {
  for (auto n : kDimensionNames) {
    auto it = type.dimensions.find(std::string(n));
    if (it == type.dimensions.end() || !it->second.contains(tool.dimension(n))) return false;
  }
  return tool.cutting_material == type.cutting_material &&
         detail::intersects(tool.capabilities.mfg_types, type.capabilities.mfg_types) &&
         detail::intersects(tool.capabilities.modes, type.capabilities.modes) &&
         detail::intersects(tool.capabilities.tmcs, type.capabilities.tmcs);
}

/// Cutting-set types the tool belongs to, in database order. A tool may
/// belong to several types; an empty result means the tool is unsorted.
inline StringList classify_tool(const CuttingSet& tool, const OSEDatabase& db) {
  StringList out;
  for (const auto& t : db.cutting_set_types)
    if (tool_in_type(tool, t)) out.push_back(t.id);
  return out;
}

// ---------------------------------------------------------------- audit

/// Finite sample of attribute space. Each attribute maps to the values the
/// audit enumerates for it.
struct AuditGrid {
  std::map<std::string, std::vector<Value>> values;  // key "ns.name"

  [[nodiscard]] const std::vector<Value>& at(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw Error("audit grid has no values for " + key);
    return it->second;
  }
};

namespace detail {

struct UnionFind {
  std::map<std::string, std::string> parent;
  std::string find(const std::string& x) {
    auto it = parent.find(x);
    if (it == parent.end()) {
      parent[x] = x;
      return x;
    }
    if (it->second == x) return x;
    std::string r = find(it->second);
    parent[x] = r;
    return r;
  }
  void unite(const std::string& a, const std::string& b) {
    auto ra = find(a), rb = find(b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
};

inline std::vector<const Check*> all_checks(const OSEDatabase& db) {
  std::vector<const Check*> out;
  for (const auto& f : db.families)
    for (const auto& c : f.checks) out.push_back(&c);
  for (const auto& o : db.oses)
    for (const auto& c : o.compliance_checks) out.push_back(&c);
  return out;
}

// k points strictly inside (a, b)
inline void interior_points(double a, double b, int k, std::vector<double>& out) {
  for (int i = 1; i <= k; ++i) out.push_back(a + (b - a) * double(i) / double(k + 1));
}

}  // namespace detail

/// Default audit grid.
///
/// Numeric attributes compared with each other share one class; each class
/// takes the sorted constants and cutting-set-type bounds of its members as
/// breakpoints, plus k points inside every gap and k points beyond each end,
/// k being the class size. This realises every ordering pattern that threshold
/// and pairwise comparisons can distinguish. min_fillet_radius also gets
/// Unbounded. Categories enumerate their vocabulary plus an unknown value,
/// lists enumerate every subset of the items the database mentions.
inline AuditGrid default_audit_grid(const OSEDatabase& db) {
  AuditGrid grid;
  detail::UnionFind uf;
  std::map<std::string, std::set<double>> constants;
  std::map<std::string, std::set<std::string>> items;

  for (const auto& a : kVocabulary) uf.find(AttributeRef{a.ns, std::string(a.name)}.key());
  for (const auto* c : detail::all_checks(db)) {
    const auto lk = c->lhs.key();
    if (auto r = std::get_if<RefOperand>(&c->rhs)) {
      uf.unite(lk, r->ref.key());
    } else if (auto k = std::get_if<ConstOperand>(&c->rhs)) {
      if (auto d = std::get_if<double>(&k->value); d && std::isfinite(*d)) constants[lk].insert(*d);
      if (auto s = std::get_if<std::string>(&k->value)) items[lk].insert(*s);
    } else if (auto a = std::get_if<AnyOf>(&c->rhs)) {
      items[lk].insert(a->items.begin(), a->items.end());
    } else {
      const auto& l = std::get<AllOf>(c->rhs).items;
      items[lk].insert(l.begin(), l.end());
    }
  }
  for (const auto& t : db.cutting_set_types) {
    for (const auto& [n, iv] : t.dimensions) {
      constants["tool." + n].insert(iv.min);
      constants["tool." + n].insert(iv.max);
    }
    items["tool.cutting_material"].insert(t.cutting_material);
    for (const auto& v : names(t.capabilities.mfg_types)) items["tool.mfg_types"].insert(v);
    for (const auto& v : names(t.capabilities.modes)) items["tool.modes"].insert(v);
    items["tool.tmcs"].insert(t.capabilities.tmcs.begin(), t.capabilities.tmcs.end());
  }

  std::map<std::string, std::vector<std::string>> classes;
  for (const auto& a : kVocabulary) {
    auto key = AttributeRef{a.ns, std::string(a.name)}.key();
    classes[uf.find(key)].push_back(key);
  }

  for (const auto& a : kVocabulary) {
    const AttributeRef r{a.ns, std::string(a.name)};
    const auto key = r.key();
    auto& vals = grid.values[key];
    switch (a.kind) {
      case ValueKind::Number: {
        const auto& members = classes[uf.find(key)];
        std::set<double> bp;
        for (const auto& m : members)
          if (auto it = constants.find(m); it != constants.end()) bp.insert(it->second.begin(), it->second.end());
        const int k = static_cast<int>(members.size());
        std::vector<double> pts;
        if (bp.empty()) {
          for (int i = 1; i <= k; ++i) pts.push_back(double(i));
        } else {
          std::vector<double> b(bp.begin(), bp.end());
          const double span = std::max(1.0, b.back() - b.front());
          detail::interior_points(b.front() - span, b.front(), k, pts);
          for (std::size_t i = 0; i < b.size(); ++i) {
            pts.push_back(b[i]);
            if (i + 1 < b.size()) detail::interior_points(b[i], b[i + 1], k, pts);
          }
          detail::interior_points(b.back(), b.back() + span, k, pts);
        }
        if (key == "face.min_fillet_radius") pts.push_back(std::numeric_limits<double>::infinity());
        for (double p : pts) vals.emplace_back(p);
        break;
      }
      case ValueKind::Bool:
        vals = {false, true};
        break;
      case ValueKind::Category: {
        std::set<std::string> s = items[key];
        if (auto v = detail::category_vocabulary(r)) s.insert(v->begin(), v->end());
        s.insert("?");
        for (const auto& x : s) vals.emplace_back(x);
        break;
      }
      case ValueKind::List: {
        std::vector<std::string> it(items[key].begin(), items[key].end());
        if (it.size() > 12) throw Error("audit grid: too many distinct items for " + key);
        for (std::size_t mask = 0; mask < (std::size_t{1} << it.size()); ++mask) {
          StringList sub;
          for (std::size_t i = 0; i < it.size(); ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(it[i]);
          vals.emplace_back(sub);
        }
        break;
      }
    }
  }
  return grid;
}

/// One predicate over a handful of attributes.
struct GridPredicate {
  std::vector<std::string> keys;
  std::function<bool(const ValueBindings&)> test;
};

namespace detail {

inline GridPredicate check_predicate(const Check& c) {
  GridPredicate p;
  for (const auto& r : c.refs()) p.keys.push_back(r.key());
  p.test = [c](const ValueBindings& b) { return eval_check(c, b); };
  return p;
}

/// Connected components of attributes linked by predicates.
inline std::vector<std::vector<std::string>> components(const std::vector<std::vector<GridPredicate>>& groups) {
  UnionFind uf;
  for (const auto& g : groups)
    for (const auto& p : g)
      for (const auto& k : p.keys) uf.unite(p.keys.front(), k);
  std::map<std::string, std::vector<std::string>> comps;
  for (const auto& [k, _] : uf.parent) comps[uf.find(k)].push_back(k);
  std::vector<std::vector<std::string>> out;
  for (auto& [_, v] : comps) {
    std::sort(v.begin(), v.end());
    out.push_back(v);
  }
  return out;
}

/// Enumerates one component and returns, per predicate group, the indices
/// of accepted grid points.
inline std::vector<std::vector<std::size_t>> accepted_points(const std::vector<std::string>& comp,
                                                             const std::vector<std::vector<GridPredicate>>& groups,
                                                             const AuditGrid& grid) {
  std::vector<const std::vector<Value>*> axes;
  std::size_t total = 1;
  for (const auto& k : comp) {
    axes.push_back(&grid.at(k));
    total *= axes.back()->size();
    if (total > 50'000'000) throw Error("audit grid too large");
  }
  std::vector<std::vector<const GridPredicate*>> local(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (const auto& p : groups[g])
      if (std::binary_search(comp.begin(), comp.end(), p.keys.front())) local[g].push_back(&p);

  ValueMap face, tool, config;
  ValueBindings b{&face, &tool, &config};
  std::vector<std::vector<std::size_t>> out(groups.size());
  std::vector<std::size_t> idx(comp.size(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::size_t rem = n;
    for (std::size_t i = comp.size(); i-- > 0;) {
      idx[i] = rem % axes[i]->size();
      rem /= axes[i]->size();
      auto ref = *parse_ref(comp[i]);
      auto& m = ref.ns == Namespace::Face ? face : ref.ns == Namespace::Tool ? tool : config;
      m[ref.name] = (*axes[i])[idx[i]];
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (std::all_of(local[g].begin(), local[g].end(), [&](const GridPredicate* p) { return p->test(b); }))
        out[g].push_back(n);
  }
  return out;
}

}  // namespace detail

/// Predicates an OSE imposes when tools are restricted to its cutting-set
/// type: interval membership, equal material and overlapping capabilities,
/// applied to the tool attributes its checks mention.
inline std::vector<GridPredicate> type_predicates(const OSE& ose, const OSEDatabase& db) {
  std::vector<GridPredicate> out;
  const auto* type = db.cutting_set_type(ose.cutting_set_type);
  if (!type) return out;
  std::set<std::string> mentioned;
  for (const auto& c : ose.compliance_checks)
    for (const auto& r : c.refs())
      if (r.ns == Namespace::Tool) mentioned.insert(r.name);
  for (const auto& name : mentioned) {
    GridPredicate p;
    p.keys = {"tool." + name};
    if (auto it = type->dimensions.find(name); it != type->dimensions.end()) {
      Interval iv = it->second;
      p.test = [name, iv](const ValueBindings& b) {
        return iv.contains(std::get<double>(b.resolve({Namespace::Tool, name})));
      };
    } else if (name == "cutting_material") {
      std::string m = type->cutting_material;
      p.test = [m](const ValueBindings& b) {
        return std::get<std::string>(b.resolve({Namespace::Tool, "cutting_material"})) == m;
      };
    } else {
      StringList allowed = name == "mfg_types" ? names(type->capabilities.mfg_types)
                           : name == "modes"   ? names(type->capabilities.modes)
                                               : type->capabilities.tmcs;
      p.test = [name, allowed](const ValueBindings& b) {
        return detail::intersects(std::get<StringList>(b.resolve({Namespace::Tool, name})), allowed);
      };
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<GridPredicate> family_predicates(const OSE& ose, const OSEDatabase& db) {
  std::vector<GridPredicate> out;
  const auto* fam = db.family(ose.family);
  if (!fam) return out;
  GridPredicate t;
  t.keys = {"face.geometry_type"};
  std::string want(to_string(fam->required_type));
  t.test = [want](const ValueBindings& b) {
    return std::get<std::string>(b.resolve({Namespace::Face, "geometry_type"})) == want;
  };
  out.push_back(std::move(t));
  for (const auto& c : fam->checks) out.push_back(detail::check_predicate(c));
  return out;
}

enum class AuditKind { Shadowing, Duplicate, Unsatisfiable };

inline std::string_view to_string(AuditKind k) {
  switch (k) {
    case AuditKind::Shadowing: return "shadowing";
    case AuditKind::Duplicate: return "duplicate";
    case AuditKind::Unsatisfiable: return "unsatisfiable";
  }
  return "";
}

struct AuditFinding {
  AuditKind kind = AuditKind::Shadowing;
  StringList oses;  // sorted
  std::string detail;

  friend bool operator==(const AuditFinding&, const AuditFinding&) = default;
};

struct AuditReport {
  std::vector<AuditFinding> shadowing;
  std::vector<AuditFinding> duplicates;
  std::vector<AuditFinding> unsatisfiable;

  [[nodiscard]] std::size_t size() const { return shadowing.size() + duplicates.size() + unsatisfiable.size(); }
  [[nodiscard]] bool empty() const { return size() == 0; }
};

namespace detail {

inline std::vector<std::string> sorted_check_texts(const std::vector<Check>& cs) {
  std::vector<std::string> t;
  for (const auto& c : cs) t.push_back(c.text());
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace detail

/// True when some grid point passes every check of the OSE's family and
/// compliance list while honouring its cutting-set type.
inline bool ose_satisfiable(const OSE& o, const OSEDatabase& db, const AuditGrid& grid) {
  std::vector<GridPredicate> preds = family_predicates(o, db);
  for (const auto& c : o.compliance_checks) preds.push_back(detail::check_predicate(c));
  for (auto& p : type_predicates(o, db)) preds.push_back(std::move(p));
  std::vector<std::vector<GridPredicate>> groups{preds};
  for (const auto& comp : detail::components(groups))
    if (detail::accepted_points(comp, groups, grid)[0].empty()) return false;
  return true;
}

/// True when the compliance checks of two OSEs accept the same non-empty
/// subset of the grid.
inline bool same_acceptance(const OSE& a, const OSE& b, const AuditGrid& grid) {
  std::vector<std::vector<GridPredicate>> groups(2);
  for (const auto& c : a.compliance_checks) groups[0].push_back(detail::check_predicate(c));
  for (const auto& c : b.compliance_checks) groups[1].push_back(detail::check_predicate(c));
  for (const auto& comp : detail::components(groups)) {
    auto acc = detail::accepted_points(comp, groups, grid);
    if (acc[0].empty() || acc[1].empty() || acc[0] != acc[1]) return false;
  }
  return true;
}

/// Shadowing, duplicate and unsatisfiable OSEs over the audit grid.
inline AuditReport audit_database(const OSEDatabase& db, const AuditGrid& grid) {
  AuditReport rep;
  for (std::size_t i = 0; i < db.oses.size(); ++i) {
    const auto& a = db.oses[i];
    for (std::size_t j = i + 1; j < db.oses.size(); ++j) {
      const auto& b = db.oses[j];
      if (a.id == b.id || a.family != b.family || a.config != b.config) continue;
      StringList ids{a.id, b.id};
      std::sort(ids.begin(), ids.end());
      if (same_acceptance(a, b, grid))
        rep.shadowing.push_back({AuditKind::Shadowing, ids,
                                 "same family " + a.family + " and config " + a.config + " accept identical points"});
      if (a.cutting_set_type == b.cutting_set_type &&
          detail::sorted_check_texts(a.compliance_checks) == detail::sorted_check_texts(b.compliance_checks))
        rep.duplicates.push_back({AuditKind::Duplicate, ids, "structurally identical"});
    }
    if (!ose_satisfiable(a, db, grid))
      rep.unsatisfiable.push_back(
          {AuditKind::Unsatisfiable, {a.id}, "no grid point passes its checks within " + a.cutting_set_type});
  }
  auto by_ids = [](const AuditFinding& x, const AuditFinding& y) { return x.oses < y.oses; };
  std::sort(rep.shadowing.begin(), rep.shadowing.end(), by_ids);
  std::sort(rep.duplicates.begin(), rep.duplicates.end(), by_ids);
  std::sort(rep.unsatisfiable.begin(), rep.unsatisfiable.end(), by_ids);
  return rep;
}

inline AuditReport audit_database(const OSEDatabase& db) { return audit_database(db, default_audit_grid(db)); }

// ---------------------------------------------------------------- what-if

enum class VaryField { MfgType, Mode, Tmc };

inline std::string_view to_string(VaryField f) {
  switch (f) {
    case VaryField::MfgType: return "mfg_type";
    case VaryField::Mode: return "mode";
    case VaryField::Tmc: return "tmc";
  }
  return "";
}

inline std::optional<VaryField> vary_field_from_string(std::string_view s) {
  return enum_from_string(s, std::array{VaryField::MfgType, VaryField::Mode, VaryField::Tmc});
}

struct WhatIfVariant {
  VaryField field = VaryField::Mode;
  std::string value;
  bool covered = false;
  StringList covering_oses;

  friend bool operator==(const WhatIfVariant&, const WhatIfVariant&) = default;
};

/// Single-field substitutions of the OSE's configuration. A variant is
/// covered when an OSE of the same family has a configuration with the
/// variant's manufacturing type and mode; for a TMC variant that
/// configuration must also allow the substituted TMC.
inline std::vector<WhatIfVariant> what_if_expand(const OSE& ose, const OSEDatabase& db,
                                                 const std::vector<VaryField>& vary) {
  const auto* base = db.config(ose.config);
  if (!base) throw Error("OSE " + ose.id + " references unknown config " + ose.config);
  std::vector<WhatIfVariant> out;
  auto covering = [&](auto&& pred) {
    StringList ids;
    for (const auto& o : db.oses) {
      if (o.family != ose.family) continue;
      const auto* c = db.config(o.config);
      if (c && pred(*c)) ids.push_back(o.id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  };
  auto push = [&](VaryField f, std::string value, StringList ids) {
    bool cov = !ids.empty();
    out.push_back({f, std::move(value), cov, std::move(ids)});
  };
  std::set<VaryField> fields(vary.begin(), vary.end());
  for (auto f : fields) {
    switch (f) {
      case VaryField::MfgType:
        for (auto t : kMfgTypes) {
          if (t == base->mfg_type) continue;
          push(f, std::string(to_string(t)), covering([&](const ExtendedCuttingConditions& c) {
                 return c.mfg_type == t && c.mode == base->mode;
               }));
        }
        break;
      case VaryField::Mode:
        for (auto m : kModes) {
          if (m == base->mode) continue;
          push(f, std::string(to_string(m)), covering([&](const ExtendedCuttingConditions& c) {
                 return c.mode == m && c.mfg_type == base->mfg_type;
               }));
        }
        break;
      case VaryField::Tmc:
        for (const auto& t : db.tmcs) {
          if (std::find(base->allowed_tmcs.begin(), base->allowed_tmcs.end(), t.id) != base->allowed_tmcs.end())
            continue;
          push(f, t.id, covering([&](const ExtendedCuttingConditions& c) {
                 return c.mfg_type == base->mfg_type && c.mode == base->mode &&
                        std::find(c.allowed_tmcs.begin(), c.allowed_tmcs.end(), t.id) != c.allowed_tmcs.end();
               }));
        }
        break;
    }
  }
  return out;
}

}  // namespace capp
