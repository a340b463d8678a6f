#pragma once

// Synthesis statistics and the plan documentation in JSON and text.

#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "capp/json_io.hpp"
#include "capp/setup_plan.hpp"

namespace capp {

// ---------------------------------------------------------------- statistics

struct SynthesisRow {
  GeometryType type = GeometryType::Plan;
  long count = 0;
  long hundredths = 0;  // percentage x 100

  [[nodiscard]] std::string percent() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld.%02ld", hundredths / 100, hundredths % 100);
    return buf;
  }
  [[nodiscard]] double value() const { return double(hundredths) / 100.0; }

  friend bool operator==(const SynthesisRow&, const SynthesisRow&) = default;
};

struct SynthesisTable {
  std::vector<SynthesisRow> rows;  // one per geometry type, in type order
  long total = 0;

  [[nodiscard]] const SynthesisRow& row(GeometryType t) const {
    for (const auto& r : rows)
      if (r.type == t) return r;
    throw Error("no synthesis row for " + std::string(to_string(t)));
  }

  friend bool operator==(const SynthesisTable&, const SynthesisTable&) = default;
};

/// Percentage 100 * count / total, rounded half-up to two decimals in
/// integer arithmetic.
inline long percent_hundredths(long count, long total) { return (2 * count * 10000 + total) / (2 * total); }

inline SynthesisTable report_statistics(const std::map<GeometryType, long>& counts, long total) {
  if (total <= 0) throw Error("empty population");
  long sum = 0;
  for (const auto& [t, n] : counts) {
    if (n < 0) throw Error("negative count for " + std::string(to_string(t)));
    sum += n;
  }
  if (sum != total)
    throw Error("counts sum to " + std::to_string(sum) + ", not the stated total " + std::to_string(total));
  SynthesisTable out;
  out.total = total;
  for (auto t : kGeometryTypes) {
    auto it = counts.find(t);
    long n = it == counts.end() ? 0 : it->second;
    out.rows.push_back({t, n, percent_hundredths(n, total)});
  }
  return out;
}

inline SynthesisTable report_statistics(const std::map<GeometryType, int>& counts) {
  std::map<GeometryType, long> c;
  long total = 0;
  for (const auto& [t, n] : counts) {
    c[t] = n;
    total += n;
  }
  return report_statistics(c, total);
}

inline json to_json(const SynthesisTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"type", std::string(to_string(r.type))}, {"count", r.count}, {"percent", r.percent()}});
  return {{"rows", rows}, {"total", t.total}};
}

inline std::string render_text(const SynthesisTable& t) {
  std::ostringstream os;
  char buf[96];
  std::snprintf(buf, sizeof buf, "%-18s %8s %9s\n", "Type", "Faces", "Percent");
  os << buf;
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%-18s %8ld %9s\n", std::string(to_string(r.type)).c_str(), r.count,
                  r.percent().c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-18s %8ld %9s\n", "Total", t.total, "100.00");
  os << buf;
  return os.str();
}

// ---------------------------------------------------------------- documentation

struct PlanDocument {
  json data;
  std::string text;
};

namespace detail {

inline std::string num_text(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline std::string direction_text(const Vec3& d) {
  return "(" + num_text(d.x() == 0.0 ? 0.0 : d.x()) + ", " + num_text(d.y() == 0.0 ? 0.0 : d.y()) + ", " +
         num_text(d.z() == 0.0 ? 0.0 : d.z()) + ")";
}

inline std::string joined(const StringList& items, const char* sep = " ") {
  std::string s;
  for (const auto& i : items) s += (s.empty() ? "" : sep) + i;
  return s;
}

}  // namespace detail

/// The plan as a JSON document and as readable text. Both list the same
/// setups, sequences and faces.
inline PlanDocument generate_documentation(const ProcessPlan& plan, const OSEDatabase& db,
                                           const std::vector<CuttingSet>& tools) {
  PlanDocument doc;
  doc.data = to_json(plan);

  std::ostringstream os;
  os << "Process plan for part " << plan.part_id << "\n";
  if (plan.setups.empty()) os << "\nNo setups.\n";
  for (const auto& s : plan.setups) {
    os << "\nSetup " << s.id << "  direction " << detail::direction_text(s.direction) << "\n";
    os << "  faces: " << detail::joined(s.faces) << "\n";
    for (const auto& q : s.sequences) {
      os << "\n  Sequence " << q.id << "\n";
      os << "    faces: " << detail::joined(q.faces) << "\n";
      os << "    OSE: " << (q.ose.empty() ? "-" : q.ose) << "  cutting set: " << q.cutting_set
         << "  config: " << (q.config.empty() ? "-" : q.config) << "  TMC: " << (q.tmc.empty() ? "-" : q.tmc)
         << "\n";
      if (const auto* t = OSEDatabase::find_in(tools, q.cutting_set))
        os << "    tool: diameter " << detail::num_text(t->diameter) << ", cutting length "
           << detail::num_text(t->cutting_length) << ", tool length " << detail::num_text(t->tool_length)
           << ", end radius " << detail::num_text(t->end_radius) << ", " << t->cutting_material << "\n";
      os << "    type: " << (q.mfg_type ? std::string(to_string(*q.mfg_type)) : "-")
         << "  mode: " << (q.mode ? std::string(to_string(*q.mode)) : "-")
         << "  trajectory strategy: " << (q.trajectory_strategy ? std::string(to_string(*q.trajectory_strategy)) : "-")
         << "  priority: " << to_string(q.priority) << "  origin: " << to_string(q.origin) << "\n";
      if (const auto* tmc = db.tmc(q.tmc))
        os << "    TMC: " << tmc->cut_material << " / " << tmc->cutting_material << ", " << tmc->lubrication << "\n";
      os << "    conditions:\n";
      for (const auto& [name, v] : q.conditions.values) {
        os << "      " << name << " = " << detail::num_text(v);
        auto it = q.conditions.sources.find(name);
        if (it != q.conditions.sources.end())
          os << "  [" << detail::num_text(it->second.min) << ", " << detail::num_text(it->second.max) << "]";
        os << "\n";
      }
      for (const auto& w : q.conditions.warnings) os << "      warning: " << w << "\n";
      os << "    justification:\n";
      for (const auto& ft : q.traces) {
        os << "      " << ft.face << " via " << ft.candidate << "\n";
        for (const auto& e : ft.trace) os << "        [" << (e.passed ? "pass" : "FAIL") << "] " << e.check << "\n";
      }
    }
  }
  os << "\nUnmatched faces\n";
  if (plan.unmatched.empty()) os << "  none\n";
  for (const auto& u : plan.unmatched) os << "  " << u.face << ": " << u.reason << "\n";
  os << "\nInaccessible faces\n";
  if (plan.inaccessible.empty()) os << "  none\n";
  for (const auto& f : plan.inaccessible) os << "  " << f << "\n";
  if (!plan.tensions.empty()) os << "\nDirection/candidate tension\n  " << detail::joined(plan.tensions) << "\n";
  if (!plan.notices.empty()) {
    os << "\nNotices\n";
    for (const auto& n : plan.notices) os << "  " << n << "\n";
  }
  doc.text = os.str();
  return doc;
}

}  // namespace capp
