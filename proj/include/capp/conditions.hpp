#pragma once

#include <map>
#include <string>
#include <vector>

#include "capp/ose_db.hpp"

namespace capp {

/// Raised when a cutting parameter has no value allowed by both the tool
/// range and the TMC constraint.
class InfeasibleConditions : public Error {
public:
  InfeasibleConditions(const std::string& parameter, const std::string& why)
      : Error("infeasible conditions: " + parameter + " " + why), parameter_(parameter) {}
  [[nodiscard]] const std::string& parameter() const { return parameter_; }

private:
  std::string parameter_;
};

struct ResolvedConditions {
  std::map<std::string, double> values;      // kConditionNames
  std::map<std::string, Interval> sources;   // tool range ∩ TMC constraint
  std::vector<std::string> warnings;

  friend bool operator==(const ResolvedConditions&, const ResolvedConditions&) = default;
};

/// Feasible interval of one parameter; TMCs that do not constrain it leave
/// the tool range as is.
inline std::optional<Interval> feasible_interval(const CuttingSet& tool, const TMC* tmc, const std::string& name) {
  auto it = tool.conditions.find(name);
  if (it == tool.conditions.end()) return std::nullopt;
  if (!tmc) return it->second;
  auto c = tmc->constraints.find(name);
  if (c == tmc->constraints.end()) return it->second;
  return it->second.intersect(c->second);
}

/// Qmax takes the upper bound of every feasible interval, Default the midpoint.
inline ResolvedConditions optimize_conditions(Priority priority, const CuttingSet& tool, const TMC* tmc) {
  ResolvedConditions out;
  for (auto n : kConditionNames) {
    const std::string name(n);
    if (!tool.conditions.count(name)) throw InfeasibleConditions(name, "has no tool range");
    auto iv = feasible_interval(tool, tmc, name);
    if (!iv) throw InfeasibleConditions(name, "has an empty feasible interval");
    out.sources[name] = *iv;
    out.values[name] = priority == Priority::Qmax ? iv->max : iv->mid();
  }
  return out;
}

}  // namespace capp
