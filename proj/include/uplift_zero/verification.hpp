#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "uplift_zero/model.hpp"

namespace uplift_zero {

/// One checked condition. `lhs`/`rhs` are the two sides of the compared
/// relation at the witness (or the extremal values found).
struct ConditionResult {
  std::string id;
  std::string unit_id;
  bool passed = true;
  bool informational = false;  // never fails the report
  double lhs = 0.0;
  double rhs = 0.0;
  std::optional<UnitSchedule> witness;
  std::string note;
};

struct VerificationReport {
  std::vector<ConditionResult> conditions;
  std::vector<std::pair<std::string, double>> metrics;

  /// All non-informational conditions passed.
  bool passed() const;

  /// First matching condition, or nullptr. Empty unit_id matches any.
  const ConditionResult* find(const std::string& id, const std::string& unit_id = "") const;

  /// All matching conditions passed (true when none exist).
  bool passed(const std::string& id) const;

  std::optional<double> metric(const std::string& name) const;

  ConditionResult& add(ConditionResult c);
  void add_metric(std::string name, double value);
  void merge(const VerificationReport& other);
};

nlohmann::json report_to_json(const VerificationReport& report);

}  // namespace uplift_zero
