#include "uplift_zero/verification.hpp"

#include "uplift_zero/io.hpp"

namespace uplift_zero {

bool VerificationReport::passed() const {
  for (const auto& c : conditions) {
    if (!c.informational && !c.passed) return false;
  }
  return true;
}

const ConditionResult* VerificationReport::find(const std::string& id, const std::string& unit_id) const {
  for (const auto& c : conditions) {
    if (c.id == id && (unit_id.empty() || c.unit_id == unit_id)) return &c;
  }
  return nullptr;
}

bool VerificationReport::passed(const std::string& id) const {
  for (const auto& c : conditions) {
    if (c.id == id && !c.passed) return false;
  }
  return true;
}

std::optional<double> VerificationReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics) {
    if (k == name) return v;
  }
  return std::nullopt;
}

ConditionResult& VerificationReport::add(ConditionResult c) {
  conditions.push_back(std::move(c));
  return conditions.back();
}

void VerificationReport::add_metric(std::string name, double value) { metrics.emplace_back(std::move(name), value); }

void VerificationReport::merge(const VerificationReport& other) {
  conditions.insert(conditions.end(), other.conditions.begin(), other.conditions.end());
  metrics.insert(metrics.end(), other.metrics.begin(), other.metrics.end());
}

nlohmann::json report_to_json(const VerificationReport& report) {
  auto conds = nlohmann::json::array();
  for (const auto& c : report.conditions) {
    nlohmann::json j{{"condition", c.id}, {"pass", c.passed}, {"lhs", c.lhs}, {"rhs", c.rhs}};
    if (!c.unit_id.empty()) j["unit_id"] = c.unit_id;
    if (c.informational) j["informational"] = true;
    j["witness"] = c.witness ? unit_schedule_to_json(*c.witness) : nlohmann::json(nullptr);
    if (!c.note.empty()) j["note"] = c.note;
    conds.push_back(std::move(j));
  }
  nlohmann::json out{{"pass", report.passed()}, {"conditions", conds}};
  if (!report.metrics.empty()) {
    nlohmann::json m = nlohmann::json::object();
    for (const auto& [k, v] : report.metrics) m[k] = v;
    out["metrics"] = std::move(m);
  }
  return out;
}

}  // namespace uplift_zero
