#pragma once

#include "gkm/sim.hpp"

#include <json.hpp>

#include <string>

namespace gkm {

using Json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

/// Scenario documents: a JSON object with "version": 1. Unknown fields are
/// rejected and "seed" is mandatory. Errors name the line or the field.
ScenarioConfig parse_scenario(const std::string& text);
Json scenario_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const Json& j);

Json cost_to_json(const CostReport& r);
CostReport cost_from_json(const Json& j);
Json audit_to_json(const AuditReport& r);
AuditReport audit_from_json(const Json& j);
/// One record per message: seq, kind, encryption and target nodes, payload
/// renderings, recipients and any rename fields.
Json trace_to_json(const Trace& t, unsigned degree);

std::string render_cost_text(const CostReport& r);
std::string render_audit_text(const AuditReport& r);
/// Prints node labels in both K_{level,index} and integer-ID form.
std::string render_trace_text(const Trace& t, unsigned degree);

} // namespace gkm
