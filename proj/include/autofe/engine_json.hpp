#pragma once

// JSON forms of engine records, shared by the session directory and the
// review API.

#include "autofe/engine.hpp"

#include <json.hpp>

namespace autofe::engine {

using Json = nlohmann::ordered_json;

Json metrics_json(const models::EvalMetrics& m);
models::EvalMetrics metrics_from_json(const Json& j);

Json usage_json(const llm::UsageRecord& u);
llm::UsageRecord usage_from_json(const Json& j);

Json outcome_json(const EvalOutcome& o);
EvalOutcome outcome_from_json(const Json& j);

Json record_json(const IterationRecord& r);
IterationRecord record_from_json(const Json& j);

/// Everything that determines a replay; no paths to the output directory
/// and no secrets.
Json config_json(const SessionConfig& c);
SessionConfig config_from_json(const Json& j);

Json baseline_json(const Session& s);
Json report_json(const Session& s);
std::string report_csv(const Session& s);

/// Field names holding wall-clock measurements.
const std::vector<std::string>& timing_fields();

}  // namespace autofe::engine
