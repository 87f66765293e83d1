#pragma once

#include <json.hpp>

#include "astride/consortium.hpp"
#include "astride/dataset.hpp"
#include "astride/diagram.hpp"
#include "astride/synthesis.hpp"

// JSON codecs for the report and threat-model schemas. ordered_json keeps
// field order stable so identical inputs serialize to identical bytes.
namespace astride {

nlohmann::ordered_json target_to_json(const TargetRef& target);
nlohmann::ordered_json finding_to_json(const Finding& finding);
nlohmann::ordered_json report_to_json(const AnalyzerReport& report);
nlohmann::ordered_json threat_model_to_json(const ThreatModel& model);
nlohmann::ordered_json request_to_json(const AnalysisRequest& request);
nlohmann::ordered_json graph_to_json(const DiagramGraph& graph);
nlohmann::ordered_json record_to_json(const DatasetRecord& record);

}  // namespace astride
