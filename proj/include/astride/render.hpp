#pragma once

#include <string>

#include "astride/diagram.hpp"
#include "astride/synthesis.hpp"

namespace astride {

/// Human-readable report: summary counts plus the ranked threat table
/// (rank, target, category/subtype, severity, score, mitigations).
std::string render_markdown(const ThreatModel& model, const DiagramGraph& graph);

}  // namespace astride
