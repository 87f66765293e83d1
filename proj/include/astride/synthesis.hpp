#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "astride/consortium.hpp"
#include "astride/diagram.hpp"
#include "astride/rules.hpp"

namespace astride {

struct ConsensusFinding {
  Finding finding;                     // merged view; severity = final
  std::vector<std::string> supporters; // analyzer names, sorted
  int support_count = 0;               // weighted supporter total
  int denominator = 0;                 // weighted non-failed total
  double consensus_score = 0.0;        // support_count / denominator
  Severity final_severity = Severity::Medium;
  int rank = 0;                        // 1-based, contiguous
};

struct QuarantinedFinding {
  Finding finding;
  std::string analyzer;
  std::string reason;
};

struct ThreatModel {
  std::string diagram_digest;
  std::vector<ConsensusFinding> findings;  // ordered by rank
  std::vector<AnalyzerReport> reports;
  std::map<ThreatCategory, int> count_by_category;
  std::map<Severity, int> count_by_severity;
  std::vector<QuarantinedFinding> quarantined;
  bool reasoner_used = false;
};

struct NoUsableReports : std::runtime_error {
  NoUsableReports() : std::runtime_error("no analyzer report is usable") {}
};

// Maps free-form component names onto graph elements: exact id, then exact
// normalized label, then unique normalized-label containment (either
// direction). Anything else comes back unresolved.
TargetRef normalize_target(std::string_view name_or_id,
                           const DiagramGraph& graph);

// Deterministic consensus merge. Merge key is (resolved target, category,
// subtype); severity reconciles to the supporter maximum; output order is
// (score desc, severity desc, category order, target id, subtype name) and
// is invariant under report permutation. Findings scoring below threshold
// are excluded; unresolved targets land in quarantine.
ThreatModel synthesize(const std::vector<AnalyzerReport>& reports,
                       const DiagramGraph& graph, double threshold = 0.0);

/// Reconciliation prompt for a reasoning backend: enumerates every
/// analyzer's findings plus the diagram, deterministic given inputs.
AnalysisRequest build_reasoning_prompt(const std::vector<AnalyzerReport>& reports,
                                       const DiagramGraph& graph,
                                       const Taxonomy& taxonomy);

// Runs the reasoning backend over build_reasoning_prompt output and merges
// its reply as one extra weighted supporter. Falls back to plain synthesize
// (reasoner_used=false) when the backend fails.
ThreatModel synthesize_with_reasoner(const std::vector<AnalyzerReport>& reports,
                                     const DiagramGraph& graph,
                                     const BackendConfig& reasoner,
                                     const Taxonomy& taxonomy,
                                     double threshold = 0.0,
                                     int reasoner_weight = 2);

}  // namespace astride
