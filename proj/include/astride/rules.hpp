#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "astride/diagram.hpp"
#include "astride/taxonomy.hpp"

namespace astride {

struct TargetRef {
  enum class Kind { Node, Edge, Unresolved };
  Kind kind = Kind::Unresolved;
  std::string value;  // element id, or the original text when unresolved

  static TargetRef node(std::string id) { return {Kind::Node, std::move(id)}; }
  static TargetRef edge(std::string id) { return {Kind::Edge, std::move(id)}; }
  static TargetRef unresolved(std::string text) {
    return {Kind::Unresolved, std::move(text)};
  }

  friend bool operator==(const TargetRef&, const TargetRef&) = default;
  friend auto operator<=>(const TargetRef&, const TargetRef&) = default;
};

/// One threat bound to a node or flow. subtype is present exactly when
/// category is ai_agent_specific.
struct Finding {
  ThreatCategory category = ThreatCategory::Spoofing;
  std::optional<AiThreatSubtype> subtype;
  TargetRef target;
  Severity severity = Severity::Medium;
  std::string rationale;
  std::vector<std::string> mitigations;
  std::string rule_id;   // empty for analyzer-produced findings
  std::string analyzer;  // producer name

  friend bool operator==(const Finding&, const Finding&) = default;
};

inline constexpr const char* kLocalRulesAnalyzer = "local-rules";

ElementKind classify_kind(const Node& node, const DiagramGraph& graph,
                          const Taxonomy& taxonomy);

std::map<std::string, ElementKind> classify_all(const DiagramGraph& graph,
                                                const Taxonomy& taxonomy);

/// Taint sources: external entities plus every node outside all boundaries.
std::set<std::string> taint_origins(const DiagramGraph& graph,
                                    const Taxonomy& taxonomy);

/// Forward reachability closure over edges from the taint sources.
std::set<std::string> tainted_nodes(const DiagramGraph& graph,
                                    const Taxonomy& taxonomy);

// Deterministic threat elicitation. Findings are de-duplicated per
// (target, category, subtype), filtered through the applicability matrix,
// and ordered by (target id, category name, subtype name).
std::vector<Finding> elicit(const DiagramGraph& graph,
                            const Taxonomy& taxonomy);

}  // namespace astride
