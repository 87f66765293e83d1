#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace astride {

// Category order is also the ranking order used when consensus scores tie.
enum class ThreatCategory {
  AiAgentSpecific,
  Spoofing,
  Tampering,
  Repudiation,
  InformationDisclosure,
  DenialOfService,
  ElevationOfPrivilege,
};

enum class AiThreatSubtype {
  PromptInjection,
  ContextPoisoning,
  ReasoningSubversion,
  UnsafeToolInvocation,
  MemoryMisuse,
  InterAgentInfluence,
  ModelManipulation,
};

enum class ElementKind {
  ExternalEntity,
  Process,
  DataStore,
  AgentCore,
  PromptInterface,
  MemoryStore,
  ToolInterface,
  ModelEndpoint,
};

enum class Severity { Low, Medium, High, Critical };

inline constexpr int kThreatCategoryCount = 7;
inline constexpr int kAiThreatSubtypeCount = 7;
inline constexpr int kElementKindCount = 8;

std::string_view to_string(ThreatCategory c);
std::string_view to_string(AiThreatSubtype s);
std::string_view to_string(ElementKind k);
std::string_view to_string(Severity s);

std::optional<ThreatCategory> category_from_string(std::string_view name);
std::optional<AiThreatSubtype> subtype_from_string(std::string_view name);
std::optional<ElementKind> kind_from_string(std::string_view name);
std::optional<Severity> severity_from_string(std::string_view name);

std::vector<ThreatCategory> all_categories();
std::vector<AiThreatSubtype> all_subtypes();
std::vector<ElementKind> all_kinds();

struct UnknownThreatKey : std::runtime_error {
  UnknownThreatKey(ThreatCategory c, std::optional<AiThreatSubtype> s);
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApplicabilityRow {
  std::set<ThreatCategory> categories;
  std::set<AiThreatSubtype> subtypes;
};

// Element-kind rows plus the flow-level sets. Flows are targeted directly and
// have no kind: classic categories attach to boundary-crossing flows, agent
// subtypes to any flow the rules single out.
struct ApplicabilityMatrix {
  std::map<ElementKind, ApplicabilityRow> rows;
  std::set<ThreatCategory> crossing_flow_categories;
  std::set<ThreatCategory> same_boundary_flow_categories;
  std::set<AiThreatSubtype> flow_subtypes;

  bool permits_node(ElementKind kind, ThreatCategory c,
                    std::optional<AiThreatSubtype> s) const;
  bool permits_flow(bool crossing, ThreatCategory c,
                    std::optional<AiThreatSubtype> s) const;
};

using ThreatKey = std::pair<ThreatCategory, std::optional<AiThreatSubtype>>;

struct Taxonomy {
  std::string version = "default-1";
  ApplicabilityMatrix matrix;
  std::map<ThreatCategory, Severity> category_severity;
  std::map<AiThreatSubtype, Severity> subtype_severity;
  std::map<ThreatKey, std::vector<std::string>> mitigations;
  // Ordered keyword table; the first hit wins, so broader words go last.
  std::vector<std::pair<std::string, ElementKind>> lexicon;

  const ApplicabilityRow& lookup_applicable(ElementKind kind) const;
  const std::vector<std::string>& lookup_mitigations(
      ThreatCategory c, std::optional<AiThreatSubtype> s = std::nullopt) const;
  Severity default_severity(ThreatCategory c,
                            std::optional<AiThreatSubtype> s) const;

  nlohmann::ordered_json to_json() const;

  static const Taxonomy& defaults();
  /// Defaults overridden by whatever keys the document provides.
  static Taxonomy from_json(const nlohmann::json& doc);
  static Taxonomy load_file(const std::string& path);
};

}  // namespace astride
