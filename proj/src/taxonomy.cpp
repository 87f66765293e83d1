#include "astride/taxonomy.hpp"

#include <fstream>

namespace astride {
namespace {

constexpr std::string_view kCategoryNames[] = {
    "ai_agent_specific", "spoofing",          "tampering", "repudiation",
    "information_disclosure", "denial_of_service", "elevation_of_privilege"};

constexpr std::string_view kSubtypeNames[] = {
    "prompt_injection",  "context_poisoning",    "reasoning_subversion",
    "unsafe_tool_invocation", "memory_misuse",   "inter_agent_influence",
    "model_manipulation"};

constexpr std::string_view kKindNames[] = {
    "external_entity", "process",      "data_store",    "agent_core",
    "prompt_interface", "memory_store", "tool_interface", "model_endpoint"};

constexpr std::string_view kSeverityNames[] = {"low", "medium", "high",
                                               "critical"};

template <typename E, size_t N>
std::optional<E> from_name(const std::string_view (&names)[N],
                           std::string_view name) {
  for (size_t i = 0; i < N; ++i)
    if (names[i] == name) return static_cast<E>(i);
  return std::nullopt;
}

}  // namespace

std::string_view to_string(ThreatCategory c) {
  return kCategoryNames[static_cast<size_t>(c)];
}
std::string_view to_string(AiThreatSubtype s) {
  return kSubtypeNames[static_cast<size_t>(s)];
}
std::string_view to_string(ElementKind k) {
  return kKindNames[static_cast<size_t>(k)];
}
std::string_view to_string(Severity s) {
  return kSeverityNames[static_cast<size_t>(s)];
}

std::optional<ThreatCategory> category_from_string(std::string_view name) {
  return from_name<ThreatCategory>(kCategoryNames, name);
}
std::optional<AiThreatSubtype> subtype_from_string(std::string_view name) {
  return from_name<AiThreatSubtype>(kSubtypeNames, name);
}
std::optional<ElementKind> kind_from_string(std::string_view name) {
  return from_name<ElementKind>(kKindNames, name);
}
std::optional<Severity> severity_from_string(std::string_view name) {
  return from_name<Severity>(kSeverityNames, name);
}

std::vector<ThreatCategory> all_categories() {
  std::vector<ThreatCategory> out;
  for (int i = 0; i < kThreatCategoryCount; ++i)
    out.push_back(static_cast<ThreatCategory>(i));
  return out;
}
std::vector<AiThreatSubtype> all_subtypes() {
  std::vector<AiThreatSubtype> out;
  for (int i = 0; i < kAiThreatSubtypeCount; ++i)
    out.push_back(static_cast<AiThreatSubtype>(i));
  return out;
}
std::vector<ElementKind> all_kinds() {
  std::vector<ElementKind> out;
  for (int i = 0; i < kElementKindCount; ++i)
    out.push_back(static_cast<ElementKind>(i));
  return out;
}

UnknownThreatKey::UnknownThreatKey(ThreatCategory c,
                                   std::optional<AiThreatSubtype> s)
    : std::runtime_error("no mitigation entry for category '" +
                         std::string(to_string(c)) + "'" +
                         (s ? " subtype '" + std::string(to_string(*s)) + "'"
                            : std::string())) {}

bool ApplicabilityMatrix::permits_node(ElementKind kind, ThreatCategory c,
                                       std::optional<AiThreatSubtype> s) const {
  auto it = rows.find(kind);
  if (it == rows.end()) return false;
  if (s) return it->second.subtypes.count(*s) > 0;
  return it->second.categories.count(c) > 0;
}

bool ApplicabilityMatrix::permits_flow(bool crossing, ThreatCategory c,
                                       std::optional<AiThreatSubtype> s) const {
  if (s) return flow_subtypes.count(*s) > 0;
  const auto& set = crossing ? crossing_flow_categories
                             : same_boundary_flow_categories;
  return set.count(c) > 0;
}

const ApplicabilityRow& Taxonomy::lookup_applicable(ElementKind kind) const {
  return matrix.rows.at(kind);
}

const std::vector<std::string>& Taxonomy::lookup_mitigations(
    ThreatCategory c, std::optional<AiThreatSubtype> s) const {
  auto it = mitigations.find({c, s});
  if (it == mitigations.end() || it->second.empty())
    throw UnknownThreatKey(c, s);
  return it->second;
}

Severity Taxonomy::default_severity(ThreatCategory c,
                                    std::optional<AiThreatSubtype> s) const {
  if (s) {
    auto it = subtype_severity.find(*s);
    if (it != subtype_severity.end()) return it->second;
  }
  auto it = category_severity.find(c);
  return it != category_severity.end() ? it->second : Severity::Medium;
}

namespace {

using TC = ThreatCategory;
using TS = AiThreatSubtype;
using EK = ElementKind;

Taxonomy build_defaults() {
  Taxonomy t;

  auto& rows = t.matrix.rows;
  rows[EK::ExternalEntity] = {{TC::Spoofing, TC::Repudiation}, {}};
  rows[EK::Process] = {{TC::Spoofing, TC::Tampering, TC::Repudiation,
                        TC::InformationDisclosure, TC::DenialOfService,
                        TC::ElevationOfPrivilege},
                       {}};
  rows[EK::DataStore] = {{TC::Tampering, TC::Repudiation,
                          TC::InformationDisclosure, TC::DenialOfService},
                         {}};
  rows[EK::AgentCore] = {{TC::AiAgentSpecific, TC::Spoofing, TC::Tampering,
                          TC::Repudiation, TC::InformationDisclosure,
                          TC::DenialOfService, TC::ElevationOfPrivilege},
                         {TS::PromptInjection, TS::ReasoningSubversion,
                          TS::ModelManipulation}};
  rows[EK::PromptInterface] = {{TC::AiAgentSpecific, TC::Tampering,
                                TC::InformationDisclosure, TC::DenialOfService},
                               {TS::PromptInjection}};
  rows[EK::MemoryStore] = {{TC::AiAgentSpecific, TC::Tampering,
                            TC::Repudiation, TC::InformationDisclosure,
                            TC::DenialOfService},
                           {TS::ContextPoisoning, TS::MemoryMisuse}};
  rows[EK::ToolInterface] = {{TC::AiAgentSpecific, TC::Spoofing, TC::Tampering,
                              TC::ElevationOfPrivilege},
                             {TS::UnsafeToolInvocation}};
  rows[EK::ModelEndpoint] = {{TC::AiAgentSpecific, TC::Spoofing,
                              TC::InformationDisclosure, TC::DenialOfService},
                             {TS::ModelManipulation}};

  // ai_agent_specific appears in a row's categories exactly when the row
  // maps at least one subtype.
  t.matrix.crossing_flow_categories = {TC::Tampering,
                                       TC::InformationDisclosure,
                                       TC::DenialOfService};
  t.matrix.same_boundary_flow_categories = {};
  t.matrix.flow_subtypes = {TS::UnsafeToolInvocation, TS::InterAgentInfluence,
                            TS::MemoryMisuse};

  t.category_severity = {
      {TC::AiAgentSpecific, Severity::High},
      {TC::Spoofing, Severity::Medium},
      {TC::Tampering, Severity::Medium},
      {TC::Repudiation, Severity::Medium},
      {TC::InformationDisclosure, Severity::Medium},
      {TC::DenialOfService, Severity::Medium},
      {TC::ElevationOfPrivilege, Severity::High},
  };
  t.subtype_severity = {
      {TS::PromptInjection, Severity::High},
      {TS::ContextPoisoning, Severity::High},
      {TS::ReasoningSubversion, Severity::Medium},
      {TS::UnsafeToolInvocation, Severity::High},
      {TS::MemoryMisuse, Severity::Medium},
      {TS::InterAgentInfluence, Severity::Medium},
      {TS::ModelManipulation, Severity::Medium},
  };

  t.mitigations[{TC::AiAgentSpecific, TS::PromptInjection}] = {
      "input sanitization",
      "prompt filtering with zero-trust validation",
      "separation of instruction and data channels",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::ContextPoisoning}] = {
      "context integrity validation",
      "memory hashing with provenance tracking",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::ReasoningSubversion}] = {
      "reasoning constraints with justification trails",
      "bounded decision policies for high-impact actions",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::UnsafeToolInvocation}] = {
      "access control for API invocations",
      "tool allow-lists with argument validation",
      "sandboxed execution environments",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::MemoryMisuse}] = {
      "scoped memory access policies",
      "provenance checks on recalled context",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::InterAgentInfluence}] = {
      "authenticated agent-to-agent channels",
      "message signing with replay protection",
  };
  t.mitigations[{TC::AiAgentSpecific, TS::ModelManipulation}] = {
      "model integrity attestation",
      "signed model artifacts with version pinning",
  };
  t.mitigations[{TC::Spoofing, std::nullopt}] = {
      "strong mutual authentication",
      "identity verification on every request",
  };
  t.mitigations[{TC::Tampering, std::nullopt}] = {
      "integrity controls with input validation",
      "signed payloads and checksums",
  };
  t.mitigations[{TC::Repudiation, std::nullopt}] = {
      "tamper-evident audit logging",
      "signed request trails",
  };
  t.mitigations[{TC::InformationDisclosure, std::nullopt}] = {
      "encryption in transit and at rest",
      "least-privilege data access",
  };
  t.mitigations[{TC::DenialOfService, std::nullopt}] = {
      "rate limiting and resource quotas",
      "load shedding with circuit breakers",
  };
  t.mitigations[{TC::ElevationOfPrivilege, std::nullopt}] = {
      "least privilege by default",
      "privilege separation and sandboxing",
  };

  t.lexicon = {
      {"agent", EK::AgentCore},        {"reasoning", EK::AgentCore},
      {"llm", EK::AgentCore},          {"prompt", EK::PromptInterface},
      {"nlu", EK::PromptInterface},    {"memory", EK::MemoryStore},
      {"context store", EK::MemoryStore},
      {"tool", EK::ToolInterface},     {"execution", EK::ToolInterface},
      {"api", EK::ToolInterface},      {"model", EK::ModelEndpoint},
      {"endpoint", EK::ModelEndpoint}, {"user", EK::ExternalEntity},
      {"client", EK::ExternalEntity},  {"external", EK::ExternalEntity},
  };
  return t;
}

template <typename T>
T parse_name(const nlohmann::json& j, std::optional<T> (*fn)(std::string_view),
             const char* what) {
  if (!j.is_string())
    throw ConfigError(std::string(what) + " must be a string");
  auto v = fn(j.get<std::string>());
  if (!v)
    throw ConfigError("unknown " + std::string(what) + " '" +
                      j.get<std::string>() + "'");
  return *v;
}

}  // namespace

const Taxonomy& Taxonomy::defaults() {
  static const Taxonomy t = build_defaults();
  return t;
}

nlohmann::ordered_json Taxonomy::to_json() const {
  nlohmann::ordered_json doc;
  doc["version"] = version;

  nlohmann::ordered_json m;
  for (ElementKind k : all_kinds()) {
    const ApplicabilityRow& row = matrix.rows.at(k);
    nlohmann::ordered_json r;
    r["categories"] = nlohmann::ordered_json::array();
    for (ThreatCategory c : row.categories) r["categories"].push_back(to_string(c));
    r["subtypes"] = nlohmann::ordered_json::array();
    for (AiThreatSubtype s : row.subtypes) r["subtypes"].push_back(to_string(s));
    m[std::string(to_string(k))] = r;
  }
  doc["matrix"] = m;

  nlohmann::ordered_json flow;
  flow["crossing"] = nlohmann::ordered_json::array();
  for (ThreatCategory c : matrix.crossing_flow_categories)
    flow["crossing"].push_back(to_string(c));
  flow["same_boundary"] = nlohmann::ordered_json::array();
  for (ThreatCategory c : matrix.same_boundary_flow_categories)
    flow["same_boundary"].push_back(to_string(c));
  flow["subtypes"] = nlohmann::ordered_json::array();
  for (AiThreatSubtype s : matrix.flow_subtypes)
    flow["subtypes"].push_back(to_string(s));
  doc["flow"] = flow;

  nlohmann::ordered_json sev;
  for (const auto& [c, s] : category_severity)
    sev[std::string(to_string(c))] = to_string(s);
  for (const auto& [sub, s] : subtype_severity)
    sev[std::string(to_string(sub))] = to_string(s);
  doc["severities"] = sev;

  nlohmann::ordered_json mits = nlohmann::ordered_json::array();
  for (const auto& [key, texts] : mitigations) {
    nlohmann::ordered_json entry;
    entry["category"] = to_string(key.first);
    if (key.second) entry["subtype"] = to_string(*key.second);
    entry["texts"] = texts;
    mits.push_back(entry);
  }
  doc["mitigations"] = mits;

  nlohmann::ordered_json lex = nlohmann::ordered_json::array();
  for (const auto& [kw, kind] : lexicon)
    lex.push_back({{"keyword", kw}, {"kind", to_string(kind)}});
  doc["lexicon"] = lex;
  return doc;
}

Taxonomy Taxonomy::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("taxonomy document must be an object");
  Taxonomy t = defaults();

  if (doc.contains("version")) {
    if (!doc["version"].is_string())
      throw ConfigError("taxonomy version must be a string");
    t.version = doc["version"].get<std::string>();
  }

  if (doc.contains("matrix")) {
    if (!doc["matrix"].is_object())
      throw ConfigError("taxonomy matrix must be an object");
    for (const auto& [name, row] : doc["matrix"].items()) {
      auto kind = kind_from_string(name);
      if (!kind) throw ConfigError("unknown element kind '" + name + "'");
      ApplicabilityRow r;
      for (const auto& c : row.value("categories", nlohmann::json::array()))
        r.categories.insert(
            parse_name<ThreatCategory>(c, category_from_string, "category"));
      for (const auto& s : row.value("subtypes", nlohmann::json::array()))
        r.subtypes.insert(
            parse_name<AiThreatSubtype>(s, subtype_from_string, "subtype"));
      if (!r.subtypes.empty()) r.categories.insert(TC::AiAgentSpecific);
      t.matrix.rows[*kind] = std::move(r);
    }
  }

  if (doc.contains("flow")) {
    const auto& flow = doc["flow"];
    if (!flow.is_object()) throw ConfigError("taxonomy flow must be an object");
    if (flow.contains("crossing")) {
      t.matrix.crossing_flow_categories.clear();
      for (const auto& c : flow["crossing"])
        t.matrix.crossing_flow_categories.insert(
            parse_name<ThreatCategory>(c, category_from_string, "category"));
    }
    if (flow.contains("same_boundary")) {
      t.matrix.same_boundary_flow_categories.clear();
      for (const auto& c : flow["same_boundary"])
        t.matrix.same_boundary_flow_categories.insert(
            parse_name<ThreatCategory>(c, category_from_string, "category"));
    }
    if (flow.contains("subtypes")) {
      t.matrix.flow_subtypes.clear();
      for (const auto& s : flow["subtypes"])
        t.matrix.flow_subtypes.insert(
            parse_name<AiThreatSubtype>(s, subtype_from_string, "subtype"));
    }
  }

  if (doc.contains("severities")) {
    if (!doc["severities"].is_object())
      throw ConfigError("taxonomy severities must be an object");
    for (const auto& [name, sev] : doc["severities"].items()) {
      Severity s = parse_name<Severity>(sev, severity_from_string, "severity");
      if (auto c = category_from_string(name)) {
        t.category_severity[*c] = s;
      } else if (auto sub = subtype_from_string(name)) {
        t.subtype_severity[*sub] = s;
      } else {
        throw ConfigError("unknown severity key '" + name + "'");
      }
    }
  }

  if (doc.contains("mitigations")) {
    if (!doc["mitigations"].is_array())
      throw ConfigError("taxonomy mitigations must be an array");
    for (const auto& entry : doc["mitigations"]) {
      ThreatCategory c = parse_name<ThreatCategory>(
          entry.at("category"), category_from_string, "category");
      std::optional<AiThreatSubtype> sub;
      if (entry.contains("subtype"))
        sub = parse_name<AiThreatSubtype>(entry["subtype"], subtype_from_string,
                                          "subtype");
      std::vector<std::string> texts;
      for (const auto& txt : entry.at("texts")) {
        if (!txt.is_string())
          throw ConfigError("mitigation texts must be strings");
        texts.push_back(txt.get<std::string>());
      }
      if (texts.empty())
        throw ConfigError("mitigation entry needs at least one text");
      t.mitigations[{c, sub}] = std::move(texts);
    }
  }

  if (doc.contains("lexicon")) {
    if (!doc["lexicon"].is_array())
      throw ConfigError("taxonomy lexicon must be an array");
    std::vector<std::pair<std::string, ElementKind>> lex;
    for (const auto& entry : doc["lexicon"]) {
      if (!entry.contains("keyword") || !entry["keyword"].is_string())
        throw ConfigError("lexicon entries need a string keyword");
      lex.emplace_back(entry["keyword"].get<std::string>(),
                       parse_name<ElementKind>(entry.at("kind"),
                                               kind_from_string, "kind"));
    }
    t.lexicon = std::move(lex);
  }

  // Every pair reachable from the matrix must resolve to mitigation text.
  for (ElementKind k : all_kinds()) {
    auto it = t.matrix.rows.find(k);
    if (it == t.matrix.rows.end())
      throw ConfigError("matrix row missing for kind '" +
                        std::string(to_string(k)) + "'");
    for (ThreatCategory c : it->second.categories)
      if (c != TC::AiAgentSpecific) t.lookup_mitigations(c, std::nullopt);
    for (AiThreatSubtype s : it->second.subtypes)
      t.lookup_mitigations(TC::AiAgentSpecific, s);
  }
  for (ThreatCategory c : t.matrix.crossing_flow_categories)
    t.lookup_mitigations(c, std::nullopt);
  for (ThreatCategory c : t.matrix.same_boundary_flow_categories)
    t.lookup_mitigations(c, std::nullopt);
  for (AiThreatSubtype s : t.matrix.flow_subtypes)
    t.lookup_mitigations(TC::AiAgentSpecific, s);

  return t;
}

Taxonomy Taxonomy::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open taxonomy file '" + path + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("taxonomy file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  return from_json(doc);
}

}  // namespace astride
