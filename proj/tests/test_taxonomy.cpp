#include <doctest.h>

#include "astride/taxonomy.hpp"
#include "helpers.hpp"

using namespace astride;

TEST_CASE("canonical names round trip for every enum") {
  for (ThreatCategory c : all_categories())
    CHECK(category_from_string(to_string(c)) == c);
  for (AiThreatSubtype s : all_subtypes())
    CHECK(subtype_from_string(to_string(s)) == s);
  for (ElementKind k : all_kinds()) CHECK(kind_from_string(to_string(k)) == k);
  for (Severity s : {Severity::Low, Severity::Medium, Severity::High,
                     Severity::Critical})
    CHECK(severity_from_string(to_string(s)) == s);
  CHECK(!category_from_string("spoofed").has_value());
  CHECK(!subtype_from_string("").has_value());
}

TEST_CASE("severity order is total") {
  CHECK(Severity::Low < Severity::Medium);
  CHECK(Severity::Medium < Severity::High);
  CHECK(Severity::High < Severity::Critical);
}

TEST_CASE("applicability rows match the shipped defaults") {
  const Taxonomy& tax = Taxonomy::defaults();

  const ApplicabilityRow& memory = tax.lookup_applicable(ElementKind::MemoryStore);
  CHECK(memory.categories.count(ThreatCategory::Tampering) == 1);
  CHECK(memory.subtypes ==
        std::set<AiThreatSubtype>{AiThreatSubtype::ContextPoisoning,
                                  AiThreatSubtype::MemoryMisuse});

  CHECK(tax.lookup_applicable(ElementKind::ExternalEntity).subtypes.empty());
  CHECK(tax.lookup_applicable(ElementKind::ToolInterface).subtypes ==
        std::set<AiThreatSubtype>{AiThreatSubtype::UnsafeToolInvocation});
  CHECK(tax.lookup_applicable(ElementKind::Process).categories.size() == 6);
  CHECK(tax.lookup_applicable(ElementKind::ExternalEntity).categories ==
        std::set<ThreatCategory>{ThreatCategory::Spoofing,
                                 ThreatCategory::Repudiation});
}

TEST_CASE("lookup_applicable is total over element kinds") {
  const Taxonomy& tax = Taxonomy::defaults();
  for (ElementKind k : all_kinds()) CHECK_NOTHROW(tax.lookup_applicable(k));
}

TEST_CASE("every matrix-reachable key has mitigations") {
  const Taxonomy& tax = Taxonomy::defaults();
  for (ElementKind k : all_kinds()) {
    const ApplicabilityRow& row = tax.lookup_applicable(k);
    for (ThreatCategory c : row.categories) {
      if (c == ThreatCategory::AiAgentSpecific) continue;
      CHECK(!tax.lookup_mitigations(c).empty());
    }
    for (AiThreatSubtype s : row.subtypes)
      CHECK(!tax.lookup_mitigations(ThreatCategory::AiAgentSpecific, s).empty());
  }
  for (ThreatCategory c : tax.matrix.crossing_flow_categories)
    CHECK(!tax.lookup_mitigations(c).empty());
  for (AiThreatSubtype s : tax.matrix.flow_subtypes)
    CHECK(!tax.lookup_mitigations(ThreatCategory::AiAgentSpecific, s).empty());
}

TEST_CASE("mitigation texts carry the expected recommendations") {
  const Taxonomy& tax = Taxonomy::defaults();
  auto contains = [](const std::vector<std::string>& texts,
                     const std::string& needle) {
    for (const std::string& t : texts)
      if (t.find(needle) != std::string::npos) return true;
    return false;
  };

  auto pi = tax.lookup_mitigations(ThreatCategory::AiAgentSpecific,
                                   AiThreatSubtype::PromptInjection);
  CHECK(contains(pi, "input sanitization"));
  CHECK(contains(pi, "prompt filtering with zero-trust validation"));

  auto cp = tax.lookup_mitigations(ThreatCategory::AiAgentSpecific,
                                   AiThreatSubtype::ContextPoisoning);
  CHECK(contains(cp, "context integrity validation"));
  CHECK(contains(cp, "memory hashing with provenance tracking"));

  CHECK(contains(tax.lookup_mitigations(ThreatCategory::AiAgentSpecific,
                                        AiThreatSubtype::UnsafeToolInvocation),
                 "access control"));
  CHECK(!tax.lookup_mitigations(ThreatCategory::Tampering).empty());
}

TEST_CASE("unmapped keys raise UnknownThreatKey") {
  const Taxonomy& tax = Taxonomy::defaults();
  CHECK_THROWS_AS(tax.lookup_mitigations(ThreatCategory::AiAgentSpecific),
                  UnknownThreatKey);
}

TEST_CASE("severity defaults follow the shipped table") {
  const Taxonomy& tax = Taxonomy::defaults();
  CHECK(tax.default_severity(ThreatCategory::AiAgentSpecific,
                             AiThreatSubtype::PromptInjection) == Severity::High);
  CHECK(tax.default_severity(ThreatCategory::AiAgentSpecific,
                             AiThreatSubtype::ReasoningSubversion) ==
        Severity::Medium);
  CHECK(tax.default_severity(ThreatCategory::ElevationOfPrivilege,
                             std::nullopt) == Severity::High);
  CHECK(tax.default_severity(ThreatCategory::Spoofing, std::nullopt) ==
        Severity::Medium);
}

TEST_CASE("taxonomy overrides layer onto the defaults") {
  Taxonomy tax = Taxonomy::load_file(testutil::fixture_path("taxonomy_override.json"));
  CHECK(tax.version == "override-test-1");
  CHECK(tax.default_severity(ThreatCategory::AiAgentSpecific,
                             AiThreatSubtype::ReasoningSubversion) ==
        Severity::Critical);
  CHECK(tax.default_severity(ThreatCategory::Spoofing, std::nullopt) ==
        Severity::High);
  // untouched entries fall through to the defaults
  CHECK(tax.default_severity(ThreatCategory::AiAgentSpecific,
                             AiThreatSubtype::PromptInjection) == Severity::High);
  bool ledger_maps = false;
  for (const auto& [kw, kind] : tax.lexicon)
    if (kw == "ledger" && kind == ElementKind::DataStore) ledger_maps = true;
  CHECK(ledger_maps);
}

TEST_CASE("invalid overrides are rejected with ConfigError") {
  CHECK_THROWS_AS(Taxonomy::load_file(testutil::fixture_path("taxonomy_bad.json")),
                  ConfigError);
  CHECK_THROWS_AS(Taxonomy::load_file(testutil::fixture_path("no_such.json")),
                  ConfigError);
  CHECK_THROWS_AS(Taxonomy::from_json(nlohmann::json::parse(
                      R"({"mitigations": [{"category": "tampering", "texts": []}]})")),
                  ConfigError);
}

TEST_CASE("taxonomy dump is loadable and stable") {
  const Taxonomy& tax = Taxonomy::defaults();
  nlohmann::ordered_json dumped = tax.to_json();
  CHECK(dumped["matrix"].size() == 8);
  Taxonomy reloaded = Taxonomy::from_json(nlohmann::json::parse(dumped.dump()));
  CHECK(reloaded.to_json() == dumped);
}
