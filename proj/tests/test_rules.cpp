#include <doctest.h>

#include <algorithm>

#include "astride/parser.hpp"
#include "astride/rules.hpp"
#include "helpers.hpp"

using namespace astride;

namespace {

const Taxonomy& tax() { return Taxonomy::defaults(); }

DiagramGraph fixture(const char* name) {
  return parse_diagram(testutil::read_fixture(name));
}

bool has_node_finding(const std::vector<Finding>& findings,
                      AiThreatSubtype subtype, const std::string& node_id) {
  return std::any_of(findings.begin(), findings.end(), [&](const Finding& f) {
    return f.subtype == subtype && f.target.kind == TargetRef::Kind::Node &&
           f.target.value == node_id;
  });
}

std::set<AiThreatSubtype> node_subtypes(const std::vector<Finding>& findings,
                                        const std::string& node_id) {
  std::set<AiThreatSubtype> out;
  for (const Finding& f : findings)
    if (f.subtype && f.target.kind == TargetRef::Kind::Node &&
        f.target.value == node_id)
      out.insert(*f.subtype);
  return out;
}

}  // namespace

TEST_CASE("labels classify through the lexicon") {
  DiagramGraph g = fixture("agent_arch_b.mmd");
  auto kinds = classify_all(g, tax());
  CHECK(kinds.at("user") == ElementKind::ExternalEntity);
  CHECK(kinds.at("pp") == ElementKind::PromptInterface);
  CHECK(kinds.at("rc") == ElementKind::AgentCore);
  CHECK(kinds.at("mem") == ElementKind::MemoryStore);
  CHECK(kinds.at("tx") == ElementKind::ToolInterface);
  CHECK(kinds.at("api") == ElementKind::ToolInterface);  // "api" beats "external"
}

TEST_CASE("classification falls back by shape then topology") {
  SUBCASE("cylinder with a neutral label is a data store") {
    DiagramGraph g = parse_diagram("flowchart TD\n  db[(Records Vault)]\n");
    CHECK(classify_kind(g.nodes[0], g, tax()) == ElementKind::DataStore);
  }
  SUBCASE("unbounded node with no inbound edges is an external entity") {
    DiagramGraph g = parse_diagram("flowchart TD\n  x[Widget Maker]\n");
    CHECK(classify_kind(g.nodes[0], g, tax()) == ElementKind::ExternalEntity);
  }
  SUBCASE("anything else is a process") {
    DiagramGraph g = parse_diagram(
        "flowchart TD\n  a[Widget Maker]\n  b[Billing Service]\n  a --> b\n");
    CHECK(classify_kind(*g.find_node("b"), g, tax()) == ElementKind::Process);
  }
  SUBCASE("bounded keyword-free node is a process even without inbound") {
    DiagramGraph g = parse_diagram(
        "flowchart TD\nsubgraph z[Zone]\n  b[Billing Service]\nend\n");
    CHECK(classify_kind(*g.find_node("b"), g, tax()) == ElementKind::Process);
  }
}

TEST_CASE("taint closure follows edges from external sources") {
  SUBCASE("no sources means nothing is tainted") {
    DiagramGraph g = parse_diagram(
        "flowchart TD\nsubgraph z[Zone]\n  a[Billing Service]\n  "
        "b[Report Builder]\n  a --> b\nend\n");
    CHECK(tainted_nodes(g, tax()).empty());
  }
  SUBCASE("agent_arch_a taints the whole pipeline") {
    DiagramGraph g = fixture("agent_arch_a.mmd");
    CHECK(tainted_nodes(g, tax()) ==
          std::set<std::string>{"user", "pp", "rc", "tx", "api"});
  }
  SUBCASE("cycles terminate") {
    DiagramGraph g = parse_diagram(
        "flowchart TD\n  a[User]\nsubgraph z[Zone]\n  b[Billing Service]\nend\n"
        "  a --> b\n  b --> a\n");
    CHECK(tainted_nodes(g, tax()) == std::set<std::string>{"a", "b"});
  }
}

TEST_CASE("agent_arch_a elicits the expected agent-specific findings") {
  DiagramGraph g = fixture("agent_arch_a.mmd");
  std::vector<Finding> findings = elicit(g, tax());

  CHECK(has_node_finding(findings, AiThreatSubtype::PromptInjection, "pp"));
  CHECK(has_node_finding(findings, AiThreatSubtype::ReasoningSubversion, "rc"));

  bool any_context_poisoning = std::any_of(
      findings.begin(), findings.end(), [](const Finding& f) {
        return f.subtype == AiThreatSubtype::ContextPoisoning;
      });
  CHECK(!any_context_poisoning);  // no memory node in this fixture

  std::set<std::string> tool_edges;
  for (const Finding& f : findings)
    if (f.subtype == AiThreatSubtype::UnsafeToolInvocation) {
      CHECK(f.target.kind == TargetRef::Kind::Edge);
      tool_edges.insert(f.target.value);
    }
  // rc->tx is the agent invoking its tool; tx->api leaves the agent boundary.
  CHECK(tool_edges == std::set<std::string>{"e2", "e3"});
}

TEST_CASE("agent_arch_c reproduces the conversational-agent mapping") {
  DiagramGraph g = fixture("agent_arch_c.mmd");
  std::vector<Finding> findings = elicit(g, tax());

  CHECK(node_subtypes(findings, "nlu") ==
        std::set<AiThreatSubtype>{AiThreatSubtype::PromptInjection});
  CHECK(node_subtypes(findings, "cm") ==
        std::set<AiThreatSubtype>{AiThreatSubtype::ContextPoisoning});
  CHECK(node_subtypes(findings, "ir") ==
        std::set<AiThreatSubtype>{AiThreatSubtype::ReasoningSubversion});
  CHECK(node_subtypes(findings, "user").empty());

  // reading tainted memory back into the agent flags the recall edge
  CHECK(std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.subtype == AiThreatSubtype::MemoryMisuse &&
           f.target.value == "e3";
  }));
}

TEST_CASE("an isolated process yields exactly its matrix row") {
  DiagramGraph g = parse_diagram(
      "flowchart TD\nsubgraph z[Zone]\n  p[Billing Service]\nend\n");
  std::vector<Finding> findings = elicit(g, tax());
  REQUIRE(findings.size() == 6);
  for (const Finding& f : findings) {
    CHECK(f.target.value == "p");
    CHECK(!f.subtype.has_value());
    CHECK(f.category != ThreatCategory::AiAgentSpecific);
    CHECK(!f.mitigations.empty());
    CHECK(f.analyzer == kLocalRulesAnalyzer);
  }
}

TEST_CASE("agent-to-agent edges raise inter-agent influence") {
  DiagramGraph g = parse_diagram(
      "flowchart TD\n  a0[Planning Agent]\n  a1[Task Agent]\n  a0 --> a1\n");
  std::vector<Finding> findings = elicit(g, tax());
  CHECK(std::any_of(findings.begin(), findings.end(), [](const Finding& f) {
    return f.subtype == AiThreatSubtype::InterAgentInfluence &&
           f.target.kind == TargetRef::Kind::Edge && f.target.value == "e0";
  }));
}

TEST_CASE("duplicate rule hits collapse into one finding") {
  // agent inside a zone calling a tool outside: the same edge trips both the
  // direct invocation clause and the boundary-exit clause of R-A3.
  DiagramGraph g = parse_diagram(
      "flowchart TD\nsubgraph z[Zone]\n  a[Planning Agent]\nend\n"
      "  t[Tool Runner]\n  a --> t\n");
  std::vector<Finding> findings = elicit(g, tax());
  int unsafe_count = 0;
  for (const Finding& f : findings)
    if (f.subtype == AiThreatSubtype::UnsafeToolInvocation) {
      ++unsafe_count;
      CHECK(f.rationale.find("R-A3") != std::string::npos);
    }
  CHECK(unsafe_count == 1);
}

TEST_CASE("elicit is deterministic") {
  DiagramGraph g = fixture("agent_arch_b.mmd");
  CHECK(elicit(g, tax()) == elicit(g, tax()));
}

TEST_CASE("severities come from the taxonomy defaults") {
  DiagramGraph g = fixture("agent_arch_b.mmd");
  for (const Finding& f : elicit(g, tax())) {
    CAPTURE(f.rule_id);
    CHECK(f.severity == tax().default_severity(f.category, f.subtype));
  }
}

TEST_CASE("taint matches the brute-force path oracle on random graphs") {
  testutil::RandomDiagramOptions opts;
  opts.max_nodes = 12;
  for (uint64_t seed = 500; seed < 600; ++seed) {
    CAPTURE(seed);
    DiagramGraph g = parse_diagram(testutil::random_diagram_text(seed, opts));
    auto origins = taint_origins(g, tax());
    CHECK(tainted_nodes(g, tax()) == testutil::taint_oracle(g, origins));
  }
}

TEST_CASE("adding an edge never shrinks the taint set") {
  testutil::RandomDiagramOptions opts;
  opts.max_nodes = 10;
  for (uint64_t seed = 700; seed < 760; ++seed) {
    CAPTURE(seed);
    DiagramGraph g = parse_diagram(testutil::random_diagram_text(seed, opts));
    if (g.nodes.size() < 2) continue;
    std::set<std::string> before = tainted_nodes(g, tax());

    SplitMix64 rng(seed * 31);
    const std::string& src = g.nodes[rng.below(g.nodes.size())].id;
    const std::string& dst = g.nodes[rng.below(g.nodes.size())].id;
    g.edges.push_back({"e" + std::to_string(g.edges.size()), src, dst, ""});

    std::set<std::string> after = tainted_nodes(g, tax());
    CHECK(std::includes(after.begin(), after.end(), before.begin(),
                        before.end()));
  }
}

TEST_CASE("every finding is permitted by the applicability matrix") {
  testutil::RandomDiagramOptions opts;
  opts.max_nodes = 11;
  for (uint64_t seed = 900; seed < 960; ++seed) {
    CAPTURE(seed);
    DiagramGraph g = parse_diagram(testutil::random_diagram_text(seed, opts));
    auto kinds = classify_all(g, tax());
    for (const Finding& f : elicit(g, tax())) {
      if (f.target.kind == TargetRef::Kind::Node) {
        CHECK(tax().matrix.permits_node(kinds.at(f.target.value), f.category,
                                        f.subtype));
      } else {
        const Edge* e = g.find_edge(f.target.value);
        REQUIRE(e);
        bool crossing = g.find_node(e->source)->boundary_id !=
                        g.find_node(e->target)->boundary_id;
        CHECK(tax().matrix.permits_flow(crossing, f.category, f.subtype));
      }
      CHECK((f.subtype.has_value() ==
             (f.category == ThreatCategory::AiAgentSpecific)));
    }
  }
}
