#include "astride/rules.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <tuple>

namespace astride {
namespace {

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

}  // namespace

ElementKind classify_kind(const Node& node, const DiagramGraph& graph,
                          const Taxonomy& taxonomy) {
  const std::string label = to_lower(node.label);
  for (const auto& [keyword, kind] : taxonomy.lexicon)
    if (label.find(keyword) != std::string::npos) return kind;
  if (node.shape == NodeShape::Cylinder) return ElementKind::DataStore;
  if (!node.boundary_id && !graph.has_inbound(node.id))
    return ElementKind::ExternalEntity;
  return ElementKind::Process;
}

std::map<std::string, ElementKind> classify_all(const DiagramGraph& graph,
                                                const Taxonomy& taxonomy) {
  std::map<std::string, ElementKind> kinds;
  for (const Node& n : graph.nodes) kinds[n.id] = classify_kind(n, graph, taxonomy);
  return kinds;
}

std::set<std::string> taint_origins(const DiagramGraph& graph,
                                    const Taxonomy& taxonomy) {
  auto kinds = classify_all(graph, taxonomy);
  std::set<std::string> origins;
  for (const Node& n : graph.nodes)
    if (!n.boundary_id || kinds.at(n.id) == ElementKind::ExternalEntity)
      origins.insert(n.id);
  return origins;
}

namespace {

// Multi-source BFS in node/edge appearance order; parents give one
// deterministic witness path per reached node.
struct TaintClosure {
  std::set<std::string> reached;
  std::map<std::string, std::string> parent;

  std::string witness_path(const std::string& node) const {
    std::vector<std::string> chain{node};
    auto it = parent.find(node);
    while (it != parent.end()) {
      chain.push_back(it->second);
      it = parent.find(it->second);
    }
    std::string out;
    for (auto rit = chain.rbegin(); rit != chain.rend(); ++rit) {
      if (!out.empty()) out += " -> ";
      out += *rit;
    }
    return out;
  }
};

TaintClosure compute_taint(const DiagramGraph& graph,
                           const std::set<std::string>& origins) {
  TaintClosure closure;
  std::deque<std::string> queue;
  for (const Node& n : graph.nodes) {
    if (origins.count(n.id)) {
      closure.reached.insert(n.id);
      queue.push_back(n.id);
    }
  }
  while (!queue.empty()) {
    std::string cur = queue.front();
    queue.pop_front();
    for (const Edge& e : graph.edges) {
      if (e.source != cur) continue;
      if (closure.reached.insert(e.target).second) {
        closure.parent[e.target] = cur;
        queue.push_back(e.target);
      }
    }
  }
  return closure;
}

struct Candidate {
  ThreatCategory category;
  std::optional<AiThreatSubtype> subtype;
  TargetRef target;
  std::string rule_id;
  std::string rationale;
};

const char* stride_rule_id(ThreatCategory c) {
  switch (c) {
    case ThreatCategory::Spoofing: return "R-S1";
    case ThreatCategory::Tampering: return "R-S2";
    case ThreatCategory::Repudiation: return "R-S3";
    case ThreatCategory::InformationDisclosure: return "R-S4";
    case ThreatCategory::DenialOfService: return "R-S5";
    case ThreatCategory::ElevationOfPrivilege: return "R-S6";
    default: return "R-S?";
  }
}

}  // namespace

std::set<std::string> tainted_nodes(const DiagramGraph& graph,
                                    const Taxonomy& taxonomy) {
  return compute_taint(graph, taint_origins(graph, taxonomy)).reached;
}

std::vector<Finding> elicit(const DiagramGraph& graph,
                            const Taxonomy& taxonomy) {
  const auto kinds = classify_all(graph, taxonomy);
  const auto origins = taint_origins(graph, taxonomy);
  const TaintClosure taint = compute_taint(graph, origins);
  const ApplicabilityMatrix& matrix = taxonomy.matrix;

  auto kind_of = [&](const std::string& id) { return kinds.at(id); };
  auto is_crossing = [&](const Edge& e) {
    const Node* s = graph.find_node(e.source);
    const Node* t = graph.find_node(e.target);
    return s->boundary_id != t->boundary_id;
  };

  std::vector<Candidate> candidates;

  // Per-element STRIDE sweep (R-S1..R-S6); agent-specific findings only come
  // from the targeted rules below.
  for (const Node& n : graph.nodes) {
    const ApplicabilityRow& row = matrix.rows.at(kind_of(n.id));
    for (ThreatCategory c : row.categories) {
      if (c == ThreatCategory::AiAgentSpecific) continue;
      candidates.push_back(
          {c, std::nullopt, TargetRef::node(n.id), stride_rule_id(c),
           std::string(stride_rule_id(c)) + ": " + std::string(to_string(c)) +
               " applies to " + std::string(to_string(kind_of(n.id))) + " '" +
               n.id + "'"});
    }
  }

  // R-A1: flow from a taint source into a prompt-accepting element.
  for (const Edge& e : graph.edges) {
    ElementKind tk = kind_of(e.target);
    if ((tk == ElementKind::AgentCore || tk == ElementKind::PromptInterface) &&
        origins.count(e.source)) {
      candidates.push_back({ThreatCategory::AiAgentSpecific,
                            AiThreatSubtype::PromptInjection,
                            TargetRef::node(e.target), "R-A1",
                            "R-A1: untrusted input from '" + e.source +
                                "' reaches '" + e.target + "' (" + e.source +
                                " -> " + e.target + ")"});
    }
  }

  // R-A2: memory store fed, directly or transitively, from tainted input.
  for (const Node& n : graph.nodes) {
    if (kind_of(n.id) != ElementKind::MemoryStore) continue;
    for (const Edge& e : graph.edges) {
      if (e.target != n.id || !taint.reached.count(e.source)) continue;
      candidates.push_back({ThreatCategory::AiAgentSpecific,
                            AiThreatSubtype::ContextPoisoning,
                            TargetRef::node(n.id), "R-A2",
                            "R-A2: memory '" + n.id +
                                "' stores tainted data (path " +
                                taint.witness_path(e.source) + " -> " + n.id +
                                ")"});
      break;
    }
  }

  // R-A3: agent-driven invocation of tools, model endpoints, or anything
  // past its own trust boundary; also any flow exiting a boundary that
  // contains an agent core.
  std::set<std::string> agent_boundaries;
  for (const Node& n : graph.nodes) {
    if (kind_of(n.id) != ElementKind::AgentCore || !n.boundary_id) continue;
    std::string_view cur = *n.boundary_id;
    while (true) {
      agent_boundaries.insert(std::string(cur));
      const TrustBoundary* b = graph.find_boundary(cur);
      if (!b || !b->parent_boundary_id) break;
      cur = *b->parent_boundary_id;
    }
  }
  for (const Edge& e : graph.edges) {
    const Node* src = graph.find_node(e.source);
    ElementKind sk = kind_of(e.source);
    ElementKind tk = kind_of(e.target);
    if (sk == ElementKind::AgentCore) {
      bool tool_like = tk == ElementKind::ToolInterface ||
                       tk == ElementKind::ModelEndpoint;
      bool leaves_own = src->boundary_id &&
                        !graph.boundary_contains(*src->boundary_id, e.target);
      if (tool_like || leaves_own)
        candidates.push_back({ThreatCategory::AiAgentSpecific,
                              AiThreatSubtype::UnsafeToolInvocation,
                              TargetRef::edge(e.id), "R-A3",
                              "R-A3: agent '" + e.source + "' invokes '" +
                                  e.target + "' on flow " + e.id});
    }
    for (const std::string& b : agent_boundaries) {
      if (graph.boundary_contains(b, e.source) &&
          !graph.boundary_contains(b, e.target)) {
        candidates.push_back({ThreatCategory::AiAgentSpecific,
                              AiThreatSubtype::UnsafeToolInvocation,
                              TargetRef::edge(e.id), "R-A3",
                              "R-A3: flow " + e.id + " exits agent boundary '" +
                                  b + "' toward '" + e.target + "'"});
        break;
      }
    }
  }

  // R-A4: tainted agent core that still drives downstream flows.
  for (const Node& n : graph.nodes) {
    if (kind_of(n.id) != ElementKind::AgentCore) continue;
    if (!taint.reached.count(n.id)) continue;
    bool has_outbound = false;
    for (const Edge& e : graph.edges)
      if (e.source == n.id) { has_outbound = true; break; }
    if (has_outbound)
      candidates.push_back({ThreatCategory::AiAgentSpecific,
                            AiThreatSubtype::ReasoningSubversion,
                            TargetRef::node(n.id), "R-A4",
                            "R-A4: agent '" + n.id +
                                "' reasons over tainted input (path " +
                                taint.witness_path(n.id) + ")"});
  }

  // R-A5: direct agent-to-agent influence.
  for (const Edge& e : graph.edges)
    if (kind_of(e.source) == ElementKind::AgentCore &&
        kind_of(e.target) == ElementKind::AgentCore)
      candidates.push_back({ThreatCategory::AiAgentSpecific,
                            AiThreatSubtype::InterAgentInfluence,
                            TargetRef::edge(e.id), "R-A5",
                            "R-A5: agent '" + e.source +
                                "' influences agent '" + e.target +
                                "' on flow " + e.id});

  // R-A6: agent reading from a memory store that is itself tainted.
  for (const Edge& e : graph.edges)
    if (kind_of(e.source) == ElementKind::MemoryStore &&
        kind_of(e.target) == ElementKind::AgentCore &&
        taint.reached.count(e.source))
      candidates.push_back({ThreatCategory::AiAgentSpecific,
                            AiThreatSubtype::MemoryMisuse,
                            TargetRef::edge(e.id), "R-A6",
                            "R-A6: agent '" + e.target +
                                "' recalls tainted memory '" + e.source +
                                "' (path " + taint.witness_path(e.source) +
                                " -> " + e.target + ")"});

  // R-B1: boundary-crossing flows; the receiving node additionally risks
  // spoofed callers where its kind admits spoofing.
  for (const Edge& e : graph.edges) {
    if (!is_crossing(e)) continue;
    for (ThreatCategory c :
         {ThreatCategory::Tampering, ThreatCategory::InformationDisclosure,
          ThreatCategory::DenialOfService})
      candidates.push_back({c, std::nullopt, TargetRef::edge(e.id), "R-B1",
                            "R-B1: flow " + e.id + " (" + e.source + " -> " +
                                e.target + ") crosses a trust boundary"});
    candidates.push_back({ThreatCategory::Spoofing, std::nullopt,
                          TargetRef::node(e.target), "R-B1",
                          "R-B1: '" + e.target +
                              "' accepts flow " + e.id +
                              " from across a trust boundary"});
  }

  // Matrix gate, then collapse duplicates per (target, category, subtype).
  std::map<std::tuple<TargetRef, ThreatCategory, std::optional<AiThreatSubtype>>,
           Finding>
      merged;
  std::vector<std::tuple<TargetRef, ThreatCategory,
                         std::optional<AiThreatSubtype>>>
      order;
  for (const Candidate& c : candidates) {
    bool permitted =
        c.target.kind == TargetRef::Kind::Node
            ? matrix.permits_node(kind_of(c.target.value), c.category, c.subtype)
            : matrix.permits_flow(is_crossing(*graph.find_edge(c.target.value)),
                                  c.category, c.subtype);
    if (!permitted) continue;
    auto key = std::make_tuple(c.target, c.category, c.subtype);
    auto it = merged.find(key);
    if (it == merged.end()) {
      Finding f;
      f.category = c.category;
      f.subtype = c.subtype;
      f.target = c.target;
      f.severity = taxonomy.default_severity(c.category, c.subtype);
      f.rationale = c.rationale;
      f.mitigations = taxonomy.lookup_mitigations(c.category, c.subtype);
      f.rule_id = c.rule_id;
      f.analyzer = kLocalRulesAnalyzer;
      merged.emplace(key, std::move(f));
      order.push_back(key);
    } else if (it->second.rationale.find(c.rationale) == std::string::npos) {
      it->second.rationale += "; " + c.rationale;
    }
  }

  std::vector<Finding> findings;
  findings.reserve(order.size());
  for (const auto& key : order) findings.push_back(merged.at(key));
  std::sort(findings.begin(), findings.end(),
            [](const Finding& a, const Finding& b) {
              auto key = [](const Finding& f) {
                return std::make_tuple(
                    f.target.value, static_cast<int>(f.target.kind),
                    std::string(to_string(f.category)),
                    f.subtype ? std::string(to_string(*f.subtype))
                              : std::string());
              };
              return key(a) < key(b);
            });
  return findings;
}

}  // namespace astride
