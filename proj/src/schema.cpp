#include "astride/schema.hpp"

namespace astride {

using nlohmann::ordered_json;

ordered_json target_to_json(const TargetRef& target) {
  ordered_json j;
  switch (target.kind) {
    case TargetRef::Kind::Node:
      j["kind"] = "node";
      j["id"] = target.value;
      break;
    case TargetRef::Kind::Edge:
      j["kind"] = "edge";
      j["id"] = target.value;
      break;
    case TargetRef::Kind::Unresolved:
      j["kind"] = "unresolved";
      j["text"] = target.value;
      break;
  }
  return j;
}

ordered_json finding_to_json(const Finding& f) {
  ordered_json j;
  j["category"] = to_string(f.category);
  if (f.subtype) j["subtype"] = to_string(*f.subtype);
  j["target"] = target_to_json(f.target);
  j["severity"] = to_string(f.severity);
  j["rationale"] = f.rationale;
  j["mitigations"] = f.mitigations;
  if (!f.rule_id.empty()) j["rule_id"] = f.rule_id;
  j["analyzer"] = f.analyzer;
  return j;
}

ordered_json report_to_json(const AnalyzerReport& r) {
  ordered_json j;
  j["analyzer"] = r.analyzer;
  j["status"] = to_string(r.status);
  j["latency_ms"] = r.latency.count();
  j["findings"] = ordered_json::array();
  for (const Finding& f : r.findings) j["findings"].push_back(finding_to_json(f));
  j["raw_output"] = r.raw_output;
  j["diagnostics"] = r.diagnostics;
  return j;
}

ordered_json threat_model_to_json(const ThreatModel& m) {
  ordered_json j;
  j["diagram_digest"] = m.diagram_digest;
  j["reasoner_used"] = m.reasoner_used;

  j["findings"] = ordered_json::array();
  for (const ConsensusFinding& cf : m.findings) {
    ordered_json f;
    f["rank"] = cf.rank;
    f["target"] = target_to_json(cf.finding.target);
    f["category"] = to_string(cf.finding.category);
    if (cf.finding.subtype) f["subtype"] = to_string(*cf.finding.subtype);
    f["severity"] = to_string(cf.final_severity);
    f["consensus_score"] = cf.consensus_score;
    f["support_count"] = cf.support_count;
    f["denominator"] = cf.denominator;
    f["supporters"] = cf.supporters;
    f["mitigations"] = cf.finding.mitigations;
    f["rationale"] = cf.finding.rationale;
    j["findings"].push_back(std::move(f));
  }

  ordered_json summary;
  summary["total"] = m.findings.size();
  ordered_json by_category;
  for (ThreatCategory c : all_categories()) {
    auto it = m.count_by_category.find(c);
    by_category[std::string(to_string(c))] =
        it == m.count_by_category.end() ? 0 : it->second;
  }
  summary["by_category"] = by_category;
  ordered_json by_severity;
  for (Severity s : {Severity::Low, Severity::Medium, Severity::High,
                     Severity::Critical}) {
    auto it = m.count_by_severity.find(s);
    by_severity[std::string(to_string(s))] =
        it == m.count_by_severity.end() ? 0 : it->second;
  }
  summary["by_severity"] = by_severity;
  summary["quarantined"] = ordered_json::array();
  for (const QuarantinedFinding& q : m.quarantined) {
    ordered_json entry;
    entry["analyzer"] = q.analyzer;
    entry["reason"] = q.reason;
    entry["category"] = to_string(q.finding.category);
    if (q.finding.subtype) entry["subtype"] = to_string(*q.finding.subtype);
    entry["target_text"] = q.finding.target.value;
    summary["quarantined"].push_back(std::move(entry));
  }
  j["summary"] = summary;

  j["reports"] = ordered_json::array();
  for (const AnalyzerReport& r : m.reports)
    j["reports"].push_back(report_to_json(r));
  return j;
}

ordered_json request_to_json(const AnalysisRequest& req) {
  ordered_json j;
  j["model"] = req.model;
  j["messages"] = ordered_json::array();
  for (const ChatMessage& m : req.messages)
    j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  return j;
}

ordered_json graph_to_json(const DiagramGraph& g) {
  ordered_json j;
  j["title"] = g.title;
  j["direction"] = g.direction == FlowDirection::TopDown ? "TD" : "LR";
  j["digest"] = g.source_digest;
  j["nodes"] = ordered_json::array();
  for (const Node& n : g.nodes) {
    ordered_json node;
    node["id"] = n.id;
    node["label"] = n.label;
    node["shape"] = to_string(n.shape);
    node["boundary"] = n.boundary_id ? ordered_json(*n.boundary_id)
                                     : ordered_json(nullptr);
    j["nodes"].push_back(std::move(node));
  }
  j["edges"] = ordered_json::array();
  for (const Edge& e : g.edges) {
    ordered_json edge;
    edge["id"] = e.id;
    edge["source"] = e.source;
    edge["target"] = e.target;
    edge["label"] = e.label;
    j["edges"].push_back(std::move(edge));
  }
  j["boundaries"] = ordered_json::array();
  for (const TrustBoundary& b : g.boundaries) {
    ordered_json boundary;
    boundary["id"] = b.id;
    boundary["label"] = b.label;
    boundary["parent"] = b.parent_boundary_id
                             ? ordered_json(*b.parent_boundary_id)
                             : ordered_json(nullptr);
    boundary["members"] = b.member_node_ids;
    j["boundaries"].push_back(std::move(boundary));
  }
  return j;
}

ordered_json record_to_json(const DatasetRecord& r) {
  ordered_json j;
  j["content"] = r.content;
  j["type"] = to_string(r.type);
  j["instruction"] = r.instruction;
  j["expected"] = ordered_json::array();
  for (const Finding& f : r.expected) j["expected"].push_back(finding_to_json(f));
  return j;
}

}  // namespace astride
