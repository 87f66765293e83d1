#include "astride/render.hpp"

#include <iomanip>
#include <sstream>

namespace astride {
namespace {

std::string describe_target(const TargetRef& target, const DiagramGraph& g) {
  if (target.kind == TargetRef::Kind::Node) {
    const Node* n = g.find_node(target.value);
    return "`" + target.value + "`" + (n ? " (" + n->label + ")" : "");
  }
  if (target.kind == TargetRef::Kind::Edge) {
    const Edge* e = g.find_edge(target.value);
    return "`" + target.value + "`" +
           (e ? " (" + e->source + " -> " + e->target + ")" : "");
  }
  return target.value;
}

std::string format_score(double score) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << score;
  return out.str();
}

std::string join(const std::vector<std::string>& items, const char* sep) {
  std::string out;
  for (const std::string& item : items) {
    if (!out.empty()) out += sep;
    out += item;
  }
  return out;
}

}  // namespace

std::string render_markdown(const ThreatModel& model, const DiagramGraph& graph) {
  std::ostringstream out;
  out << "# Threat Model";
  if (!graph.title.empty()) out << ": " << graph.title;
  out << "\n\n";
  out << "- diagram digest: `" << model.diagram_digest << "`\n";
  out << "- analyzers: " << model.reports.size() << "\n";
  out << "- reasoner used: " << (model.reasoner_used ? "yes" : "no") << "\n";
  out << "- findings: " << model.findings.size() << "\n\n";

  out << "## Severity breakdown\n\n";
  for (Severity s : {Severity::Critical, Severity::High, Severity::Medium,
                     Severity::Low}) {
    auto it = model.count_by_severity.find(s);
    int n = it == model.count_by_severity.end() ? 0 : it->second;
    out << "- " << to_string(s) << ": " << n << "\n";
  }
  out << "\n## Findings\n\n";
  out << "| Rank | Target | Category | Subtype | Severity | Score | "
         "Supporters | Mitigations |\n";
  out << "|---|---|---|---|---|---|---|---|\n";
  for (const ConsensusFinding& cf : model.findings) {
    out << "| " << cf.rank << " | "
        << describe_target(cf.finding.target, graph) << " | "
        << to_string(cf.finding.category) << " | "
        << (cf.finding.subtype ? to_string(*cf.finding.subtype) : "-") << " | "
        << to_string(cf.final_severity) << " | "
        << format_score(cf.consensus_score) << " | " << join(cf.supporters, ", ")
        << " | " << join(cf.finding.mitigations, "; ") << " |\n";
  }

  if (!model.quarantined.empty()) {
    out << "\n## Quarantined findings\n\n";
    for (const QuarantinedFinding& q : model.quarantined)
      out << "- " << q.analyzer << ": " << to_string(q.finding.category)
          << " at '" << q.finding.target.value << "' (" << q.reason << ")\n";
  }
  return out.str();
}

}  // namespace astride
