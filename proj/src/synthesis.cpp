#include "astride/synthesis.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "astride/parser.hpp"

namespace astride {
namespace {

// Lowercases and strips everything but alphanumerics; "&" reads as "and" so
// labels like "Intent & Reasoning" match their spoken form.
std::string normalize_name(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    else if (c == '&')
      out += "and";
  }
  return out;
}

}  // namespace

TargetRef normalize_target(std::string_view name_or_id,
                           const DiagramGraph& graph) {
  for (const Node& n : graph.nodes)
    if (n.id == name_or_id) return TargetRef::node(n.id);
  for (const Edge& e : graph.edges)
    if (e.id == name_or_id) return TargetRef::edge(e.id);

  const std::string wanted = normalize_name(name_or_id);
  if (wanted.empty()) return TargetRef::unresolved(std::string(name_or_id));

  std::vector<TargetRef> exact;
  for (const Node& n : graph.nodes)
    if (normalize_name(n.label) == wanted) exact.push_back(TargetRef::node(n.id));
  for (const Edge& e : graph.edges)
    if (!e.label.empty() && normalize_name(e.label) == wanted)
      exact.push_back(TargetRef::edge(e.id));
  if (exact.size() == 1) return exact.front();
  if (exact.size() > 1) return TargetRef::unresolved(std::string(name_or_id));

  std::vector<TargetRef> partial;
  auto contains_either = [&](const std::string& label) {
    if (label.empty()) return false;
    return label.find(wanted) != std::string::npos ||
           wanted.find(label) != std::string::npos;
  };
  for (const Node& n : graph.nodes)
    if (contains_either(normalize_name(n.label)))
      partial.push_back(TargetRef::node(n.id));
  for (const Edge& e : graph.edges)
    if (!e.label.empty() && contains_either(normalize_name(e.label)))
      partial.push_back(TargetRef::edge(e.id));
  if (partial.size() == 1) return partial.front();
  return TargetRef::unresolved(std::string(name_or_id));
}

namespace {

struct WeightedReport {
  const AnalyzerReport* report;
  int weight;
};

bool target_exists(const TargetRef& t, const DiagramGraph& graph) {
  if (t.kind == TargetRef::Kind::Node) return graph.find_node(t.value) != nullptr;
  if (t.kind == TargetRef::Kind::Edge) return graph.find_edge(t.value) != nullptr;
  return false;
}

ThreatModel merge_reports(const std::vector<WeightedReport>& weighted,
                          const std::vector<AnalyzerReport>& original_reports,
                          const DiagramGraph& graph, double threshold) {
  // Report processing order is fixed by analyzer name so the merge is
  // invariant under input permutation.
  std::vector<WeightedReport> usable;
  for (const WeightedReport& wr : weighted)
    if (wr.report->status != ReportStatus::Failed) usable.push_back(wr);
  if (usable.empty()) throw NoUsableReports();
  std::sort(usable.begin(), usable.end(),
            [](const WeightedReport& a, const WeightedReport& b) {
              return a.report->analyzer < b.report->analyzer;
            });

  int denominator = 0;
  for (const WeightedReport& wr : usable) denominator += wr.weight;

  struct Entry {
    Finding merged;
    std::set<std::string> supporters;
    int support = 0;
    std::vector<std::string> rationales;
  };
  using Key = std::tuple<TargetRef, ThreatCategory, std::optional<AiThreatSubtype>>;
  std::map<Key, Entry> entries;

  ThreatModel model;
  model.diagram_digest =
      graph.source_digest.empty() ? compute_digest(graph) : graph.source_digest;
  model.reports = original_reports;

  for (const WeightedReport& wr : usable) {
    const std::string& analyzer = wr.report->analyzer;
    for (const Finding& f : wr.report->findings) {
      if (f.target.kind == TargetRef::Kind::Unresolved) {
        model.quarantined.push_back({f, analyzer, "unresolved target"});
        continue;
      }
      if (!target_exists(f.target, graph)) {
        model.quarantined.push_back({f, analyzer, "target not in diagram"});
        continue;
      }
      Key key{f.target, f.category, f.subtype};
      Entry& entry = entries[key];
      if (entry.supporters.empty()) entry.merged = f;
      if (entry.supporters.insert(analyzer).second) entry.support += wr.weight;
      entry.merged.severity = std::max(entry.merged.severity, f.severity);
      for (const std::string& m : f.mitigations)
        if (std::find(entry.merged.mitigations.begin(),
                      entry.merged.mitigations.end(),
                      m) == entry.merged.mitigations.end())
          entry.merged.mitigations.push_back(m);
      if (!f.rationale.empty()) {
        std::string line = analyzer + ": " + f.rationale;
        if (std::find(entry.rationales.begin(), entry.rationales.end(), line) ==
            entry.rationales.end())
          entry.rationales.push_back(line);
      }
    }
  }

  std::vector<ConsensusFinding> consensus;
  consensus.reserve(entries.size());
  for (auto& [key, entry] : entries) {
    ConsensusFinding cf;
    cf.finding = entry.merged;
    cf.finding.analyzer = "consensus";
    std::string rationale;
    for (const std::string& line : entry.rationales) {
      if (!rationale.empty()) rationale += "\n";
      rationale += line;
    }
    cf.finding.rationale = rationale;
    cf.supporters.assign(entry.supporters.begin(), entry.supporters.end());
    cf.support_count = entry.support;
    cf.denominator = denominator;
    cf.consensus_score = static_cast<double>(entry.support) / denominator;
    cf.final_severity = cf.finding.severity;
    if (cf.consensus_score < threshold) continue;
    consensus.push_back(std::move(cf));
  }

  std::sort(consensus.begin(), consensus.end(),
            [](const ConsensusFinding& a, const ConsensusFinding& b) {
              // Exact rational comparison: a.support/a.den vs b.support/b.den.
              long lhs = static_cast<long>(a.support_count) * b.denominator;
              long rhs = static_cast<long>(b.support_count) * a.denominator;
              if (lhs != rhs) return lhs > rhs;
              if (a.final_severity != b.final_severity)
                return a.final_severity > b.final_severity;
              if (a.finding.category != b.finding.category)
                return a.finding.category < b.finding.category;
              if (a.finding.target.value != b.finding.target.value)
                return a.finding.target.value < b.finding.target.value;
              auto sub_name = [](const ConsensusFinding& cf) {
                return cf.finding.subtype
                           ? std::string(to_string(*cf.finding.subtype))
                           : std::string();
              };
              return sub_name(a) < sub_name(b);
            });

  for (size_t i = 0; i < consensus.size(); ++i)
    consensus[i].rank = static_cast<int>(i) + 1;
  model.findings = std::move(consensus);

  for (const ConsensusFinding& cf : model.findings) {
    model.count_by_category[cf.finding.category] += 1;
    model.count_by_severity[cf.final_severity] += 1;
  }
  return model;
}

}  // namespace

ThreatModel synthesize(const std::vector<AnalyzerReport>& reports,
                       const DiagramGraph& graph, double threshold) {
  std::vector<WeightedReport> weighted;
  weighted.reserve(reports.size());
  for (const AnalyzerReport& r : reports) weighted.push_back({&r, 1});
  return merge_reports(weighted, reports, graph, threshold);
}

AnalysisRequest build_reasoning_prompt(const std::vector<AnalyzerReport>& reports,
                                       const DiagramGraph& graph,
                                       const Taxonomy& taxonomy) {
  (void)taxonomy;
  std::ostringstream sys;
  sys << "You are the reasoning and decision layer of a threat modeling "
         "pipeline. Independent analyzers reviewed the same architecture "
         "diagram and produced candidate findings. Cross-check the "
         "candidates against the diagram, reconcile conflicts, merge "
         "duplicates, discard unsupported claims, and prioritize what "
         "remains. Reply with a single JSON object and no surrounding "
         "prose:\n"
         "{\"findings\": [{\"category\": \"...\", \"subtype\": \"...\", "
         "\"target\": \"<node id or edge id>\", \"severity\": \"...\", "
         "\"rationale\": \"...\", \"mitigations\": [\"...\"]}]}\n"
         "Categories: ";
  bool first = true;
  for (ThreatCategory c : all_categories()) {
    if (!first) sys << ", ";
    sys << to_string(c);
    first = false;
  }
  sys << ". (reasoning prompt " << kPromptVersion << ")";

  std::ostringstream user;
  user << "Analyzer findings:\n";
  bool any_findings = false;
  for (const AnalyzerReport& r : reports) {
    user << "### " << r.analyzer << " [" << to_string(r.status) << "]\n";
    if (r.status == ReportStatus::Failed) {
      user << "- failed: " << r.raw_output << "\n";
      continue;
    }
    if (r.findings.empty()) {
      user << "- no findings\n";
      continue;
    }
    any_findings = true;
    for (const Finding& f : r.findings) {
      user << "- " << to_string(f.category);
      if (f.subtype) user << "/" << to_string(*f.subtype);
      user << " @ " << f.target.value << " [" << to_string(f.severity) << "]";
      if (!f.rationale.empty()) user << " :: " << f.rationale;
      if (!f.mitigations.empty()) {
        user << " :: mitigations: ";
        for (size_t i = 0; i < f.mitigations.size(); ++i) {
          if (i > 0) user << "; ";
          user << f.mitigations[i];
        }
      }
      user << "\n";
    }
  }
  if (!any_findings)
    user << "\nNote: no candidate threats were reported by any analyzer.\n";
  user << "\nArchitecture diagram (Mermaid):\n```mermaid\n"
       << serialize_diagram(graph) << "```";

  AnalysisRequest req;
  req.messages.push_back({"system", sys.str()});
  req.messages.push_back({"user", user.str()});
  return req;
}

ThreatModel synthesize_with_reasoner(const std::vector<AnalyzerReport>& reports,
                                     const DiagramGraph& graph,
                                     const BackendConfig& reasoner,
                                     const Taxonomy& taxonomy,
                                     double threshold, int reasoner_weight) {
  AnalysisRequest prompt = build_reasoning_prompt(reports, graph, taxonomy);
  prompt.model = reasoner.model;
  AnalyzerReport verdict = call_backend(reasoner, prompt, graph, taxonomy);

  if (verdict.status == ReportStatus::Failed) {
    ThreatModel model = synthesize(reports, graph, threshold);
    model.reasoner_used = false;
    return model;
  }

  std::vector<AnalyzerReport> all = reports;
  all.push_back(verdict);
  std::vector<WeightedReport> weighted;
  weighted.reserve(all.size());
  for (size_t i = 0; i < all.size(); ++i)
    weighted.push_back({&all[i], i + 1 == all.size() ? reasoner_weight : 1});
  ThreatModel model = merge_reports(weighted, all, graph, threshold);
  model.reasoner_used = true;
  return model;
}

}  // namespace astride
