#include "astride/dataset.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "astride/parser.hpp"
#include "astride/schema.hpp"
#include "astride/util.hpp"

namespace astride {

std::string_view to_string(DiagramType t) {
  switch (t) {
    case DiagramType::DataFlow: return "data-flow";
    case DiagramType::Component: return "component";
    case DiagramType::TrustBoundary: return "trust-boundary";
  }
  return "data-flow";
}

std::optional<DiagramType> diagram_type_from_string(std::string_view name) {
  if (name == "data-flow") return DiagramType::DataFlow;
  if (name == "component") return DiagramType::Component;
  if (name == "trust-boundary") return DiagramType::TrustBoundary;
  return std::nullopt;
}

namespace {

// Label pools keyed by the role the default lexicon assigns them. Keep these
// aligned with the lexicon: a pool label must not contain an earlier keyword
// of a different kind.
const std::vector<std::string> kExternalLabels = {
    "User", "Client App", "External Partner", "Mobile Client"};
const std::vector<std::string> kAgentLabels = {
    "Planning Agent", "Reasoning Core", "Task Agent", "Research Agent",
    "Orchestrator LLM"};
const std::vector<std::string> kPromptLabels = {
    "Prompt Processor", "Prompt Gateway", "NLU Module", "Prompt Router"};
const std::vector<std::string> kMemoryLabels = {
    "Contextual Memory", "Conversation Memory", "Session Memory",
    "Vector Memory"};
const std::vector<std::string> kToolLabels = {
    "Tool Executor", "Tool Runner", "Search API", "Code Execution Sandbox",
    "Payment API"};
const std::vector<std::string> kModelLabels = {
    "Model Server", "Inference Endpoint", "Model Registry"};
const std::vector<std::string> kStoreLabels = {
    "Audit Log", "Document Archive", "Records Vault", "Telemetry Sink"};
const std::vector<std::string> kProcessLabels = {
    "Billing Service", "Report Builder", "Ingest Worker",
    "Notification Service", "Scheduler"};
const std::vector<std::string> kEdgeLabels = {
    "data", "query", "response", "command", "payload", "tokens"};
const std::vector<std::string> kZoneLabels = {
    "Agent Boundary", "Trust Zone", "Core Zone", "Perimeter", "Agent Cluster"};
const std::vector<std::string> kTitles = {
    "Assistant Pipeline", "Agent Platform", "Automation Stack",
    "Copilot Architecture", "Workflow System"};

std::string decl(const std::string& id, const std::string& label,
                 NodeShape shape) {
  switch (shape) {
    case NodeShape::Rectangle: return id + "[" + label + "]";
    case NodeShape::Rounded: return id + "(" + label + ")";
    case NodeShape::Cylinder: return id + "[(" + label + ")]";
    case NodeShape::Stadium: return id + "([" + label + "])";
    case NodeShape::Circle: return id + "((" + label + "))";
  }
  return id + "[" + label + "]";
}

NodeShape soft_shape(SplitMix64& rng) {
  double r = rng.unit();
  if (r < 0.6) return NodeShape::Rectangle;
  if (r < 0.85) return NodeShape::Rounded;
  if (r < 0.95) return NodeShape::Stadium;
  return NodeShape::Circle;
}

std::string edge_stmt(SplitMix64& rng, const std::string& from,
                      const std::string& to) {
  if (rng.chance(0.4))
    return from + " -->|" + rng.pick(kEdgeLabels) + "| " + to;
  return from + " --> " + to;
}

struct Doc {
  std::ostringstream out;
  int depth = 1;

  void line(const std::string& text) {
    out << std::string(static_cast<size_t>(depth) * 2, ' ') << text << "\n";
  }
  void open(const std::string& id, const std::string& label) {
    line("subgraph " + id + "[" + label + "]");
    ++depth;
  }
  void close() {
    --depth;
    line("end");
  }
};

std::string header(SplitMix64& rng) {
  std::string out = rng.chance(0.8) ? "flowchart TD\n" : "flowchart LR\n";
  if (rng.chance(0.5)) out += "%% title: " + rng.pick(kTitles) + "\n";
  return out;
}

// Linear source-to-sink chain, optionally with a wrapped middle segment.
std::string gen_pipeline(SplitMix64& rng) {
  int n = rng.range(3, 12);
  std::vector<std::string> ids;
  std::vector<std::string> decls;
  for (int i = 0; i < n; ++i) {
    std::string id = "n" + std::to_string(i);
    ids.push_back(id);
    if (i == 0) {
      decls.push_back(decl(id, rng.pick(kExternalLabels), soft_shape(rng)));
    } else if (i == n - 1) {
      double r = rng.unit();
      if (r < 0.4)
        decls.push_back(decl(id, rng.pick(kStoreLabels), NodeShape::Cylinder));
      else if (r < 0.7)
        decls.push_back(decl(id, rng.pick(kToolLabels), soft_shape(rng)));
      else
        decls.push_back(decl(id, rng.pick(kModelLabels), soft_shape(rng)));
    } else {
      double r = rng.unit();
      if (r < 0.25)
        decls.push_back(decl(id, rng.pick(kPromptLabels), soft_shape(rng)));
      else if (r < 0.5)
        decls.push_back(decl(id, rng.pick(kAgentLabels), soft_shape(rng)));
      else if (r < 0.65)
        decls.push_back(decl(id, rng.pick(kMemoryLabels), soft_shape(rng)));
      else
        decls.push_back(decl(id, rng.pick(kProcessLabels), soft_shape(rng)));
    }
  }

  int wrap_start = -1, wrap_end = -1;
  if (n >= 4 && rng.chance(0.7)) {
    wrap_start = rng.range(1, n - 2);
    wrap_end = rng.range(wrap_start, n - 2);
  }

  Doc doc;
  for (int i = 0; i < n; ++i) {
    if (i == wrap_start) doc.open("zone0", rng.pick(kZoneLabels));
    doc.line(decls[static_cast<size_t>(i)]);
    if (i == wrap_end) doc.close();
  }
  for (int i = 0; i + 1 < n; ++i)
    doc.line(edge_stmt(rng, ids[static_cast<size_t>(i)],
                       ids[static_cast<size_t>(i + 1)]));
  return header(rng) + doc.out.str();
}

// Central agent with memory and tool spokes.
std::string gen_hub(SplitMix64& rng) {
  int tools = rng.range(1, 3);
  bool with_model = rng.chance(0.5);
  bool with_sink = rng.chance(0.4);

  Doc doc;
  doc.line(decl("user", rng.pick(kExternalLabels), soft_shape(rng)));
  bool bounded = rng.chance(0.85);
  if (bounded) doc.open("core", rng.pick(kZoneLabels));
  doc.line(decl("gw", rng.pick(kPromptLabels), soft_shape(rng)));
  doc.line(decl("agent", rng.pick(kAgentLabels), soft_shape(rng)));
  doc.line(decl("mem", rng.pick(kMemoryLabels),
                rng.chance(0.6) ? NodeShape::Cylinder : soft_shape(rng)));
  if (bounded) doc.close();
  for (int t = 0; t < tools; ++t)
    doc.line(decl("tool" + std::to_string(t), rng.pick(kToolLabels),
                  soft_shape(rng)));
  if (with_model) doc.line(decl("mdl", rng.pick(kModelLabels), soft_shape(rng)));
  if (with_sink)
    doc.line(decl("sink", rng.pick(kStoreLabels), NodeShape::Cylinder));

  doc.line(edge_stmt(rng, "user", "gw"));
  doc.line(edge_stmt(rng, "gw", "agent"));
  doc.line(edge_stmt(rng, "agent", "mem"));
  doc.line(edge_stmt(rng, "mem", "agent"));
  for (int t = 0; t < tools; ++t)
    doc.line(edge_stmt(rng, "agent", "tool" + std::to_string(t)));
  if (with_model) doc.line(edge_stmt(rng, "agent", "mdl"));
  if (with_sink) doc.line(edge_stmt(rng, "agent", "sink"));
  return header(rng) + doc.out.str();
}

// Several agents influencing each other, each zone optionally bounded.
std::string gen_mesh(SplitMix64& rng) {
  int agents = rng.range(2, 4);
  bool shared_memory = rng.chance(0.7);
  int tools = rng.range(0, 2);
  bool per_agent_zones = rng.chance(0.6);

  Doc doc;
  doc.line(decl("user", rng.pick(kExternalLabels), soft_shape(rng)));
  if (per_agent_zones) {
    for (int a = 0; a < agents; ++a) {
      doc.open("zone" + std::to_string(a),
               rng.pick(kZoneLabels) + " " + std::to_string(a));
      doc.line(decl("agent" + std::to_string(a), rng.pick(kAgentLabels),
                    soft_shape(rng)));
      doc.close();
    }
  } else {
    doc.open("zone0", rng.pick(kZoneLabels));
    for (int a = 0; a < agents; ++a)
      doc.line(decl("agent" + std::to_string(a), rng.pick(kAgentLabels),
                    soft_shape(rng)));
    doc.close();
  }
  if (shared_memory)
    doc.line(decl("mem", rng.pick(kMemoryLabels),
                  rng.chance(0.6) ? NodeShape::Cylinder : soft_shape(rng)));
  for (int t = 0; t < tools; ++t)
    doc.line(decl("tool" + std::to_string(t), rng.pick(kToolLabels),
                  soft_shape(rng)));

  doc.line(edge_stmt(rng, "user", "agent0"));
  for (int a = 0; a + 1 < agents; ++a)
    doc.line(edge_stmt(rng, "agent" + std::to_string(a),
                       "agent" + std::to_string(a + 1)));
  if (agents > 2 && rng.chance(0.5))
    doc.line(edge_stmt(rng, "agent" + std::to_string(agents - 1), "agent0"));
  if (shared_memory) {
    int writer = rng.range(0, agents - 1);
    int reader = rng.range(0, agents - 1);
    doc.line(edge_stmt(rng, "agent" + std::to_string(writer), "mem"));
    doc.line(edge_stmt(rng, "mem", "agent" + std::to_string(reader)));
  }
  for (int t = 0; t < tools; ++t)
    doc.line(edge_stmt(rng, "agent" + std::to_string(rng.range(0, agents - 1)),
                       "tool" + std::to_string(t)));
  return header(rng) + doc.out.str();
}

std::string instruction_for(DiagramType type) {
  switch (type) {
    case DiagramType::DataFlow:
      return "Analyze the data flow diagram to identify STRIDE threats and "
             "recommend corresponding mitigations.";
    case DiagramType::Component:
      return "Analyze the component diagram to identify STRIDE threats and "
             "recommend corresponding mitigations.";
    case DiagramType::TrustBoundary:
      return "Analyze the trust-boundary layout to identify STRIDE threats "
             "and recommend corresponding mitigations.";
  }
  return "";
}

}  // namespace

std::vector<DatasetRecord> generate(int count, uint64_t seed,
                                    const Taxonomy& taxonomy,
                                    const GeneratorOptions& options) {
  if (count < 1) throw std::invalid_argument("record count must be positive");
  const int total_weight = options.template_weights[0] +
                           options.template_weights[1] +
                           options.template_weights[2];
  if (total_weight <= 0)
    throw std::invalid_argument("template weights must sum to a positive value");

  std::vector<DatasetRecord> records;
  records.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    SplitMix64 rng(mix_seed(seed, static_cast<uint64_t>(i)));
    int roll = static_cast<int>(rng.below(static_cast<uint64_t>(total_weight)));
    int tmpl = roll < options.template_weights[0]
                   ? 0
                   : (roll < options.template_weights[0] +
                                 options.template_weights[1]
                          ? 1
                          : 2);
    DatasetRecord rec;
    switch (tmpl) {
      case 0:
        rec.content = gen_pipeline(rng);
        rec.type = DiagramType::DataFlow;
        break;
      case 1:
        rec.content = gen_hub(rng);
        rec.type = DiagramType::Component;
        break;
      default:
        rec.content = gen_mesh(rng);
        rec.type = DiagramType::TrustBoundary;
        break;
    }
    rec.instruction = instruction_for(rec.type);
    rec.expected = elicit(parse_diagram(rec.content), taxonomy);
    records.push_back(std::move(rec));
  }
  return records;
}

SplitSizes split_sizes(size_t n) {
  SplitSizes sizes;
  sizes.train = static_cast<size_t>(
      std::llround(2.0 * static_cast<double>(n) / 3.0));
  sizes.validation =
      static_cast<size_t>(std::llround(static_cast<double>(n) / 6.0));
  sizes.test = n - sizes.train - sizes.validation;
  return sizes;
}

DatasetSplit split_records(std::vector<DatasetRecord> records, uint64_t seed) {
  if (records.size() < 6) throw TooFewRecords(records.size());

  SplitMix64 rng(mix_seed(seed, 0x5917));
  for (size_t i = records.size() - 1; i > 0; --i) {
    size_t j = static_cast<size_t>(rng.below(i + 1));
    std::swap(records[i], records[j]);
  }

  SplitSizes sizes = split_sizes(records.size());
  DatasetSplit split;
  auto cursor = records.begin();
  split.train.assign(cursor, cursor + static_cast<long>(sizes.train));
  cursor += static_cast<long>(sizes.train);
  split.validation.assign(cursor, cursor + static_cast<long>(sizes.validation));
  cursor += static_cast<long>(sizes.validation);
  split.test.assign(cursor, records.end());
  return split;
}

namespace {

void write_jsonl(const std::filesystem::path& path,
                 const std::vector<DatasetRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write dataset file '" + path.string() + "'");
  for (const DatasetRecord& rec : records) out << record_to_json(rec).dump() << "\n";
}

}  // namespace

void write_dataset(const DatasetSplit& split, uint64_t seed,
                   const GeneratorOptions& options, const Taxonomy& taxonomy,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_jsonl(out_dir / "train.jsonl", split.train);
  write_jsonl(out_dir / "validation.jsonl", split.validation);
  write_jsonl(out_dir / "test.jsonl", split.test);

  nlohmann::ordered_json manifest;
  manifest["count"] =
      split.train.size() + split.validation.size() + split.test.size();
  manifest["seed"] = seed;
  manifest["template_weights"] = options.template_weights;
  manifest["taxonomy_version"] = taxonomy.version;
  manifest["splits"] = {{"train", split.train.size()},
                        {"validation", split.validation.size()},
                        {"test", split.test.size()}};

  std::ofstream out(out_dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset manifest");
  out << manifest.dump(2) << "\n";
}

}  // namespace astride
