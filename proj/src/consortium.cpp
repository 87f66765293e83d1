#include "astride/consortium.hpp"

#include <atomic>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "astride/parser.hpp"
#include "astride/synthesis.hpp"

namespace astride {

using nlohmann::json;

std::string_view to_string(ReportStatus s) {
  switch (s) {
    case ReportStatus::Ok: return "ok";
    case ReportStatus::ParseSalvaged: return "parse_salvaged";
    case ReportStatus::Failed: return "failed";
  }
  return "failed";
}

std::optional<ReportStatus> report_status_from_string(std::string_view name) {
  if (name == "ok") return ReportStatus::Ok;
  if (name == "parse_salvaged") return ReportStatus::ParseSalvaged;
  if (name == "failed") return ReportStatus::Failed;
  return std::nullopt;
}

namespace {

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const std::string& n : names) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

std::vector<std::string> category_names() {
  std::vector<std::string> out;
  for (ThreatCategory c : all_categories()) out.emplace_back(to_string(c));
  return out;
}

std::vector<std::string> subtype_names() {
  std::vector<std::string> out;
  for (AiThreatSubtype s : all_subtypes()) out.emplace_back(to_string(s));
  return out;
}

std::vector<std::string> severity_names_list() {
  return {"low", "medium", "high", "critical"};
}

}  // namespace

AnalysisRequest build_analysis_prompt(const DiagramGraph& graph,
                                      const std::string& context,
                                      const Taxonomy& taxonomy) {
  (void)taxonomy;
  std::ostringstream sys;
  sys << "You are a security threat modeling analyzer for agentic AI "
         "systems. Examine the architecture diagram and report every threat "
         "you can justify, using these categories: "
      << join_names(category_names())
      << ". Findings with category ai_agent_specific must carry a subtype, "
         "one of: "
      << join_names(subtype_names())
      << ". Severities: " << join_names(severity_names_list())
      << ". Reply with a single JSON object and no surrounding prose:\n"
         "{\"findings\": [{\"category\": \"...\", \"subtype\": \"...\", "
         "\"target\": \"<node id, edge id, or component name>\", "
         "\"severity\": \"...\", \"rationale\": \"...\", "
         "\"mitigations\": [\"...\"]}]}\n"
         "Omit \"subtype\" for categories other than ai_agent_specific. "
         "(analysis prompt "
      << kPromptVersion << ")";

  std::ostringstream user;
  if (!context.empty()) user << context << "\n\n";
  user << "Architecture diagram (Mermaid):\n```mermaid\n"
       << serialize_diagram(graph)
       << "```\n\nIdentify STRIDE threats and AI-agent-specific threats in "
          "this diagram and recommend corresponding mitigations for every "
          "affected component and data flow.";

  AnalysisRequest req;
  req.messages.push_back({"system", sys.str()});
  req.messages.push_back({"user", user.str()});
  return req;
}

namespace {

std::optional<json> try_parse(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) return std::nullopt;
  return doc;
}

// First fenced code block, tolerating a language tag after the opening fence.
std::optional<std::string> fenced_block(const std::string& raw) {
  size_t open = raw.find("```");
  if (open == std::string::npos) return std::nullopt;
  size_t body = raw.find('\n', open);
  if (body == std::string::npos) return std::nullopt;
  size_t close = raw.find("```", body);
  if (close == std::string::npos) return std::nullopt;
  return raw.substr(body + 1, close - body - 1);
}

// Outermost balanced {...} or [...], string-aware.
std::optional<std::string> bracketed_value(const std::string& raw) {
  size_t start = raw.find_first_of("{[");
  if (start == std::string::npos) return std::nullopt;
  char open = raw[start];
  char close = open == '{' ? '}' : ']';
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == open) ++depth;
    else if (c == close && --depth == 0) return raw.substr(start, i - start + 1);
  }
  return std::nullopt;
}

}  // namespace

AnalyzerReport parse_report(const std::string& raw, const std::string& analyzer,
                            const DiagramGraph& graph,
                            const Taxonomy& taxonomy) {
  AnalyzerReport report;
  report.analyzer = analyzer;

  std::optional<json> doc = try_parse(raw);
  report.status = ReportStatus::Ok;
  if (!doc) {
    report.status = ReportStatus::ParseSalvaged;
    if (auto fenced = fenced_block(raw)) doc = try_parse(*fenced);
    if (!doc) {
      if (auto bracketed = bracketed_value(raw)) doc = try_parse(*bracketed);
    }
  }
  if (!doc) {
    report.status = ReportStatus::Failed;
    report.raw_output = "reply is not valid JSON and no salvageable JSON value was found";
    report.diagnostics.push_back("original reply: " + raw);
    return report;
  }

  const json* items = nullptr;
  if (doc->is_array()) {
    items = &*doc;
  } else if (doc->is_object() && doc->contains("findings") &&
             (*doc)["findings"].is_array()) {
    items = &(*doc)["findings"];
  } else {
    report.status = ReportStatus::Failed;
    report.raw_output = "reply JSON has no findings array";
    report.diagnostics.push_back("original reply: " + raw);
    return report;
  }

  report.raw_output = raw;
  int dropped = 0;
  for (const json& item : *items) {
    if (!item.is_object()) {
      ++dropped;
      report.diagnostics.push_back("dropped non-object finding entry");
      continue;
    }
    Finding f;
    f.analyzer = analyzer;

    std::string cat_name =
        item.contains("category") && item["category"].is_string()
            ? item["category"].get<std::string>()
            : "";
    auto category = category_from_string(cat_name);
    if (!category) {
      ++dropped;
      report.diagnostics.push_back("dropped finding with unknown category '" +
                                   cat_name + "'");
      continue;
    }
    f.category = *category;

    if (f.category == ThreatCategory::AiAgentSpecific) {
      std::string sub_name =
          item.contains("subtype") && item["subtype"].is_string()
              ? item["subtype"].get<std::string>()
              : "";
      auto subtype = subtype_from_string(sub_name);
      if (!subtype) {
        ++dropped;
        report.diagnostics.push_back(
            "dropped ai_agent_specific finding with unknown subtype '" +
            sub_name + "'");
        continue;
      }
      f.subtype = *subtype;
    }

    if (item.contains("target") && item["target"].is_string()) {
      f.target = normalize_target(item["target"].get<std::string>(), graph);
    } else if (item.contains("target") && item["target"].is_object() &&
               item["target"].contains("id") &&
               item["target"]["id"].is_string()) {
      f.target = normalize_target(item["target"]["id"].get<std::string>(), graph);
    } else {
      ++dropped;
      report.diagnostics.push_back("dropped finding without a target");
      continue;
    }

    if (item.contains("severity") && item["severity"].is_string()) {
      std::string sev = item["severity"].get<std::string>();
      for (char& c : sev) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      if (auto parsed = severity_from_string(sev)) {
        f.severity = *parsed;
      } else {
        f.severity = taxonomy.default_severity(f.category, f.subtype);
        report.diagnostics.push_back("defaulted unknown severity '" +
                                     item["severity"].get<std::string>() + "'");
      }
    } else {
      f.severity = taxonomy.default_severity(f.category, f.subtype);
    }

    if (item.contains("rationale") && item["rationale"].is_string())
      f.rationale = item["rationale"].get<std::string>();
    if (item.contains("mitigations") && item["mitigations"].is_array())
      for (const json& m : item["mitigations"])
        if (m.is_string()) f.mitigations.push_back(m.get<std::string>());
    if (f.mitigations.empty())
      f.mitigations = taxonomy.lookup_mitigations(f.category, f.subtype);

    report.findings.push_back(std::move(f));
  }
  if (dropped > 0)
    report.diagnostics.push_back(std::to_string(dropped) +
                                 " finding(s) dropped during parsing");
  return report;
}

namespace {

struct EndpointParts {
  std::string base;  // scheme://host[:port]
  std::string path;
};

EndpointParts split_endpoint(const std::string& endpoint) {
  EndpointParts parts;
  size_t scheme = endpoint.find("://");
  size_t path_start = scheme == std::string::npos
                          ? endpoint.find('/')
                          : endpoint.find('/', scheme + 3);
  if (path_start == std::string::npos) {
    parts.base = endpoint;
    parts.path = "/v1/chat/completions";
  } else {
    parts.base = endpoint.substr(0, path_start);
    parts.path = endpoint.substr(path_start);
  }
  if (const char* override_base = std::getenv("ASTRIDE_ENDPOINT_BASE");
      override_base && *override_base)
    parts.base = override_base;
  return parts;
}

AnalyzerReport failed_report(const std::string& analyzer, std::string error,
                             std::chrono::milliseconds latency) {
  AnalyzerReport report;
  report.analyzer = analyzer;
  report.status = ReportStatus::Failed;
  report.raw_output = std::move(error);
  report.latency = latency;
  return report;
}

}  // namespace

AnalyzerReport call_backend(const BackendConfig& backend,
                            const AnalysisRequest& request,
                            const DiagramGraph& graph,
                            const Taxonomy& taxonomy) {
  if (backend.kind == BackendKind::LocalRules) {
    AnalyzerReport report;
    report.analyzer = backend.name;
    report.findings = elicit(graph, taxonomy);
    for (Finding& f : report.findings) f.analyzer = backend.name;
    report.status = ReportStatus::Ok;
    report.latency = std::chrono::milliseconds(0);  // keeps offline runs byte-stable
    return report;
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
  };

  EndpointParts endpoint = split_endpoint(backend.endpoint);
  httplib::Client client(endpoint.base);
  const auto timeout = backend.timeout;
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                                (timeout % std::chrono::seconds(1)).count() * 1000);
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                          (timeout % std::chrono::seconds(1)).count() * 1000);
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout).count(),
                           (timeout % std::chrono::seconds(1)).count() * 1000);

  httplib::Headers headers;
  if (!backend.api_key.empty())
    headers.emplace("Authorization", "Bearer " + backend.api_key);

  json wire;
  wire["model"] = backend.model;
  wire["messages"] = json::array();
  for (const ChatMessage& m : request.messages)
    wire["messages"].push_back({{"role", m.role}, {"content", m.content}});
  const std::string body = wire.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= backend.max_retries; ++attempt) {
    if (attempt > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(250) * (1 << (attempt - 1)));

    httplib::Result res = client.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;  // retryable
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status < 200 || res->status >= 300)
      return failed_report(backend.name, "HTTP " + std::to_string(res->status),
                           elapsed());

    std::optional<json> reply = try_parse(res->body);
    if (!reply || !reply->contains("choices") || !(*reply)["choices"].is_array() ||
        (*reply)["choices"].empty() ||
        !(*reply)["choices"][0].contains("message") ||
        !(*reply)["choices"][0]["message"].contains("content") ||
        !(*reply)["choices"][0]["message"]["content"].is_string())
      return failed_report(backend.name, "malformed completion response",
                           elapsed());

    AnalyzerReport report = parse_report(
        (*reply)["choices"][0]["message"]["content"].get<std::string>(),
        backend.name, graph, taxonomy);
    report.latency = elapsed();
    return report;
  }
  return failed_report(backend.name, last_error, elapsed());
}

std::vector<AnalyzerReport> run_consortium(
    const DiagramGraph& graph, const std::vector<BackendConfig>& backends,
    const std::string& context, const Taxonomy& taxonomy) {
  if (backends.empty())
    throw std::invalid_argument("run_consortium requires at least one backend");

  const AnalysisRequest request = build_analysis_prompt(graph, context, taxonomy);
  std::vector<AnalyzerReport> reports(backends.size());

  const size_t workers = std::min<size_t>(backends.size(), 8);
  std::atomic<size_t> cursor{0};
  auto drain = [&] {
    for (size_t i = cursor.fetch_add(1); i < backends.size();
         i = cursor.fetch_add(1)) {
      AnalysisRequest per_backend = request;
      per_backend.model = backends[i].model;
      reports[i] = call_backend(backends[i], per_backend, graph, taxonomy);
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (size_t w = 0; w < workers; ++w) pool.emplace_back(drain);
  for (std::thread& t : pool) t.join();

  bool any_usable = false;
  for (const AnalyzerReport& r : reports)
    if (r.status != ReportStatus::Failed) any_usable = true;
  if (!any_usable) throw AllBackendsFailed();
  return reports;
}

}  // namespace astride
