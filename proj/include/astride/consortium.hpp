#pragma once

#include <chrono>
#include <stdexcept>
#include <string>
#include <vector>

#include "astride/diagram.hpp"
#include "astride/rules.hpp"
#include "astride/taxonomy.hpp"

namespace astride {

inline constexpr const char* kPromptVersion = "v1";

enum class BackendKind { Remote, LocalRules };

struct BackendConfig {
  std::string name;
  std::string endpoint;  // full URL; ignored for local-rules
  std::string model;
  std::chrono::milliseconds timeout{30000};
  int max_retries = 0;
  BackendKind kind = BackendKind::Remote;
  std::string api_key;  // optional static bearer token
};

struct ChatMessage {
  std::string role;  // "system" or "user"
  std::string content;
};

struct AnalysisRequest {
  std::string model;
  std::vector<ChatMessage> messages;  // exactly one system + one user
  std::string response_format_hint = "json";
};

enum class ReportStatus { Ok, ParseSalvaged, Failed };

std::string_view to_string(ReportStatus s);
std::optional<ReportStatus> report_status_from_string(std::string_view name);

struct AnalyzerReport {
  std::string analyzer;
  std::vector<Finding> findings;
  std::string raw_output;  // original reply, or the error when failed
  std::chrono::milliseconds latency{0};
  ReportStatus status = ReportStatus::Ok;
  std::vector<std::string> diagnostics;  // dropped findings, salvage notes
};

struct AllBackendsFailed : std::runtime_error {
  AllBackendsFailed() : std::runtime_error("every analyzer backend failed") {}
};

/// Deterministic analysis prompt: system message carries the task and the
/// reply schema, user message carries the canonical diagram text and context.
AnalysisRequest build_analysis_prompt(const DiagramGraph& graph,
                                      const std::string& context,
                                      const Taxonomy& taxonomy);

// Parses an analyzer reply. Strict JSON first; then a salvage pass that
// pulls the first fenced code block or outermost bracketed value. Findings
// with unknown categories or subtypes are dropped into diagnostics; targets
// resolve through the synthesis name normalizer. Never throws: failures come
// back as status=failed.
AnalyzerReport parse_report(const std::string& raw, const std::string& analyzer,
                            const DiagramGraph& graph, const Taxonomy& taxonomy);

/// One remote round trip (with retry/backoff) or the local-rules adapter.
AnalyzerReport call_backend(const BackendConfig& backend,
                            const AnalysisRequest& request,
                            const DiagramGraph& graph, const Taxonomy& taxonomy);

// Fans the analysis prompt out to every backend with bounded parallelism.
// The report list always matches config order; individual failures surface
// as status=failed entries. Throws AllBackendsFailed only when nothing
// succeeded.
std::vector<AnalyzerReport> run_consortium(const DiagramGraph& graph,
                                           const std::vector<BackendConfig>& backends,
                                           const std::string& context,
                                           const Taxonomy& taxonomy);

}  // namespace astride
