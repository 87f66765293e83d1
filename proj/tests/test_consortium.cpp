#include <doctest.h>

#include <atomic>
#include <chrono>

#include <httplib.h>
#include <json.hpp>

#include "astride/consortium.hpp"
#include "astride/parser.hpp"
#include "helpers.hpp"
#include "mock_backend.hpp"

using namespace astride;
using nlohmann::json;

namespace {

const Taxonomy& tax() { return Taxonomy::defaults(); }

DiagramGraph arch_b() {
  return parse_diagram(testutil::read_fixture("agent_arch_b.mmd"));
}

const char* kFindingPp =
    R"({"findings": [{"category": "ai_agent_specific", "subtype": "prompt_injection", "target": "pp", "severity": "high", "rationale": "injected prompt"}]})";

}  // namespace

TEST_CASE("analysis prompt embeds the task, schema, and diagram") {
  DiagramGraph g = arch_b();
  AnalysisRequest req = build_analysis_prompt(g, "payments platform", tax());

  REQUIRE(req.messages.size() == 2);
  CHECK(req.messages[0].role == "system");
  CHECK(req.messages[1].role == "user");
  CHECK(req.response_format_hint == "json");

  for (ThreatCategory c : all_categories())
    CHECK(req.messages[0].content.find(to_string(c)) != std::string::npos);
  CHECK(req.messages[1].content.find(serialize_diagram(g)) != std::string::npos);
  CHECK(req.messages[1].content.find("payments platform") != std::string::npos);
  CHECK(req.messages[1].content.find("recommend corresponding mitigations") !=
        std::string::npos);

  AnalysisRequest again = build_analysis_prompt(g, "payments platform", tax());
  CHECK(req.messages[0].content == again.messages[0].content);
  CHECK(req.messages[1].content == again.messages[1].content);
}

TEST_CASE("parse_report accepts a clean schema instance") {
  DiagramGraph g = arch_b();
  AnalyzerReport report = parse_report(
      testutil::read_fixture("report_wellformed.json"), "vlm-a", g, tax());

  CHECK(report.status == ReportStatus::Ok);
  REQUIRE(report.findings.size() == 2);
  CHECK(report.findings[0].target.kind == TargetRef::Kind::Node);
  CHECK(report.findings[0].target.value == "pp");  // label resolved to id
  CHECK(report.findings[0].subtype == AiThreatSubtype::PromptInjection);
  CHECK(report.findings[1].target.value == "api");
  // missing mitigations fall back to the knowledge base
  CHECK(!report.findings[1].mitigations.empty());
  CHECK(report.analyzer == "vlm-a");
}

TEST_CASE("parse_report salvages fenced JSON from prose") {
  DiagramGraph g = arch_b();
  AnalyzerReport report = parse_report(
      testutil::read_fixture("report_salvage.txt"), "vlm-b", g, tax());
  CHECK(report.status == ReportStatus::ParseSalvaged);
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].target.value == "mem");
  CHECK(report.findings[0].subtype == AiThreatSubtype::ContextPoisoning);
}

TEST_CASE("parse_report salvages a bare bracketed value") {
  DiagramGraph g = arch_b();
  AnalyzerReport report = parse_report(
      "Sure! " + std::string(kFindingPp) + " Hope that helps.", "vlm-c", g,
      tax());
  CHECK(report.status == ReportStatus::ParseSalvaged);
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].target.value == "pp");
}

TEST_CASE("parse_report fails cleanly on prose") {
  DiagramGraph g = arch_b();
  AnalyzerReport report = parse_report(
      testutil::read_fixture("report_prose.txt"), "vlm-a", g, tax());
  CHECK(report.status == ReportStatus::Failed);
  CHECK(report.findings.empty());
  CHECK(!report.raw_output.empty());
}

TEST_CASE("unknown categories and subtypes are dropped, not coerced") {
  DiagramGraph g = arch_b();
  std::string raw = R"({"findings": [
      {"category": "quantum_hijack", "target": "pp"},
      {"category": "ai_agent_specific", "subtype": "vibe_shift", "target": "pp"},
      {"category": "tampering", "target": "pp"}]})";
  AnalyzerReport report = parse_report(raw, "vlm-a", g, tax());
  CHECK(report.status == ReportStatus::Ok);
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].category == ThreatCategory::Tampering);
  CHECK(report.diagnostics.size() >= 2);
}

TEST_CASE("unresolvable targets stay attached as unresolved") {
  DiagramGraph g = arch_b();
  std::string raw =
      R"({"findings": [{"category": "tampering", "target": "frobnicator"}]})";
  AnalyzerReport report = parse_report(raw, "vlm-a", g, tax());
  REQUIRE(report.findings.size() == 1);
  CHECK(report.findings[0].target.kind == TargetRef::Kind::Unresolved);
  CHECK(report.findings[0].target.value == "frobnicator");
}

TEST_CASE("local-rules backend reproduces the rule engine verbatim") {
  DiagramGraph g = arch_b();
  BackendConfig local;
  local.name = kLocalRulesAnalyzer;
  local.kind = BackendKind::LocalRules;

  std::vector<AnalyzerReport> reports = run_consortium(g, {local}, "", tax());
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].status == ReportStatus::Ok);
  CHECK(reports[0].findings == elicit(g, tax()));
  CHECK(reports[0].latency.count() == 0);
}

TEST_CASE("report order tracks config order, not completion order") {
  DiagramGraph g = arch_b();
  testutil::MockBackend slow(testutil::canned(kFindingPp, 400));
  testutil::MockBackend fast(testutil::canned(kFindingPp));

  auto reports = run_consortium(
      g, {slow.config("slow-first"), fast.config("fast-second")}, "", tax());
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].analyzer == "slow-first");
  CHECK(reports[1].analyzer == "fast-second");
  CHECK(reports[0].status == ReportStatus::Ok);
  CHECK(reports[1].status == ReportStatus::Ok);
}

TEST_CASE("a timing-out backend fails alone") {
  DiagramGraph g = arch_b();
  testutil::MockBackend ok_a(testutil::canned(kFindingPp));
  testutil::MockBackend stuck(testutil::canned(kFindingPp, 1500));
  testutil::MockBackend ok_b(testutil::canned(kFindingPp));

  auto reports = run_consortium(
      g,
      {ok_a.config("vlm-a"),
       stuck.config("vlm-b", std::chrono::milliseconds(300)),
       ok_b.config("vlm-c")},
      "", tax());
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].status == ReportStatus::Ok);
  CHECK(reports[1].status == ReportStatus::Failed);
  CHECK(reports[2].status == ReportStatus::Ok);
}

TEST_CASE("run_consortium throws only when every backend fails") {
  DiagramGraph g = arch_b();
  CHECK_THROWS_AS(run_consortium(
                      g, {testutil::unreachable_backend("a"), testutil::unreachable_backend("b")},
                      "", tax()),
                  AllBackendsFailed);
}

TEST_CASE("transport-level failures retry with backoff, 4xx does not") {
  DiagramGraph g = arch_b();
  std::atomic<int> failures{2};
  testutil::MockBackend flaky([&](const httplib::Request&, httplib::Response& res) {
    if (failures-- > 0) {
      res.status = 503;
      return;
    }
    res.set_content(testutil::completion_reply(kFindingPp), "application/json");
  });

  AnalysisRequest req = build_analysis_prompt(g, "", tax());
  AnalyzerReport report =
      call_backend(flaky.config("flaky", std::chrono::milliseconds(2000), 3),
                   req, g, tax());
  CHECK(report.status == ReportStatus::Ok);
  CHECK(flaky.hits.load() == 3);

  testutil::MockBackend denied([](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
  });
  report = call_backend(denied.config("denied", std::chrono::milliseconds(2000), 3),
                        req, g, tax());
  CHECK(report.status == ReportStatus::Failed);
  CHECK(denied.hits.load() == 1);
}

TEST_CASE("unparseable replies are not retried") {
  DiagramGraph g = arch_b();
  testutil::MockBackend prose(testutil::canned("no json here, sorry"));
  AnalysisRequest req = build_analysis_prompt(g, "", tax());
  AnalyzerReport report =
      call_backend(prose.config("prose", std::chrono::milliseconds(2000), 3),
                   req, g, tax());
  CHECK(report.status == ReportStatus::Failed);
  CHECK(prose.hits.load() == 1);
}

TEST_CASE("bearer tokens ride along as Authorization headers") {
  DiagramGraph g = arch_b();
  std::string seen_auth;
  testutil::MockBackend capture([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(testutil::completion_reply(kFindingPp), "application/json");
  });
  BackendConfig cfg = capture.config("secured");
  cfg.api_key = "sk-test-123";
  AnalysisRequest req = build_analysis_prompt(g, "", tax());
  AnalyzerReport report = call_backend(cfg, req, g, tax());
  CHECK(report.status == ReportStatus::Ok);
  CHECK(seen_auth == "Bearer sk-test-123");
}

TEST_CASE("ASTRIDE_ENDPOINT_BASE rewrites the endpoint authority") {
  DiagramGraph g = arch_b();
  testutil::MockBackend real(testutil::canned(kFindingPp));
  BackendConfig cfg = testutil::unreachable_backend("redirected");

  setenv("ASTRIDE_ENDPOINT_BASE",
         ("http://127.0.0.1:" + std::to_string(real.port)).c_str(), 1);
  AnalysisRequest req = build_analysis_prompt(g, "", tax());
  AnalyzerReport report = call_backend(cfg, req, g, tax());
  unsetenv("ASTRIDE_ENDPOINT_BASE");

  CHECK(report.status == ReportStatus::Ok);
  CHECK(real.hits.load() == 1);
}

TEST_CASE("the wire request carries model and both messages") {
  DiagramGraph g = arch_b();
  json seen;
  testutil::MockBackend capture([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    res.set_content(testutil::completion_reply(kFindingPp), "application/json");
  });

  auto reports = run_consortium(g, {capture.config("wire")}, "ctx", tax());
  REQUIRE(reports.size() == 1);
  CHECK(seen["model"] == "mock-vlm");
  REQUIRE(seen["messages"].size() == 2);
  CHECK(seen["messages"][0]["role"] == "system");
  CHECK(seen["messages"][1]["role"] == "user");
}
