#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "astride/config.hpp"
#include "astride/consortium.hpp"
#include "astride/dataset.hpp"
#include "astride/parser.hpp"
#include "astride/render.hpp"
#include "astride/schema.hpp"
#include "astride/synthesis.hpp"
#include "astride/taxonomy.hpp"

namespace py = pybind11;

namespace {

astride::Taxonomy taxonomy_from(const std::string& overrides_json) {
  if (overrides_json.empty()) return astride::Taxonomy::defaults();
  return astride::Taxonomy::from_json(nlohmann::json::parse(overrides_json));
}

std::string parse_to_json(const std::string& source) {
  return astride::graph_to_json(astride::parse_diagram(source)).dump();
}

std::string canonical_text(const std::string& source) {
  return astride::serialize_diagram(astride::parse_diagram(source));
}

std::string elicit_json(const std::string& source,
                        const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  astride::DiagramGraph g = astride::parse_diagram(source);
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const astride::Finding& f : astride::elicit(g, tax))
    out.push_back(astride::finding_to_json(f));
  return out.dump();
}

std::vector<std::string> tainted(const std::string& source,
                                 const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  astride::DiagramGraph g = astride::parse_diagram(source);
  auto set = astride::tainted_nodes(g, tax);
  return {set.begin(), set.end()};
}

std::string analyze_offline_json(const std::string& source,
                                 double min_consensus,
                                 const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  astride::DiagramGraph g = astride::parse_diagram(source);
  auto reports =
      astride::run_consortium(g, {astride::local_rules_backend()}, "", tax);
  astride::ThreatModel model = astride::synthesize(reports, g, min_consensus);
  return astride::threat_model_to_json(model).dump();
}

std::string analyze_offline_markdown(const std::string& source,
                                     double min_consensus,
                                     const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  astride::DiagramGraph g = astride::parse_diagram(source);
  auto reports =
      astride::run_consortium(g, {astride::local_rules_backend()}, "", tax);
  return astride::render_markdown(astride::synthesize(reports, g, min_consensus),
                                  g);
}

std::string analysis_prompt_json(const std::string& source,
                                 const std::string& context) {
  astride::DiagramGraph g = astride::parse_diagram(source);
  return astride::request_to_json(
             astride::build_analysis_prompt(g, context,
                                            astride::Taxonomy::defaults()))
      .dump();
}

std::string parse_report_json(const std::string& raw,
                              const std::string& analyzer,
                              const std::string& source) {
  astride::DiagramGraph g = astride::parse_diagram(source);
  return astride::report_to_json(astride::parse_report(
                                     raw, analyzer, g,
                                     astride::Taxonomy::defaults()))
      .dump();
}

std::string generate_dataset_json(int count, uint64_t seed,
                                  const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const astride::DatasetRecord& rec : astride::generate(count, seed, tax))
    out.push_back(astride::record_to_json(rec));
  return out.dump();
}

py::tuple split_sizes_py(size_t n) {
  astride::SplitSizes sizes = astride::split_sizes(n);
  return py::make_tuple(sizes.train, sizes.validation, sizes.test);
}

void write_dataset_py(int count, uint64_t seed, const std::string& out_dir,
                      const std::string& overrides_json) {
  astride::Taxonomy tax = taxonomy_from(overrides_json);
  astride::GeneratorOptions options;
  auto records = astride::generate(count, seed, tax, options);
  astride::write_dataset(astride::split_records(std::move(records), seed), seed,
                         options, tax, out_dir);
}

std::string taxonomy_json(const std::string& overrides_json) {
  return taxonomy_from(overrides_json).to_json().dump();
}

std::string normalize_target_py(const std::string& name,
                                const std::string& source) {
  astride::DiagramGraph g = astride::parse_diagram(source);
  return astride::target_to_json(astride::normalize_target(name, g)).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "astride core bindings (JSON-string interface)";

  py::register_exception<astride::GraphError>(m, "GraphError");
  py::register_exception<astride::ConfigError>(m, "ConfigError");

  m.def("parse_diagram", &parse_to_json, py::arg("source"),
        "Parse diagram text; returns the graph as a JSON string.");
  m.def("canonicalize", &canonical_text, py::arg("source"),
        "Parse and re-serialize diagram text into canonical form.");
  m.def("elicit", &elicit_json, py::arg("source"),
        py::arg("taxonomy_overrides") = std::string(),
        "Run the rule engine; returns findings as a JSON array string.");
  m.def("tainted_nodes", &tainted, py::arg("source"),
        py::arg("taxonomy_overrides") = std::string());
  m.def("analyze_offline", &analyze_offline_json, py::arg("source"),
        py::arg("min_consensus") = 0.0,
        py::arg("taxonomy_overrides") = std::string(),
        "Offline pipeline: parse, elicit, synthesize; returns the threat "
        "model as a JSON string.");
  m.def("analyze_offline_markdown", &analyze_offline_markdown,
        py::arg("source"), py::arg("min_consensus") = 0.0,
        py::arg("taxonomy_overrides") = std::string());
  m.def("build_analysis_prompt", &analysis_prompt_json, py::arg("source"),
        py::arg("context") = std::string());
  m.def("parse_report", &parse_report_json, py::arg("raw"), py::arg("analyzer"),
        py::arg("source"));
  m.def("generate_dataset", &generate_dataset_json, py::arg("count"),
        py::arg("seed"), py::arg("taxonomy_overrides") = std::string());
  m.def("split_sizes", &split_sizes_py, py::arg("n"));
  m.def("write_dataset", &write_dataset_py, py::arg("count"), py::arg("seed"),
        py::arg("out_dir"), py::arg("taxonomy_overrides") = std::string());
  m.def("taxonomy", &taxonomy_json,
        py::arg("taxonomy_overrides") = std::string());
  m.def("normalize_target", &normalize_target_py, py::arg("name"),
        py::arg("source"));
}
