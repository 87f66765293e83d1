#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "astride/config.hpp"
#include "astride/consortium.hpp"
#include "astride/dataset.hpp"
#include "astride/parser.hpp"
#include "astride/render.hpp"
#include "astride/schema.hpp"
#include "astride/synthesis.hpp"
#include "astride/taxonomy.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;    // unparseable diagram
constexpr int kExitIo = 2;       // file system trouble
constexpr int kExitAllFailed = 3;
constexpr int kExitUsage = 64;
constexpr int kExitConfig = 78;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write '" << out_path << "'\n";
    return kExitIo;
  }
  out << text;
  return kExitOk;
}

astride::Taxonomy load_taxonomy_or_default(const std::string& path) {
  if (path.empty()) return astride::Taxonomy::defaults();
  return astride::Taxonomy::load_file(path);
}

struct AnalyzeOptions {
  std::string input;
  std::string backends_file;
  std::string reasoner_name;
  std::string taxonomy_file;
  std::string context;
  std::string out_path;
  std::string format = "json";
  double min_consensus = 0.0;
  bool offline = false;
};

int cmd_validate(const std::string& input) {
  auto source = read_file(input);
  if (!source) {
    std::cerr << "error: cannot read '" << input << "'\n";
    return kExitIo;
  }
  try {
    astride::DiagramGraph graph = astride::parse_diagram(*source);
    std::cout << astride::serialize_diagram(graph);
    return kExitOk;
  } catch (const astride::GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

int cmd_analyze(const AnalyzeOptions& opts) {
  astride::Taxonomy taxonomy;
  astride::RunConfig config;
  try {
    taxonomy = load_taxonomy_or_default(opts.taxonomy_file);
    if (opts.offline || opts.backends_file.empty()) {
      config.backends = {astride::local_rules_backend()};
    } else {
      config = astride::load_backends_file(opts.backends_file);
      if (!opts.reasoner_name.empty()) {
        auto it = std::find_if(config.backends.begin(), config.backends.end(),
                               [&](const astride::BackendConfig& b) {
                                 return b.name == opts.reasoner_name;
                               });
        if (it == config.backends.end())
          throw astride::ConfigError("no backend named '" + opts.reasoner_name +
                                     "' to promote to reasoner");
        config.reasoner = *it;
        config.backends.erase(it);
        if (config.backends.empty())
          throw astride::ConfigError(
              "promoting the only backend to reasoner leaves no analyzers");
      }
    }
  } catch (const astride::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  auto source = read_file(opts.input);
  if (!source) {
    std::cerr << "error: cannot read '" << opts.input << "'\n";
    return kExitIo;
  }

  astride::DiagramGraph graph;
  try {
    graph = astride::parse_diagram(*source);
  } catch (const astride::GraphError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }

  astride::ThreatModel model;
  try {
    std::vector<astride::AnalyzerReport> reports =
        astride::run_consortium(graph, config.backends, opts.context, taxonomy);
    if (config.reasoner && !opts.offline) {
      model = astride::synthesize_with_reasoner(
          reports, graph, *config.reasoner, taxonomy, opts.min_consensus,
          config.reasoner_weight);
    } else {
      model = astride::synthesize(reports, graph, opts.min_consensus);
    }
  } catch (const astride::AllBackendsFailed& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAllFailed;
  }

  std::string rendered =
      opts.format == "markdown"
          ? astride::render_markdown(model, graph)
          : astride::threat_model_to_json(model).dump(2) + "\n";
  return write_output(rendered, opts.out_path);
}

int cmd_gen_dataset(int count, uint64_t seed, const std::string& out_dir,
                    const std::string& taxonomy_file) {
  astride::Taxonomy taxonomy;
  try {
    taxonomy = load_taxonomy_or_default(taxonomy_file);
  } catch (const astride::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    astride::GeneratorOptions options;
    std::vector<astride::DatasetRecord> records =
        astride::generate(count, seed, taxonomy, options);
    astride::DatasetSplit split = astride::split_records(std::move(records), seed);
    astride::write_dataset(split, seed, options, taxonomy, out_dir);
    std::cout << "wrote " << count << " records to " << out_dir << " (train "
              << split.train.size() << ", validation " << split.validation.size()
              << ", test " << split.test.size() << ")\n";
    return kExitOk;
  } catch (const astride::TooFewRecords& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}

int cmd_taxonomy(const std::string& taxonomy_file, const std::string& out_path) {
  try {
    astride::Taxonomy taxonomy = load_taxonomy_or_default(taxonomy_file);
    return write_output(taxonomy.to_json().dump(2) + "\n", out_path);
  } catch (const astride::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"astride: automated threat modeling for agentic AI architectures"};
  app.require_subcommand(1);

  std::string validate_input;
  CLI::App* validate =
      app.add_subcommand("validate", "Parse a diagram and print its canonical form");
  validate->add_option("path", validate_input, "diagram file (.mmd)")->required();

  AnalyzeOptions analyze_opts;
  CLI::App* analyze =
      app.add_subcommand("analyze", "Run the threat modeling pipeline on a diagram");
  analyze->add_option("path", analyze_opts.input, "diagram file (.mmd)")->required();
  analyze->add_option("--backends", analyze_opts.backends_file,
                      "backends config file (JSON)");
  analyze->add_option("--reasoner", analyze_opts.reasoner_name,
                      "promote the named backend to reasoner");
  analyze->add_flag("--offline", analyze_opts.offline,
                    "use only the built-in rule engine");
  analyze->add_option("--min-consensus", analyze_opts.min_consensus,
                      "drop findings below this consensus score")
      ->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--format", analyze_opts.format, "json or markdown")
      ->check(CLI::IsMember({"json", "markdown"}));
  analyze->add_option("--out", analyze_opts.out_path, "output file (default stdout)");
  analyze->add_option("--context", analyze_opts.context,
                      "free-text system context for analyzer prompts");
  analyze->add_option("--taxonomy", analyze_opts.taxonomy_file,
                      "taxonomy override file (JSON)");

  int gen_count = 0;
  uint64_t gen_seed = 42;
  std::string gen_out = "dataset";
  std::string gen_taxonomy;
  CLI::App* gen = app.add_subcommand("gen-dataset",
                                     "Generate a labeled diagram corpus with "
                                     "train/validation/test splits");
  gen->add_option("--count", gen_count, "number of records")
      ->required()
      ->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output directory");
  gen->add_option("--taxonomy", gen_taxonomy, "taxonomy override file (JSON)");

  std::string tax_file;
  std::string tax_out;
  CLI::App* tax = app.add_subcommand(
      "taxonomy", "Print the effective applicability matrix and mitigations");
  tax->add_option("--taxonomy", tax_file, "taxonomy override file (JSON)");
  tax->add_option("--out", tax_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (validate->parsed()) return cmd_validate(validate_input);
  if (analyze->parsed()) return cmd_analyze(analyze_opts);
  if (gen->parsed())
    return cmd_gen_dataset(gen_count, gen_seed, gen_out, gen_taxonomy);
  if (tax->parsed()) return cmd_taxonomy(tax_file, tax_out);
  return kExitUsage;
}
