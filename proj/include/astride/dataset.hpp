#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "astride/rules.hpp"
#include "astride/taxonomy.hpp"

namespace astride {

enum class DiagramType { DataFlow, Component, TrustBoundary };

std::string_view to_string(DiagramType t);
std::optional<DiagramType> diagram_type_from_string(std::string_view name);

struct DatasetRecord {
  std::string content;  // diagram source text
  DiagramType type = DiagramType::DataFlow;
  std::string instruction;
  std::vector<Finding> expected;  // labels from the rule engine
};

struct DatasetSplit {
  std::vector<DatasetRecord> train;
  std::vector<DatasetRecord> validation;
  std::vector<DatasetRecord> test;
};

struct TooFewRecords : std::runtime_error {
  explicit TooFewRecords(size_t n)
      : std::runtime_error("cannot split " + std::to_string(n) +
                           " records; at least 6 are required") {}
};

struct GeneratorOptions {
  // pipeline, hub-and-spoke, multi-agent mesh
  std::array<int, 3> template_weights{1, 1, 1};
};

// Deterministic synthetic corpus: every record is a randomized topology
// (3-12 nodes) rendered as diagram text, labeled by the rule engine.
std::vector<DatasetRecord> generate(int count, uint64_t seed,
                                    const Taxonomy& taxonomy,
                                    const GeneratorOptions& options = {});

struct SplitSizes {
  size_t train = 0;
  size_t validation = 0;
  size_t test = 0;
};

/// train = round(2n/3), validation = round(n/6), test takes the remainder.
SplitSizes split_sizes(size_t n);

/// Seeded shuffle, then the split_sizes partition. Throws TooFewRecords
/// below 6 records.
DatasetSplit split_records(std::vector<DatasetRecord> records, uint64_t seed);

// Writes train.jsonl / validation.jsonl / test.jsonl plus manifest.json
// into out_dir (created if missing). Byte-stable for fixed inputs.
void write_dataset(const DatasetSplit& split, uint64_t seed,
                   const GeneratorOptions& options, const Taxonomy& taxonomy,
                   const std::filesystem::path& out_dir);

}  // namespace astride
