#pragma once

#include <optional>
#include <string>
#include <vector>

#include "astride/consortium.hpp"

namespace astride {

enum class OutputFormat { Json, Markdown };

struct RunConfig {
  std::vector<BackendConfig> backends;
  std::optional<BackendConfig> reasoner;
  int reasoner_weight = 2;
  double min_consensus = 0.0;
  OutputFormat format = OutputFormat::Json;
};

/// The built-in deterministic analyzer.
BackendConfig local_rules_backend();

// Loads and validates a backends file:
//   {"backends": [{"name", "kind", "endpoint", "model",
//                  "timeout_ms", "max_retries", "api_key"}, ...],
//    "reasoner": {...}, "reasoner_weight": 2}
// Throws ConfigError on schema or constraint violations.
RunConfig load_backends_file(const std::string& path);

}  // namespace astride
