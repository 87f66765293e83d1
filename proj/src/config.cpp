#include "astride/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace astride {

using nlohmann::json;

BackendConfig local_rules_backend() {
  BackendConfig cfg;
  cfg.name = kLocalRulesAnalyzer;
  cfg.kind = BackendKind::LocalRules;
  return cfg;
}

namespace {

BackendConfig parse_backend(const json& j) {
  if (!j.is_object()) throw ConfigError("backend entry must be an object");
  BackendConfig cfg;

  if (!j.contains("name") || !j["name"].is_string() ||
      j["name"].get<std::string>().empty())
    throw ConfigError("backend entry needs a non-empty name");
  cfg.name = j["name"].get<std::string>();

  std::string kind = j.value("kind", std::string("remote"));
  if (kind == "remote") {
    cfg.kind = BackendKind::Remote;
  } else if (kind == "local-rules") {
    cfg.kind = BackendKind::LocalRules;
  } else {
    throw ConfigError("backend '" + cfg.name + "' has unknown kind '" + kind +
                      "'");
  }

  cfg.endpoint = j.value("endpoint", std::string());
  cfg.model = j.value("model", std::string());
  cfg.api_key = j.value("api_key", std::string());

  if (j.contains("timeout_ms")) {
    if (!j["timeout_ms"].is_number_integer() ||
        j["timeout_ms"].get<long>() <= 0)
      throw ConfigError("backend '" + cfg.name +
                        "' timeout_ms must be a positive integer");
    cfg.timeout = std::chrono::milliseconds(j["timeout_ms"].get<long>());
  }
  if (j.contains("max_retries")) {
    if (!j["max_retries"].is_number_integer() ||
        j["max_retries"].get<int>() < 0)
      throw ConfigError("backend '" + cfg.name +
                        "' max_retries must be a non-negative integer");
    cfg.max_retries = j["max_retries"].get<int>();
  }

  if (cfg.kind == BackendKind::Remote) {
    if (cfg.endpoint.empty())
      throw ConfigError("remote backend '" + cfg.name + "' needs an endpoint");
    if (cfg.model.empty())
      throw ConfigError("remote backend '" + cfg.name + "' needs a model");
  }
  return cfg;
}

}  // namespace

RunConfig load_backends_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open backends file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("backends file '" + path + "' is not valid JSON: " +
                      e.what());
  }
  if (!doc.is_object() || !doc.contains("backends") ||
      !doc["backends"].is_array() || doc["backends"].empty())
    throw ConfigError("backends file needs a non-empty 'backends' array");

  RunConfig cfg;
  std::set<std::string> names;
  for (const json& entry : doc["backends"]) {
    BackendConfig backend = parse_backend(entry);
    if (!names.insert(backend.name).second)
      throw ConfigError("backend names must be unique; '" + backend.name +
                        "' repeats");
    cfg.backends.push_back(std::move(backend));
  }

  if (doc.contains("reasoner")) {
    BackendConfig reasoner = parse_backend(doc["reasoner"]);
    if (!names.insert(reasoner.name).second)
      throw ConfigError("reasoner name '" + reasoner.name +
                        "' collides with a backend name");
    cfg.reasoner = std::move(reasoner);
  }
  if (doc.contains("reasoner_weight")) {
    if (!doc["reasoner_weight"].is_number_integer() ||
        doc["reasoner_weight"].get<int>() < 1)
      throw ConfigError("reasoner_weight must be a positive integer");
    cfg.reasoner_weight = doc["reasoner_weight"].get<int>();
  }
  return cfg;
}

}  // namespace astride
