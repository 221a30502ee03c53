#include "sentinel/backend.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "sentinel/error.hpp"
#include "sentinel/mock_backend.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, path + ": " + e.what());
  }
  return doc;
}

struct ParsedEndpoint {
  std::string base;  // scheme://host[:port]
  std::string path;  // leading slash
};

ParsedEndpoint split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::ConfigInvalid, "endpoint must carry a scheme: " + endpoint);
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, "/"};
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

BackendConfig parse_config_entry(BackendKind kind, const json& entry) {
  if (!entry.is_object()) {
    throw Error(ErrorCode::ConfigInvalid, to_string(kind) + ": config entry must be an object");
  }
  BackendConfig config;
  config.kind = kind;
  for (const auto& [key, value] : entry.items()) {
    try {
      if (key == "mode") {
        const std::string mode = value.get<std::string>();
        if (mode == "mock") {
          config.mode = BackendMode::Mock;
        } else if (mode == "http") {
          config.mode = BackendMode::Http;
        } else {
          throw Error(ErrorCode::ConfigInvalid, to_string(kind) + ": unknown mode '" + mode + "'");
        }
      } else if (key == "endpoint") {
        config.endpoint = value.get<std::string>();
      } else if (key == "timeout_ms") {
        config.timeout_ms = value.get<uint32_t>();
      } else if (key == "max_attempts") {
        config.max_attempts = value.get<uint32_t>();
      } else if (key == "backoff_ms") {
        config.backoff_ms = value.get<uint32_t>();
      } else if (key == "seed") {
        config.seed = value.get<uint64_t>();
      } else {
        throw Error(ErrorCode::ConfigInvalid, to_string(kind) + ": unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::ConfigInvalid, to_string(kind) + "." + key + ": " + e.what());
    }
  }
  validate_config(config);
  return config;
}

std::map<BackendKind, BackendConfig> parse_backend_config_json(const json& doc,
                                                               const std::string& path) {
  if (!doc.is_object()) {
    throw Error(ErrorCode::ConfigParseError, path + ": top level must be a JSON object");
  }
  std::map<BackendKind, BackendConfig> configs;
  for (const auto& [key, value] : doc.items()) {
    if (key == "fixtures" || key == "lexicon" || key == "embed_dim") continue;
    auto kind = backend_kind_from_string(key);
    if (!kind) throw Error(ErrorCode::ConfigInvalid, path + ": unknown backend kind '" + key + "'");
    configs[*kind] = parse_config_entry(*kind, value);
  }
  for (BackendKind kind : kAllBackendKinds) {
    if (configs.count(kind)) continue;
    BackendConfig config;
    config.kind = kind;
    config.mode = BackendMode::Mock;
    config.seed = 0;
    configs[kind] = config;
  }
  return configs;
}

BackendResponse dispatch_mock(const BackendConfig& config, const BackendRequest& request,
                              const MockContext& ctx) {
  const uint64_t seed = *config.seed;
  BackendResponse response;
  if (request.kind == BackendKind::Embedder) {
    auto it = request.inputs.find("text");
    if (it == request.inputs.end()) {
      throw Error(ErrorCode::InvalidArgument, "embedder request needs a 'text' input");
    }
    response.output = mock_embed(it->second, seed, ctx.embed_dim);
  } else {
    response.output = mock_generate(request.kind, request.inputs, request.image_ref, seed, ctx);
  }
  return response;
}

BackendResponse dispatch_http(const BackendConfig& config, const BackendRequest& request) {
  const ParsedEndpoint endpoint = split_endpoint(*config.endpoint);
  httplib::Client client(endpoint.base);
  client.set_connection_timeout(std::chrono::milliseconds(config.timeout_ms));
  client.set_read_timeout(std::chrono::milliseconds(config.timeout_ms));
  client.set_write_timeout(std::chrono::milliseconds(config.timeout_ms));

  const std::string body = backend_request_to_json(request);
  uint32_t attempt = 0;
  std::string last_failure;
  while (attempt < config.max_attempts) {
    if (attempt > 0) {
      const uint64_t shift = std::min<uint64_t>(attempt - 1, 20);
      std::this_thread::sleep_for(
          std::chrono::milliseconds(static_cast<uint64_t>(config.backoff_ms) << shift));
    }
    ++attempt;
    httplib::Result result = client.Post(endpoint.path, body, "application/json");
    if (!result) {
      last_failure = "transport error: " + httplib::to_string(result.error());
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      last_failure = "status " + std::to_string(result->status);
      continue;
    }
    BackendResponse response = parse_backend_response_json(result->body);
    response.attempts = attempt;
    const bool wants_vector = request.kind == BackendKind::Embedder;
    const bool got_vector = std::holds_alternative<std::vector<double>>(response.output);
    if (wants_vector != got_vector) {
      throw Error(ErrorCode::ProtocolError,
                  to_string(request.kind) + ": response output has the wrong shape");
    }
    return response;
  }
  throw Error(ErrorCode::BackendUnavailable,
              to_string(request.kind) + " at " + *config.endpoint + " after " +
                  std::to_string(attempt) + " attempt(s): " + last_failure);
}

}  // namespace

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Ocr: return "ocr";
    case BackendKind::Captioner: return "captioner";
    case BackendKind::Embedder: return "embedder";
    case BackendKind::QuestionGen: return "questiongen";
    case BackendKind::Answerer: return "answerer";
    case BackendKind::Judge: return "judge";
    case BackendKind::VqaScorer: return "vqascorer";
  }
  return "unknown";
}

std::optional<BackendKind> backend_kind_from_string(const std::string& s) {
  for (BackendKind kind : kAllBackendKinds) {
    if (to_string(kind) == s) return kind;
  }
  return std::nullopt;
}

void validate_config(const BackendConfig& config) {
  if (config.timeout_ms < 1) {
    throw Error(ErrorCode::ConfigInvalid, to_string(config.kind) + ": timeout_ms must be >= 1");
  }
  if (config.max_attempts < 1) {
    throw Error(ErrorCode::ConfigInvalid, to_string(config.kind) + ": max_attempts must be >= 1");
  }
  if (config.backoff_ms < 1) {
    throw Error(ErrorCode::ConfigInvalid, to_string(config.kind) + ": backoff_ms must be >= 1");
  }
  if (config.mode == BackendMode::Http && !config.endpoint) {
    throw Error(ErrorCode::ConfigInvalid, to_string(config.kind) + ": http mode needs an endpoint");
  }
  if (config.mode == BackendMode::Mock && !config.seed) {
    throw Error(ErrorCode::ConfigInvalid, to_string(config.kind) + ": mock mode needs a seed");
  }
}

const std::string& BackendResponse::text() const {
  if (const auto* s = std::get_if<std::string>(&output)) return *s;
  throw Error(ErrorCode::ProtocolError, "expected text output, got a vector");
}

const std::vector<double>& BackendResponse::vector_output() const {
  if (const auto* v = std::get_if<std::vector<double>>(&output)) return *v;
  throw Error(ErrorCode::ProtocolError, "expected vector output, got text");
}

MockContext load_fixtures_context(const std::string& fixtures_path, const std::string& lexicon_path,
                                  int embed_dim) {
  MockContext ctx;
  ctx.embed_dim = embed_dim;
  if (!fixtures_path.empty()) {
    const json doc = read_json_file(fixtures_path);
    if (!doc.is_object()) {
      throw Error(ErrorCode::ConfigParseError, fixtures_path + ": expected an object keyed by image_ref");
    }
    for (const auto& [image_ref, entry] : doc.items()) {
      if (!entry.is_object() || !entry.contains("ocr") || !entry.contains("caption")) {
        throw Error(ErrorCode::ConfigParseError,
                    fixtures_path + ": fixture '" + image_ref + "' needs ocr and caption");
      }
      try {
        ctx.fixtures[image_ref] = Fixture{entry.at("ocr").get<std::string>(),
                                          entry.at("caption").get<std::string>()};
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigParseError, fixtures_path + ": " + e.what());
      }
    }
  }
  if (!lexicon_path.empty()) ctx.lexicon = load_lexicon(lexicon_path);
  return ctx;
}

std::string backend_request_to_json(const BackendRequest& request) {
  json doc;
  doc["kind"] = to_string(request.kind);
  if (request.image_ref) doc["image_ref"] = *request.image_ref;
  doc["inputs"] = json::object();
  for (const auto& [name, value] : request.inputs) doc["inputs"][name] = value;
  return doc.dump();
}

BackendResponse parse_backend_response_json(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ProtocolError, std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("output")) {
    throw Error(ErrorCode::ProtocolError, "response needs an 'output' field");
  }
  BackendResponse response;
  const json& output = doc.at("output");
  if (output.is_string()) {
    response.output = output.get<std::string>();
  } else if (output.is_array()) {
    std::vector<double> values;
    values.reserve(output.size());
    for (const json& v : output) {
      if (!v.is_number()) throw Error(ErrorCode::ProtocolError, "vector output must be numeric");
      values.push_back(v.get<double>());
    }
    response.output = std::move(values);
  } else {
    throw Error(ErrorCode::ProtocolError, "output must be a string or a number array");
  }
  if (doc.contains("confidence")) {
    const json& conf = doc.at("confidence");
    if (!conf.is_number()) throw Error(ErrorCode::ProtocolError, "confidence must be a number");
    const double value = conf.get<double>();
    if (!(value >= 0.0 && value <= 1.0)) {
      throw Error(ErrorCode::ProtocolError, "confidence must lie in [0,1]");
    }
    response.confidence = value;
  }
  return response;
}

BackendResponse dispatch(const BackendConfig& config, const BackendRequest& request,
                         const MockContext& ctx) {
  if (request.kind != config.kind) {
    throw Error(ErrorCode::KindMismatch, "request for " + to_string(request.kind) +
                                             " routed to a " + to_string(config.kind) + " backend");
  }
  validate_config(config);
  return config.mode == BackendMode::Mock ? dispatch_mock(config, request, ctx)
                                          : dispatch_http(config, request);
}

BackendSet::BackendSet(std::map<BackendKind, BackendConfig> configs, MockContext ctx)
    : configs_(std::move(configs)), ctx_(std::move(ctx)) {
  for (BackendKind kind : kAllBackendKinds) {
    if (!configs_.count(kind)) {
      throw Error(ErrorCode::ConfigInvalid, "no backend configured for " + to_string(kind));
    }
    validate_config(configs_.at(kind));
  }
}

BackendSet BackendSet::all_mock(uint64_t seed, MockContext ctx) {
  std::map<BackendKind, BackendConfig> configs;
  for (BackendKind kind : kAllBackendKinds) {
    BackendConfig config;
    config.kind = kind;
    config.mode = BackendMode::Mock;
    config.seed = seed;
    configs[kind] = config;
  }
  return BackendSet(std::move(configs), std::move(ctx));
}

BackendResponse BackendSet::call(BackendKind kind, BackendRequest request) const {
  request.kind = kind;
  return dispatch(config(kind), request, ctx_);
}

std::vector<double> BackendSet::embed(const std::string& text) const {
  BackendRequest request;
  request.inputs["text"] = text;
  std::vector<double> vec = call(BackendKind::Embedder, std::move(request)).vector_output();
  if (static_cast<int>(vec.size()) != ctx_.embed_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedder returned " + std::to_string(vec.size()) + " components, expected " +
                    std::to_string(ctx_.embed_dim));
  }
  double norm2 = 0.0;
  for (double v : vec) {
    if (!std::isfinite(v)) throw Error(ErrorCode::ProtocolError, "embedding has a non-finite component");
    norm2 += v * v;
  }
  if (norm2 == 0.0) throw Error(ErrorCode::ZeroVector, "embedder returned the zero vector");
  if (std::abs(norm2 - 1.0) > 1e-12) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (double& v : vec) v *= inv;
  }
  return vec;
}

std::string BackendSet::text_call(BackendKind kind, std::map<std::string, std::string> inputs,
                                  std::optional<std::string> image_ref) const {
  BackendRequest request;
  request.inputs = std::move(inputs);
  request.image_ref = std::move(image_ref);
  return call(kind, std::move(request)).text();
}

const BackendConfig& BackendSet::config(BackendKind kind) const {
  auto it = configs_.find(kind);
  if (it == configs_.end()) {
    throw Error(ErrorCode::ConfigInvalid, "no backend configured for " + to_string(kind));
  }
  return it->second;
}

std::map<BackendKind, BackendConfig> load_backend_config(const std::string& path) {
  return parse_backend_config_json(read_json_file(path), path);
}

BackendSettings load_backend_settings(const std::string& path) {
  const json doc = read_json_file(path);
  BackendSettings settings;
  settings.configs = parse_backend_config_json(doc, path);

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  int embed_dim = 64;
  try {
    if (doc.contains("embed_dim")) embed_dim = doc.at("embed_dim").get<int>();
    if (doc.contains("fixtures")) settings.fixtures_path = resolve(doc.at("fixtures").get<std::string>());
    if (doc.contains("lexicon")) settings.lexicon_path = resolve(doc.at("lexicon").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  if (embed_dim < 2 || embed_dim > 128) {
    throw Error(ErrorCode::ConfigInvalid, path + ": embed_dim must lie in [2,128]");
  }
  settings.context = load_fixtures_context(settings.fixtures_path, settings.lexicon_path, embed_dim);
  return settings;
}

}  // namespace sentinel
