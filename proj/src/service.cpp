#include "sentinel/service.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

#include "sentinel/error.hpp"
#include "sentinel/run_store.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::BackendUnavailable:
      return 503;
    case ErrorCode::MissingFixture:
    case ErrorCode::EmptyMeme:
    case ErrorCode::MalformedLine:
    case ErrorCode::InvalidLabel:
      return 400;
    default:
      return 500;
  }
}

void set_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void set_error(httplib::Response& res, int status, ErrorCode code, const std::string& message) {
  set_json(res, status, json{{"error", message}, {"code", error_name(code)}});
}

}  // namespace

ServiceConfig load_service_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ConfigParseError, path + ": expected a JSON object");

  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).string();
  };

  ServiceConfig config;
  try {
    if (doc.contains("bind_host")) config.bind_host = doc.at("bind_host").get<std::string>();
    if (doc.contains("port")) config.port = doc.at("port").get<int>();
    if (doc.contains("index")) config.index_path = resolve(doc.at("index").get<std::string>());
    if (doc.contains("backends")) {
      config.backend_config_path = resolve(doc.at("backends").get<std::string>());
    }
    if (doc.contains("variant")) {
      const std::string name = doc.at("variant").get<std::string>();
      const auto variant = variant_from_string(name);
      if (!variant) throw Error(ErrorCode::ConfigInvalid, path + ": unknown variant '" + name + "'");
      config.variant = *variant;
    }
    if (doc.contains("k")) config.k = doc.at("k").get<int>();
    if (doc.contains("vqa")) config.vqa_config_path = resolve(doc.at("vqa").get<std::string>());
    if (doc.contains("audit")) config.audit = doc.at("audit").get<bool>();
    if (doc.contains("runs_dir")) config.runs_dir = resolve(doc.at("runs_dir").get<std::string>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  if (config.index_path.empty()) throw Error(ErrorCode::ConfigInvalid, path + ": 'index' is required");
  if (config.backend_config_path.empty()) {
    throw Error(ErrorCode::ConfigInvalid, path + ": 'backends' is required");
  }
  if (config.k < 1) throw Error(ErrorCode::ConfigInvalid, path + ": k must be >= 1");
  if (config.port < 0 || config.port > 65535) {
    throw Error(ErrorCode::ConfigInvalid, path + ": port out of range");
  }
  return config;
}

Service::Service(ServiceConfig config) : config_(std::move(config)) {
  const BackendSettings settings = load_backend_settings(config_.backend_config_path);
  backends_ = BackendSet(settings.configs, settings.context);
  index_ = load_index(config_.index_path);
  detector_.k = config_.k;
  if (!config_.vqa_config_path.empty()) {
    detector_.vqa = load_vqa_config(config_.vqa_config_path);
  } else {
    detector_.vqa.signal_lexicon = settings.context.lexicon;
  }
  if (config_.variant == VariantKind::SubLabelVqa) validate_vqa_config(detector_.vqa);

  std::map<BackendKind, BackendConfig> configs;
  for (BackendKind kind : kAllBackendKinds) configs[kind] = backends_.config(kind);
  snapshot_ = config_snapshot_json(configs, backends_.embed_dim(), detector_, config_.variant,
                                   config_.index_path);
}

Service::Service(ServiceConfig config, PartitionedIndex index, BackendSet backends,
                 DetectorConfig detector)
    : config_(std::move(config)),
      index_(std::move(index)),
      backends_(std::move(backends)),
      detector_(std::move(detector)) {
  std::map<BackendKind, BackendConfig> configs;
  for (BackendKind kind : kAllBackendKinds) configs[kind] = backends_.config(kind);
  snapshot_ = config_snapshot_json(configs, backends_.embed_dim(), detector_, config_.variant,
                                   config_.index_path);
}

Service::~Service() { stop(); }

void Service::setup_routes() {
  server_->Get("/health", [this](const httplib::Request&, httplib::Response& res) {
    set_json(res, 200, json{{"status", "ok"}, {"index_count", index_.total_count()}});
  });

  server_->Post("/classify", [this](const httplib::Request& req, httplib::Response& res) {
    const auto start = std::chrono::steady_clock::now();
    const int64_t started_ms_value = now_ms();

    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      set_error(res, 400, ErrorCode::MalformedLine, std::string("body is not JSON: ") + e.what());
      return;
    }
    if (!body.is_object() || !body.contains("id") || !body.contains("img") ||
        !body.contains("text") || !body.at("id").is_string() || !body.at("img").is_string() ||
        !body.at("text").is_string()) {
      set_error(res, 400, ErrorCode::MalformedLine,
                "body must be an object with string fields id, img, text");
      return;
    }

    MemeRecord meme;
    meme.id = body.at("id").get<std::string>();
    meme.image_ref = body.at("img").get<std::string>();
    meme.ocr_text = body.at("text").get<std::string>();
    if (meme.id.empty() || meme.image_ref.empty()) {
      set_error(res, 400, ErrorCode::MalformedLine, "id and img must be non-empty");
      return;
    }

    ClassifyDetail detail;
    try {
      detail = classify_detailed(meme, index_, backends_, detector_, config_.variant);
    } catch (const Error& e) {
      set_error(res, status_for(e.code()), e.code(), e.what());
      return;
    } catch (const std::exception& e) {
      set_error(res, 500, ErrorCode::InvalidArgument, e.what());
      return;
    }

    RunRecord record;
    record.run_id = new_run_id();
    record.command = "serve_classify";
    record.config_snapshot = snapshot_;
    record.started_ms = started_ms_value;
    record.finished_ms = now_ms();
    json output = verdict_to_json(detail.verdict);
    if (config_.audit) {
      output["prompt"] = detail.prompt_text;
      if (detail.transcript) output["transcript"] = format_transcript(*detail.transcript);
    }
    record.outputs.push_back(output);
    try {
      std::lock_guard<std::mutex> lock(persist_mutex_);
      persist_run(record, config_.runs_dir);
    } catch (const Error& e) {
      set_error(res, 500, e.code(), e.what());
      return;
    }

    const double latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    json response = verdict_to_json(detail.verdict);
    response["latency_ms"] = latency_ms;
    response["run_id"] = record.run_id;
    set_json(res, 200, response);
  });

  server_->Get("/runs/:id", [this](const httplib::Request& req, httplib::Response& res) {
    const std::string run_id = req.path_params.at("id");
    RunRecord record;
    try {
      record = load_run(config_.runs_dir, run_id);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) {
        set_error(res, 404, ErrorCode::IoError, "no run with id " + run_id);
      } else {
        set_error(res, 500, e.code(), e.what());
      }
      return;
    }
    json doc;
    doc["run_id"] = record.run_id;
    doc["command"] = record.command;
    doc["config_snapshot"] = record.config_snapshot;
    doc["started_ms"] = record.started_ms;
    doc["finished_ms"] = record.finished_ms;
    doc["outputs"] = record.outputs;
    set_json(res, 200, doc);
  });
}

int Service::start() {
  server_ = std::make_unique<httplib::Server>();
  setup_routes();

  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.bind_host);
    if (port_ <= 0) {
      throw Error(ErrorCode::IoError, "cannot bind to " + config_.bind_host);
    }
  } else {
    if (!server_->bind_to_port(config_.bind_host, config_.port)) {
      throw Error(ErrorCode::IoError,
                  "cannot bind to " + config_.bind_host + ":" + std::to_string(config_.port));
    }
    port_ = config_.port;
  }

  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void Service::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sentinel
