#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "sentinel/backend.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/vqa.hpp"

namespace httplib {
class Server;
}

namespace sentinel {

struct ServiceConfig {
  std::string bind_host = "127.0.0.1";
  int port = 0;  // 0 picks an ephemeral port
  std::string index_path;
  std::string backend_config_path;
  VariantKind variant = VariantKind::SubLabel;
  int k = 5;
  std::string vqa_config_path;  // optional; defaults come from the lexicon in the backend config
  bool audit = false;
  std::string runs_dir = "runs";
};

// JSON file with keys bind_host, port, index, backends, variant, k, vqa,
// audit, runs_dir. Relative paths resolve against the config file's directory.
ServiceConfig load_service_config(const std::string& path);

// Classification service: POST /classify, GET /health, GET /runs/<id>.
// The index is loaded once and never mutated while serving.
class Service {
 public:
  explicit Service(ServiceConfig config);
  Service(ServiceConfig config, PartitionedIndex index, BackendSet backends,
          DetectorConfig detector);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();

  int port() const { return port_; }
  size_t index_count() const { return index_.total_count(); }

 private:
  void setup_routes();

  ServiceConfig config_;
  PartitionedIndex index_;
  BackendSet backends_;
  DetectorConfig detector_;
  nlohmann::json snapshot_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::mutex persist_mutex_;
  int port_ = 0;
};

}  // namespace sentinel
