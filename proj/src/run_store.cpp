#include "sentinel/run_store.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <random>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

std::filesystem::path record_path(const std::string& dir, const std::string& run_id) {
  return std::filesystem::path(dir) / (run_id + ".jsonl");
}

}  // namespace

std::string new_run_id() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);

  static thread_local std::mt19937_64 rng(std::random_device{}());
  char suffix[16];
  std::snprintf(suffix, sizeof(suffix), "%08x", static_cast<uint32_t>(rng()));
  return std::string(stamp) + "-" + suffix;
}

int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string persist_run(const RunRecord& record, const std::string& dir) {
  if (record.run_id.empty()) throw Error(ErrorCode::InvalidArgument, "run_id is empty");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());

  const std::filesystem::path path = record_path(dir, record.run_id);
  if (std::filesystem::exists(path)) {
    throw Error(ErrorCode::IoError, "run " + record.run_id + " already exists in " + dir);
  }

  json header;
  header["run_id"] = record.run_id;
  header["command"] = record.command;
  header["config_snapshot"] = record.config_snapshot;
  header["started_ms"] = record.started_ms;
  header["finished_ms"] = record.finished_ms;
  header["outputs"] = record.outputs.size();

  const std::string tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    out << header.dump() << '\n';
    for (const json& output : record.outputs) out << output.dump() << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to " + tmp + " failed");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot move " + tmp + " to " + path.string() + ": " + ec.message());
  }

  json manifest_line;
  manifest_line["run_id"] = record.run_id;
  manifest_line["command"] = record.command;
  manifest_line["started_ms"] = record.started_ms;
  manifest_line["finished_ms"] = record.finished_ms;
  manifest_line["outputs"] = record.outputs.size();
  manifest_line["path"] = record.run_id + ".jsonl";
  {
    std::ofstream manifest(std::filesystem::path(dir) / "manifest.jsonl",
                           std::ios::binary | std::ios::app);
    if (!manifest) throw Error(ErrorCode::IoError, "cannot open manifest in " + dir);
    manifest << manifest_line.dump() << '\n';
    manifest.flush();
    if (!manifest) throw Error(ErrorCode::IoError, "manifest append in " + dir + " failed");
  }
  return path.string();
}

RunRecord load_run(const std::string& dir, const std::string& run_id) {
  const std::filesystem::path path = record_path(dir, run_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "no run record at " + path.string());

  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::MalformedLine, path.string() + ": missing header line");
  }

  RunRecord record;
  size_t expected_outputs = 0;
  try {
    const json header = json::parse(line);
    record.run_id = header.at("run_id").get<std::string>();
    record.command = header.at("command").get<std::string>();
    record.config_snapshot = header.at("config_snapshot");
    record.started_ms = header.at("started_ms").get<int64_t>();
    record.finished_ms = header.at("finished_ms").get<int64_t>();
    expected_outputs = header.at("outputs").get<size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedLine, path.string() + ": bad header: " + e.what());
  }

  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      record.outputs.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedLine,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (record.outputs.size() != expected_outputs) {
    throw Error(ErrorCode::MalformedLine,
                path.string() + ": header says " + std::to_string(expected_outputs) +
                    " outputs, found " + std::to_string(record.outputs.size()));
  }
  return record;
}

nlohmann::json config_snapshot_json(const std::map<BackendKind, BackendConfig>& backends,
                                    int embed_dim, const DetectorConfig& detector,
                                    std::optional<VariantKind> variant,
                                    const std::string& index_path) {
  json snapshot;
  snapshot["backends"] = json::object();
  for (const auto& [kind, config] : backends) {
    json entry;
    entry["mode"] = config.mode == BackendMode::Mock ? "mock" : "http";
    entry["timeout_ms"] = config.timeout_ms;
    entry["max_attempts"] = config.max_attempts;
    entry["backoff_ms"] = config.backoff_ms;
    if (config.endpoint) entry["endpoint"] = *config.endpoint;
    if (config.seed) entry["seed"] = *config.seed;
    snapshot["backends"][to_string(kind)] = std::move(entry);
  }
  snapshot["embed_dim"] = embed_dim;
  snapshot["k"] = detector.k;
  snapshot["vqa"] = {{"max_turns", detector.vqa.max_turns},
                     {"dedup_threshold", detector.vqa.dedup_threshold}};
  snapshot["vqa"]["lexicon"] = json::array();
  for (const LexiconEntry& entry : detector.vqa.signal_lexicon) {
    snapshot["vqa"]["lexicon"].push_back({{"tag", entry.tag}, {"triggers", entry.triggers}});
  }
  if (variant) snapshot["variant"] = to_string(*variant);
  snapshot["index_path"] = index_path;
  return snapshot;
}

}  // namespace sentinel
