#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sentinel/detector.hpp"

namespace sentinel {

// One command invocation: what ran, with which effective parameters, and what
// it produced. config_snapshot holds every parameter needed to re-execute the
// run bit-identically under mock backends.
struct RunRecord {
  std::string run_id;
  std::string command;
  nlohmann::json config_snapshot = nlohmann::json::object();
  std::vector<nlohmann::json> outputs;
  int64_t started_ms = 0;
  int64_t finished_ms = 0;

  bool operator==(const RunRecord&) const = default;
};

// UTC timestamp plus a random hex suffix, e.g. "20260815T101530Z-3fa94c01".
std::string new_run_id();

int64_t now_ms();

// Writes <dir>/<run_id>.jsonl (header line, then one line per output) and
// appends a line to <dir>/manifest.jsonl. Returns the record path. Throws
// IoError, including when the run_id already exists in the directory.
std::string persist_run(const RunRecord& record, const std::string& dir);

// Reads a record back. Throws IoError (missing) / MalformedLine (corrupt).
RunRecord load_run(const std::string& dir, const std::string& run_id);

// Serializes every parameter that shapes a classification run: backend
// bindings (modes, seeds, endpoints), embedding dimension, k, dialogue
// settings including the full lexicon, the variant, and the index path.
nlohmann::json config_snapshot_json(const std::map<BackendKind, BackendConfig>& backends,
                                    int embed_dim, const DetectorConfig& detector,
                                    std::optional<VariantKind> variant,
                                    const std::string& index_path);

}  // namespace sentinel
