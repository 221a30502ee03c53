#pragma once

#include <map>
#include <string>
#include <vector>

#include "sentinel/types.hpp"

namespace sentinel {

// Aggregate health report for a dataset. Problems are counted, not thrown.
struct ValidationSummary {
  size_t n = 0;
  std::map<std::string, size_t> duplicate_ids;  // id -> occurrence count (>1 only)
  std::vector<std::string> empty_image_refs;    // ids with empty img
  size_t hateful = 0;
  size_t non_hateful = 0;
  size_t unlabeled = 0;
};

// Parses one UTF-8 JSONL dataset line with keys id, img, text and optional
// label (0/1). caption starts empty; an optional "caption" key is honored so
// enriched files round-trip.
MemeRecord parse_dataset_line(const std::string& line);

// Inverse of parse_dataset_line. caption/label keys appear only when set.
std::string serialize_record(const MemeRecord& record);

ValidationSummary validate_dataset(const std::vector<MemeRecord>& records);

// Reads a whole JSONL file; line numbers are attached to parse errors.
std::vector<MemeRecord> load_dataset(const std::string& path);

}  // namespace sentinel
