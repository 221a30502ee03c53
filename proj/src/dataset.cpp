#include "sentinel/dataset.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sentinel/error.hpp"

namespace sentinel {

using nlohmann::json;

MemeRecord parse_dataset_line(const std::string& line) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedLine, e.what());
  }
  if (!obj.is_object()) throw Error(ErrorCode::MalformedLine, "line is not a JSON object");
  for (const char* key : {"id", "img", "text"}) {
    if (!obj.contains(key)) throw Error(ErrorCode::MalformedLine, std::string("missing key: ") + key);
  }

  MemeRecord record;
  // The public corpus writes id both as string and as bare integer.
  if (obj["id"].is_string()) {
    record.id = obj["id"].get<std::string>();
  } else if (obj["id"].is_number_integer()) {
    record.id = std::to_string(obj["id"].get<long long>());
  } else {
    throw Error(ErrorCode::MalformedLine, "id must be a string or integer");
  }
  if (!obj["img"].is_string() || !obj["text"].is_string()) {
    throw Error(ErrorCode::MalformedLine, "img and text must be strings");
  }
  record.image_ref = obj["img"].get<std::string>();
  record.ocr_text = obj["text"].get<std::string>();
  if (record.id.empty()) throw Error(ErrorCode::MalformedLine, "empty id");
  if (record.image_ref.empty()) throw Error(ErrorCode::MalformedLine, "empty img");

  if (obj.contains("caption")) {
    if (!obj["caption"].is_string()) throw Error(ErrorCode::MalformedLine, "caption must be a string");
    record.caption = obj["caption"].get<std::string>();
  }
  if (obj.contains("label")) {
    if (!obj["label"].is_number_integer()) {
      throw Error(ErrorCode::InvalidLabel, "label must be an integer");
    }
    long long label = obj["label"].get<long long>();
    if (label == 0) {
      record.gold_label = HateLabel::NonHateful;
    } else if (label == 1) {
      record.gold_label = HateLabel::Hateful;
    } else {
      throw Error(ErrorCode::InvalidLabel, "label must be 0 or 1, got " + std::to_string(label));
    }
  }
  return record;
}

std::string serialize_record(const MemeRecord& record) {
  json obj;
  obj["id"] = record.id;
  obj["img"] = record.image_ref;
  obj["text"] = record.ocr_text;
  if (!record.caption.empty()) obj["caption"] = record.caption;
  if (record.gold_label) obj["label"] = record.gold_label == HateLabel::Hateful ? 1 : 0;
  return obj.dump();
}

ValidationSummary validate_dataset(const std::vector<MemeRecord>& records) {
  ValidationSummary summary;
  summary.n = records.size();
  std::map<std::string, size_t> counts;
  for (const auto& record : records) {
    counts[record.id]++;
    if (record.image_ref.empty()) summary.empty_image_refs.push_back(record.id);
    if (!record.gold_label) {
      summary.unlabeled++;
    } else if (*record.gold_label == HateLabel::Hateful) {
      summary.hateful++;
    } else {
      summary.non_hateful++;
    }
  }
  for (const auto& [id, count] : counts) {
    if (count > 1) summary.duplicate_ids[id] = count;
  }
  return summary;
}

std::vector<MemeRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open dataset: " + path);
  std::vector<MemeRecord> records;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    try {
      records.push_back(parse_dataset_line(line));
    } catch (const Error& e) {
      throw Error(e.code(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return records;
}

}  // namespace sentinel
