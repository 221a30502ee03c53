#include "sentinel/ingest.hpp"

#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "sentinel/detector.hpp"
#include "sentinel/error.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

}  // namespace

std::vector<MemeRecord> enrich_dataset(std::vector<MemeRecord> records,
                                       const BackendSet& backends) {
  for (MemeRecord& record : records) record = enrich_meme(std::move(record), backends);
  return records;
}

void write_dataset_jsonl(const std::vector<MemeRecord>& records, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    for (const MemeRecord& record : records) out << serialize_record(record) << '\n';
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError, "cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

std::vector<KnowledgeEntry> load_knowledge_jsonl(const std::string& path,
                                                 const BackendSet& backends) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  std::vector<KnowledgeEntry> entries;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path + ":" + std::to_string(lineno);

    MemeRecord record;
    try {
      record = parse_dataset_line(line);
    } catch (const Error& e) {
      throw Error(e.code(), where + ": " + e.what());
    }
    if (!record.gold_label) {
      throw Error(ErrorCode::MissingGoldLabels, where + ": exemplar line has no label");
    }

    KnowledgeEntry entry;
    entry.id = record.id;
    entry.label = *record.gold_label;
    entry.text = record.caption + "\n" + record.ocr_text;

    json doc = json::parse(line);  // parse_dataset_line already validated the JSON
    if (doc.contains("sub_label")) {
      if (!doc.at("sub_label").is_string()) {
        throw Error(ErrorCode::MalformedLine, where + ": sub_label must be a string");
      }
      const std::string name = doc.at("sub_label").get<std::string>();
      const auto sub = sub_label_from_string(name);
      if (!sub) throw Error(ErrorCode::MalformedLine, where + ": unknown sub_label '" + name + "'");
      entry.sub_label = *sub;
    } else {
      entry.sub_label = SubLabel::Other;
    }
    if (doc.contains("explanation") && !doc.at("explanation").is_null()) {
      if (!doc.at("explanation").is_string()) {
        throw Error(ErrorCode::MalformedLine, where + ": explanation must be a string");
      }
      entry.explanation = doc.at("explanation").get<std::string>();
    }

    entry.embedding = backends.embed(entry.text);
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace sentinel
