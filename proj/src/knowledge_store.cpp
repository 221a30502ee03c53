#include "sentinel/knowledge_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

using nlohmann::json;

void check_entry(const KnowledgeEntry& entry, int dimension) {
  if (static_cast<int>(entry.embedding.size()) != dimension) {
    throw Error(ErrorCode::DimensionMismatch,
                "entry " + entry.id + " has " + std::to_string(entry.embedding.size()) +
                    " components, index dimension is " + std::to_string(dimension));
  }
  double norm2 = 0.0;
  for (double v : entry.embedding) norm2 += v * v;
  if (norm2 == 0.0) throw Error(ErrorCode::ZeroVector, "entry " + entry.id + " has a zero embedding");
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "entry " + entry.id + " embedding is not unit norm");
  }
}

json entry_to_json(const KnowledgeEntry& entry) {
  json line;
  line["id"] = entry.id;
  line["sub_label"] = to_string(entry.sub_label);
  line["label"] = to_string(entry.label);
  line["text"] = entry.text;
  line["explanation"] = entry.explanation ? json(*entry.explanation) : json(nullptr);
  line["embedding"] = entry.embedding;
  return line;
}

KnowledgeEntry entry_from_json(const json& line, const std::string& where) {
  if (!line.is_object()) throw Error(ErrorCode::CorruptIndexFile, where + ": entry is not an object");
  KnowledgeEntry entry;
  try {
    entry.id = line.at("id").get<std::string>();
    const auto sub = sub_label_from_string(line.at("sub_label").get<std::string>());
    if (!sub) throw Error(ErrorCode::CorruptIndexFile, where + ": unknown sub_label");
    entry.sub_label = *sub;
    const auto label = hate_label_from_string(line.at("label").get<std::string>());
    if (!label) throw Error(ErrorCode::CorruptIndexFile, where + ": unknown label");
    entry.label = *label;
    entry.text = line.at("text").get<std::string>();
    if (line.contains("explanation") && !line.at("explanation").is_null()) {
      entry.explanation = line.at("explanation").get<std::string>();
    }
    entry.embedding = line.at("embedding").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptIndexFile, where + ": " + e.what());
  }
  return entry;
}

}  // namespace

const KnowledgeEntry& PartitionedIndex::entry(const std::string& id) const {
  for (const auto& [sub, entries] : partitions_) {
    auto it = std::lower_bound(entries.begin(), entries.end(), id,
                               [](const KnowledgeEntry& e, const std::string& v) { return e.id < v; });
    if (it != entries.end() && it->id == id) return *it;
  }
  throw Error(ErrorCode::InvalidArgument, "no entry with id " + id);
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(a.size()) + " vs " +
                                                  std::to_string(b.size()) + " components");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::ZeroVector, "cosine of a zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

PartitionedIndex build_index(std::vector<KnowledgeEntry> entries, int dimension) {
  if (dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  PartitionedIndex index;
  index.dimension_ = dimension;
  for (KnowledgeEntry& entry : entries) {
    check_entry(entry, dimension);
    index.partitions_[entry.sub_label].push_back(std::move(entry));
  }
  for (auto& [sub, list] : index.partitions_) {
    std::sort(list.begin(), list.end(),
              [](const KnowledgeEntry& a, const KnowledgeEntry& b) { return a.id < b.id; });
    for (size_t i = 1; i < list.size(); ++i) {
      if (list[i - 1].id == list[i].id) {
        throw Error(ErrorCode::DuplicateId, "entry id " + list[i].id + " appears twice");
      }
    }
    index.total_count_ += list.size();
  }
  // Cross-partition duplicates: collect all ids once.
  std::vector<const std::string*> ids;
  ids.reserve(index.total_count_);
  for (const auto& [sub, list] : index.partitions_) {
    for (const auto& entry : list) ids.push_back(&entry.id);
  }
  std::sort(ids.begin(), ids.end(), [](const auto* a, const auto* b) { return *a < *b; });
  for (size_t i = 1; i < ids.size(); ++i) {
    if (*ids[i - 1] == *ids[i]) {
      throw Error(ErrorCode::DuplicateId, "entry id " + *ids[i] + " appears twice");
    }
  }
  return index;
}

std::vector<RetrievedChunk> retrieve_topk(const PartitionedIndex& index,
                                          const std::vector<double>& query, int k,
                                          std::optional<SubLabel> partition) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (static_cast<int>(query.size()) != index.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(query.size()) + " components, index dimension is " +
                    std::to_string(index.dimension()));
  }

  struct Scored {
    const KnowledgeEntry* entry;
    double similarity;
  };
  std::vector<Scored> scored;
  auto scan = [&](const std::vector<KnowledgeEntry>& entries) {
    for (const KnowledgeEntry& entry : entries) {
      scored.push_back({&entry, cosine_similarity(query, entry.embedding)});
    }
  };

  if (partition) {
    auto it = index.partitions().find(*partition);
    if (it != index.partitions().end()) scan(it->second);
  } else {
    for (const auto& [sub, entries] : index.partitions()) scan(entries);
  }
  if (scored.empty()) {
    throw Error(ErrorCode::EmptyIndex, partition ? "partition " + to_string(*partition) + " is empty"
                                                 : "index is empty");
  }

  const size_t m = std::min<size_t>(static_cast<size_t>(k), scored.size());
  auto better = [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.entry->id < b.entry->id;
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<ptrdiff_t>(m), scored.end(), better);

  std::vector<RetrievedChunk> out;
  out.reserve(m);
  for (size_t i = 0; i < m; ++i) {
    out.push_back({scored[i].entry->id, scored[i].similarity, static_cast<int>(i) + 1,
                   scored[i].entry->sub_label});
  }
  return out;
}

SubLabel choose_sublabel(const PartitionedIndex& index, const std::vector<double>& query) {
  if (index.total_count() == 0) throw Error(ErrorCode::EmptyIndex, "index is empty");
  if (static_cast<int>(query.size()) != index.dimension()) {
    throw Error(ErrorCode::DimensionMismatch,
                "query has " + std::to_string(query.size()) + " components, index dimension is " +
                    std::to_string(index.dimension()));
  }
  bool found = false;
  double best = 0.0;
  SubLabel best_sub = SubLabel::Other;
  // Map iteration follows SubLabel enum order, so strict improvement keeps the
  // lowest enum value on ties.
  for (const auto& [sub, entries] : index.partitions()) {
    for (const KnowledgeEntry& entry : entries) {
      const double sim = cosine_similarity(query, entry.embedding);
      if (!found || sim > best) {
        found = true;
        best = sim;
        best_sub = sub;
      }
    }
  }
  return best_sub;
}

void save_index(const PartitionedIndex& index, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + tmp + " for writing");
    json header;
    header["dimension"] = index.dimension();
    header["count"] = index.total_count();
    out << header.dump() << '\n';
    for (const auto& [sub, entries] : index.partitions()) {
      for (const KnowledgeEntry& entry : entries) out << entry_to_json(entry).dump() << '\n';
    }
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

PartitionedIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::CorruptIndexFile, path + ": missing header");
  int dimension = 0;
  size_t count = 0;
  try {
    const json header = json::parse(line);
    dimension = header.at("dimension").get<int>();
    count = header.at("count").get<size_t>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptIndexFile, path + ": bad header: " + e.what());
  }

  std::vector<KnowledgeEntry> entries;
  entries.reserve(count);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json doc;
    try {
      doc = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::CorruptIndexFile, path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    entries.push_back(entry_from_json(doc, path + ":" + std::to_string(lineno)));
  }
  if (entries.size() != count) {
    throw Error(ErrorCode::CorruptIndexFile,
                path + ": header says " + std::to_string(count) + " entries, found " +
                    std::to_string(entries.size()));
  }
  try {
    return build_index(std::move(entries), dimension);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptIndexFile) throw;
    throw Error(ErrorCode::CorruptIndexFile, path + ": " + e.what());
  }
}

}  // namespace sentinel
