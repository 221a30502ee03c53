#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sentinel/types.hpp"

namespace sentinel {

// One labeled exemplar: caption+OCR text, optional curator explanation, and a
// unit-norm embedding in the store's dimension.
struct KnowledgeEntry {
  std::string id;
  SubLabel sub_label = SubLabel::Other;
  HateLabel label = HateLabel::NonHateful;
  std::string text;
  std::optional<std::string> explanation;
  std::vector<double> embedding;

  bool operator==(const KnowledgeEntry&) const = default;
};

struct RetrievedChunk {
  std::string entry_id;
  double similarity = 0.0;
  int rank = 0;
  SubLabel sub_label = SubLabel::Other;
};

// Exact-scan vector index partitioned by sub-label. Immutable after build;
// entries within a partition are kept sorted by id.
class PartitionedIndex {
 public:
  PartitionedIndex() = default;

  int dimension() const { return dimension_; }
  size_t total_count() const { return total_count_; }
  const std::map<SubLabel, std::vector<KnowledgeEntry>>& partitions() const { return partitions_; }

  // Lookup by id. Throws InvalidArgument when the id is unknown.
  const KnowledgeEntry& entry(const std::string& id) const;

  bool operator==(const PartitionedIndex&) const = default;

 private:
  friend PartitionedIndex build_index(std::vector<KnowledgeEntry> entries, int dimension);

  int dimension_ = 0;
  size_t total_count_ = 0;
  std::map<SubLabel, std::vector<KnowledgeEntry>> partitions_;
};

// Plain cosine over arbitrary equal-length vectors.
// Throws DimensionMismatch / ZeroVector.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Groups entries by sub-label, sorted by id within each partition.
// Throws DuplicateId, DimensionMismatch, ZeroVector (zero embedding), and
// InvalidArgument (embedding norm off unit by more than 1e-6).
PartitionedIndex build_index(std::vector<KnowledgeEntry> entries, int dimension);

// Top-k by cosine similarity within one partition, or across the whole store
// when partition is absent. Ties broken by id ascending; results ordered by
// (similarity desc, id asc) with ranks 1..m. Throws EmptyIndex when the
// searched population is empty, DimensionMismatch, InvalidArgument (k < 1).
std::vector<RetrievedChunk> retrieve_topk(const PartitionedIndex& index,
                                          const std::vector<double>& query, int k,
                                          std::optional<SubLabel> partition = std::nullopt);

// Partition of the globally most similar entry; ties across partitions fall
// to the lower enum value. Throws EmptyIndex / DimensionMismatch.
SubLabel choose_sublabel(const PartitionedIndex& index, const std::vector<double>& query);

// JSONL persistence: header line {"dimension","count"}, then one entry per
// line. save_index writes atomically via a temp file. load_index throws
// IoError / CorruptIndexFile.
void save_index(const PartitionedIndex& index, const std::string& path);
PartitionedIndex load_index(const std::string& path);

}  // namespace sentinel
