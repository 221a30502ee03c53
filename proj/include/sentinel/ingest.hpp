#pragma once

#include <string>
#include <vector>

#include "sentinel/backend.hpp"
#include "sentinel/dataset.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

// Fills empty OCR text / captions across a dataset through the backends.
std::vector<MemeRecord> enrich_dataset(std::vector<MemeRecord> records, const BackendSet& backends);

// One record per line, written atomically.
void write_dataset_jsonl(const std::vector<MemeRecord>& records, const std::string& path);

// Reads exemplar lines (dataset keys plus "sub_label" and optional
// "explanation"), embedding caption+OCR through the Embedder backend. Every
// line needs a label; sub_label defaults to "other" when absent.
std::vector<KnowledgeEntry> load_knowledge_jsonl(const std::string& path,
                                                 const BackendSet& backends);

}  // namespace sentinel
