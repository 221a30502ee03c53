#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sentinel/backend.hpp"
#include "sentinel/detector.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/metrics.hpp"

namespace sentinel {

// Published results this artifact reports alongside its own numbers. They come
// from the source system's live-model evaluation and are not reproducible
// offline; they appear in reports as reference values only.
struct PaperReference {
  double acc = 0.0;    // percent
  double auroc = 0.0;  // percent
};

PaperReference paper_reference(VariantKind variant);

inline constexpr double kPaperVqaScoreReference = 75.04;

struct EvalConfig {
  DetectorConfig detector;
  std::vector<VariantKind> variants;
  std::string report_dir;  // empty disables report files
  int vqascore_rounds = 5;
};

struct EvalOutcome {
  std::vector<MetricsReport> reports;
  std::optional<VqaScoreReport> vqascore;  // present when sub_label_vqa ran
  nlohmann::json json_report;
  std::string table_text;
  std::string json_path;   // set when report files were written
  std::string table_path;
  std::vector<std::string> failures;  // one line per dropped row
};

// Classifies every meme under each requested variant and reduces to metrics.
// Gold labels are required on every record. Rows whose classification throws
// are dropped and counted in the variant's warnings.
EvalOutcome run_eval(const std::vector<MemeRecord>& dataset, const PartitionedIndex& index,
                     const BackendSet& backends, const EvalConfig& config);

}  // namespace sentinel
