#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sentinel/backend.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/types.hpp"
#include "sentinel/vqa.hpp"

namespace sentinel {

// The three pipeline variants: global retrieval over explanation-bearing
// exemplars, sub-label-routed retrieval, and sub-label retrieval plus the
// multi-turn dialogue transcript.
enum class VariantKind { Explanation, SubLabel, SubLabelVqa };

inline constexpr VariantKind kAllVariants[] = {VariantKind::Explanation, VariantKind::SubLabel,
                                               VariantKind::SubLabelVqa};

std::string to_string(VariantKind variant);
std::optional<VariantKind> variant_from_string(const std::string& s);

// Row name used in evaluation tables.
std::string variant_display_name(VariantKind variant);

struct Verdict {
  std::string meme_id;
  HateLabel label = HateLabel::NonHateful;
  double confidence = 0.5;
  std::string explanation;
  std::vector<std::string> retrieved_ids;
  VariantKind variant = VariantKind::SubLabel;
  std::optional<SubLabel> chosen_sublabel;
  bool parse_warning = false;  // confidence was missing or unreadable

  bool operator==(const Verdict&) const = default;
};

nlohmann::json verdict_to_json(const Verdict& verdict);

// Judge prompt, kept as named sections so tests can inspect structure before
// rendering.
struct PromptDoc {
  std::string task;
  std::string ocr;
  std::string caption;
  std::vector<std::string> retrieved_lines;
  std::optional<std::string> vqa;
  std::string format;

  std::string render() const;

  bool operator==(const PromptDoc&) const = default;
};

struct DetectorConfig {
  int k = 5;
  VqaConfig vqa;
};

// Fills empty ocr_text/caption through the Ocr/Captioner backends.
MemeRecord enrich_meme(MemeRecord meme, const BackendSet& backends);

// Sub-index holding only entries that carry an explanation.
PartitionedIndex explanation_subindex(const PartitionedIndex& index);

// Builds the judge prompt. Chunks must resolve against the given index.
// Throws MissingTranscript (SubLabelVqa without transcript), InvalidArgument
// (transcript supplied to another variant), MissingExplanations (Explanation
// variant with an explanation-less entry).
PromptDoc assemble_prompt(const MemeRecord& meme, const std::vector<RetrievedChunk>& chunks,
                          const PartitionedIndex& index,
                          const std::optional<DialogueTranscript>& transcript, VariantKind variant);

// Extracts LABEL / CONFIDENCE / WHY from the judge's reply, case-insensitively.
// Missing confidence falls back to 0.5 and sets parse_warning. Throws
// UnparseableVerdict when no usable LABEL line exists.
Verdict parse_verdict(const std::string& raw, const std::string& meme_id, VariantKind variant,
                      std::vector<std::string> retrieved_ids,
                      std::optional<SubLabel> chosen_sublabel);

struct ClassifyDetail {
  Verdict verdict;
  std::string prompt_text;
  std::optional<DialogueTranscript> transcript;
};

// Full pipeline for one meme: enrich, embed caption+OCR, retrieve (globally
// over explanation-bearing entries, or within the chosen sub-label partition),
// optionally run the dialogue, ask the judge, parse the verdict.
ClassifyDetail classify_detailed(const MemeRecord& meme, const PartitionedIndex& index,
                                 const BackendSet& backends, const DetectorConfig& config,
                                 VariantKind variant);

Verdict classify(const MemeRecord& meme, const PartitionedIndex& index, const BackendSet& backends,
                 const DetectorConfig& config, VariantKind variant);

}  // namespace sentinel
