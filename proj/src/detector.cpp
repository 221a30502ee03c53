#include "sentinel/detector.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "sentinel/error.hpp"

namespace sentinel {

namespace {

std::string trim(const std::string& s) {
  size_t begin = 0, end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::string single_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\r', ' ');
  return s;
}

std::string query_text(const MemeRecord& meme) { return meme.caption + "\n" + meme.ocr_text; }

}  // namespace

std::string to_string(VariantKind variant) {
  switch (variant) {
    case VariantKind::Explanation: return "explanation";
    case VariantKind::SubLabel: return "sub_label";
    case VariantKind::SubLabelVqa: return "sub_label_vqa";
  }
  return "unknown";
}

std::optional<VariantKind> variant_from_string(const std::string& s) {
  for (VariantKind variant : kAllVariants) {
    if (to_string(variant) == s) return variant;
  }
  return std::nullopt;
}

std::string variant_display_name(VariantKind variant) {
  switch (variant) {
    case VariantKind::Explanation: return "RAG (explanation)";
    case VariantKind::SubLabel: return "RAG (sub_label)";
    case VariantKind::SubLabelVqa: return "RAG (sub_label + VQA)";
  }
  return "unknown";
}

nlohmann::json verdict_to_json(const Verdict& verdict) {
  nlohmann::json doc;
  doc["id"] = verdict.meme_id;
  doc["variant"] = to_string(verdict.variant);
  doc["label"] = to_string(verdict.label);
  doc["confidence"] = std::round(verdict.confidence * 1e6) / 1e6;
  doc["why"] = verdict.explanation;
  doc["retrieved_ids"] = verdict.retrieved_ids;
  if (verdict.chosen_sublabel) doc["chosen_sublabel"] = to_string(*verdict.chosen_sublabel);
  if (verdict.parse_warning) doc["parse_warning"] = true;
  return doc;
}

std::string PromptDoc::render() const {
  std::string out = "TASK:\n" + task + "\n\n";
  out += "OCR:\n" + (ocr.empty() ? "-" : ocr) + "\n\n";
  out += "CAPTION:\n" + (caption.empty() ? "-" : caption) + "\n\n";
  out += "RETRIEVED:\n";
  for (const std::string& line : retrieved_lines) out += line + "\n";
  if (vqa) out += "\nVQA:\n" + *vqa + "\n";
  out += "\nFORMAT:\n" + format;
  return out;
}

MemeRecord enrich_meme(MemeRecord meme, const BackendSet& backends) {
  if (meme.ocr_text.empty()) {
    meme.ocr_text = backends.text_call(BackendKind::Ocr, {}, meme.image_ref);
  }
  if (meme.caption.empty()) {
    meme.caption = backends.text_call(BackendKind::Captioner, {}, meme.image_ref);
  }
  return meme;
}

PartitionedIndex explanation_subindex(const PartitionedIndex& index) {
  std::vector<KnowledgeEntry> entries;
  for (const auto& [sub, list] : index.partitions()) {
    for (const KnowledgeEntry& entry : list) {
      if (entry.explanation) entries.push_back(entry);
    }
  }
  return build_index(std::move(entries), index.dimension());
}

PromptDoc assemble_prompt(const MemeRecord& meme, const std::vector<RetrievedChunk>& chunks,
                          const PartitionedIndex& index,
                          const std::optional<DialogueTranscript>& transcript,
                          VariantKind variant) {
  if (variant == VariantKind::SubLabelVqa && !transcript) {
    throw Error(ErrorCode::MissingTranscript, "variant sub_label_vqa needs a dialogue transcript");
  }
  if (variant != VariantKind::SubLabelVqa && transcript) {
    throw Error(ErrorCode::InvalidArgument,
                "variant " + to_string(variant) + " does not take a transcript");
  }

  PromptDoc doc;
  doc.task =
      "Decide whether this meme is hateful toward a protected group. Weigh the "
      "retrieved exemplars and, when present, the dialogue findings.";
  doc.ocr = meme.ocr_text;
  doc.caption = meme.caption;

  char sim_buf[32];
  for (const RetrievedChunk& chunk : chunks) {
    const KnowledgeEntry& entry = index.entry(chunk.entry_id);
    if (variant == VariantKind::Explanation && !entry.explanation) {
      throw Error(ErrorCode::MissingExplanations,
                  "entry " + entry.id + " carries no explanation");
    }
    std::snprintf(sim_buf, sizeof(sim_buf), "%.4f", chunk.similarity);
    std::string line = "[" + std::to_string(chunk.rank) + "] (" + to_string(entry.label) + "/" +
                       to_string(entry.sub_label) + ", sim=" + sim_buf + ") " +
                       single_line(entry.text);
    if (entry.explanation) line += " — " + single_line(*entry.explanation);
    doc.retrieved_lines.push_back(std::move(line));
  }

  if (transcript) doc.vqa = format_transcript(*transcript);

  doc.format =
      "Reply with exactly three lines:\n"
      "LABEL: hateful|non-hateful\n"
      "CONFIDENCE: <number between 0 and 1>\n"
      "WHY: <one paragraph>";
  return doc;
}

Verdict parse_verdict(const std::string& raw, const std::string& meme_id, VariantKind variant,
                      std::vector<std::string> retrieved_ids,
                      std::optional<SubLabel> chosen_sublabel) {
  Verdict verdict;
  verdict.meme_id = meme_id;
  verdict.variant = variant;
  verdict.retrieved_ids = std::move(retrieved_ids);
  verdict.chosen_sublabel = chosen_sublabel;

  bool have_label = false, have_confidence = false, have_why = false;
  size_t pos = 0;
  while (pos <= raw.size()) {
    const size_t eol = std::min(raw.find('\n', pos), raw.size());
    const std::string line = trim(raw.substr(pos, eol - pos));
    pos = eol + 1;
    const std::string key = lower(line.substr(0, line.find(':')));

    if (!have_label && key == "label") {
      const std::string value = lower(trim(line.substr(line.find(':') + 1)));
      if (value == "hateful") {
        verdict.label = HateLabel::Hateful;
      } else if (value == "non-hateful") {
        verdict.label = HateLabel::NonHateful;
      } else {
        throw Error(ErrorCode::UnparseableVerdict, "unrecognizable label value: " + value);
      }
      have_label = true;
    } else if (!have_confidence && key == "confidence") {
      const std::string value = trim(line.substr(line.find(':') + 1));
      char* end = nullptr;
      const double parsed = std::strtod(value.c_str(), &end);
      if (end != value.c_str() && end == value.c_str() + value.size()) {
        verdict.confidence = std::clamp(parsed, 0.0, 1.0);
        have_confidence = true;
      }
    } else if (!have_why && key == "why") {
      verdict.explanation = trim(line.substr(line.find(':') + 1));
      have_why = true;
    }
  }

  if (!have_label) throw Error(ErrorCode::UnparseableVerdict, "no LABEL line in judge reply");
  if (!have_confidence) {
    verdict.confidence = 0.5;
    verdict.parse_warning = true;
  }
  return verdict;
}

ClassifyDetail classify_detailed(const MemeRecord& meme, const PartitionedIndex& index,
                                 const BackendSet& backends, const DetectorConfig& config,
                                 VariantKind variant) {
  const MemeRecord enriched = enrich_meme(meme, backends);
  const std::vector<double> query = backends.embed(query_text(enriched));

  std::optional<SubLabel> chosen;
  std::vector<RetrievedChunk> chunks;
  PartitionedIndex explanation_index;
  const PartitionedIndex* resolver = &index;

  if (variant == VariantKind::Explanation) {
    explanation_index = explanation_subindex(index);
    chunks = retrieve_topk(explanation_index, query, config.k);
    resolver = &explanation_index;
  } else {
    chosen = choose_sublabel(index, query);
    chunks = retrieve_topk(index, query, config.k, chosen);
  }

  std::optional<DialogueTranscript> transcript;
  if (variant == VariantKind::SubLabelVqa) {
    transcript = run_dialogue(enriched, backends, config.vqa);
  }

  const PromptDoc prompt = assemble_prompt(enriched, chunks, *resolver, transcript, variant);
  const std::string prompt_text = prompt.render();
  const std::string reply = backends.text_call(BackendKind::Judge, {{"prompt", prompt_text}});

  std::vector<std::string> ids;
  ids.reserve(chunks.size());
  for (const RetrievedChunk& chunk : chunks) ids.push_back(chunk.entry_id);

  ClassifyDetail detail;
  detail.verdict = parse_verdict(reply, enriched.id, variant, std::move(ids), chosen);
  detail.prompt_text = prompt_text;
  detail.transcript = std::move(transcript);
  return detail;
}

Verdict classify(const MemeRecord& meme, const PartitionedIndex& index, const BackendSet& backends,
                 const DetectorConfig& config, VariantKind variant) {
  return classify_detailed(meme, index, backends, config, variant).verdict;
}

}  // namespace sentinel
