#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sentinel {

// Binary meme label. Dataset files carry it as 1 (hateful) / 0 (non-hateful).
enum class HateLabel { NonHateful = 0, Hateful = 1 };

// Fine-grained hate category used to partition the exemplar store.
// Other is the mandatory fallback for anything outside the named set.
enum class SubLabel { Race = 0, Religion, Gender, Nationality, Disability, Other };

inline constexpr SubLabel kAllSubLabels[] = {SubLabel::Race,        SubLabel::Religion,
                                             SubLabel::Gender,      SubLabel::Nationality,
                                             SubLabel::Disability,  SubLabel::Other};

std::string to_string(HateLabel label);
std::string to_string(SubLabel sub);
std::optional<HateLabel> hate_label_from_string(const std::string& s);
std::optional<SubLabel> sub_label_from_string(const std::string& s);

// One meme: the classification unit. image_ref stays opaque; only backends
// ever interpret it. caption is empty until enrichment fills it.
struct MemeRecord {
  std::string id;
  std::string image_ref;
  std::string ocr_text;
  std::string caption;
  std::optional<HateLabel> gold_label;

  bool operator==(const MemeRecord&) const = default;
};

// One hate-signal lexicon entry: a tag plus the trigger terms that raise it.
struct LexiconEntry {
  std::string tag;
  std::vector<std::string> triggers;
};

// Loads a lexicon file: JSON list of {"tag": ..., "triggers": [...]}.
std::vector<LexiconEntry> load_lexicon(const std::string& path);

}  // namespace sentinel
