#include "sentinel/types.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "sentinel/error.hpp"

namespace sentinel {

std::string to_string(HateLabel label) {
  return label == HateLabel::Hateful ? "hateful" : "non-hateful";
}

std::string to_string(SubLabel sub) {
  switch (sub) {
    case SubLabel::Race: return "race";
    case SubLabel::Religion: return "religion";
    case SubLabel::Gender: return "gender";
    case SubLabel::Nationality: return "nationality";
    case SubLabel::Disability: return "disability";
    case SubLabel::Other: return "other";
  }
  return "other";
}

std::optional<HateLabel> hate_label_from_string(const std::string& s) {
  if (s == "hateful") return HateLabel::Hateful;
  if (s == "non-hateful") return HateLabel::NonHateful;
  return std::nullopt;
}

std::optional<SubLabel> sub_label_from_string(const std::string& s) {
  for (SubLabel sub : kAllSubLabels) {
    if (to_string(sub) == s) return sub;
  }
  return std::nullopt;
}

std::vector<LexiconEntry> load_lexicon(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open lexicon file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, "lexicon " + path + ": " + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::ConfigParseError, "lexicon must be a JSON list");

  std::vector<LexiconEntry> lexicon;
  for (const auto& item : doc) {
    if (!item.contains("tag") || !item.contains("triggers") || !item["triggers"].is_array()) {
      throw Error(ErrorCode::ConfigParseError, "lexicon entries need tag and triggers");
    }
    LexiconEntry entry;
    entry.tag = item["tag"].get<std::string>();
    for (const auto& t : item["triggers"]) entry.triggers.push_back(t.get<std::string>());
    if (entry.tag.empty() || entry.triggers.empty()) {
      throw Error(ErrorCode::ConfigParseError, "lexicon entry with empty tag or triggers");
    }
    lexicon.push_back(std::move(entry));
  }
  if (lexicon.empty()) throw Error(ErrorCode::ConfigParseError, "lexicon is empty");
  return lexicon;
}

}  // namespace sentinel
