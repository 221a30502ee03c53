#include "sentinel/vqa.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "json.hpp"

#include "sentinel/error.hpp"
#include "sentinel/knowledge_store.hpp"
#include "sentinel/text.hpp"

namespace sentinel {

namespace {

std::map<std::string, std::string> answer_inputs(const MemeRecord& meme, const std::string& question,
                                                 int turn) {
  return {{"question", question},
          {"ocr", meme.ocr_text},
          {"caption", meme.caption},
          {"turn", std::to_string(turn)}};
}

std::string ask_question(const BackendSet& backends, const MemeRecord& meme, int turn,
                         const std::string& signal) {
  std::map<std::string, std::string> inputs{{"turn", std::to_string(turn)},
                                            {"ocr", meme.ocr_text},
                                            {"caption", meme.caption}};
  if (!signal.empty()) inputs["signal"] = signal;
  return backends.text_call(BackendKind::QuestionGen, std::move(inputs));
}

// Duplicate check against cached embeddings of already-asked questions, so a
// dialogue embeds each question once.
bool is_duplicate_cached(const std::string& question, const DialogueContext& context,
                         const BackendSet& backends, const VqaConfig& config,
                         const std::vector<std::vector<double>>& asked_embeddings) {
  if (context.asked_keys.count(normalize_text(question))) return true;
  if (asked_embeddings.empty()) return false;
  const std::vector<double> candidate = backends.embed(question);
  for (const auto& prior : asked_embeddings) {
    if (cosine_similarity(candidate, prior) >= config.dedup_threshold) return true;
  }
  return false;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::NoSignals: return "NoSignals";
    case StopReason::MaxTurns: return "MaxTurns";
    case StopReason::DuplicateLoop: return "DuplicateLoop";
  }
  return "unknown";
}

void validate_vqa_config(const VqaConfig& config) {
  if (config.max_turns < 1) throw Error(ErrorCode::ConfigInvalid, "max_turns must be >= 1");
  if (!(config.dedup_threshold > 0.0 && config.dedup_threshold <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "dedup_threshold must lie in (0,1]");
  }
  if (config.signal_lexicon.empty()) throw Error(ErrorCode::ConfigInvalid, "signal lexicon is empty");
  for (const auto& entry : config.signal_lexicon) {
    if (entry.tag.empty()) throw Error(ErrorCode::ConfigInvalid, "lexicon entry with empty tag");
    if (entry.triggers.empty()) {
      throw Error(ErrorCode::ConfigInvalid, "lexicon tag '" + entry.tag + "' has no triggers");
    }
  }
}

VqaConfig load_vqa_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigParseError, path + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorCode::ConfigParseError, path + ": expected a JSON object");

  VqaConfig config;
  try {
    if (doc.contains("max_turns")) config.max_turns = doc.at("max_turns").get<int>();
    if (doc.contains("dedup_threshold")) {
      config.dedup_threshold = doc.at("dedup_threshold").get<double>();
    }
    if (doc.contains("lexicon")) {
      std::filesystem::path lex(doc.at("lexicon").get<std::string>());
      if (lex.is_relative()) lex = std::filesystem::path(path).parent_path() / lex;
      config.signal_lexicon = load_lexicon(lex.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, path + ": " + e.what());
  }
  validate_vqa_config(config);
  return config;
}

std::vector<std::string> detect_hate_signals(const std::string& answer,
                                             const std::vector<LexiconEntry>& lexicon) {
  const std::string normalized = normalize_text(answer);
  std::vector<std::string> tags;
  for (const auto& entry : lexicon) {
    for (const auto& trigger : entry.triggers) {
      if (contains_whole_word(normalized, normalize_text(trigger))) {
        tags.push_back(entry.tag);
        break;
      }
    }
  }
  return tags;
}

bool is_duplicate(const std::string& question, const DialogueContext& context,
                  const BackendSet& backends, const VqaConfig& config) {
  std::vector<std::vector<double>> asked_embeddings;
  asked_embeddings.reserve(context.turns.size());
  for (const QAPair& turn : context.turns) asked_embeddings.push_back(backends.embed(turn.question));
  return is_duplicate_cached(question, context, backends, config, asked_embeddings);
}

DialogueTranscript run_dialogue(const MemeRecord& meme, const BackendSet& backends,
                                const VqaConfig& config) {
  validate_vqa_config(config);
  if (meme.ocr_text.empty() && meme.caption.empty()) {
    throw Error(ErrorCode::EmptyMeme, "meme " + meme.id + " has no OCR text and no caption");
  }

  DialogueContext context;
  context.meme_id = meme.id;
  std::vector<std::vector<double>> asked_embeddings;

  auto ask_and_record = [&](const std::string& question, int turn_index) {
    const std::string answer = backends.text_call(
        BackendKind::Answerer, answer_inputs(meme, question, turn_index), meme.image_ref);
    QAPair pair;
    pair.turn_index = turn_index;
    pair.question = question;
    pair.answer = answer;
    pair.flagged_signals = detect_hate_signals(answer, config.signal_lexicon);
    context.asked_keys.insert(normalize_text(question));
    asked_embeddings.push_back(backends.embed(question));
    context.turns.push_back(std::move(pair));
  };

  ask_and_record(ask_question(backends, meme, 0, ""), 0);

  std::set<std::string> targeted;
  int consecutive_discards = 0;
  StopReason reason = StopReason::NoSignals;

  while (true) {
    const std::vector<std::string>& flags = context.turns.back().flagged_signals;
    const int turns = static_cast<int>(context.turns.size());
    if (flags.empty()) {
      reason = turns < config.max_turns ? StopReason::NoSignals : StopReason::MaxTurns;
      break;
    }
    if (turns >= config.max_turns) {
      reason = StopReason::MaxTurns;
      break;
    }

    // Follow up on the first flagged tag not yet asked about; once every
    // flagged tag has been covered this regenerates an old question, which the
    // duplicate filter turns into the stopping condition.
    std::string target = flags.front();
    for (const std::string& tag : flags) {
      if (!targeted.count(tag)) {
        target = tag;
        break;
      }
    }

    const std::string question = ask_question(backends, meme, turns, target);
    if (is_duplicate_cached(question, context, backends, config, asked_embeddings)) {
      if (++consecutive_discards >= 2) {
        reason = StopReason::DuplicateLoop;
        break;
      }
      targeted.insert(target);
      continue;
    }
    consecutive_discards = 0;
    targeted.insert(target);
    ask_and_record(question, turns);
  }

  DialogueTranscript transcript;
  transcript.meme_id = meme.id;
  transcript.turns = std::move(context.turns);
  transcript.stop_reason = reason;
  return transcript;
}

std::string format_transcript(const DialogueTranscript& transcript) {
  std::string out;
  for (const QAPair& turn : transcript.turns) {
    if (!out.empty()) out += "\n\n";
    const std::string i = std::to_string(turn.turn_index);
    out += "Q" + i + ": " + turn.question + "\nA" + i + ": " + turn.answer + "\nSignals: ";
    if (turn.flagged_signals.empty()) {
      out += "-";
    } else {
      for (size_t j = 0; j < turn.flagged_signals.size(); ++j) {
        if (j > 0) out += ",";
        out += turn.flagged_signals[j];
      }
    }
  }
  out += "\n\nStop: " + to_string(transcript.stop_reason);
  return out;
}

}  // namespace sentinel
