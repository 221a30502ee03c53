#pragma once

#include <set>
#include <string>
#include <vector>

#include "sentinel/backend.hpp"
#include "sentinel/types.hpp"

namespace sentinel {

enum class StopReason { NoSignals, MaxTurns, DuplicateLoop };

std::string to_string(StopReason reason);

struct QAPair {
  int turn_index = 0;
  std::string question;
  std::string answer;
  std::vector<std::string> flagged_signals;

  bool operator==(const QAPair&) const = default;
};

// Per-meme dialogue state: every asked question, plus its normalized form for
// exact-duplicate checks.
struct DialogueContext {
  std::string meme_id;
  std::vector<QAPair> turns;
  std::set<std::string> asked_keys;
};

struct VqaConfig {
  int max_turns = 4;
  std::vector<LexiconEntry> signal_lexicon;
  double dedup_threshold = 0.95;
};

// Throws ConfigInvalid on out-of-range fields or an empty lexicon.
void validate_vqa_config(const VqaConfig& config);

// JSON file {"max_turns": N, "dedup_threshold": X, "lexicon": "path"}; every
// field optional except lexicon. A relative lexicon path resolves against the
// config file's directory. Throws ConfigParseError / ConfigInvalid / IoError.
VqaConfig load_vqa_config(const std::string& path);

struct DialogueTranscript {
  std::string meme_id;
  std::vector<QAPair> turns;
  StopReason stop_reason = StopReason::NoSignals;

  bool operator==(const DialogueTranscript&) const = default;
};

// Tags of every lexicon entry with a trigger term occurring whole-word in
// normalize_text(answer); lexicon order, no duplicates.
std::vector<std::string> detect_hate_signals(const std::string& answer,
                                             const std::vector<LexiconEntry>& lexicon);

// True when the question exactly matches an asked question after
// normalization, or its embedding is within dedup_threshold cosine of any
// asked question's embedding.
bool is_duplicate(const std::string& question, const DialogueContext& context,
                  const BackendSet& backends, const VqaConfig& config);

// Multi-turn dialogue: broad opening question, signal detection on each
// answer, one targeted follow-up per round while signals persist. Duplicate
// follow-ups are discarded; two consecutive discards stop the dialogue.
// Throws EmptyMeme when the meme has neither OCR text nor caption.
DialogueTranscript run_dialogue(const MemeRecord& meme, const BackendSet& backends,
                                const VqaConfig& config);

// Plain-text block: "Q<i>: ...\nA<i>: ...\nSignals: a,b" stanzas separated by
// blank lines, terminated with "Stop: <reason>". Empty signals render "-".
std::string format_transcript(const DialogueTranscript& transcript);

}  // namespace sentinel
