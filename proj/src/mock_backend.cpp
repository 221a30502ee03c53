#include "sentinel/mock_backend.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sentinel/error.hpp"
#include "sentinel/text.hpp"

namespace sentinel {

namespace {

// Judge heuristic knobs. Evidence is the gap between the closest hateful and
// closest non-hateful exemplar, plus a bump per distinct dialogue signal.
constexpr double kIdentitySim = 0.99;
constexpr double kSignalBoost = 0.18;
constexpr int kSignalCap = 3;
constexpr double kJudgeThreshold = 0.15;

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

const Fixture& require_fixture(const MockContext& ctx, const std::optional<std::string>& image_ref) {
  if (!image_ref) throw Error(ErrorCode::MissingFixture, "request carries no image_ref");
  auto it = ctx.fixtures.find(*image_ref);
  if (it == ctx.fixtures.end()) {
    throw Error(ErrorCode::MissingFixture, "no fixture for image_ref: " + *image_ref);
  }
  return it->second;
}

std::string input_or_empty(const std::map<std::string, std::string>& inputs, const std::string& key) {
  auto it = inputs.find(key);
  return it == inputs.end() ? std::string() : it->second;
}

// Trigger terms present (whole-word) in any input value, in lexicon order.
std::vector<std::string> matched_terms(const MockContext& ctx,
                                       const std::map<std::string, std::string>& inputs) {
  std::string haystack;
  for (const auto& [name, value] : inputs) {
    haystack += value;
    haystack += '\n';
  }
  haystack = normalize_text(haystack);

  std::vector<std::string> matched;
  for (const auto& entry : ctx.lexicon) {
    for (const auto& trigger : entry.triggers) {
      std::string term = normalize_text(trigger);
      if (contains_whole_word(haystack, term) &&
          std::find(matched.begin(), matched.end(), trigger) == matched.end()) {
        matched.push_back(trigger);
      }
    }
  }
  return matched;
}

std::string quoted_list(const std::vector<std::string>& terms) {
  std::string out;
  for (size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += (i + 1 == terms.size()) ? " and " : ", ";
    out += "'" + terms[i] + "'";
  }
  return out;
}

// Keyword-table answerer: every lexicon term present in the inputs shows up in
// the answer, so signal detection downstream sees exactly what the meme carries.
std::string answerer_reply(const MockContext& ctx, const std::map<std::string, std::string>& inputs,
                           uint64_t seed) {
  const std::string question = input_or_empty(inputs, "question");
  const std::vector<std::string> matched = matched_terms(ctx, inputs);
  const uint64_t pick = stable_hash(question, seed);

  if (matched.empty()) {
    return pick % 2 == 0 ? "The scene reads as an ordinary joke without a target group."
                         : "Nothing in the text or imagery points at a protected group.";
  }
  return pick % 2 == 0
             ? "The wording " + quoted_list(matched) + " stands out; the meme leans on it to frame the group."
             : "The phrasing " + quoted_list(matched) + " is doing the work here, aimed at the group.";
}

struct PromptEvidence {
  double best_hateful = 0.0;
  double best_non_hateful = 0.0;
  size_t chunks = 0;
  std::set<std::string> signals;
};

// The judge mock reads the same prompt text a live judge model would see.
// RETRIEVED lines look like "[1] (hateful/race, sim=0.9876) ...", dialogue
// stanzas carry "Signals: a,b" lines.
PromptEvidence scan_prompt(const std::string& prompt) {
  PromptEvidence ev;
  std::istringstream lines(prompt);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("[", 0) == 0) {
      auto open = line.find('(');
      auto sim_pos = line.find("sim=");
      auto close = line.find(')', sim_pos == std::string::npos ? 0 : sim_pos);
      if (open == std::string::npos || sim_pos == std::string::npos || close == std::string::npos) {
        continue;
      }
      auto slash = line.find('/', open);
      if (slash == std::string::npos || slash > close) continue;
      std::string label = line.substr(open + 1, slash - open - 1);
      double sim = std::atof(line.substr(sim_pos + 4, close - sim_pos - 4).c_str());
      ev.chunks++;
      if (label == "hateful") {
        ev.best_hateful = std::max(ev.best_hateful, sim);
      } else if (label == "non-hateful") {
        ev.best_non_hateful = std::max(ev.best_non_hateful, sim);
      }
    } else if (line.rfind("Signals: ", 0) == 0) {
      std::string tags = line.substr(9);
      if (tags == "-") continue;
      std::istringstream parts(tags);
      std::string tag;
      while (std::getline(parts, tag, ',')) {
        if (!tag.empty()) ev.signals.insert(tag);
      }
    }
  }
  return ev;
}

std::string judge_verdict(const std::map<std::string, std::string>& inputs) {
  const PromptEvidence ev = scan_prompt(input_or_empty(inputs, "prompt"));
  const int signal_count = static_cast<int>(ev.signals.size());
  const double boost = kSignalBoost * std::min(signal_count, kSignalCap);
  const double z = std::clamp(ev.best_hateful - ev.best_non_hateful + boost, -1.0, 1.0);
  const bool identity = ev.best_hateful >= kIdentitySim;
  const bool hateful = identity || z >= kJudgeThreshold;

  double p_hateful = std::clamp(0.5 + 0.5 * z, 0.02, 0.98);
  if (identity) p_hateful = std::max(p_hateful, 0.98);
  const double confidence = hateful ? p_hateful : 1.0 - p_hateful;

  std::string why;
  if (hateful) {
    why = "Closest hateful exemplar sits at sim " + format_double(ev.best_hateful, 4);
    if (signal_count > 0) {
      why += " and " + std::to_string(signal_count) + " dialogue signal(s) were flagged";
    }
    why += ", which matches known hateful patterns.";
  } else {
    why = "The closest hateful exemplar is distant (sim " + format_double(ev.best_hateful, 4) +
          ") and the nearest context is benign (sim " + format_double(ev.best_non_hateful, 4) + ")";
    why += signal_count == 0 ? "; the dialogue surfaced no hate signals." : ".";
  }

  return "LABEL: " + std::string(hateful ? "hateful" : "non-hateful") +
         "\nCONFIDENCE: " + format_double(confidence, 4) + "\nWHY: " + why;
}

}  // namespace

uint64_t stable_hash(std::string_view bytes, uint64_t seed) {
  // FNV-1a folded with a seed offset.
  uint64_t h = 14695981039346656037ull ^ (seed + 0x9e3779b97f4a7c15ull);
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<double> mock_embed(std::string_view text, uint64_t seed, int dim) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "embedding dimension must be >= 2");
  const std::string norm = normalize_text(text);
  std::vector<double> acc(static_cast<size_t>(dim), 0.0);
  if (norm.size() >= 3) {
    for (size_t i = 0; i + 3 <= norm.size(); ++i) {
      const uint64_t h = stable_hash(std::string_view(norm.data() + i, 3), seed);
      acc[h % static_cast<uint64_t>(dim)] += 1.0;
    }
  }
  double norm2 = 0.0;
  for (double v : acc) norm2 += v * v;
  if (norm2 == 0.0) {
    acc[0] = 1.0;
    return acc;
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double& v : acc) v *= inv;
  return acc;
}

std::string mock_generate(BackendKind kind, const std::map<std::string, std::string>& inputs,
                          const std::optional<std::string>& image_ref, uint64_t seed,
                          const MockContext& ctx) {
  switch (kind) {
    case BackendKind::Ocr:
      return require_fixture(ctx, image_ref).ocr;
    case BackendKind::Captioner:
      return require_fixture(ctx, image_ref).caption;
    case BackendKind::QuestionGen: {
      const std::string turn = input_or_empty(inputs, "turn");
      if (turn.empty() || turn == "0") {
        return "What is the overall theme of this meme given the text: '" +
               input_or_empty(inputs, "ocr") + "'?";
      }
      return "Does the element '" + input_or_empty(inputs, "signal") +
             "' target a protected group?";
    }
    case BackendKind::Answerer:
      return answerer_reply(ctx, inputs, seed);
    case BackendKind::Judge:
      return judge_verdict(inputs);
    case BackendKind::VqaScorer: {
      const double score = mock_vqascore(input_or_empty(inputs, "question"),
                                         input_or_empty(inputs, "answer"),
                                         image_ref.value_or(""), seed, ctx);
      return format_double(score, 4);
    }
    case BackendKind::Embedder:
      throw Error(ErrorCode::InvalidArgument, "embedder does not produce text");
  }
  throw Error(ErrorCode::InvalidArgument, "unknown backend kind");
}

double mock_vqascore(const std::string& question, const std::string& answer,
                     const std::string& image_ref, uint64_t seed, const MockContext& ctx) {
  const Fixture& fixture = require_fixture(ctx, image_ref.empty()
                                                    ? std::optional<std::string>{}
                                                    : std::optional<std::string>{image_ref});
  const std::vector<double> qa = mock_embed(question + answer, seed, ctx.embed_dim);
  const std::vector<double> cap = mock_embed(fixture.caption, seed, ctx.embed_dim);
  double dot = 0.0;
  for (size_t i = 0; i < qa.size(); ++i) dot += qa[i] * cap[i];
  return 100.0 * std::max(0.0, dot);
}

}  // namespace sentinel
